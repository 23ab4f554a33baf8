//! Chern connection of a cubic web: `γ = (γ1 dx + γ2 dy)/(−D)`, its
//! curvature, the integrating factor `K` and the transformation rule.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::DiffeoJet;
use crate::jet::Jet1;
use crate::poly::{Poly, QPoly};
use crate::scalar::{re, Coeff, Ring, Scalar};
use crate::web::{discriminant, on_discriminant, track_roots, CubicWeb};

/// `γ = g1 dx + g2 dy` at a point, with the discriminant there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConnectionData {
    pub g1: Scalar,
    pub g2: Scalar,
    pub d: Scalar,
}

/// Sign convention for the integrating factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum KConvention {
    /// `dK/K = γ`
    #[default]
    DkOverKEqualsGamma,
    /// `dk = −γ k`
    DkEqualsMinusGammaK,
}

/// Numerators `γ1`, `γ2` and the discriminant `D` from `S, A, B` and their
/// first partials.
pub fn gamma_parts<R: Ring>(sab: &[R; 3], dx: &[R; 3], dy: &[R; 3]) -> (R, R, R) {
    let [s, a, b] = sab.clone();
    let [sx, ax, bx] = dx.clone();
    let [sy, ay, by] = dy.clone();
    let n = |k: i64| R::from_int(k);
    let s2 = s.clone() * s.clone();
    let a2 = a.clone() * a.clone();
    let sa = s.clone() * a.clone();
    let sb = s.clone() * b.clone();
    let g1 = (n(4) * b.clone() * s2.clone() - n(3) * a.clone() * b.clone() - s.clone() * a2.clone()) * sx.clone()
        + b.clone() * (sa.clone() - n(9) * b.clone()) * sy.clone()
        + (n(2) * a2.clone() - n(6) * sb.clone()) * ax.clone()
        + n(2) * b.clone() * (n(3) * a.clone() - s2.clone()) * ay.clone()
        + (n(9) * b.clone() - sa.clone()) * bx.clone()
        + (a.clone() * s2.clone() - n(4) * a2.clone() + n(3) * sb.clone()) * by.clone();
    let g2 = (n(6) * sb.clone() - n(2) * a2.clone()) * sx
        - n(2) * b.clone() * (n(3) * a.clone() - s2.clone()) * sy
        + (sa.clone() - n(9) * b.clone()) * ax
        + (n(4) * a2 - a.clone() * s2.clone() - n(3) * sb) * ay
        + (n(6) * a.clone() - n(2) * s2.clone()) * bx
        + (n(2) * s2 * s.clone() + n(18) * b.clone() - n(8) * sa) * by;
    (g1, g2, discriminant(&s, &a, &b))
}

fn check_discriminant(sab: [Scalar; 3], d: Scalar) -> Result<()> {
    if on_discriminant(sab[0], sab[1], sab[2], d) {
        return Err(Error::OnDiscriminant(d.norm()));
    }
    Ok(())
}

/// Connection from first-order jets of `S, A, B`.
pub fn gamma_from_sab(sab: &[Jet1; 3]) -> Result<ConnectionData> {
    let v = sab.map(|j| j.v);
    let (g1, g2, d) = gamma_parts(&v, &sab.map(|j| j.x), &sab.map(|j| j.y));
    check_discriminant(v, d)?;
    Ok(ConnectionData { g1: -g1 / d, g2: -g2 / d, d })
}

pub fn gamma_at(web: &CubicWeb, x: Scalar, y: Scalar) -> Result<ConnectionData> {
    let sab = web.sab_jets(x, y, 1)?.map(|j| j.to_jet1());
    gamma_from_sab(&sab)
}

/// Numerator `N` and denominator `D` of the curvature `N/D²` for a monic
/// polynomial web, as exact polynomials.
pub fn curvature_rational<C: Coeff>(sab: &[Poly<C>; 3]) -> (Poly<C>, Poly<C>) {
    let dx = [sab[0].diff_x(), sab[1].diff_x(), sab[2].diff_x()];
    let dy = [sab[0].diff_y(), sab[1].diff_y(), sab[2].diff_y()];
    let (g1, g2, d) = gamma_parts(sab, &dx, &dy);
    // ∂x(γ2/−D) − ∂y(γ1/−D) = (−γ2_x D + γ2 D_x + γ1_y D − γ1 D_y)/D²
    let num = g2.clone() * d.diff_x() - g2.diff_x() * d.clone() + g1.diff_y() * d.clone() - g1 * d.diff_y();
    (num, d)
}

/// `Some(true)` when the curvature numerator vanishes identically over the
/// rationals; `None` when the web has no exact polynomial coefficients.
pub fn is_flat_exact(web: &CubicWeb) -> Option<bool> {
    web.exact_sab().map(|sab| curvature_rational::<crate::scalar::Q>(&sab).0.is_zero_poly())
}

/// `c` with `dγ = c dx∧dy`. Exact rational differentiation for polynomial
/// webs, forward-mode jets otherwise.
pub fn curvature_at(web: &CubicWeb, x: Scalar, y: Scalar) -> Result<Scalar> {
    if let Some(sab) = web.exact_sab() {
        let (num, d) = curvature_rational::<crate::scalar::Q>(&sab);
        let dv = d.eval(x, y)?;
        let sv = web.sab_at(x, y)?;
        check_discriminant(sv, dv)?;
        if num.is_zero_poly() {
            return Ok(re(0.0));
        }
        return Ok(num.eval(x, y)? / (dv * dv));
    }
    let j = web.sab_jets(x, y, 2)?;
    let sab = j.map(|f| f.to_jet1());
    let dx = j.map(|f| f.dx_jet1());
    let dy = j.map(|f| f.dy_jet1());
    let (g1, g2, d) = gamma_parts(&sab, &dx, &dy);
    check_discriminant(sab.map(|f| f.v), d.v)?;
    let c1 = -g1 / d;
    let c2 = -g2 / d;
    Ok(c2.x - c1.y)
}

/// Curvature from Richardson-extrapolated central differences of `γ`.
pub fn curvature_fd(web: &CubicWeb, x: Scalar, y: Scalar, h: f64) -> Result<Scalar> {
    let est = |h: f64| -> Result<Scalar> {
        let dg2 = (gamma_at(web, x + h, y)?.g2 - gamma_at(web, x - h, y)?.g2) / (2.0 * h);
        let dg1 = (gamma_at(web, x, y + h)?.g1 - gamma_at(web, x, y - h)?.g1) / (2.0 * h);
        Ok(dg2 - dg1)
    };
    let (a, b) = (est(h)?, est(h / 2.0)?);
    Ok((4.0 * b - a) / 3.0)
}

fn romberg<F: Fn(f64) -> Result<Scalar>>(f: F, rtol: f64) -> Result<Scalar> {
    let mut rows: Vec<Vec<Scalar>> = vec![vec![(f(0.0)? + f(1.0)?) * 0.5]];
    for level in 1..18 {
        let n = 1usize << (level - 1);
        let h = 1.0 / (2 * n) as f64;
        let mut mid = re(0.0);
        for i in 0..n {
            mid += f((2 * i + 1) as f64 * h)?;
        }
        let mut row = vec![rows[level - 1][0] * 0.5 + mid * h];
        for k in 1..=level {
            let p = 4f64.powi(k as i32);
            let v = (p * row[k - 1] - rows[level - 1][k - 1]) / (p - 1.0);
            row.push(v);
        }
        let best = row[level];
        let prev = rows[level - 1][level - 1];
        rows.push(row);
        if level >= 4 && (best - prev).norm() <= rtol * best.norm().max(1e-3) {
            return Ok(best);
        }
    }
    Ok(rows.last().map(|r| *r.last().unwrap()).unwrap_or_default())
}

/// `∫ γ` along a polyline.
pub fn integrate_gamma(web: &CubicWeb, path: &[(Scalar, Scalar)]) -> Result<Scalar> {
    if path.len() < 2 {
        return Ok(re(0.0));
    }
    let mut total = re(0.0);
    for seg in path.windows(2) {
        let ((x0, y0), (x1, y1)) = (seg[0], seg[1]);
        let (dx, dy) = (x1 - x0, y1 - y0);
        let integrand = |t: f64| -> Result<Scalar> {
            let c = gamma_at(web, x0 + dx * t, y0 + dy * t).map_err(|e| match e {
                Error::OnDiscriminant(_) => Error::PathCrossesDiscriminant,
                other => other,
            })?;
            Ok(c.g1 * dx + c.g2 * dy)
        };
        total += romberg(integrand, 1e-12)?;
    }
    Ok(total)
}

/// `K` at the end of the path given `K` at its start. The curvature is
/// probed at vertices and segment midpoints.
pub fn integrating_factor(web: &CubicWeb, path: &[(Scalar, Scalar)], k_start: Scalar, convention: KConvention) -> Result<Scalar> {
    for seg in path.windows(2) {
        for (x, y) in [seg[0], ((seg[0].0 + seg[1].0) * 0.5, (seg[0].1 + seg[1].1) * 0.5)] {
            let c = curvature_at(web, x, y).map_err(|e| match e {
                Error::OnDiscriminant(_) => Error::PathCrossesDiscriminant,
                other => other,
            })?;
            if c.norm() > 1e-6 {
                return Err(Error::NotFlat(c.norm()));
            }
        }
    }
    let int = integrate_gamma(web, path)?;
    Ok(match convention {
        KConvention::DkOverKEqualsGamma => k_start * int.exp(),
        KConvention::DkEqualsMinusGammaK => k_start * (-int).exp(),
    })
}

/// Connection in the coordinates `ȳ = f`, `x̄ = g` at the image point:
/// `γ̄ = γ + d ln(J²/Q)` with `J = f_y g_x − f_x g_y` and
/// `Q = g_x³ − S g_x² g_y + A g_x g_y² − B g_y³`.
pub fn gamma_pullback(web: &CubicWeb, jet: &DiffeoJet, gamma: &ConnectionData) -> Result<ConnectionData> {
    let inv = jet.inverse()?;
    let (x, y) = jet.source;
    let [s, a, b] = web.sab_jets(x, y, 1)?.map(|j| j.to_jet1());
    let (fx, fy) = (jet.f.dx_jet1(), jet.f.dy_jet1());
    let (gx, gy) = (jet.g.dx_jet1(), jet.g.dy_jet1());
    let j = fy * gx - fx * gy;
    let q = gx * gx * gx - s * gx * gx * gy + a * gx * gy * gy - b * gy * gy * gy;
    if q.v.norm() <= 1e-14 * (1.0 + gx.v.norm() + gy.v.norm()).powi(3) {
        return Err(Error::DenominatorZero("g_x³ − S g_x² g_y + A g_x g_y² − B g_y³".into()));
    }
    let wx = gamma.g1 + 2.0 * j.x / j.v - q.x / q.v;
    let wy = gamma.g2 + 2.0 * j.y / j.v - q.y / q.v;
    let pushed = web.pushforward(jet)?;
    let [ps, pa, pb] = pushed.sab()?.map(|c| c.v);
    Ok(ConnectionData {
        g1: wx * inv.g.x + wy * inv.f.x,
        g2: wx * inv.g.y + wy * inv.f.y,
        d: discriminant(&ps, &pa, &pb),
    })
}

/// Normalized web forms `σ_i = (p_j − p_k)(dy − p_i dx)` as
/// `[dx, dy]` components, `Ω` (coefficient of `dy∧dx`), finite-difference
/// `h_i` with `dσ_i = h_i Ω`, and the three pairings defining `γ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WebForms {
    pub sigma: [[Scalar; 2]; 3],
    pub omega: Scalar,
    pub h: [Scalar; 3],
    pub pairings: [[Scalar; 2]; 3],
}

fn sigma_of(p: [Scalar; 3]) -> [[Scalar; 2]; 3] {
    let mut out = [[re(0.0); 2]; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let c = p[j] - p[k];
        out[i] = [-c * p[i], c];
    }
    out
}

pub fn web_forms_at(web: &CubicWeb, x: Scalar, y: Scalar, h: f64) -> Result<WebForms> {
    let center = web.roots_at(x, y)?;
    let d = web.discriminant_at(x, y)?;
    let sab = web.sab_at(x, y)?;
    check_discriminant(sab, d)?;
    let p = center.roots;
    let sigma = sigma_of(p);
    let omega = (p[0] - p[1]) * (p[1] - p[2]) * (p[2] - p[0]);
    let at = |dx: f64, dy: f64| -> Result<[[Scalar; 2]; 3]> {
        let r = web.roots_at(x + dx, y + dy)?;
        Ok(sigma_of(track_roots(&p, &r.roots)))
    };
    let (xp, xm, yp, ym) = (at(h, 0.0)?, at(-h, 0.0)?, at(0.0, h)?, at(0.0, -h)?);
    let mut hs = [re(0.0); 3];
    for i in 0..3 {
        // dσ = (∂x σ_y − ∂y σ_x) dx∧dy = −(∂x σ_y − ∂y σ_x) dy∧dx
        let curl = (xp[i][1] - xm[i][1]) / (2.0 * h) - (yp[i][0] - ym[i][0]) / (2.0 * h);
        hs[i] = -curl / omega;
    }
    let pair = |a: usize, b: usize| -> [Scalar; 2] {
        // h_b σ_a − h_a σ_b
        [hs[b] * sigma[a][0] - hs[a] * sigma[b][0], hs[b] * sigma[a][1] - hs[a] * sigma[b][1]]
    };
    Ok(WebForms { sigma, omega, h: hs, pairings: [pair(0, 1), pair(1, 2), pair(2, 0)] })
}

/// Exact `γ1`, `γ2` numerators for a monic rational polynomial web.
pub fn gamma_numerators_exact(sab: &[QPoly; 3]) -> (QPoly, QPoly, QPoly) {
    let dx = [sab[0].diff_x(), sab[1].diff_x(), sab[2].diff_x()];
    let dy = [sab[0].diff_y(), sab[1].diff_y(), sab[2].diff_y()];
    gamma_parts(sab, &dx, &dy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{shear, Field};
    use crate::jet::Jet2;
    use crate::poly::Poly;
    use crate::scalar::{q, Rat};
    use crate::web::{catalog, NormalForm};
    use std::f64::consts::PI;

    fn exact_web(b: &[(i64, i64, i128)]) -> CubicWeb {
        let bp = Poly::from_terms(b.iter().map(|&(m, n, c)| (Rat::from_integer(m), Rat::from_integer(n), q(c, 1))));
        CubicWeb::from_exact_sab([QPoly::zero(), QPoly::zero(), bp], None, (re(0.0), re(0.0)), "test")
    }

    #[test]
    fn gamma_vanishes_for_form2() {
        let w = catalog(&NormalForm::Form2);
        let c = gamma_at(&w, re(1.0), re(1.0)).unwrap();
        assert_eq!((c.g1, c.g2), (re(0.0), re(0.0)));
        let (g1, g2, _) = gamma_numerators_exact(&w.exact_sab().unwrap());
        assert!(g1.is_zero_poly() && g2.is_zero_poly());
    }

    #[test]
    fn gamma_of_form6() {
        let w = catalog(&NormalForm::Form6 { l: re(PI / 4.0) });
        let c = gamma_at(&w, re(0.0), re(1.0)).unwrap();
        assert!((c.g1 - re(2.0 / 3f64.sqrt())).norm() < 1e-12);
        assert!(c.g2.norm() < 1e-12);
    }

    #[test]
    fn constant_web_has_zero_gamma() {
        let w = CubicWeb::monic(
            Field::from_exact(QPoly::constant(q(1, 1))),
            Field::from_exact(QPoly::constant(q(-2, 1))),
            Field::from_exact(QPoly::constant(q(-1, 3))),
            None,
            (re(0.0), re(0.0)),
            "const",
        );
        let c = gamma_at(&w, re(0.4), re(0.1)).unwrap();
        assert_eq!((c.g1, c.g2), (re(0.0), re(0.0)));
    }

    #[test]
    fn curvature_examples() {
        let w = exact_web(&[(1, 0, 1), (0, 2, 1)]);
        let c = curvature_at(&w, re(1.0), re(1.0)).unwrap();
        assert!((c - re(-1.0 / 6.0)).norm() < 1e-15);
        let w = exact_web(&[(1, 0, 1)]);
        assert_eq!(curvature_at(&w, re(1.0), re(1.0)).unwrap(), re(0.0));
        assert_eq!(is_flat_exact(&w), Some(true));
        // jet and difference routes agree on a curved web
        let w = exact_web(&[(1, 0, 1), (0, 2, 1)]);
        let fd = curvature_fd(&w, re(1.0), re(1.0), 1e-3).unwrap();
        assert!((fd - re(-1.0 / 6.0)).norm() < 1e-8);
    }

    #[test]
    fn curvature_of_closed_forms_vanishes() {
        for form in [NormalForm::Form5, NormalForm::Form6 { l: re(0.4) }, NormalForm::Form1 { m0: 3 }] {
            let w = catalog(&form);
            let c = curvature_at(&w, re(0.3), re(0.7)).unwrap();
            assert!(c.norm() < 1e-10, "{form:?}: {c}");
        }
    }

    #[test]
    fn integrating_factor_examples() {
        let w = catalog(&NormalForm::Form2);
        let path = [(re(1.0), re(1.0)), (re(1.5), re(0.5)), (re(0.8), re(-0.7))];
        let k = integrating_factor(&w, &path, re(-1.0), KConvention::default()).unwrap();
        assert_eq!(k, re(-1.0));

        let l = 0.3;
        let w6 = catalog(&NormalForm::Form6 { l: re(l) });
        let x1 = 0.2;
        let k0 = re(l.cos().powf(-1.0 / 3.0));
        let k = integrating_factor(&w6, &[(re(0.0), re(1.0)), (re(x1), re(1.0))], k0, KConvention::default()).unwrap();
        let want = (2.0 * 3f64.sqrt() * x1 + l).cos().powf(-1.0 / 3.0);
        assert!((k - re(want)).norm() < 1e-10);

        let lp = [(re(0.0), re(1.0)), (re(0.2), re(1.0)), (re(0.2), re(0.6)), (re(-0.1), re(0.7)), (re(0.0), re(1.0))];
        let k = integrating_factor(&w6, &lp, re(1.0), KConvention::default()).unwrap();
        assert!((k - re(1.0)).norm() < 1e-9);

        let curved = exact_web(&[(1, 0, 1), (0, 2, 1)]);
        let r = integrating_factor(&curved, &[(re(1.0), re(1.0)), (re(1.2), re(1.0))], re(1.0), KConvention::default());
        assert!(matches!(r, Err(Error::NotFlat(_))));
    }

    #[test]
    fn pullback_matches_pushed_web() {
        let w = catalog(&NormalForm::Form3);
        let (x, y) = (re(1.0), re(1.0));
        let jet = shear(2, re(-1.0 / 12.0), x, y).unwrap();
        let g = gamma_at(&w, x, y).unwrap();
        let pulled = gamma_pullback(&w, &jet, &g).unwrap();
        let direct = gamma_from_sab(&w.pushforward(&jet).unwrap().sab().unwrap()).unwrap();
        assert!((pulled.g1 - direct.g1).norm() < 1e-8);
        assert!((pulled.g2 - direct.g2).norm() < 1e-8);
        let sheared = w.pushforward_shear(2, q(-1, 12)).unwrap();
        let (tx, ty) = jet.target();
        let global = gamma_at(&sheared, tx, ty).unwrap();
        assert!((pulled.g1 - global.g1).norm() < 1e-8 && (pulled.g2 - global.g2).norm() < 1e-8);

        // generic jet on a web with nonzero γ
        let w6 = catalog(&NormalForm::Form6 { l: re(0.2) });
        let jet = DiffeoJet {
            source: (re(0.3), re(0.8)),
            f: Jet2::new(re(0.9), re(0.2), re(1.1), re(0.3), re(-0.1), re(0.2)),
            g: Jet2::new(re(0.4), re(1.3), re(0.1), re(0.0), re(0.05), re(0.1)),
        };
        let g = gamma_at(&w6, re(0.3), re(0.8)).unwrap();
        let pulled = gamma_pullback(&w6, &jet, &g).unwrap();
        let direct = gamma_from_sab(&w6.pushforward(&jet).unwrap().sab().unwrap()).unwrap();
        assert!((pulled.g1 - direct.g1).norm() < 1e-8, "{} vs {}", pulled.g1, direct.g1);
        assert!((pulled.g2 - direct.g2).norm() < 1e-8, "{} vs {}", pulled.g2, direct.g2);
    }

    #[test]
    fn scaling_of_constant_web_keeps_gamma_zero() {
        let w = CubicWeb::monic(
            Field::from_exact(QPoly::constant(q(1, 1))),
            Field::from_exact(QPoly::constant(q(-2, 1))),
            Field::from_exact(QPoly::constant(q(-1, 3))),
            None,
            (re(0.0), re(0.0)),
            "const",
        );
        let jet = DiffeoJet {
            source: (re(0.5), re(0.5)),
            f: Jet2::new(re(1.5), re(0.0), re(3.0), re(0.0), re(0.0), re(0.0)),
            g: Jet2::new(re(1.0), re(2.0), re(0.0), re(0.0), re(0.0), re(0.0)),
        };
        let g = gamma_at(&w, re(0.5), re(0.5)).unwrap();
        let p = gamma_pullback(&w, &jet, &g).unwrap();
        assert!(p.g1.norm() < 1e-15 && p.g2.norm() < 1e-15);
    }

    #[test]
    fn web_forms_reproduce_gamma() {
        let w = catalog(&NormalForm::Form2);
        let f = web_forms_at(&w, re(1.0), re(1.0), 1e-4).unwrap();
        for k in 0..2 {
            assert!((f.sigma[0][k] + f.sigma[1][k] + f.sigma[2][k]).norm() < 1e-15);
        }
        let w6 = catalog(&NormalForm::Form6 { l: re(PI / 4.0) });
        let f = web_forms_at(&w6, re(0.0), re(1.0), 1e-4).unwrap();
        let g = gamma_at(&w6, re(0.0), re(1.0)).unwrap();
        for p in f.pairings {
            assert!((p[0] - g.g1).norm() < 1e-6, "{} vs {}", p[0], g.g1);
            assert!((p[1] - g.g2).norm() < 1e-6);
        }
    }

    #[test]
    fn omega_of_unit_roots() {
        let p = [re(-1.0), re(0.0), re(1.0)];
        let omega = (p[0] - p[1]) * (p[1] - p[2]) * (p[2] - p[0]);
        assert_eq!(omega, re(2.0));
    }
}
