//! Bivariate complex scalar fields evaluable with partials up to order two.
//!
//! Three backings: exact polynomials (optionally with exact rational
//! coefficients), closed-form expressions from the normal-form catalog, and
//! pullbacks `y^a x^b u(x y^r)` of a 1-D ODE profile.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jet::{Analytic, Jet2};
use crate::ode::Profile;
use crate::poly::{mono_powers, CPoly, QPoly};
use crate::scalar::{re, Rat, Scalar};

/// Polynomial-backed field; `exact` is present when every coefficient is
/// a known rational.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyField {
    pub numeric: CPoly,
    pub exact: Option<QPoly>,
}

impl PolyField {
    pub fn exact(p: QPoly) -> Self {
        PolyField { numeric: p.to_complex(), exact: Some(p) }
    }
    pub fn numeric(p: CPoly) -> Self {
        PolyField { numeric: p, exact: None }
    }
}

/// Closed-form catalog coefficients that are not polynomial.
#[derive(Debug, Clone, PartialEq)]
pub enum ClosedField {
    /// `(2/√27) x^{3/2} y³ / tan((4/√3) x^{3/2})`
    Form5B,
    /// `-(2/√27) y³ tan(2√3 x + L)`
    Form6B { l: Scalar },
}

/// `ψ(z) = √z·cot(√z)` with its first two z-derivatives. The function is
/// entire in `z` away from the poles `z = (nπ)²`, so no branch is involved.
fn sqrt_cot(z: Scalar) -> (Scalar, Scalar, Scalar) {
    if z.norm() < 1e-3 {
        let z2 = z * z;
        let f = 1.0 - z / 3.0 - z2 / 45.0 - 2.0 * z * z2 / 945.0 - z2 * z2 / 4725.0;
        let f1 = re(-1.0 / 3.0) - 2.0 * z / 45.0 - 6.0 * z2 / 945.0 - 4.0 * z * z2 / 4725.0;
        let f2 = re(-2.0 / 45.0) - 12.0 * z / 945.0 - 12.0 * z2 / 4725.0;
        (f, f1, f2)
    } else {
        let w = z.sqrt();
        let (s, c) = (w.sin(), w.cos());
        let g = w * c / s;
        let g1 = c / s - w / (s * s);
        let g2 = -2.0 / (s * s) + 2.0 * w * c / (s * s * s);
        (g, g1 / (2.0 * w), (g2 - g1 / w) / (4.0 * z))
    }
}

impl ClosedField {
    pub fn eval_jet(&self, x: Scalar, y: Scalar, order: u8) -> Result<Jet2> {
        let yj = Jet2::var_y(y);
        let y3 = yj * yj * yj;
        let jet = match self {
            ClosedField::Form5B => {
                // x^{3/2}/tan((4/√3)x^{3/2}) = (√3/4)·ψ(16x³/3)
                let xj = Jet2::var_x(x);
                let z = (xj * xj * xj).scale(re(16.0 / 3.0));
                let (f0, f1, f2) = sqrt_cot(z.v);
                y3 * z.compose(f0, f1, f2).scale(re(1.0 / 6.0))
            }
            ClosedField::Form6B { l } => {
                let arg = Jet2::var_x(x).scale(re(2.0 * 3f64.sqrt())) + Jet2::constant(*l);
                y3 * arg.tan().scale(re(-2.0 / 27f64.sqrt()))
            }
        };
        if !jet.is_finite_to(order) {
            return Err(Error::NonFinite(format!("{self:?} at ({x}, {y})")));
        }
        Ok(jet.truncate(order))
    }
}

/// Which profile component the field reads and the ansatz exponents:
/// `value(x, y) = y^a · x^b · u_component(x · y^r)`.
#[derive(Debug, Clone)]
pub struct ProfileField {
    pub profile: Arc<Profile>,
    pub component: usize,
    pub a: Rat,
    pub b: Rat,
    pub r: Rat,
}

impl PartialEq for ProfileField {
    fn eq(&self, o: &Self) -> bool {
        Arc::ptr_eq(&self.profile, &o.profile)
            && self.component == o.component
            && self.a == o.a
            && self.b == o.b
            && self.r == o.r
    }
}

fn mono_jet(x: Scalar, y: Scalar, m: Rat, n: Rat, order: u8) -> Result<Jet2> {
    let px = mono_powers(x, m, order, 'x')?;
    let py = mono_powers(y, n, order, 'y')?;
    Ok(Jet2::new(
        px[0] * py[0],
        px[1] * py[0],
        px[0] * py[1],
        px[2] * py[0],
        px[1] * py[1],
        px[0] * py[2],
    ))
}

impl ProfileField {
    pub fn eval_jet(&self, x: Scalar, y: Scalar, order: u8) -> Result<Jet2> {
        let s = mono_jet(x, y, Rat::from_integer(1), self.r, order)?;
        let [u, du, ddu] = self.profile.eval(s.v)?;
        let c = self.component;
        let inner = s.compose(u[c], du[c], ddu[c]);
        let prefactor = mono_jet(x, y, self.b, self.a, order)?;
        Ok((prefactor * inner).truncate(order))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Poly(PolyField),
    Closed(ClosedField),
    Profile(ProfileField),
}

impl Field {
    pub fn zero() -> Self {
        Field::Poly(PolyField::exact(QPoly::default()))
    }
    pub fn one() -> Self {
        Field::Poly(PolyField::exact(QPoly::constant(crate::scalar::q(1, 1))))
    }
    pub fn from_exact(p: QPoly) -> Self {
        Field::Poly(PolyField::exact(p))
    }
    pub fn from_numeric(p: CPoly) -> Self {
        Field::Poly(PolyField::numeric(p))
    }

    /// Zero polynomial, or a profile component that vanishes at every knot.
    pub fn is_identically_zero(&self) -> bool {
        match self {
            Field::Poly(p) => p.numeric.is_zero_poly(),
            Field::Closed(_) => false,
            Field::Profile(p) => p.profile.knots().iter().all(|k| k.u[p.component] == re(0.0)),
        }
    }

    pub fn as_poly(&self) -> Option<&PolyField> {
        match self {
            Field::Poly(p) => Some(p),
            _ => None,
        }
    }

    /// Jet of the field at `(x, y)`; components above `order` are zero.
    pub fn eval_jet(&self, x: Scalar, y: Scalar, order: u8) -> Result<Jet2> {
        if order > 2 {
            return Err(Error::InvalidInput("derivative order is capped at 2".into()));
        }
        let j = match self {
            Field::Poly(p) => p.numeric.eval_jet(x, y, order)?,
            Field::Closed(c) => c.eval_jet(x, y, order)?,
            Field::Profile(p) => p.eval_jet(x, y, order)?,
        };
        if !j.is_finite_to(order) {
            return Err(Error::NonFinite(format!("field at ({x}, {y})")));
        }
        Ok(j)
    }

    pub fn eval(&self, x: Scalar, y: Scalar) -> Result<Scalar> {
        Ok(self.eval_jet(x, y, 0)?.v)
    }
}

/// Second-order jet of a local coordinate change `ȳ = f(x,y)`, `x̄ = g(x,y)`
/// at a source point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffeoJet {
    pub source: (Scalar, Scalar),
    pub f: Jet2,
    pub g: Jet2,
}

impl DiffeoJet {
    pub fn identity(x: Scalar, y: Scalar) -> Self {
        DiffeoJet { source: (x, y), f: Jet2::var_y(y), g: Jet2::var_x(x) }
    }

    /// Target point `(x̄, ȳ)`.
    pub fn target(&self) -> (Scalar, Scalar) {
        (self.g.v, self.f.v)
    }

    pub fn jacobian(&self) -> Scalar {
        self.f.y * self.g.x - self.f.x * self.g.y
    }

    pub fn check(&self) -> Result<()> {
        let j = self.jacobian();
        let scale = self.f.x.norm() + self.f.y.norm() + self.g.x.norm() + self.g.y.norm();
        if j.norm() <= 1e-14 * scale * scale || scale == 0.0 {
            return Err(Error::JacobianSingular);
        }
        Ok(())
    }

    /// Jet of the inverse map at the target point.
    pub fn inverse(&self) -> Result<DiffeoJet> {
        self.check()?;
        // forward map Φ = (g, f) in variables (x, y); D Φ = [[g_x, g_y], [f_x, f_y]]
        let d = [[self.g.x, self.g.y], [self.f.x, self.f.y]];
        let det = d[0][0] * d[1][1] - d[0][1] * d[1][0];
        let inv = [[d[1][1] / det, -d[0][1] / det], [-d[1][0] / det, d[0][0] / det]];
        // second derivatives of Φ components: hess[a][i][j]
        let hess = [
            [[self.g.xx, self.g.xy], [self.g.xy, self.g.yy]],
            [[self.f.xx, self.f.xy], [self.f.xy, self.f.yy]],
        ];
        // Ψ^a_{,bc} = -Ψ^a_{,i} Φ^i_{,jk} Ψ^j_{,b} Ψ^k_{,c}
        let mut second = [[[re(0.0); 2]; 2]; 2];
        for (a, sa) in second.iter_mut().enumerate() {
            for b in 0..2 {
                for c in 0..2 {
                    let mut acc = re(0.0);
                    for i in 0..2 {
                        for j in 0..2 {
                            for k in 0..2 {
                                acc += inv[a][i] * hess[i][j][k] * inv[j][b] * inv[k][c];
                            }
                        }
                    }
                    sa[b][c] = -acc;
                }
            }
        }
        let (tx, ty) = self.target();
        // inverse component 0 is x (the new g), component 1 is y (the new f)
        let g = Jet2::new(self.source.0, inv[0][0], inv[0][1], second[0][0][0], second[0][0][1], second[0][1][1]);
        let f = Jet2::new(self.source.1, inv[1][0], inv[1][1], second[1][0][0], second[1][0][1], second[1][1][1]);
        Ok(DiffeoJet { source: (tx, ty), f, g })
    }

    /// Composition `other ∘ self` (apply `self` first).
    pub fn then(&self, other: &DiffeoJet) -> DiffeoJet {
        // other's components as functions of self's target variables, composed
        // with self's jets via the chain rule for second-order jets.
        let compose = |h: &Jet2| -> Jet2 {
            let u = self.g; // x̄ as a function of (x, y)
            let v = self.f; // ȳ
            Jet2::new(
                h.v,
                h.x * u.x + h.y * v.x,
                h.x * u.y + h.y * v.y,
                h.xx * u.x * u.x + 2.0 * h.xy * u.x * v.x + h.yy * v.x * v.x + h.x * u.xx + h.y * v.xx,
                h.xx * u.x * u.y + h.xy * (u.x * v.y + u.y * v.x) + h.yy * v.x * v.y + h.x * u.xy + h.y * v.xy,
                h.xx * u.y * u.y + 2.0 * h.xy * u.y * v.y + h.yy * v.y * v.y + h.x * u.yy + h.y * v.yy,
            )
        };
        DiffeoJet { source: self.source, f: compose(&other.f), g: compose(&other.g) }
    }
}

/// Jet of the shear `ȳ = y + r·x^k`, `x̄ = x`.
pub fn shear(k: u32, r: Scalar, x: Scalar, y: Scalar) -> Result<DiffeoJet> {
    if k < 1 {
        return Err(Error::InvalidInput("shear exponent must be at least 1".into()));
    }
    let kf = k as f64;
    let xk = |e: i32| if e < 0 { re(0.0) } else { x.powi(e) };
    let f = Jet2::new(
        y + r * xk(k as i32),
        r * kf * xk(k as i32 - 1),
        re(1.0),
        r * kf * (kf - 1.0) * xk(k as i32 - 2),
        re(0.0),
        re(0.0),
    );
    Ok(DiffeoJet { source: (x, y), f, g: Jet2::var_x(x) })
}

/// Principal value of `tan` pole positions `2√3 x + L = π/2 + nπ` inside a
/// real x-interval, used by the parabolic Riccati profile.
pub fn tan_pole_in(l: Scalar, lo: f64, hi: f64) -> Option<f64> {
    if l.im.abs() > 1e-12 {
        return None;
    }
    let c = 2.0 * 3f64.sqrt();
    let n_lo = ((c * lo + l.re - PI / 2.0) / PI).ceil() as i64;
    let x = (PI / 2.0 + n_lo as f64 * PI - l.re) / c;
    (x <= hi).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn form6_coefficient_at_pi_over_4() {
        let b = ClosedField::Form6B { l: re(PI / 4.0) };
        let v = b.eval_jet(re(0.0), re(1.0), 0).unwrap().v;
        assert!((v - re(-0.384_900_179_459_750_5)).norm() < 1e-12);
    }

    #[test]
    fn form5_coefficient_regular_at_axis() {
        let b = ClosedField::Form5B;
        let v = b.eval_jet(re(0.0), re(1.0), 2).unwrap();
        assert!((v.v - re(1.0 / 6.0)).norm() < 1e-15);
        assert_eq!(v.xx, re(0.0));
        // matches the direct formula slightly off the axis, both sides of the series switch
        for x in [1e-3f64, 0.05, 0.0595, 0.06, 0.3, 0.9] {
            let u = x.powf(1.5);
            let w = 4.0 / 3f64.sqrt() * u;
            let direct = 2.0 / 27f64.sqrt() * u / w.tan();
            let j = b.eval_jet(re(x), re(1.0), 2).unwrap();
            assert!((j.v.re - direct).abs() < 1e-13, "x = {x}");
        }
    }

    #[test]
    fn form5_coefficient_derivatives_match_finite_differences() {
        let b = ClosedField::Form5B;
        let h = 1e-4;
        for x in [0.06f64, 0.0595, 0.3, -0.4] {
            let y = 0.7;
            let f = |x: f64, y: f64| b.eval_jet(re(x), re(y), 0).unwrap().v;
            let j = b.eval_jet(re(x), re(y), 2).unwrap();
            let fx = (f(x + h, y) - f(x - h, y)) / (2.0 * h);
            let fxx = (f(x + h, y) - 2.0 * f(x, y) + f(x - h, y)) / (h * h);
            let fxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4.0 * h * h);
            assert!((j.x - fx).norm() < 1e-8, "x = {x}");
            assert!((j.xx - fxx).norm() < 1e-5, "x = {x}");
            assert!((j.xy - fxy).norm() < 1e-6, "x = {x}");
        }
    }

    #[test]
    fn shear_examples() {
        let id = shear(2, re(0.0), re(0.7), re(-0.2)).unwrap();
        assert_eq!(id, DiffeoJet::identity(re(0.7), re(-0.2)));
        let s = shear(2, re(-1.0 / 12.0), re(1.0), re(1.0)).unwrap();
        assert!((s.f.v - re(11.0 / 12.0)).norm() < 1e-15);
        assert!((s.f.x - re(-1.0 / 6.0)).norm() < 1e-15);
        assert_eq!(s.f.y, re(1.0));
        let s3 = shear(3, re(-1.0 / 9.0), re(1.0), re(0.0)).unwrap();
        assert!((s3.f.v - re(-1.0 / 9.0)).norm() < 1e-15);
        assert!((s3.f.x - re(-1.0 / 3.0)).norm() < 1e-15);
    }

    #[test]
    fn shear_and_inverse_shear_compose_to_identity() {
        for k in 1..4u32 {
            let (x, y) = (re(0.8), re(-0.3));
            let fwd = shear(k, re(0.37), x, y).unwrap();
            let (tx, ty) = fwd.target();
            let back = shear(k, re(-0.37), tx, ty).unwrap();
            let comp = fwd.then(&back);
            let id = DiffeoJet::identity(x, y);
            for (a, b) in [(comp.f, id.f), (comp.g, id.g)] {
                for (p, q) in [(a.v, b.v), (a.x, b.x), (a.y, b.y), (a.xx, b.xx), (a.xy, b.xy), (a.yy, b.yy)] {
                    assert!((p - q).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn inverse_jet_composes_to_identity() {
        let j = DiffeoJet {
            source: (re(0.4), re(0.9)),
            f: Jet2::new(re(1.1), re(0.3), re(1.2), re(0.5), re(-0.2), re(0.7)),
            g: Jet2::new(re(-0.5), re(0.9), re(0.1), re(-0.4), re(0.6), re(0.05)),
        };
        let comp = j.then(&j.inverse().unwrap());
        let id = DiffeoJet::identity(re(0.4), re(0.9));
        for (a, b) in [(comp.f, id.f), (comp.g, id.g)] {
            for (p, q) in [(a.v, b.v), (a.x, b.x), (a.y, b.y), (a.xx, b.xx), (a.xy, b.xy), (a.yy, b.yy)] {
                assert!((p - q).norm() < 1e-12, "{p} vs {q}");
            }
        }
    }
}
