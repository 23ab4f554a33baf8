//! Binary cubic ODEs `K3 dy³ + K2 dy²dx + K1 dy dx² + K0 dx³ = 0` and the
//! normal-form catalog.

use std::f64::consts::PI;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ClosedField, DiffeoJet, Field};
use crate::jet::{Jet1, Jet2};
use crate::poly::{CPoly, Poly, QPoly};
use crate::scalar::{lex_cmp, q, re, Coeff, Q, Rat, Ring, Scalar};

/// Coefficients below this (relative to 1) count as zero when deciding
/// whether a cubic degenerates at a point.
pub const DEGENERATE_TOL: f64 = 1e-14;
/// Root clustering tolerance, relative to the coefficient scale.
pub const CLUSTER_TOL: f64 = 1e-8;
/// `|D|` below this times `scale⁶` is treated as on the discriminant.
pub const DISCRIMINANT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CubicWeb {
    /// `[K3, K2, K1, K0]`
    pub coeffs: [Field; 4],
    pub weights: Option<(Rat, Rat)>,
    pub base_point: (Scalar, Scalar),
    pub name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootTriple {
    pub roots: [Scalar; 3],
    pub partition: Vec<u8>,
}

/// Coefficient jets of a transformed cubic at the image point, with
/// derivatives taken in the new coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pushed {
    pub point: (Scalar, Scalar),
    pub coeffs: [Jet1; 4],
}

impl Pushed {
    pub fn values(&self) -> [Scalar; 4] {
        self.coeffs.map(|c| c.v)
    }

    pub fn sab(&self) -> Result<[Jet1; 3]> {
        let k = self.coeffs;
        if k[0].v.norm() <= DEGENERATE_TOL * (1.0 + self.values().iter().map(|c| c.norm()).fold(0.0, f64::max)) {
            return Err(Error::NotMonicAtPoint);
        }
        Ok([k[1] / k[0], k[2] / k[0], k[3] / k[0]])
    }

    pub fn roots(&self) -> Result<RootTriple> {
        let [s, a, b] = self.sab()?;
        Ok(roots_of_monic(s.v, a.v, b.v))
    }
}

/// Normal forms with closed-form coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "lowercase")]
pub enum NormalForm {
    Form1 { m0: u32 },
    Form2,
    Form3,
    Form4,
    Form5,
    Form6 { l: Scalar },
}

impl NormalForm {
    /// Parse `"form1"`..`"form6"`; `m0` and `l` default to 0 and π/4.
    pub fn parse(name: &str, m0: Option<u32>, l: Option<Scalar>) -> Result<NormalForm> {
        let raw = name;
        let name = name.trim().to_ascii_lowercase();
        let name = name.trim_start_matches("form").trim_start_matches(' ');
        Ok(match name {
            "1" => NormalForm::Form1 { m0: m0.unwrap_or(0) },
            "2" => NormalForm::Form2,
            "3" => NormalForm::Form3,
            "4" => NormalForm::Form4,
            "5" => NormalForm::Form5,
            "6" => NormalForm::Form6 { l: l.unwrap_or(re(PI / 4.0)) },
            "7" | "8" => return Err(Error::UnsupportedForm(raw.to_string())),
            _ => return Err(Error::UnknownForm(raw.to_string())),
        })
    }

    pub fn label(&self) -> String {
        match self {
            NormalForm::Form1 { m0 } => format!("form1(m0={m0})"),
            NormalForm::Form2 => "form2".into(),
            NormalForm::Form3 => "form3".into(),
            NormalForm::Form4 => "form4".into(),
            NormalForm::Form5 => "form5".into(),
            NormalForm::Form6 { l } => format!("form6(L={})", fmt_scalar(*l)),
        }
    }
}

fn fmt_scalar(z: Scalar) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

fn qp(terms: &[(i64, i64, Q)]) -> QPoly {
    Poly::from_terms(terms.iter().map(|&(m, n, c)| (Rat::from_integer(m), Rat::from_integer(n), c)))
}

/// Web of a normal form, based at the origin.
pub fn catalog(form: &NormalForm) -> CubicWeb {
    let int = |n: i64| Rat::from_integer(n);
    let origin = (re(0.0), re(0.0));
    let (s, a, b, weights): (Field, Field, Field, (Rat, Rat)) = match *form {
        NormalForm::Form1 { m0 } => {
            let coeffs = [
                Field::from_exact(qp(&[(0, m0 as i64, q(1, 1))])),
                Field::zero(),
                Field::from_exact(qp(&[(0, 0, q(-1, 1))])),
                Field::zero(),
            ];
            return CubicWeb {
                coeffs,
                weights: Some((int(2 + m0 as i64), int(2))),
                base_point: origin,
                name: form.label(),
            };
        }
        NormalForm::Form2 => (
            Field::zero(),
            Field::from_exact(qp(&[(1, 0, q(2, 1))])),
            Field::from_exact(qp(&[(0, 1, q(1, 1))])),
            (int(2), int(3)),
        ),
        NormalForm::Form3 => (
            Field::zero(),
            Field::from_exact(qp(&[(0, 1, q(1, 1)), (2, 0, q(-2, 3))])),
            Field::from_exact(qp(&[(1, 1, q(-2, 3)), (3, 0, q(4, 27))])),
            (int(1), int(2)),
        ),
        NormalForm::Form4 => (
            Field::zero(),
            Field::from_exact(qp(&[(1, 1, q(4, 1)), (4, 0, q(-16, 9))])),
            Field::from_exact(qp(&[(0, 2, q(1, 1)), (6, 0, q(64, 81)), (3, 1, q(-32, 9))])),
            (int(1), int(3)),
        ),
        NormalForm::Form5 => (
            Field::zero(),
            Field::from_exact(qp(&[(1, 2, q(1, 1))])),
            Field::Closed(ClosedField::Form5B),
            (int(0), int(1)),
        ),
        NormalForm::Form6 { l } => (
            Field::zero(),
            Field::from_exact(qp(&[(0, 2, q(1, 1))])),
            Field::Closed(ClosedField::Form6B { l }),
            (int(0), int(1)),
        ),
    };
    CubicWeb::monic(s, a, b, Some(weights), origin, form.label())
}

/// Discriminant of `p³ + S p² + A p + B`.
pub fn discriminant<R: Ring>(s: &R, a: &R, b: &R) -> R {
    let (s, a, b) = (s.clone(), a.clone(), b.clone());
    R::from_int(18) * s.clone() * a.clone() * b.clone() + s.clone() * s.clone() * a.clone() * a.clone()
        - R::from_int(4) * a.pow(3)
        - R::from_int(27) * b.clone() * b.clone()
        - R::from_int(4) * b * s.pow(3)
}

/// Size of the monic coefficients in root units.
pub fn root_scale(s: Scalar, a: Scalar, b: Scalar) -> f64 {
    1f64.max(s.norm()).max(a.norm().sqrt()).max(b.norm().cbrt())
}

/// `|D|` small against the sixth power of the root size; invariant under
/// `p → λp`, so regular points close to a singular point stay regular.
pub fn on_discriminant(s: Scalar, a: Scalar, b: Scalar, d: Scalar) -> bool {
    let size = s.norm().max(a.norm().sqrt()).max(b.norm().cbrt());
    d.norm() <= DISCRIMINANT_TOL * size.powi(6)
}

fn cbrt_c(z: Scalar) -> Scalar {
    if z == re(0.0) {
        z
    } else {
        z.powf(1.0 / 3.0)
    }
}

fn cubic_residual(s: Scalar, a: Scalar, b: Scalar, p: Scalar) -> Scalar {
    ((p + s) * p + a) * p + b
}

fn newton_polish(s: Scalar, a: Scalar, b: Scalar, mut p: Scalar) -> Scalar {
    for _ in 0..3 {
        let f = cubic_residual(s, a, b, p);
        let df = (3.0 * p + 2.0 * s) * p + a;
        if df.norm() == 0.0 {
            break;
        }
        let next = p - f / df;
        if cubic_residual(s, a, b, next).norm() < f.norm() {
            p = next;
        } else {
            break;
        }
    }
    p
}

fn cardano(s: Scalar, a: Scalar, b: Scalar) -> [Scalar; 3] {
    // t = p + S/3: t³ + P t + R = 0
    let sh = s / 3.0;
    let pp = a - s * sh;
    let rr = 2.0 * sh * sh * sh - sh * a + b;
    let disc = (rr / 2.0) * (rr / 2.0) + (pp / 3.0) * (pp / 3.0) * (pp / 3.0);
    let sq = disc.sqrt();
    let c1 = -rr / 2.0 + sq;
    let c2 = -rr / 2.0 - sq;
    let c = if c1.norm() >= c2.norm() { c1 } else { c2 };
    let u = cbrt_c(c);
    let t = if u == re(0.0) { re(0.0) } else { u - pp / (3.0 * u) };
    let p1 = newton_polish(s, a, b, t - sh);
    // deflate: p² + (S + p1) p + (A + p1 (S + p1))
    let bq = s + p1;
    let cq = a + p1 * bq;
    let dq = (bq * bq - 4.0 * cq).sqrt();
    let q1 = if (-bq + dq).norm() >= (-bq - dq).norm() { (-bq + dq) / 2.0 } else { (-bq - dq) / 2.0 };
    let q2 = if q1 == re(0.0) { -bq - q1 } else { cq / q1 };
    [p1, newton_polish(s, a, b, q1), newton_polish(s, a, b, q2)]
}

fn companion(s: Scalar, a: Scalar, b: Scalar) -> [Scalar; 3] {
    let zero = re(0.0);
    let one = re(1.0);
    let m = Matrix3::new(-s, -a, -b, one, zero, zero, zero, one, zero);
    let t = nalgebra::Schur::new(m).unpack().1;
    [0, 1, 2].map(|i| newton_polish(s, a, b, t[(i, i)]))
}

fn residual_ok(s: Scalar, a: Scalar, b: Scalar, roots: &[Scalar; 3]) -> bool {
    let scale = root_scale(s, a, b);
    let vieta = [
        roots[0] + roots[1] + roots[2] + s,
        roots[0] * roots[1] + roots[1] * roots[2] + roots[2] * roots[0] - a,
        roots[0] * roots[1] * roots[2] + b,
    ];
    vieta.iter().zip(1..).all(|(v, k)| v.norm() <= 1e-9 * scale.powi(k)) && roots.iter().all(|r| r.re.is_finite() && r.im.is_finite())
}

/// Roots of `p³ + S p² + A p + B` (unsorted): Cardano with a companion
/// matrix fallback.
pub fn solve_monic_cubic(s: Scalar, a: Scalar, b: Scalar) -> [Scalar; 3] {
    let r = cardano(s, a, b);
    if residual_ok(s, a, b, &r) {
        r
    } else {
        companion(s, a, b)
    }
}

/// Roots sorted lexicographically with the multiplicity partition. Repeated
/// roots are snapped to their exact algebraic values.
pub fn roots_of_monic(s: Scalar, a: Scalar, b: Scalar) -> RootTriple {
    let d = discriminant(&s, &a, &b);
    let scale = root_scale(s, a, b);
    let mut roots = if on_discriminant(s, a, b, d) {
        let p = s * s - 3.0 * a;
        if p.norm() < DISCRIMINANT_TOL * scale * scale {
            [-s / 3.0; 3]
        } else {
            let double = (9.0 * b - s * a) / (2.0 * p);
            let simple = (4.0 * s * a - 9.0 * b - s * s * s) / p;
            [double, double, simple]
        }
    } else {
        solve_monic_cubic(s, a, b)
    };
    sort_roots(&mut roots, scale);
    let partition = cluster(&roots, CLUSTER_TOL * scale);
    RootTriple { roots, partition }
}

/// Deterministic root order: by real part, with real parts closer than
/// `1e-9·scale` treated as equal and then ordered by imaginary part.
pub fn sort_roots(roots: &mut [Scalar], scale: f64) {
    let tol = 1e-9 * scale;
    roots.sort_by(lex_cmp);
    roots.sort_by(|a, b| {
        if (a.re - b.re).abs() <= tol {
            a.im.total_cmp(&b.im)
        } else {
            a.re.total_cmp(&b.re)
        }
    });
}

/// Reorder `candidate` to follow `reference` (minimum total distance over
/// the six permutations).
pub fn track_roots(reference: &[Scalar; 3], candidate: &[Scalar; 3]) -> [Scalar; 3] {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let cost = |p: &[usize; 3]| (0..3).map(|i| (reference[i] - candidate[p[i]]).norm()).sum::<f64>();
    let best = PERMS.iter().min_by(|a, b| cost(a).total_cmp(&cost(b))).unwrap();
    [candidate[best[0]], candidate[best[1]], candidate[best[2]]]
}

fn cluster(points: &[Scalar], tol: f64) -> Vec<u8> {
    let mut used = vec![false; points.len()];
    let mut out = Vec::new();
    for i in 0..points.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let mut n = 1;
        for j in i + 1..points.len() {
            if !used[j] && (points[i] - points[j]).norm() <= tol {
                used[j] = true;
                n += 1;
            }
        }
        out.push(n);
    }
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

/// Expand `Σ K_k dy^k dx^{3-k}` after the linear substitution
/// `dx = a X + b Y`, `dy = c X + d Y`; returns the coefficients of
/// `[Y³, Y²X, YX², X³]`.
pub fn substitute_binary<R: Ring>(k: &[R; 4], dx: (R, R), dy: (R, R)) -> [R; 4] {
    // binary forms as coefficient lists indexed by the power of Y
    fn mul<R: Ring>(p: &[R], l: &(R, R)) -> Vec<R> {
        let mut out = vec![R::zero(); p.len() + 1];
        for (j, c) in p.iter().enumerate() {
            out[j] = out[j].clone() + c.clone() * l.0.clone();
            out[j + 1] = out[j + 1].clone() + c.clone() * l.1.clone();
        }
        out
    }
    let mut total = vec![R::zero(); 4];
    for (idx, kk) in k.iter().enumerate() {
        let pow_dy = 3 - idx;
        let mut form = vec![kk.clone()];
        for _ in 0..pow_dy {
            form = mul(&form, &dy);
        }
        for _ in 0..idx {
            form = mul(&form, &dx);
        }
        for j in 0..4 {
            total[j] = total[j].clone() + form[j].clone();
        }
    }
    [total[3].clone(), total[2].clone(), total[1].clone(), total[0].clone()]
}

/// Coefficients after the shear `p = P − c x^{k−1}` (`c = k r`), still as
/// functions of the old `(x, y)`.
pub fn shear_slope<C: Coeff>(sab: &[Poly<C>; 3], k: u32, r: &C) -> [Poly<C>; 3] {
    let c = C::from_int(k as i64) * r.clone();
    let u = Poly::monomial(c, Rat::from_integer(k as i64 - 1), Rat::from_integer(0));
    let [s, a, b] = sab.clone();
    let three = Poly::constant(C::from_int(3));
    let two = Poly::constant(C::from_int(2));
    let s_new = s.clone() - three.clone() * u.clone();
    let a_new = a.clone() - two * s.clone() * u.clone() + three * u.clone() * u.clone();
    let b_new = b - a * u.clone() + s * u.clone() * u.clone() - u.clone() * u.clone() * u;
    [s_new, a_new, b_new]
}

/// Monic coefficients of the pushforward under `ȳ = y + r x^k`, `x̄ = x`, as
/// polynomials in the new coordinates.
pub fn shear_sab<C: Coeff>(sab: &[Poly<C>; 3], k: u32, r: &C) -> Result<[Poly<C>; 3]> {
    if k < 1 {
        return Err(Error::InvalidInput("shear exponent must be at least 1".into()));
    }
    let [s, a, b] = shear_slope(sab, k, r);
    Ok([s.subs_y_shift(r, k)?, a.subs_y_shift(r, k)?, b.subs_y_shift(r, k)?])
}

impl CubicWeb {
    pub fn new(coeffs: [Field; 4], weights: Option<(Rat, Rat)>, base_point: (Scalar, Scalar), name: impl Into<String>) -> Result<Self> {
        if let Some((wx, wy)) = weights {
            if wx == Rat::from_integer(0) && wy == Rat::from_integer(0) {
                return Err(Error::InvalidInput("weights must not both vanish".into()));
            }
        }
        Ok(CubicWeb { coeffs, weights, base_point, name: name.into() })
    }

    pub fn monic(s: Field, a: Field, b: Field, weights: Option<(Rat, Rat)>, base_point: (Scalar, Scalar), name: impl Into<String>) -> Self {
        CubicWeb { coeffs: [Field::one(), s, a, b], weights, base_point, name: name.into() }
    }

    pub fn from_exact_sab(sab: [QPoly; 3], weights: Option<(Rat, Rat)>, base_point: (Scalar, Scalar), name: impl Into<String>) -> Self {
        let [s, a, b] = sab;
        CubicWeb::monic(Field::from_exact(s), Field::from_exact(a), Field::from_exact(b), weights, base_point, name)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// `K3 ≡ 1` as an exact polynomial.
    pub fn is_monic(&self) -> bool {
        matches!(&self.coeffs[0], Field::Poly(p) if p.exact.as_ref().is_some_and(|e| e.is_one()) || p.numeric.is_one())
    }

    /// `[S, A, B]` with exact rational coefficients, when available.
    pub fn exact_sab(&self) -> Option<[QPoly; 3]> {
        if !self.is_monic() {
            return None;
        }
        let get = |f: &Field| f.as_poly().and_then(|p| p.exact.clone());
        Some([get(&self.coeffs[1])?, get(&self.coeffs[2])?, get(&self.coeffs[3])?])
    }

    /// `[S, A, B]` as complex polynomials, when the web is monic and polynomial.
    pub fn poly_sab(&self) -> Option<[CPoly; 3]> {
        if !self.is_monic() {
            return None;
        }
        let get = |f: &Field| f.as_poly().map(|p| p.numeric.clone());
        Some([get(&self.coeffs[1])?, get(&self.coeffs[2])?, get(&self.coeffs[3])?])
    }

    /// `K2 ≡ K1 ≡ K0 ≡ 0`: at most one (triple) direction anywhere.
    pub fn is_degenerate(&self) -> bool {
        self.coeffs[1..].iter().all(Field::is_identically_zero)
    }

    pub fn coeff_jets(&self, x: Scalar, y: Scalar, order: u8) -> Result<[Jet2; 4]> {
        Ok([
            self.coeffs[0].eval_jet(x, y, order)?,
            self.coeffs[1].eval_jet(x, y, order)?,
            self.coeffs[2].eval_jet(x, y, order)?,
            self.coeffs[3].eval_jet(x, y, order)?,
        ])
    }

    pub fn coeffs_at(&self, x: Scalar, y: Scalar) -> Result<[Scalar; 4]> {
        Ok(self.coeff_jets(x, y, 0)?.map(|j| j.v))
    }

    fn check_not_degenerate(k: &[Scalar; 4], x: Scalar, y: Scalar) -> Result<()> {
        if k.iter().all(|c| c.norm() < DEGENERATE_TOL) {
            return Err(Error::DegenerateCubic { x: x.to_string(), y: y.to_string() });
        }
        Ok(())
    }

    /// Monic coefficient jets `[S, A, B]`.
    pub fn sab_jets(&self, x: Scalar, y: Scalar, order: u8) -> Result<[Jet2; 3]> {
        let k = self.coeff_jets(x, y, order)?;
        if self.is_monic() {
            return Ok([k[1], k[2], k[3]]);
        }
        let vals = k.map(|j| j.v);
        Self::check_not_degenerate(&vals, x, y)?;
        let big = vals.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if k[0].v.norm() <= DEGENERATE_TOL * big {
            return Err(Error::NotMonicAtPoint);
        }
        Ok([k[1] / k[0], k[2] / k[0], k[3] / k[0]])
    }

    pub fn sab_at(&self, x: Scalar, y: Scalar) -> Result<[Scalar; 3]> {
        Ok(self.sab_jets(x, y, 0)?.map(|j| j.v))
    }

    pub fn roots_at(&self, x: Scalar, y: Scalar) -> Result<RootTriple> {
        let k = self.coeffs_at(x, y)?;
        Self::check_not_degenerate(&k, x, y)?;
        let [s, a, b] = self.sab_at(x, y)?;
        Ok(roots_of_monic(s, a, b))
    }

    pub fn discriminant_at(&self, x: Scalar, y: Scalar) -> Result<Scalar> {
        let k = self.coeffs_at(x, y)?;
        Self::check_not_degenerate(&k, x, y)?;
        let [s, a, b] = self.sab_at(x, y)?;
        Ok(discriminant(&s, &a, &b))
    }

    /// Multiplicities of the projective directions `[dx : dy]`, counting
    /// `dx = 0` when `K3` vanishes.
    pub fn multiplicity_at(&self, x: Scalar, y: Scalar) -> Result<Vec<u8>> {
        let k = self.coeffs_at(x, y)?;
        Self::check_not_degenerate(&k, x, y)?;
        let big = k.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let k: Vec<Scalar> = k.iter().map(|c| c / big).collect();
        let vanishing = k.iter().take_while(|c| c.norm() < DEGENERATE_TOL).count();
        if vanishing == 0 {
            return Ok(roots_of_monic(k[1] / k[0], k[2] / k[0], k[3] / k[0]).partition);
        }
        // `vanishing` directions at dx = 0, the rest from the lower-degree part
        let lead = k[vanishing];
        let finite: Vec<Scalar> = match 3 - vanishing {
            2 => {
                let (bq, cq) = (k[vanishing + 1] / lead, k[vanishing + 2] / lead);
                let d = bq * bq - 4.0 * cq;
                if d.norm() < DISCRIMINANT_TOL * 1f64.max(bq.norm()).powi(2) {
                    vec![-bq / 2.0; 2]
                } else {
                    let sq = d.sqrt();
                    vec![(-bq + sq) / 2.0, (-bq - sq) / 2.0]
                }
            }
            1 => vec![-k[3] / lead],
            _ => vec![],
        };
        let scale = finite.iter().map(|p| p.norm()).fold(1.0, f64::max);
        let mut parts = cluster(&finite, CLUSTER_TOL * scale);
        parts.push(vanishing as u8);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(parts)
    }

    /// Transformed coefficients under `ȳ = f(x,y)`, `x̄ = g(x,y)` at the
    /// image of the jet's source point.
    pub fn pushforward(&self, jet: &DiffeoJet) -> Result<Pushed> {
        let inv = jet.inverse()?;
        let (x, y) = jet.source;
        let k = self.coeff_jets(x, y, 1)?.map(|j| j.to_jet1());
        let (f, g) = (jet.f, jet.g);
        let jac = f.dy_jet1() * g.dx_jet1() - f.dx_jet1() * g.dy_jet1();
        let fy = f.dy_jet1() / jac;
        let fx = f.dx_jet1() / jac;
        let gy = g.dy_jet1() / jac;
        let gx = g.dx_jet1() / jac;
        // dx = (f_y X − g_y Y)/J, dy = (−f_x X + g_x Y)/J with X = dx̄, Y = dȳ
        let out = substitute_binary(&k, (fy, -gy), (-fx, gx));
        let to_target = |h: Jet1| {
            Jet1::new(h.v, h.x * inv.g.x + h.y * inv.f.x, h.x * inv.g.y + h.y * inv.f.y)
        };
        Ok(Pushed { point: jet.target(), coeffs: out.map(to_target) })
    }

    /// Global pushforward of a monic polynomial web under `ȳ = y + r x^k`.
    pub fn pushforward_shear(&self, k: u32, r: Q) -> Result<CubicWeb> {
        let name = format!("{} sheared (k={k}, r={r})", self.name);
        if let Some(sab) = self.exact_sab() {
            let out = shear_sab(&sab, k, &r)?;
            return Ok(CubicWeb::from_exact_sab(out, self.weights, self.shear_point(k, crate::scalar::q_to_scalar(&r)), name));
        }
        self.pushforward_shear_numeric(k, crate::scalar::q_to_scalar(&r))
    }

    pub fn pushforward_shear_numeric(&self, k: u32, r: Scalar) -> Result<CubicWeb> {
        let sab = self
            .poly_sab()
            .ok_or_else(|| Error::NotPolynomial("shear pushforward needs a monic polynomial web".into()))?;
        let [s, a, b] = shear_sab(&sab, k, &r)?;
        Ok(CubicWeb::monic(
            Field::from_numeric(s),
            Field::from_numeric(a),
            Field::from_numeric(b),
            self.weights,
            self.shear_point(k, r),
            format!("{} sheared (k={k}, r={r})", self.name),
        ))
    }

    fn shear_point(&self, k: u32, r: Scalar) -> (Scalar, Scalar) {
        let (x, y) = self.base_point;
        (x, y + r * x.powi(k as i32))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::shear;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: Scalar, b: Scalar, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn form2_triple_root_at_origin() {
        let w = catalog(&NormalForm::Form2);
        let r = w.roots_at(re(0.0), re(0.0)).unwrap();
        assert_eq!(r.roots, [re(0.0); 3]);
        assert_eq!(r.partition, vec![3]);
        assert_eq!(w.multiplicity_at(re(0.0), re(0.0)).unwrap(), vec![3]);
    }

    #[test]
    fn form1_factored_roots() {
        let w = catalog(&NormalForm::Form1 { m0: 0 });
        let r = w.roots_at(re(1.0), re(1.0)).unwrap();
        for (got, want) in r.roots.iter().zip([-1.0, 0.0, 1.0]) {
            assert!(close(*got, re(want), 1e-14));
        }
        assert_eq!(r.partition, vec![1, 1, 1]);
    }

    #[test]
    fn form2_roots_against_companion_oracle() {
        let w = catalog(&NormalForm::Form2);
        let r = w.roots_at(re(1.0), re(1.0)).unwrap();
        let oracle = companion(re(0.0), re(2.0), re(1.0));
        let mut oracle = oracle.to_vec();
        sort_roots(&mut oracle, 1.0);
        for (a, b) in r.roots.iter().zip(&oracle) {
            assert!(close(*a, *b, 1e-12));
        }
        assert!((r.roots[0].re + 0.45340).abs() < 1e-5);
        assert!((r.roots[2].im - 1.46771).abs() < 1e-5);
        assert_eq!(r.partition, vec![1, 1, 1]);
    }

    #[test]
    fn discriminant_examples() {
        let z = re(0.0);
        assert_eq!(discriminant(&z, &z, &z), z);
        let w = catalog(&NormalForm::Form2);
        assert_eq!(w.discriminant_at(re(1.0), re(1.0)).unwrap(), re(-59.0));
        let w6 = catalog(&NormalForm::Form6 { l: re(PI / 4.0) });
        assert_eq!(w6.discriminant_at(re(0.3), re(0.0)).unwrap(), re(0.0));
        assert_eq!(w6.roots_at(re(0.3), re(0.0)).unwrap().partition, vec![3]);
    }

    #[test]
    fn multiplicity_examples() {
        let w = catalog(&NormalForm::Form1 { m0: 2 });
        assert_eq!(w.multiplicity_at(re(0.0), re(0.0)).unwrap(), vec![2, 1]);
        let w2 = catalog(&NormalForm::Form2);
        assert_eq!(w2.multiplicity_at(re(0.4), re(-0.3)).unwrap(), vec![1, 1, 1]);
        let zero = CubicWeb::from_exact_sab([QPoly::zero(), QPoly::zero(), QPoly::zero()], None, (re(0.0), re(0.0)), "zero");
        assert_eq!(zero.multiplicity_at(re(1.0), re(1.0)).unwrap(), vec![3]);
        let flat_zero = CubicWeb::new(
            [Field::zero(), Field::zero(), Field::zero(), Field::zero()],
            None,
            (re(0.0), re(0.0)),
            "empty",
        )
        .unwrap();
        assert!(matches!(flat_zero.roots_at(re(1.0), re(1.0)), Err(Error::DegenerateCubic { .. })));
    }

    #[test]
    fn catalog_entries() {
        let w = catalog(&NormalForm::Form1 { m0: 2 });
        assert_eq!(w.weights, Some((Rat::from_integer(4), Rat::from_integer(2))));
        assert_eq!(w.coeffs_at(re(2.0), re(3.0)).unwrap(), [re(9.0), re(0.0), re(-1.0), re(0.0)]);
        let w6 = catalog(&NormalForm::Form6 { l: re(PI / 4.0) });
        assert_eq!(w6.weights, Some((Rat::from_integer(0), Rat::from_integer(1))));
        let k = w6.coeffs_at(re(0.0), re(1.0)).unwrap();
        assert!(close(k[3], re(-2.0 / 27f64.sqrt()), 1e-14));
        assert!(matches!(NormalForm::parse("form7", None, None), Err(Error::UnsupportedForm(_))));
        assert!(matches!(NormalForm::parse("form9", None, None), Err(Error::UnknownForm(_))));
    }

    #[test]
    fn vieta_and_discriminant_at_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for form in [NormalForm::Form2, NormalForm::Form3, NormalForm::Form4, NormalForm::Form5, NormalForm::Form6 { l: re(0.3) }] {
            let w = catalog(&form);
            for _ in 0..100 {
                let (x, y) = (re(rng.gen_range(0.05..1.0)), re(rng.gen_range(-1.0..1.0)));
                let [s, a, b] = w.sab_at(x, y).unwrap();
                let Ok(r) = w.roots_at(x, y) else { continue };
                let [p1, p2, p3] = r.roots;
                let scale = root_scale(s, a, b);
                assert!((p1 + p2 + p3 + s).norm() < 1e-10 * scale);
                assert!((p1 * p2 + p2 * p3 + p3 * p1 - a).norm() < 1e-10 * scale * scale);
                assert!((p1 * p2 * p3 + b).norm() < 1e-10 * scale.powi(3));
                let d = w.discriminant_at(x, y).unwrap();
                let prod = ((p1 - p2) * (p2 - p3) * (p3 - p1)).powi(2);
                assert!((d - prod).norm() < 1e-9 * scale.powi(6), "{d} vs {prod}");
            }
        }
    }

    #[test]
    fn identity_pushforward_keeps_coefficients() {
        let w = catalog(&NormalForm::Form2);
        let p = w.pushforward(&DiffeoJet::identity(re(0.5), re(0.2))).unwrap();
        let k = w.coeffs_at(re(0.5), re(0.2)).unwrap();
        for (a, b) in p.values().iter().zip(&k) {
            assert!(close(*a, *b, 1e-15));
        }
    }

    #[test]
    fn shear_of_form3_matches_root_rule() {
        let w = catalog(&NormalForm::Form3);
        let r = q(-1, 12);
        let sheared = w.pushforward_shear(2, r).unwrap();
        let [s, a, b] = sheared.exact_sab().unwrap();
        let int = Rat::from_integer;
        assert_eq!(s, QPoly::monomial(q(1, 2), int(1), int(0)));
        assert_eq!(a, qp(&[(0, 1, q(1, 1)), (2, 0, q(-1, 2))]));
        assert_eq!(b, qp(&[(1, 1, q(-1, 2))]));
        // generic r: S̄ = −6 r x, and root-level agreement at random points
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rv = 0.37;
        let sh = w.pushforward_shear_numeric(2, re(rv)).unwrap();
        assert!(close(sh.sab_at(re(1.0), re(5.0)).unwrap()[0], re(-6.0 * rv), 1e-14));
        for _ in 0..20 {
            let (x, y) = (re(rng.gen_range(-1.0..1.0)), re(rng.gen_range(-1.0..1.0)));
            let jet = shear(2, re(rv), x, y).unwrap();
            let (tx, ty) = jet.target();
            let mut want: Vec<Scalar> = w.roots_at(x, y).unwrap().roots.iter().map(|p| p + 2.0 * rv * x).collect();
            sort_roots(&mut want, 1.0);
            let got = sh.roots_at(tx, ty).unwrap().roots;
            for (g, e) in got.iter().zip(&want) {
                assert!(close(*g, *e, 1e-9));
            }
            let local = w.pushforward(&jet).unwrap().roots().unwrap().roots;
            for (g, e) in local.iter().zip(&want) {
                assert!(close(*g, *e, 1e-9));
            }
        }
    }

    #[test]
    fn pushforward_then_inverse_restores_roots() {
        let w = catalog(&NormalForm::Form6 { l: re(0.2) });
        let jet = DiffeoJet {
            source: (re(0.3), re(0.8)),
            f: Jet2::new(re(0.9), re(0.2), re(1.1), re(0.3), re(-0.1), re(0.2)),
            g: Jet2::new(re(0.4), re(1.3), re(0.1), re(0.0), re(0.05), re(0.1)),
        };
        let pushed = w.pushforward(&jet).unwrap();
        let [p1, p2, p3] = w.roots_at(re(0.3), re(0.8)).unwrap().roots;
        let slope = |p: Scalar| (jet.f.x + jet.f.y * p) / (jet.g.x + jet.g.y * p);
        let mut want = vec![slope(p1), slope(p2), slope(p3)];
        sort_roots(&mut want, 1.0);
        for (g, e) in pushed.roots().unwrap().roots.iter().zip(&want) {
            assert!(close(*g, *e, 1e-10));
        }
        // back through the inverse map, pointwise in the coefficient values
        let inv = jet.inverse().unwrap();
        let k = pushed.values();
        let fy = inv.f.y;
        let fx = inv.f.x;
        let gy = inv.g.y;
        let gx = inv.g.x;
        let jac = fy * gx - fx * gy;
        let back = substitute_binary(&k, (fy / jac, -gy / jac), (-fx / jac, gx / jac));
        let orig = w.coeffs_at(re(0.3), re(0.8)).unwrap();
        for (a, b) in back.iter().zip(&orig) {
            assert!(close(*a, *b, 1e-10));
        }
    }
}
