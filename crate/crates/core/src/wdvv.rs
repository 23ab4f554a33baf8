//! The hydrodynamic-type systems WDVV0 and WDVV1 on `(S, A, B)`, potentials
//! and their associativity equations.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::field::{Field, PolyField};
use crate::jet::Jet1;
use crate::poly::{CPoly, Poly, QPoly};
use crate::scalar::{q, Coeff, Rat, Ring, Scalar, Q};
use crate::web::CubicWeb;

/// Metric type of the germ: `⟨e,e⟩ = 0` or `⟨e,e⟩ ≠ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Kind0,
    Kind1,
}

/// WDVV0 residuals from first-order jets of `S, A, B`.
pub fn wdvv0_from_sab<R: Ring>(sab: &[R; 3], dx: &[R; 3], dy: &[R; 3]) -> [R; 3] {
    let [s, a, b] = sab.clone();
    let [sx, ax, bx] = dx.clone();
    let [sy, ay, by] = dy.clone();
    let half = R::from_rat(Rat::new(1, 2));
    [
        sx - half.clone() * ay.clone(),
        ax - R::from_int(2) * by.clone(),
        bx - s * by - b * sy + half * a * ay,
    ]
}

/// `(S_x − ½A_y, A_x − 2B_y, B_x − SB_y − BS_y + ½AA_y)`.
pub fn wdvv0_residual(web: &CubicWeb, x: Scalar, y: Scalar) -> Result<[Scalar; 3]> {
    let j = web.sab_jets(x, y, 1)?;
    Ok(wdvv0_from_sab(&j.map(|f| f.v), &j.map(|f| f.x), &j.map(|f| f.y)))
}

/// WDVV0 residuals as exact polynomials of a monic rational web.
pub fn wdvv0_exact(sab: &[QPoly; 3]) -> [QPoly; 3] {
    let dx = [sab[0].diff_x(), sab[1].diff_x(), sab[2].diff_x()];
    let dy = [sab[0].diff_y(), sab[1].diff_y(), sab[2].diff_y()];
    wdvv0_from_sab(sab, &dx, &dy)
}

/// `Some(true)` if all three WDVV0 residuals vanish as polynomials.
pub fn wdvv0_identically_zero(web: &CubicWeb) -> Option<bool> {
    web.exact_sab().map(|sab| wdvv0_exact(&sab).iter().all(|p| p.is_zero_poly()))
}

/// Residuals of the three WDVV1 equations.
pub fn wdvv1_residual(web: &CubicWeb, x: Scalar, y: Scalar) -> Result<[Scalar; 3]> {
    let j = web.sab_jets(x, y, 1)?;
    wdvv1_from_jets(&j.map(|f| f.to_jet1()))
}

pub fn wdvv1_from_jets(sab: &[Jet1; 3]) -> Result<[Scalar; 3]> {
    let [s, a, b] = sab.map(|f| f.v);
    let [sx, ax, bx] = sab.map(|f| f.x);
    let [sy, ay, by] = sab.map(|f| f.y);
    let den = 2.0 * a * s - 2.0 * b;
    let scale = 1f64.max(s.norm()).max(a.norm().sqrt()).max(b.norm().cbrt());
    if den.norm() <= 1e-12 * scale.powi(3) {
        return Err(Error::DenominatorZero("AS − B".into()));
    }
    let r1 = sx - ((a * a - a * s * s + 2.0 * s * b) * sy + (s * s * s - a * s + 2.0 * b) * ay - (a + s * s) * by) / den;
    let r2 = ax - (-a * sy + s * ay + by) / 2.0;
    let r3 = bx
        - ((a * a * a + 4.0 * b * b - 3.0 * a * s * b) * sy
            + (2.0 * a * b - s * a * a + b * s * s) * ay
            + (2.0 * a * s * s - 3.0 * s * b - a * a) * by)
            / den;
    Ok([r1, r2, r3])
}

/// Weighted-homogeneous polynomial potential.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    pub f: PolyField,
    pub kind: Kind,
    pub weights: Option<(Rat, Rat)>,
}

impl Potential {
    pub fn exact(f: QPoly, kind: Kind, weights: Option<(Rat, Rat)>) -> Self {
        Potential { f: PolyField::exact(f), kind, weights }
    }

    /// `[f_yyy, f_yyx, f_yxx, f_xxx]`
    pub fn third_derivatives(&self) -> [CPoly; 4] {
        third(&self.f.numeric)
    }

    pub fn exact_third_derivatives(&self) -> Option<[QPoly; 4]> {
        self.f.exact.as_ref().map(third)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "kind": self.kind,
            "weights": self.weights.map(|(a, b)| [a.to_string(), b.to_string()]),
            "terms": crate::io::poly_to_json(&self.f.numeric),
        })
    }
}

fn third<C: Coeff>(f: &Poly<C>) -> [Poly<C>; 4] {
    [f.diff(0, 3), f.diff(1, 2), f.diff(2, 1), f.diff(3, 0)]
}

fn falling(n: i64, k: i64) -> i64 {
    (0..k).map(|i| n - i).product()
}

/// Potential `f` with `f_yyy = S`, `f_yyx = A/2`, `f_yxx = B`,
/// `f_xxx = BS − A²/4`; only monomials of total degree ≥ 3 are kept.
pub fn reconstruct_potential(web: &CubicWeb) -> Result<Potential> {
    let sab = web
        .exact_sab()
        .ok_or_else(|| Error::NotPolynomial("potential reconstruction needs exact polynomial coefficients".into()))?;
    let [s, a, b] = sab;
    let half = q(1, 2);
    let targets: [QPoly; 4] = [
        s.clone(),
        a.scale(&half),
        b.clone(),
        b.clone() * s.clone() - a.clone() * a.clone().scale(&q(1, 4)),
    ];
    for t in &targets {
        if !t.has_nonneg_integer_exponents() {
            return Err(Error::NotPolynomial("coefficients must have non-negative integer exponents".into()));
        }
    }
    // derivative orders (d_x, d_y) for yyy, yyx, yxx, xxx
    const ORDERS: [(i64, i64); 4] = [(0, 3), (1, 2), (2, 1), (3, 0)];
    let mut f = QPoly::zero();
    for (t, &(dx, dy)) in targets.iter().zip(&ORDERS) {
        for (m, n, c) in t.terms() {
            let (fm, fn_) = (m.to_integer() + dx, n.to_integer() + dy);
            if f.coeff(Rat::from_integer(fm), Rat::from_integer(fn_)).is_some() {
                continue;
            }
            let div = falling(fm, dx) * falling(fn_, dy);
            f.add_term(Rat::from_integer(fm), Rat::from_integer(fn_), *c / Q::from_integer(div as i128));
        }
    }
    let got = third(&f);
    if got.iter().zip(&targets).any(|(g, t)| g != t) {
        return Err(Error::NotIntegrable("third derivatives are not mixed-partial consistent".into()));
    }
    if let Some((wx, wy)) = web.weights {
        if !f.is_zero_poly() && f.weighted_degree(wx, wy).is_none() {
            return Err(Error::NotHomogeneous);
        }
    }
    Ok(Potential::exact(f, Kind::Kind0, web.weights))
}

/// kind0: `f_xxx − f_yyy f_yxx + f_yyx²`; kind1: `f_xxx f_yyy − f_xxy f_xyy − 1`.
pub fn associativity_residual(pot: &Potential, x: Scalar, y: Scalar) -> Result<Scalar> {
    let [fyyy, fyyx, fyxx, fxxx] = pot.third_derivatives().map(|p| p.eval(x, y));
    let (fyyy, fyyx, fyxx, fxxx) = (fyyy?, fyyx?, fyxx?, fxxx?);
    Ok(match pot.kind {
        Kind::Kind0 => fxxx - fyyy * fyxx + fyyx * fyyx,
        Kind::Kind1 => fxxx * fyyy - fyxx * fyyx - 1.0,
    })
}

/// Associativity residual as an exact polynomial.
pub fn associativity_exact(pot: &Potential) -> Option<QPoly> {
    let [fyyy, fyyx, fyxx, fxxx] = pot.exact_third_derivatives()?;
    Some(match pot.kind {
        Kind::Kind0 => fxxx - fyyy * fyxx + fyyx.clone() * fyyx,
        Kind::Kind1 => fxxx * fyyy - fyxx * fyyx - QPoly::constant(q(1, 1)),
    })
}

/// Web whose directions are characteristic for the potential.
pub fn characteristic_web(pot: &Potential) -> Result<CubicWeb> {
    let name = format!("characteristic web of {:?} potential", pot.kind);
    let origin = (Scalar::new(0.0, 0.0), Scalar::new(0.0, 0.0));
    match (pot.kind, pot.exact_third_derivatives()) {
        (Kind::Kind0, Some([fyyy, fyyx, fyxx, _])) => {
            Ok(CubicWeb::from_exact_sab([fyyy, fyyx.scale(&q(2, 1)), fyxx], pot.weights, origin, name))
        }
        (Kind::Kind0, None) => {
            let [fyyy, fyyx, fyxx, _] = pot.third_derivatives();
            Ok(CubicWeb::monic(
                Field::from_numeric(fyyy),
                Field::from_numeric(fyyx.scale(&Scalar::new(2.0, 0.0))),
                Field::from_numeric(fyxx),
                pot.weights,
                origin,
                name,
            ))
        }
        (Kind::Kind1, exact) => {
            let coeffs = match exact {
                Some([fyyy, fyyx, fyxx, fxxx]) => {
                    if fyyy.is_zero_poly() {
                        return Err(Error::DivisionByZeroField);
                    }
                    [fyyy, fyyx, -fyxx, -fxxx].map(Field::from_exact)
                }
                None => {
                    let [fyyy, fyyx, fyxx, fxxx] = pot.third_derivatives();
                    if fyyy.is_zero_poly() {
                        return Err(Error::DivisionByZeroField);
                    }
                    [fyyy, fyyx, -fyxx, -fxxx].map(Field::from_numeric)
                }
            };
            CubicWeb::new(coeffs, pot.weights, origin, name)
        }
    }
}

/// `f = y³/6 + x²y²/2 + x⁴y/6 + x³/6 + x⁶/30`, a kind1 potential with
/// `f_yyy = 1`.
pub fn synthetic_kind1_potential() -> Potential {
    let t = |m: i64, n: i64, c: Q| (Rat::from_integer(m), Rat::from_integer(n), c);
    Potential::exact(
        Poly::from_terms([t(0, 3, q(1, 6)), t(2, 2, q(1, 2)), t(4, 1, q(1, 6)), t(3, 0, q(1, 6)), t(6, 0, q(1, 30))]),
        Kind::Kind1,
        None,
    )
}
