//! Sparse bivariate polynomials with rational exponents (Laurent and
//! Puiseux monomials allowed) over a generic coefficient ring.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::jet::Jet2;
use crate::scalar::{rat_is_integer, rat_to_f64, re, Coeff, Rat, Ring, Scalar, Q};

/// `Σ c · x^m · y^n`, no duplicate exponent pairs, no zero coefficients.
#[derive(Clone, PartialEq)]
pub struct Poly<C: Coeff> {
    terms: BTreeMap<(Rat, Rat), C>,
}

pub type QPoly = Poly<Q>;
pub type CPoly = Poly<Scalar>;

impl<C: Coeff> fmt::Debug for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|((m, n), c)| format!("({:?})x^{}y^{}", c, m, n))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl<C: Coeff> Default for Poly<C> {
    fn default() -> Self {
        Poly { terms: BTreeMap::new() }
    }
}

impl<C: Coeff> Poly<C> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: C) -> Self {
        Self::monomial(c, Rat::from_integer(0), Rat::from_integer(0))
    }

    pub fn monomial(c: C, m: Rat, n: Rat) -> Self {
        let mut p = Self::default();
        p.add_term(m, n, c);
        p
    }

    pub fn x() -> Self {
        Self::monomial(C::one(), Rat::from_integer(1), Rat::from_integer(0))
    }

    pub fn y() -> Self {
        Self::monomial(C::one(), Rat::from_integer(0), Rat::from_integer(1))
    }

    pub fn from_terms<I: IntoIterator<Item = (Rat, Rat, C)>>(terms: I) -> Self {
        let mut p = Self::default();
        for (m, n, c) in terms {
            p.add_term(m, n, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Rat, n: Rat, c: C) {
        if c.is_zero() {
            return;
        }
        let key = (m, n);
        let sum = match self.terms.remove(&key) {
            Some(old) => old + c,
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(key, sum);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (Rat, Rat, &C)> {
        self.terms.iter().map(|((m, n), c)| (*m, *n, c))
    }

    pub fn coeff(&self, m: Rat, n: Rat) -> Option<&C> {
        self.terms.get(&(m, n))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero_poly(&self) -> bool {
        self.terms.is_empty()
    }

    /// Single term `c x^m y^n`, if the polynomial is a monomial.
    pub fn as_monomial(&self) -> Option<(Rat, Rat, C)> {
        if self.terms.len() == 1 {
            let ((m, n), c) = self.terms.iter().next().unwrap();
            Some((*m, *n, c.clone()))
        } else {
            None
        }
    }

    pub fn is_one(&self) -> bool {
        matches!(self.as_monomial(), Some((m, n, c)) if m == Rat::from_integer(0) && n == Rat::from_integer(0) && c == C::one())
    }

    pub fn scale(&self, c: &C) -> Self {
        Self::from_terms(self.terms().map(|(m, n, k)| (m, n, k.clone() * c.clone())))
    }

    pub fn mul_monomial(&self, c: &C, dm: Rat, dn: Rat) -> Self {
        Self::from_terms(self.terms().map(|(m, n, k)| (m + dm, n + dn, k.clone() * c.clone())))
    }

    pub fn map_coeffs<D: Coeff, F: Fn(&C) -> D>(&self, f: F) -> Poly<D> {
        Poly::from_terms(self.terms().map(|(m, n, c)| (m, n, f(c))))
    }

    pub fn to_complex(&self) -> CPoly {
        self.map_coeffs(|c| c.to_scalar())
    }

    /// Partial derivative: `a` times in x, `b` times in y.
    pub fn diff(&self, a: u32, b: u32) -> Self {
        let mut out = self.clone();
        for _ in 0..a {
            out = out.diff_x();
        }
        for _ in 0..b {
            out = out.diff_y();
        }
        out
    }

    pub fn diff_x(&self) -> Self {
        let one = Rat::from_integer(1);
        Self::from_terms(
            self.terms()
                .map(|(m, n, c)| (m - one, n, C::from_rat(m) * c.clone())),
        )
    }

    pub fn diff_y(&self) -> Self {
        let one = Rat::from_integer(1);
        Self::from_terms(
            self.terms()
                .map(|(m, n, c)| (m, n - one, C::from_rat(n) * c.clone())),
        )
    }

    pub fn max_y_degree(&self) -> Option<Rat> {
        self.terms().map(|(_, n, _)| n).max()
    }

    pub fn has_nonneg_integer_exponents(&self) -> bool {
        self.terms()
            .all(|(m, n, _)| rat_is_integer(&m) && rat_is_integer(&n) && m >= Rat::from_integer(0) && n >= Rat::from_integer(0))
    }

    /// Weighted degree if every monomial has the same `w_x·m + w_y·n`.
    pub fn weighted_degree(&self, wx: Rat, wy: Rat) -> Option<Rat> {
        let mut degs = self.terms().map(|(m, n, _)| wx * m + wy * n);
        let first = degs.next()?;
        if degs.all(|d| d == first) {
            Some(first)
        } else {
            None
        }
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        let keys: Vec<(Rat, Rat)> = self.terms().chain(other.terms()).map(|(m, n, _)| (m, n)).collect();
        keys.into_iter().all(|(m, n)| {
            let a = self.coeff(m, n).cloned().unwrap_or_else(C::zero);
            let b = other.coeff(m, n).cloned().unwrap_or_else(C::zero);
            a.approx_eq(&b)
        })
    }

    /// Substitute `y -> y - r·x^k`; requires non-negative integer y-exponents.
    pub fn subs_y_shift(&self, r: &C, k: u32) -> Result<Self> {
        let mut out = Self::default();
        let kx = Rat::from_integer(k as i64);
        for (m, n, c) in self.terms() {
            if !rat_is_integer(&n) || n < Rat::from_integer(0) {
                return Err(Error::NotPolynomial(
                    "shear substitution needs non-negative integer y-exponents".into(),
                ));
            }
            let n_int = n.to_integer() as u32;
            // (y - r x^k)^n = Σ_j binom(n,j) y^{n-j} (-r)^j x^{kj}
            let mut binom: i64 = 1;
            for j in 0..=n_int {
                let coef = C::from_int(binom) * (-r.clone()).pow(j) * c.clone();
                out.add_term(
                    m + kx * Rat::from_integer(j as i64),
                    Rat::from_integer((n_int - j) as i64),
                    coef,
                );
                binom = binom * (n_int - j) as i64 / (j + 1) as i64;
            }
        }
        Ok(out)
    }

    pub fn eval(&self, x: Scalar, y: Scalar) -> Result<Scalar> {
        Ok(self.eval_jet(x, y, 0)?.v)
    }

    /// Value and partials up to `order` (0, 1 or 2) with exact monomial
    /// derivatives.
    pub fn eval_jet(&self, x: Scalar, y: Scalar, order: u8) -> Result<Jet2> {
        let mut acc = Jet2::default();
        for (m, n, c) in self.terms() {
            let px = mono_powers(x, m, order, 'x')?;
            let py = mono_powers(y, n, order, 'y')?;
            let c = c.to_scalar();
            acc.v += c * px[0] * py[0];
            if order >= 1 {
                acc.x += c * px[1] * py[0];
                acc.y += c * px[0] * py[1];
            }
            if order >= 2 {
                acc.xx += c * px[2] * py[0];
                acc.xy += c * px[1] * py[1];
                acc.yy += c * px[0] * py[2];
            }
        }
        Ok(acc)
    }
}

/// `[t^e, e t^{e-1}, e(e-1) t^{e-2}]` up to `order`, with principal branch
/// for non-integer exponents.
pub(crate) fn mono_powers(t: Scalar, e: Rat, order: u8, var: char) -> Result<[Scalar; 3]> {
    let mut out = [re(0.0); 3];
    let integer = rat_is_integer(&e);
    if !integer && t.re <= 0.0 && t != re(0.0) {
        return Err(Error::BranchViolation(format!(
            "exponent {} needs Re({}) > 0, got {}",
            e, var, t
        )));
    }
    let mut falling = 1.0;
    for k in 0..=order.min(2) as usize {
        let ek = e - Rat::from_integer(k as i64);
        let val = if falling == 0.0 {
            re(0.0)
        } else if t == re(0.0) {
            if ek > Rat::from_integer(0) {
                re(0.0)
            } else if ek == Rat::from_integer(0) {
                re(falling)
            } else {
                return Err(Error::BranchViolation(format!(
                    "{}^{} is singular at {} = 0",
                    var, ek, var
                )));
            }
        } else if rat_is_integer(&ek) {
            re(falling) * t.powi(ek.to_integer() as i32)
        } else {
            re(falling) * t.powf(rat_to_f64(ek))
        };
        out[k] = val;
        falling *= rat_to_f64(ek);
    }
    Ok(out)
}

impl<C: Coeff> Add for Poly<C> {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        for ((m, n), c) in o.terms {
            self.add_term(m, n, c);
        }
        self
    }
}

impl<C: Coeff> Sub for Poly<C> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl<C: Coeff> Neg for Poly<C> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::from_terms(self.terms().map(|(m, n, c)| (m, n, -c.clone())))
    }
}

impl<C: Coeff> Mul for Poly<C> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut out = Self::default();
        for (m1, n1, c1) in self.terms() {
            for (m2, n2, c2) in o.terms() {
                out.add_term(m1 + m2, n1 + n2, c1.clone() * c2.clone());
            }
        }
        out
    }
}

impl<C: Coeff> Ring for Poly<C> {
    fn zero() -> Self {
        Self::default()
    }
    fn one() -> Self {
        Self::constant(C::one())
    }
    fn from_rat(q: Rat) -> Self {
        Self::constant(C::from_rat(q))
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, rat};
    use proptest::prelude::*;

    fn qp(terms: &[(i64, i64, i128, i128)]) -> QPoly {
        QPoly::from_terms(
            terms
                .iter()
                .map(|&(m, n, a, b)| (Rat::from_integer(m), Rat::from_integer(n), q(a, b))),
        )
    }

    #[test]
    fn linear_monomial_jet() {
        let p = qp(&[(1, 0, 2, 1)]).to_complex();
        let j = p.eval_jet(re(1.0), re(1.0), 1).unwrap();
        assert_eq!(j.v, re(2.0));
        assert_eq!(j.x, re(2.0));
        assert_eq!(j.y, re(0.0));
    }

    #[test]
    fn y_at_origin_second_order() {
        let p = CPoly::y();
        let j = p.eval_jet(re(0.0), re(0.0), 2).unwrap();
        assert_eq!(j, Jet2 { y: re(1.0), ..Default::default() });
    }

    #[test]
    fn rational_exponent_branch() {
        let p = CPoly::monomial(re(1.0), rat(3, 2), rat(0, 1));
        assert!(matches!(p.eval(re(-1.0), re(1.0)), Err(Error::BranchViolation(_))));
        let j = p.eval_jet(re(4.0), re(1.0), 2).unwrap();
        assert!((j.v - re(8.0)).norm() < 1e-14);
        assert!((j.x - re(3.0)).norm() < 1e-14);
        assert!((j.xx - re(0.375)).norm() < 1e-14);
        // value and slope exist at x = 0, the second derivative does not
        assert!(p.eval_jet(re(0.0), re(1.0), 1).is_ok());
        assert!(p.eval_jet(re(0.0), re(1.0), 2).is_err());
    }

    #[test]
    fn shear_substitution_binomial() {
        // (y)^2 with y -> y - r x^2, r = 1/3: y^2 - 2/3 x^2 y + 1/9 x^4
        let p = qp(&[(0, 2, 1, 1)]);
        let s = p.subs_y_shift(&q(1, 3), 2).unwrap();
        assert_eq!(s, qp(&[(0, 2, 1, 1), (2, 1, -2, 3), (4, 0, 1, 9)]));
    }

    fn arb_poly() -> impl Strategy<Value = QPoly> {
        prop::collection::vec((0i64..5, 0i64..5, -9i128..9, 1i128..5), 0..6).prop_map(|v| {
            QPoly::from_terms(
                v.into_iter()
                    .map(|(m, n, a, b)| (Rat::from_integer(m), Rat::from_integer(n), q(a, b))),
            )
        })
    }

    proptest! {
        #[test]
        fn mixed_partials_commute(p in arb_poly()) {
            prop_assert_eq!(p.diff_x().diff_y(), p.diff_y().diff_x());
        }

        #[test]
        fn product_rule_exact(p in arb_poly(), r in arb_poly()) {
            let lhs = (p.clone() * r.clone()).diff_x();
            let rhs = p.diff_x() * r.clone() + p * r.diff_x();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
