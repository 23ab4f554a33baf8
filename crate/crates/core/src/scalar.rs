//! Scalars, exact rationals and the small ring abstraction shared by the
//! numeric, jet and polynomial code paths.

use std::cmp::Ordering;
use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Complex double-precision scalar.
pub type Scalar = Complex64;

/// Exact rational coefficient.
pub type Q = Ratio<i128>;

/// Rational exponent / weight.
pub type Rat = Ratio<i64>;

pub const I: Scalar = Complex64 { re: 0.0, im: 1.0 };

#[inline]
pub fn re(x: f64) -> Scalar {
    Complex64::new(x, 0.0)
}

pub fn rat(n: i64, d: i64) -> Rat {
    Ratio::new(n, d)
}

pub fn q(n: i128, d: i128) -> Q {
    Ratio::new(n, d)
}

pub fn rat_to_f64(r: Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn q_to_f64(r: &Q) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

pub fn q_to_scalar(r: &Q) -> Scalar {
    re(q_to_f64(r))
}

pub fn is_finite(z: Scalar) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Deterministic total order on complex numbers: real part, then imaginary.
pub fn lex_cmp(a: &Scalar, b: &Scalar) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Commutative ring operations needed by the coefficient formulas. The same
/// formula code runs over plain scalars, first-order jets and polynomials.
pub trait Ring:
    Clone + Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_rat(q: Rat) -> Self;
    fn is_zero(&self) -> bool;

    fn from_int(n: i64) -> Self {
        Self::from_rat(Rat::from_integer(n))
    }

    fn scale_int(&self, n: i64) -> Self {
        Self::from_int(n) * self.clone()
    }

    fn pow(&self, n: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..n {
            out = out * self.clone();
        }
        out
    }
}

/// Coefficient rings usable inside polynomials: they can be evaluated as
/// complex numbers and compared for equality (exactly or within tolerance).
pub trait Coeff: Ring + PartialEq + Send + Sync + 'static {
    fn to_scalar(&self) -> Scalar;
    fn approx_eq(&self, other: &Self) -> bool;
    fn inv(&self) -> Option<Self>;
}

impl Ring for Scalar {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_rat(q: Rat) -> Self {
        re(rat_to_f64(q))
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
}

impl Coeff for Scalar {
    fn to_scalar(&self) -> Scalar {
        *self
    }
    fn approx_eq(&self, other: &Self) -> bool {
        (self - other).norm() <= 1e-12 * (1.0 + self.norm().max(other.norm()))
    }
    fn inv(&self) -> Option<Self> {
        if Ring::is_zero(self) {
            None
        } else {
            Some(1.0 / self)
        }
    }
}

impl Ring for Q {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_rat(q: Rat) -> Self {
        Ratio::new(*q.numer() as i128, *q.denom() as i128)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
}

impl Coeff for Q {
    fn to_scalar(&self) -> Scalar {
        q_to_scalar(self)
    }
    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }
    fn inv(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
}

/// Convert a double to the nearest small-denominator rational when it is
/// exactly representable as such (used when reading JSON numbers).
pub fn f64_to_rat_exact(x: f64) -> Option<Rat> {
    if !x.is_finite() {
        return None;
    }
    for d in 1..=720i64 {
        let n = x * d as f64;
        if n.abs() < 1e15 && n.fract() == 0.0 {
            return Some(Ratio::new(n as i64, d));
        }
    }
    None
}

pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().ok()?;
        let d: i64 = d.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        Some(Ratio::new(n, d))
    } else if let Ok(n) = s.parse::<i64>() {
        Some(Ratio::from_integer(n))
    } else {
        s.parse::<f64>().ok().and_then(f64_to_rat_exact)
    }
}

pub fn rat_is_integer(r: &Rat) -> bool {
    *r.denom() == 1
}

pub fn rat_abs(r: Rat) -> Rat {
    r.abs()
}
