//! Forward-mode bivariate jets truncated at order one and two.
//!
//! `Jet2` carries a value with its partials up to second order in `(x, y)`;
//! `Jet1` carries first partials only. Both implement [`Ring`] and
//! [`Analytic`] so the web formulas can be evaluated over them directly.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::{is_finite, rat_to_f64, re, Rat, Ring, Scalar};

/// Scalars that support division and composition with analytic functions.
pub trait Analytic: Ring + Div<Output = Self> {
    fn constant(c: Scalar) -> Self;
    fn value(&self) -> Scalar;
    /// Compose with a univariate function given its value and first two
    /// derivatives at `self.value()`.
    fn compose(&self, f0: Scalar, f1: Scalar, f2: Scalar) -> Self;

    fn tan(&self) -> Self {
        let t = self.value().tan();
        let sec2 = 1.0 + t * t;
        self.compose(t, sec2, 2.0 * t * sec2)
    }
    fn exp(&self) -> Self {
        let e = self.value().exp();
        self.compose(e, e, e)
    }
    fn ln(&self) -> Self {
        let v = self.value();
        self.compose(v.ln(), 1.0 / v, -1.0 / (v * v))
    }
    fn cos(&self) -> Self {
        let v = self.value();
        self.compose(v.cos(), -v.sin(), -v.cos())
    }
    fn powc(&self, e: Scalar) -> Self {
        let v = self.value();
        self.compose(v.powc(e), e * v.powc(e - 1.0), e * (e - 1.0) * v.powc(e - 2.0))
    }
    fn sqrt(&self) -> Self {
        self.powc(re(0.5))
    }
}

impl Analytic for Scalar {
    fn constant(c: Scalar) -> Self {
        c
    }
    fn value(&self) -> Scalar {
        *self
    }
    fn compose(&self, f0: Scalar, _f1: Scalar, _f2: Scalar) -> Self {
        f0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet1 {
    pub v: Scalar,
    pub x: Scalar,
    pub y: Scalar,
}

impl Jet1 {
    pub fn new(v: Scalar, x: Scalar, y: Scalar) -> Self {
        Jet1 { v, x, y }
    }
    pub fn var_x(x: Scalar) -> Self {
        Jet1::new(x, re(1.0), re(0.0))
    }
    pub fn var_y(y: Scalar) -> Self {
        Jet1::new(y, re(0.0), re(1.0))
    }
    pub fn scale(self, c: Scalar) -> Self {
        Jet1::new(self.v * c, self.x * c, self.y * c)
    }
}

impl Add for Jet1 {
    type Output = Jet1;
    fn add(self, o: Jet1) -> Jet1 {
        Jet1::new(self.v + o.v, self.x + o.x, self.y + o.y)
    }
}
impl Sub for Jet1 {
    type Output = Jet1;
    fn sub(self, o: Jet1) -> Jet1 {
        Jet1::new(self.v - o.v, self.x - o.x, self.y - o.y)
    }
}
impl Neg for Jet1 {
    type Output = Jet1;
    fn neg(self) -> Jet1 {
        Jet1::new(-self.v, -self.x, -self.y)
    }
}
impl Mul for Jet1 {
    type Output = Jet1;
    fn mul(self, o: Jet1) -> Jet1 {
        Jet1::new(self.v * o.v, self.x * o.v + self.v * o.x, self.y * o.v + self.v * o.y)
    }
}
impl Div for Jet1 {
    type Output = Jet1;
    fn div(self, o: Jet1) -> Jet1 {
        let inv = 1.0 / o.v;
        let q = self.v * inv;
        Jet1::new(q, (self.x - q * o.x) * inv, (self.y - q * o.y) * inv)
    }
}

impl Ring for Jet1 {
    fn zero() -> Self {
        Jet1::default()
    }
    fn one() -> Self {
        Jet1::new(re(1.0), re(0.0), re(0.0))
    }
    fn from_rat(q: Rat) -> Self {
        Jet1::new(re(rat_to_f64(q)), re(0.0), re(0.0))
    }
    fn is_zero(&self) -> bool {
        self.v == re(0.0) && self.x == re(0.0) && self.y == re(0.0)
    }
}

impl Analytic for Jet1 {
    fn constant(c: Scalar) -> Self {
        Jet1::new(c, re(0.0), re(0.0))
    }
    fn value(&self) -> Scalar {
        self.v
    }
    fn compose(&self, f0: Scalar, f1: Scalar, _f2: Scalar) -> Self {
        Jet1::new(f0, f1 * self.x, f1 * self.y)
    }
}

/// Value and partials up to order two.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet2 {
    pub v: Scalar,
    pub x: Scalar,
    pub y: Scalar,
    pub xx: Scalar,
    pub xy: Scalar,
    pub yy: Scalar,
}

impl Jet2 {
    pub fn new(v: Scalar, x: Scalar, y: Scalar, xx: Scalar, xy: Scalar, yy: Scalar) -> Self {
        Jet2 { v, x, y, xx, xy, yy }
    }
    pub fn var_x(x: Scalar) -> Self {
        Jet2 { v: x, x: re(1.0), ..Default::default() }
    }
    pub fn var_y(y: Scalar) -> Self {
        Jet2 { v: y, y: re(1.0), ..Default::default() }
    }
    pub fn scale(self, c: Scalar) -> Self {
        Jet2::new(self.v * c, self.x * c, self.y * c, self.xx * c, self.xy * c, self.yy * c)
    }
    /// First-order truncation.
    pub fn to_jet1(self) -> Jet1 {
        Jet1::new(self.v, self.x, self.y)
    }
    /// The x-partial as a first-order jet (its own partials are xx, xy).
    pub fn dx_jet1(self) -> Jet1 {
        Jet1::new(self.x, self.xx, self.xy)
    }
    /// The y-partial as a first-order jet.
    pub fn dy_jet1(self) -> Jet1 {
        Jet1::new(self.y, self.xy, self.yy)
    }
    /// Zero out every component above `order`.
    pub fn truncate(mut self, order: u8) -> Self {
        if order < 2 {
            self.xx = re(0.0);
            self.xy = re(0.0);
            self.yy = re(0.0);
        }
        if order < 1 {
            self.x = re(0.0);
            self.y = re(0.0);
        }
        self
    }
    pub fn is_finite_to(&self, order: u8) -> bool {
        let mut ok = is_finite(self.v);
        if order >= 1 {
            ok &= is_finite(self.x) && is_finite(self.y);
        }
        if order >= 2 {
            ok &= is_finite(self.xx) && is_finite(self.xy) && is_finite(self.yy);
        }
        ok
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        Jet2::new(
            self.v + o.v,
            self.x + o.x,
            self.y + o.y,
            self.xx + o.xx,
            self.xy + o.xy,
            self.yy + o.yy,
        )
    }
}
impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        self + (-o)
    }
}
impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(re(-1.0))
    }
}
impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        Jet2::new(
            self.v * o.v,
            self.x * o.v + self.v * o.x,
            self.y * o.v + self.v * o.y,
            self.xx * o.v + 2.0 * self.x * o.x + self.v * o.xx,
            self.xy * o.v + self.x * o.y + self.y * o.x + self.v * o.xy,
            self.yy * o.v + 2.0 * self.y * o.y + self.v * o.yy,
        )
    }
}
impl Div for Jet2 {
    type Output = Jet2;
    fn div(self, o: Jet2) -> Jet2 {
        let t = o.v;
        let recip = o.compose(1.0 / t, -1.0 / (t * t), 2.0 / (t * t * t));
        self * recip
    }
}

impl Ring for Jet2 {
    fn zero() -> Self {
        Jet2::default()
    }
    fn one() -> Self {
        Jet2 { v: re(1.0), ..Default::default() }
    }
    fn from_rat(q: Rat) -> Self {
        Jet2 { v: re(rat_to_f64(q)), ..Default::default() }
    }
    fn is_zero(&self) -> bool {
        *self == Jet2::default()
    }
}

impl Analytic for Jet2 {
    fn constant(c: Scalar) -> Self {
        Jet2 { v: c, ..Default::default() }
    }
    fn value(&self) -> Scalar {
        self.v
    }
    fn compose(&self, f0: Scalar, f1: Scalar, f2: Scalar) -> Self {
        Jet2::new(
            f0,
            f1 * self.x,
            f1 * self.y,
            f2 * self.x * self.x + f1 * self.xx,
            f2 * self.x * self.y + f1 * self.xy,
            f2 * self.y * self.y + f1 * self.yy,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_matches_hand_expansion() {
        // f = x^2 y at (2, 3): f_x = 2xy = 12, f_xy = 2x = 4, f_xx = 2y = 6
        let x = Jet2::var_x(re(2.0));
        let y = Jet2::var_y(re(3.0));
        let f = x * x * y;
        assert_eq!(f.v, re(12.0));
        assert_eq!(f.x, re(12.0));
        assert_eq!(f.y, re(4.0));
        assert_eq!(f.xx, re(6.0));
        assert_eq!(f.xy, re(4.0));
        assert_eq!(f.yy, re(0.0));
    }

    #[test]
    fn quotient_and_tan_against_finite_differences() {
        let f = |x: f64, y: f64| (re(x) * re(y) + re(1.0)).tan() / (re(x) + re(2.0) * re(y));
        let jx = Jet2::var_x(re(0.3));
        let jy = Jet2::var_y(re(0.2));
        let j = (jx * jy + Jet2::one()).tan() / (jx + jy.scale(re(2.0)));
        let h = 1e-4;
        let fx = (f(0.3 + h, 0.2) - f(0.3 - h, 0.2)) / (2.0 * h);
        let fyy = (f(0.3, 0.2 + h) - 2.0 * f(0.3, 0.2) + f(0.3, 0.2 - h)) / (h * h);
        let fxy = (f(0.3 + h, 0.2 + h) - f(0.3 + h, 0.2 - h) - f(0.3 - h, 0.2 + h)
            + f(0.3 - h, 0.2 - h))
            / (4.0 * h * h);
        assert!((j.x - fx).norm() < 1e-7);
        assert!((j.yy - fyy).norm() < 1e-5);
        assert!((j.xy - fxy).norm() < 1e-6 * j.xy.norm().max(1.0) * 10.0);
    }
}
