//! Adaptive Dormand–Prince 5(4) integration over a real parameter with a
//! complex state, and quintic Hermite dense output on the accepted steps.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jet::Jet1;
use crate::scalar::{re, Scalar};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    /// State norm beyond which the solution is declared blown up.
    pub blowup: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-10, atol: 1e-12, max_step: 1e-2, blowup: 1e8 }
    }
}

/// One accepted step: parameter, state and exact derivatives from the RHS.
/// `ddu` is empty until the knot belongs to a [`Profile`].
#[derive(Debug, Clone, PartialEq)]
pub struct Knot {
    pub s: f64,
    pub u: Vec<Scalar>,
    pub du: Vec<Scalar>,
    pub ddu: Vec<Scalar>,
}

/// Right-hand side `u' = F(s, u)` of a reduced ODE system.
///
/// `eval_jet` evaluates the same system over first-order jets; feeding
/// `s` with unit derivative and `u` with derivative `u'` returns `u''` in
/// the x-slot.
pub trait ProfileRhs: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn eval(&self, s: Scalar, u: &[Scalar]) -> Result<Vec<Scalar>>;
    fn eval_jet(&self, s: Jet1, u: &[Jet1]) -> Result<Vec<Jet1>>;
    fn name(&self) -> &'static str;
    fn params(&self) -> serde_json::Value;
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const BSTAR: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn norm(u: &[Scalar]) -> f64 {
    u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Integrate from `s0` to `s_end` (either direction). Every accepted step is
/// returned as a knot, starting with the initial point.
pub fn integrate<F>(rhs: F, s0: f64, u0: &[Scalar], s_end: f64, opts: &OdeOptions) -> Result<Vec<Knot>>
where
    F: Fn(f64, &[Scalar]) -> Result<Vec<Scalar>>,
{
    let dim = u0.len();
    let dir = if s_end >= s0 { 1.0 } else { -1.0 };
    let mut s = s0;
    let mut u = u0.to_vec();
    let mut du = rhs(s, &u)?;
    let mut knots = vec![Knot { s, u: u.clone(), du: du.clone(), ddu: Vec::new() }];
    let span = (s_end - s0).abs();
    if span == 0.0 {
        return Ok(knots);
    }
    let mut h = opts.max_step.min(span).min(1e-3);
    let h_min = 1e-13 * (1.0 + s0.abs().max(s_end.abs()));
    let mut k: Vec<Vec<Scalar>> = vec![vec![re(0.0); dim]; 7];

    while (s_end - s) * dir > 0.0 {
        h = h.min((s_end - s).abs()).min(opts.max_step);
        if h < h_min {
            return Err(Error::BlowUp { reached: s });
        }
        k[0].clone_from(&du);
        let mut stage_ok = true;
        for st in 1..7 {
            let mut us = u.clone();
            for (j, kj) in k.iter().enumerate().take(st) {
                let a = A[st][j];
                if a != 0.0 {
                    for i in 0..dim {
                        us[i] += kj[i] * (dir * h * a);
                    }
                }
            }
            match rhs(s + dir * h * C[st], &us) {
                Ok(v) if v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) => k[st] = v,
                Ok(_) => {
                    stage_ok = false;
                    break;
                }
                Err(e @ Error::DenominatorZero(_)) | Err(e @ Error::PoleCrossing(_)) => {
                    // retry with a smaller step before giving up
                    if h > 1e3 * h_min {
                        stage_ok = false;
                        break;
                    }
                    return Err(e);
                }
                Err(e) => return Err(e),
            }
        }
        if !stage_ok {
            h *= 0.25;
            continue;
        }
        let mut u_new = u.clone();
        let mut err_acc = 0.0;
        for i in 0..dim {
            let mut inc = re(0.0);
            let mut err = re(0.0);
            for st in 0..7 {
                inc += k[st][i] * B[st];
                err += k[st][i] * (B[st] - BSTAR[st]);
            }
            u_new[i] += inc * (dir * h);
            let sc = opts.atol + opts.rtol * u[i].norm().max(u_new[i].norm());
            err_acc += ((err * h).norm() / sc).powi(2);
        }
        let err_norm = (err_acc / dim as f64).sqrt();
        if err_norm <= 1.0 {
            s += dir * h;
            u = u_new;
            du = k[6].clone();
            if norm(&u) > opts.blowup || !u.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::BlowUp { reached: s });
            }
            knots.push(Knot { s, u: u.clone(), du: du.clone(), ddu: Vec::new() });
        }
        let factor = if err_norm == 0.0 { 5.0 } else { (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    Ok(knots)
}

fn second_derivative(rhs: &dyn ProfileRhs, s: f64, u: &[Scalar], du: &[Scalar]) -> Result<Vec<Scalar>> {
    let sj = Jet1::new(re(s), re(1.0), re(0.0));
    let uj: Vec<Jet1> = u.iter().zip(du).map(|(a, b)| Jet1::new(*a, *b, re(0.0))).collect();
    Ok(rhs.eval_jet(sj, &uj)?.into_iter().map(|j| j.x).collect())
}

/// Dense solution of an autonomous-in-form reduced system on `[lo, hi]`.
#[derive(Clone)]
pub struct Profile {
    rhs: Arc<dyn ProfileRhs>,
    knots: Vec<Knot>,
    lo: f64,
    hi: f64,
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Profile")
            .field("rhs", &self.rhs)
            .field("range", &(self.lo, self.hi))
            .field("knots", &self.knots.len())
            .finish()
    }
}

impl Profile {
    /// Integrate both ways from `s0` (which must lie in `[lo, hi]`).
    pub fn integrate(
        rhs: Arc<dyn ProfileRhs>,
        s0: f64,
        u0: &[Scalar],
        lo: f64,
        hi: f64,
        opts: &OdeOptions,
    ) -> Result<Profile> {
        if !(lo <= s0 && s0 <= hi) || lo >= hi {
            return Err(Error::InvalidInput(format!(
                "range [{lo}, {hi}] must contain the initial parameter {s0}"
            )));
        }
        if u0.len() != rhs.dim() {
            return Err(Error::InvalidInput("initial state has wrong dimension".into()));
        }
        let f = |s: f64, u: &[Scalar]| rhs.eval(re(s), u);
        let fwd = integrate(f, s0, u0, hi, opts)?;
        let bwd = integrate(f, s0, u0, lo, opts)?;
        let mut knots: Vec<Knot> = bwd.into_iter().skip(1).rev().collect();
        knots.extend(fwd);
        for k in knots.iter_mut() {
            k.ddu = second_derivative(rhs.as_ref(), k.s, &k.u, &k.du)?;
        }
        Ok(Profile { rhs, knots, lo, hi })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn knots(&self) -> &[Knot] {
        &self.knots
    }

    pub fn rhs(&self) -> &Arc<dyn ProfileRhs> {
        &self.rhs
    }

    fn real_arg(&self, s: Scalar) -> Result<f64> {
        let tol = 1e-12 * (1.0 + s.norm());
        if s.im.abs() > tol || s.re < self.lo - tol || s.re > self.hi + tol {
            return Err(Error::OutOfRange { s: s.to_string(), lo: self.lo, hi: self.hi });
        }
        Ok(s.re.clamp(self.lo, self.hi))
    }

    /// Quintic Hermite interpolation of the state.
    pub fn state(&self, s: Scalar) -> Result<Vec<Scalar>> {
        let s = self.real_arg(s)?;
        let idx = match self.knots.binary_search_by(|k| k.s.total_cmp(&s)) {
            Ok(i) => return Ok(self.knots[i].u.clone()),
            Err(i) => i.clamp(1, self.knots.len() - 1),
        };
        let (k0, k1) = (&self.knots[idx - 1], &self.knots[idx]);
        let h = k1.s - k0.s;
        let t = (s - k0.s) / h;
        let (t2, t3) = (t * t, t * t * t);
        let (t4, t5) = (t3 * t, t3 * t2);
        let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
        let h1 = (t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5) * h;
        let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5) * h * h;
        let h3 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
        let h4 = (-4.0 * t3 + 7.0 * t4 - 3.0 * t5) * h;
        let h5 = 0.5 * (t3 - 2.0 * t4 + t5) * h * h;
        Ok((0..k0.u.len())
            .map(|i| {
                k0.u[i] * h0 + k0.du[i] * h1 + k0.ddu[i] * h2 + k1.u[i] * h3 + k1.du[i] * h4 + k1.ddu[i] * h5
            })
            .collect())
    }

    /// State with first and second derivatives; the derivatives come from
    /// the right-hand side, not from the interpolant.
    pub fn eval(&self, s: Scalar) -> Result<[Vec<Scalar>; 3]> {
        let sr = self.real_arg(s)?;
        let u = self.state(s)?;
        let du = self.rhs.eval(re(sr), &u)?;
        let ddu = second_derivative(self.rhs.as_ref(), sr, &u, &du)?;
        Ok([u, du, ddu])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_to_tolerance() {
        let knots = integrate(|_, u| Ok(vec![-u[0]]), 0.0, &[re(1.0)], 2.0, &OdeOptions::default()).unwrap();
        let last = knots.last().unwrap();
        assert_eq!(last.s, 2.0);
        assert!((last.u[0] - re((-2.0f64).exp())).norm() < 1e-10);
    }

    #[test]
    fn blow_up_detected() {
        // u' = u^2, u(0) = 1 blows up at s = 1
        let r = integrate(|_, u| Ok(vec![u[0] * u[0]]), 0.0, &[re(1.0)], 2.0, &OdeOptions::default());
        match r {
            Err(Error::BlowUp { reached }) => assert!(reached < 1.0 && reached > 0.99),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }
}
