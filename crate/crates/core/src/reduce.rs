//! Webs with a one-parameter symmetry: shear fitting for the elliptic forms
//! and integration of the reduced ODE systems in the parabolic and
//! hyperbolic families, plus the Riccati route for the parabolic scale
//! function `F`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_integer::Integer;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::field::{tan_pole_in, Field, ProfileField};
use crate::jet::{Analytic, Jet1};
use crate::ode::{OdeOptions, Profile, ProfileRhs};
use crate::poly::QPoly;
use crate::scalar::{q, rat, re, Q, Rat, Ring, Scalar};
use crate::wdvv::{wdvv0_exact, wdvv0_from_sab};
use crate::web::{shear_sab, CubicWeb};

// ---------------------------------------------------------------- shear fit

fn lagrange_basis(n: usize) -> Vec<Vec<Q>> {
    (0..n)
        .map(|i| {
            let mut c = vec![q(1, 1)];
            for j in 0..n {
                if j == i {
                    continue;
                }
                let d = q(i as i128 - j as i128, 1);
                let mut next = vec![Q::zero(); c.len() + 1];
                for (e, ce) in c.iter().enumerate() {
                    next[e + 1] += *ce / d;
                    next[e] -= *ce * q(j as i128, 1) / d;
                }
                c = next;
            }
            c
        })
        .collect()
}

fn eval_q(c: &[Q], r: &Q) -> Q {
    c.iter().rev().fold(Q::zero(), |acc, ci| acc * r + ci)
}

fn divisors(n: i128) -> Vec<i128> {
    let n = n.abs();
    let mut out = Vec::new();
    let mut d = 1i128;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            out.push(n / d);
        }
        d += 1;
    }
    out
}

/// Rational roots of a polynomial given by ascending coefficients.
fn rational_roots(c: &[Q]) -> Result<Vec<Q>> {
    let mut c: Vec<Q> = c.to_vec();
    while c.last().is_some_and(|x| x.is_zero()) {
        c.pop();
    }
    if c.is_empty() {
        return Ok(Vec::new());
    }
    let mut roots = Vec::new();
    let lead_zeros = c.iter().take_while(|x| x.is_zero()).count();
    if lead_zeros > 0 {
        roots.push(Q::zero());
        c.drain(..lead_zeros);
    }
    if c.len() == 1 {
        return Ok(roots);
    }
    let l = c.iter().fold(1i128, |acc, x| acc.lcm(x.denom()));
    let ints: Vec<i128> = c.iter().map(|x| (x * Q::from_integer(l)).to_integer()).collect();
    let (lo, hi) = (ints[0], *ints.last().unwrap());
    if lo.abs() > 1_000_000_000_000 || hi.abs() > 1_000_000_000_000 {
        return Err(Error::InvalidInput("shear equation coefficients too large for the rational root search".into()));
    }
    for p in divisors(lo) {
        for qd in divisors(hi) {
            for sign in [1, -1] {
                let cand = Q::new(sign * p, qd);
                if !roots.contains(&cand) && eval_q(&c, &cand).is_zero() {
                    roots.push(cand);
                }
            }
        }
    }
    roots.sort();
    Ok(roots)
}

fn first_equation(sab: &[QPoly; 3], k: u32, r: &Q) -> Result<QPoly> {
    let sheared = shear_sab(sab, k, r)?;
    Ok(wdvv0_exact(&sheared)[0].clone())
}

/// Shear parameter `r` of `ȳ = y + r x^k` that makes a polynomial web satisfy
/// the first WDVV0 equation; the other two are then checked exactly.
pub fn shear_fit(web: &CubicWeb, k: u32) -> Result<Q> {
    if !(2..=3).contains(&k) {
        return Err(Error::InvalidInput("shear exponent k must be 2 or 3".into()));
    }
    let sab = web
        .exact_sab()
        .ok_or_else(|| Error::NotPolynomial("shear fitting needs a monic web with rational coefficients".into()))?;
    let ydeg = sab
        .iter()
        .filter_map(|p| p.max_y_degree())
        .max()
        .unwrap_or(Rat::from_integer(0))
        .ceil()
        .to_integer()
        .max(0) as usize;
    let n = ydeg + 5;
    let mut samples: BTreeMap<(Rat, Rat), Vec<Q>> = BTreeMap::new();
    for i in 0..n {
        let eq = first_equation(&sab, k, &q(i as i128, 1))?;
        for (m, e, c) in eq.terms() {
            samples.entry((m, e)).or_insert_with(|| vec![Q::zero(); n])[i] = *c;
        }
    }
    let basis = lagrange_basis(n);
    let coeff_polys: Vec<Vec<Q>> = samples
        .values()
        .map(|vals| {
            let mut c = vec![Q::zero(); n];
            for (v, b) in vals.iter().zip(&basis) {
                for (ci, bi) in c.iter_mut().zip(b) {
                    *ci += v * bi;
                }
            }
            c
        })
        .collect();
    let candidates = match coeff_polys.iter().filter(|c| c.iter().any(|x| !x.is_zero())).min_by_key(|c| {
        c.iter().rposition(|x| !x.is_zero()).unwrap_or(0)
    }) {
        None => vec![Q::zero()],
        Some(c) => rational_roots(c)?,
    };
    let mut failure = None;
    for r in candidates {
        if !coeff_polys.iter().all(|c| eval_q(c, &r).is_zero()) {
            continue;
        }
        let res = wdvv0_exact(&shear_sab(&sab, k, &r)?);
        if res[0].is_zero_poly() && res[1].is_zero_poly() && res[2].is_zero_poly() {
            return Ok(r);
        }
        failure = Some(format!("r = {r} solves the first equation but leaves {:?} / {:?}", res[1], res[2]));
    }
    Err(failure.map_or(Error::NoSolution, Error::RemainingEquationsFail))
}

// -------------------------------------------------------- reduced systems

fn parabolic_rhs<T: Analytic>(u: &[T]) -> Vec<T> {
    let (a, b) = (u[1].clone(), u[2].clone());
    let s = u[0].clone();
    vec![a.clone(), T::from_int(6) * b.clone(), T::from_int(4) * s * b - a.clone() * a]
}

fn hyperbolic_rhs<T: Analytic>(k: Scalar, s: T, u: &[T]) -> Result<Vec<T>> {
    let (sg, al, be) = (u[0].clone(), u[1].clone(), u[2].clone());
    let k = T::constant(k);
    let k1 = k.clone() + T::one();
    let ks = k.clone() * s;
    let den = T::one() - ks.clone() * sg.clone() + ks.clone() * ks.clone() * al.clone()
        - ks.clone() * ks.clone() * ks.clone() * be.clone();
    if den.value().norm() < 1e-12 {
        return Err(Error::DenominatorZero(format!("1 − ksσ + k²s²α − k³s³β at ks = {}", ks.value())));
    }
    let three = T::from_int(3);
    let d_sigma = k1.clone() * al.clone() - k1.clone() * ks.clone() * (sg.clone() * al.clone() - three.clone() * be.clone())
        + k1.clone() * ks.clone() * ks.clone() * sg.clone() * be.clone();
    let d_alpha = T::from_int(6) * k1.clone() * be.clone()
        - T::from_int(2) * k1.clone() * ks.clone() * (al.clone() * al.clone() - sg.clone() * be.clone())
        + T::from_int(2) * k1.clone() * ks.clone() * ks.clone() * al.clone() * be.clone();
    let d_beta = -(k1.clone() * (al.clone() * al.clone() - T::from_int(4) * sg * be.clone()))
        - T::from_int(2) * k1.clone() * ks.clone() * al * be.clone()
        + three * k1 * ks.clone() * ks * be.clone() * be;
    Ok(vec![d_sigma / den.clone(), d_alpha / den.clone(), d_beta / den])
}

/// `s′ = a, a′ = 6b, b′ = 4sb − a²` in the variable `x`.
#[derive(Debug, Clone, Copy)]
pub struct ParabolicRhs;

impl ProfileRhs for ParabolicRhs {
    fn dim(&self) -> usize {
        3
    }
    fn eval(&self, _s: Scalar, u: &[Scalar]) -> Result<Vec<Scalar>> {
        Ok(parabolic_rhs(u))
    }
    fn eval_jet(&self, _s: Jet1, u: &[Jet1]) -> Result<Vec<Jet1>> {
        Ok(parabolic_rhs(u))
    }
    fn name(&self) -> &'static str {
        "parabolic"
    }
    fn params(&self) -> Value {
        json!({})
    }
}

/// Reduced hyperbolic system for `(σ̃, α̃, β̃)(s)`, `s = x y^r`.
#[derive(Debug, Clone, Copy)]
pub struct HyperbolicRhs {
    pub m0: u32,
    pub k: f64,
}

impl HyperbolicRhs {
    pub fn new(m0: u32) -> Self {
        HyperbolicRhs { m0, k: (1.0 + m0 as f64) / 2.0 }
    }
}

impl ProfileRhs for HyperbolicRhs {
    fn dim(&self) -> usize {
        3
    }
    fn eval(&self, s: Scalar, u: &[Scalar]) -> Result<Vec<Scalar>> {
        hyperbolic_rhs(re(self.k), s, u)
    }
    fn eval_jet(&self, s: Jet1, u: &[Jet1]) -> Result<Vec<Jet1>> {
        hyperbolic_rhs(re(self.k), s, u)
    }
    fn name(&self) -> &'static str {
        "hyperbolic"
    }
    fn params(&self) -> Value {
        json!({ "m0": self.m0, "k": self.k })
    }
}

/// Right-hand side of the hyperbolic system at a point, exposed for oracles.
pub fn hyperbolic_derivatives(m0: u32, s: Scalar, state: [Scalar; 3]) -> Result<[Scalar; 3]> {
    let v = HyperbolicRhs::new(m0).eval(s, &state)?;
    Ok([v[0], v[1], v[2]])
}

/// Solve WDVV0 for `(σ̃′, α̃′, β̃′)` after substituting
/// `S = y^{1+r}σ̃(s), A = y^{2(1+r)}α̃(s), B = y^{3(1+r)}β̃(s)` at `y = 1`.
/// Independent of the printed reduced system.
pub fn hyperbolic_rederive(m0: u32, s: Scalar, state: [Scalar; 3]) -> Result<[Scalar; 3]> {
    let r = (1.0 + m0 as f64) / 2.0;
    let residual = |d: [Scalar; 3]| {
        let dx = d;
        let dy = [0, 1, 2].map(|i| (i as f64 + 1.0) * (1.0 + r) * state[i] + r * s * d[i]);
        wdvv0_from_sab(&state, &dx, &dy)
    };
    let c = residual([re(0.0); 3]);
    let mut m = [[re(0.0); 3]; 3];
    for j in 0..3 {
        let mut e = [re(0.0); 3];
        e[j] = re(1.0);
        let col = residual(e);
        for i in 0..3 {
            m[i][j] = col[i] - c[i];
        }
    }
    let det3 = |m: &[[Scalar; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let det = det3(&m);
    if det.norm() < 1e-14 {
        return Err(Error::DenominatorZero("reduced WDVV0 system is singular".into()));
    }
    let mut out = [re(0.0); 3];
    for (j, o) in out.iter_mut().enumerate() {
        let mut mj = m;
        for i in 0..3 {
            mj[i][j] = -c[i];
        }
        *o = det3(&mj) / det;
    }
    Ok(out)
}

fn options(step: f64) -> Result<OdeOptions> {
    if !(step > 0.0) {
        return Err(Error::InvalidInput("step must be positive".into()));
    }
    Ok(OdeOptions { max_step: step, ..OdeOptions::default() })
}

/// Parameter block plus knot table.
pub fn profile_to_json(profile: &Profile) -> Value {
    let c = |z: &Scalar| json!([z.re, z.im]);
    json!({
        "system": profile.rhs().name(),
        "params": profile.rhs().params(),
        "range": [profile.range().0, profile.range().1],
        "knots": profile.knots().iter().map(|k| json!({
            "s": k.s,
            "u": k.u.iter().map(c).collect::<Vec<_>>(),
            "du": k.du.iter().map(c).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

#[derive(Debug, Clone)]
pub struct ParabolicProfile {
    pub profile: Arc<Profile>,
    pub init: [Scalar; 3],
}

impl ParabolicProfile {
    pub fn to_json(&self) -> Value {
        let mut v = profile_to_json(&self.profile);
        v["init"] = json!(self.init.map(|z| [z.re, z.im]));
        v
    }
}

#[derive(Debug, Clone)]
pub struct HyperbolicProfile {
    pub profile: Arc<Profile>,
    pub init: [Scalar; 3],
    pub m0: u32,
    pub r: Rat,
}

impl HyperbolicProfile {
    pub fn to_json(&self) -> Value {
        let mut v = profile_to_json(&self.profile);
        v["init"] = json!(self.init.map(|z| [z.re, z.im]));
        v["r"] = json!(self.r.to_string());
        v
    }
}

fn profile_web(profile: &Arc<Profile>, exps: [Rat; 3], r: Rat, weights: (Rat, Rat), name: String) -> CubicWeb {
    let comp = |i: usize| {
        Field::Profile(ProfileField { profile: profile.clone(), component: i, a: exps[i], b: rat(0, 1), r })
    };
    CubicWeb::monic(comp(0), comp(1), comp(2), Some(weights), (re(0.0), re(0.0)), name)
}

/// Integrate the parabolic system from `x = 0` and build
/// `p³ + y s(x) p² + y² a(x) p + y³ b(x) = 0` with weights `(0, 1)`.
pub fn integrate_parabolic(s0: Scalar, a0: Scalar, b0: Scalar, x_range: (f64, f64), step: f64) -> Result<(ParabolicProfile, CubicWeb)> {
    let profile = Arc::new(Profile::integrate(Arc::new(ParabolicRhs), 0.0, &[s0, a0, b0], x_range.0, x_range.1, &options(step)?)?);
    let web = profile_web(
        &profile,
        [rat(1, 1), rat(2, 1), rat(3, 1)],
        rat(0, 1),
        (rat(0, 1), rat(1, 1)),
        format!("parabolic (s0={s0}, a0={a0}, b0={b0})"),
    );
    Ok((ParabolicProfile { profile, init: [s0, a0, b0] }, web))
}

/// `b0` that tunes the parabolic invariant to `tan²L/(−27)` when `s0 = 0` and
/// `a0 = 1/3`.
pub fn parabolic_b0_for(l: Scalar) -> Scalar {
    2.0 * l.tan() / 27.0
}

/// Integrate the hyperbolic system from `s = 0` and build the web
/// `S = y^{1+r}σ̃, A = y^{2(1+r)}α̃, B = y^{3(1+r)}β̃`, `r = (1+m0)/2`, with
/// weights `(1+m0, −2)`. Fields use the principal branch of `y^r`.
pub fn integrate_hyperbolic(
    sigma0: Scalar,
    alpha0: Scalar,
    beta0: Scalar,
    m0: u32,
    s_range: (f64, f64),
    step: f64,
) -> Result<(HyperbolicProfile, CubicWeb)> {
    let rhs = Arc::new(HyperbolicRhs::new(m0));
    let init = [sigma0, alpha0, beta0];
    let profile = Arc::new(Profile::integrate(rhs, 0.0, &init, s_range.0, s_range.1, &options(step)?)?);
    let r = rat(1 + m0 as i64, 2);
    let one_r = rat(1, 1) + r;
    let web = profile_web(
        &profile,
        [one_r, one_r * 2, one_r * 3],
        r,
        (rat(1 + m0 as i64, 1), rat(-2, 1)),
        format!("hyperbolic (m0={m0}, σ0={sigma0}, α0={alpha0}, β0={beta0})"),
    );
    Ok((HyperbolicProfile { profile, init, m0, r }, web))
}

/// `max |σ̃(s)+σ̃(−s)| + |α̃(s)−α̃(−s)| + |β̃(s)+β̃(−s)|` over the knots
/// whose mirror lies in range; zero for odd σ̃, β̃ and even α̃.
pub fn parity_residual(prof: &HyperbolicProfile) -> Result<f64> {
    let mut worst = 0.0f64;
    for k in prof.profile.knots() {
        let m = match prof.profile.state(re(-k.s)) {
            Ok(m) => m,
            Err(Error::OutOfRange { .. }) => continue,
            Err(e) => return Err(e),
        };
        worst = worst.max((k.u[0] + m[0]).norm() + (k.u[1] - m[1]).norm() + (k.u[2] + m[2]).norm());
    }
    Ok(worst)
}

/// `[108(σ²−3α)³ : (2σ³−9ασ+27β)²]` of initial data.
pub fn initial_invariant(sigma0: Scalar, alpha0: Scalar, beta0: Scalar) -> [Scalar; 2] {
    let i3 = 108.0 * (sigma0 * sigma0 - 3.0 * alpha0).powi(3);
    let j = 2.0 * sigma0.powi(3) - 9.0 * alpha0 * sigma0 + 27.0 * beta0;
    crate::invariant::projective_pair(i3, j * j)
}

// ------------------------------------------------------------ Riccati F

const TWO_SQRT3: f64 = 3.464_101_615_137_754_6;

fn tan_arg<T: Analytic>(l: Scalar, x: T) -> T {
    x * T::constant(re(TWO_SQRT3)) + T::constant(l)
}

fn riccati_rhs<T: Analytic>(l: Scalar, x: T, u: &[T]) -> Vec<T> {
    let t = tan_arg(l, x).tan();
    let (w, f) = (u[0].clone(), u[1].clone());
    let c = T::constant(re(2.0 / 3f64.sqrt()));
    vec![w.clone() * w.clone() + c * t * w.clone() - T::from_rat(rat(1, 3)), w * f]
}

fn direct_rhs<T: Analytic>(l: Scalar, x: T, u: &[T]) -> Result<Vec<T>> {
    let t = tan_arg(l, x).tan();
    let (f, fp) = (u[0].clone(), u[1].clone());
    if f.value().norm() < 1e-300 {
        return Err(Error::DenominatorZero("F vanishes".into()));
    }
    let num = T::from_int(6) * fp.clone() * fp.clone() + T::constant(re(TWO_SQRT3)) * t * f.clone() * fp.clone()
        - f.clone() * f.clone();
    Ok(vec![fp, num / (T::from_int(3) * f)])
}

/// `u′ = u² + (2/√3)tan(2√3x+L)u − 1/3` together with `F′ = uF`.
#[derive(Debug, Clone, Copy)]
pub struct RiccatiRhs {
    pub l: Scalar,
}

impl ProfileRhs for RiccatiRhs {
    fn dim(&self) -> usize {
        2
    }
    fn eval(&self, s: Scalar, u: &[Scalar]) -> Result<Vec<Scalar>> {
        Ok(riccati_rhs(self.l, s, u))
    }
    fn eval_jet(&self, s: Jet1, u: &[Jet1]) -> Result<Vec<Jet1>> {
        Ok(riccati_rhs(self.l, s, u))
    }
    fn name(&self) -> &'static str {
        "riccati"
    }
    fn params(&self) -> Value {
        json!({ "L": [self.l.re, self.l.im] })
    }
}

/// The second-order equation for `F` as a first-order system in `(F, F′)`.
#[derive(Debug, Clone, Copy)]
pub struct DirectFRhs {
    pub l: Scalar,
}

impl ProfileRhs for DirectFRhs {
    fn dim(&self) -> usize {
        2
    }
    fn eval(&self, s: Scalar, u: &[Scalar]) -> Result<Vec<Scalar>> {
        direct_rhs(self.l, s, u)
    }
    fn eval_jet(&self, s: Jet1, u: &[Jet1]) -> Result<Vec<Jet1>> {
        direct_rhs(self.l, s, u)
    }
    fn name(&self) -> &'static str {
        "scale-direct"
    }
    fn params(&self) -> Value {
        json!({ "L": [self.l.re, self.l.im] })
    }
}

#[derive(Debug, Clone)]
pub struct ScaleProfile {
    pub l: Scalar,
    pub profile: Arc<Profile>,
    /// Whether the state is `(u, F)` (Riccati) or `(F, F′)` (direct).
    pub riccati: bool,
}

impl ScaleProfile {
    /// `(F, F′, F″)` at `x`.
    pub fn f_at(&self, x: f64) -> Result<[Scalar; 3]> {
        let [u, du, ddu] = self.profile.eval(re(x))?;
        Ok(if self.riccati { [u[1], du[1], ddu[1]] } else { [u[0], du[0], ddu[0]] })
    }

    /// `3FF″ − 6F′² − 2√3 tan(2√3x+L) FF′ + F²`.
    pub fn residual(&self, x: f64) -> Result<Scalar> {
        let [f, fp, fpp] = self.f_at(x)?;
        let t = tan_arg(self.l, re(x)).tan();
        Ok(3.0 * f * fpp - 6.0 * fp * fp - TWO_SQRT3 * t * f * fp + f * f)
    }

    pub fn max_residual(&self) -> Result<f64> {
        let mut worst = 0.0f64;
        for k in self.profile.knots() {
            worst = worst.max(self.residual(k.s)?.norm());
        }
        Ok(worst)
    }
}

fn check_poles(l: Scalar, x_range: (f64, f64)) -> Result<()> {
    if let Some(p) = tan_pole_in(l, x_range.0, x_range.1) {
        return Err(Error::PoleCrossing(p));
    }
    Ok(())
}

/// Scale function through the Riccati substitution `u = F′/F`, `F(0) = 1`.
pub fn riccati_f(l: Scalar, u0: Scalar, x_range: (f64, f64), step: f64) -> Result<ScaleProfile> {
    check_poles(l, x_range)?;
    let profile = Profile::integrate(Arc::new(RiccatiRhs { l }), 0.0, &[u0, re(1.0)], x_range.0, x_range.1, &options(step)?)?;
    Ok(ScaleProfile { l, profile: Arc::new(profile), riccati: true })
}

/// The same scale function integrated directly from `(F, F′)(0)`.
pub fn direct_f(l: Scalar, f0: Scalar, fp0: Scalar, x_range: (f64, f64), step: f64) -> Result<ScaleProfile> {
    check_poles(l, x_range)?;
    let profile = Profile::integrate(Arc::new(DirectFRhs { l }), 0.0, &[f0, fp0], x_range.0, x_range.1, &options(step)?)?;
    Ok(ScaleProfile { l, profile: Arc::new(profile), riccati: false })
}

/// `K = cos(2√3x + L)^{−1/3}`.
pub fn parabolic_k(l: Scalar, x: Scalar) -> Scalar {
    tan_arg(l, x).cos().powf(-1.0 / 3.0)
}

/// `δ = −G′/(K F²)`.
pub fn dg1f_delta(g_prime: Scalar, k: Scalar, f: Scalar) -> Result<Scalar> {
    let den = k * f * f;
    if den.norm() < 1e-300 {
        return Err(Error::DenominatorZero("K F²".into()));
    }
    Ok(-g_prime / den)
}

/// Exact rational with its decimal value, for reports.
pub fn q_json(r: &Q) -> Value {
    json!({ "num": r.numer().to_string(), "den": r.denom().to_string(), "value": crate::scalar::q_to_f64(r) })
}
