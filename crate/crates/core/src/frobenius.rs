//! Frobenius 3-fold germs over a flat web: constant metric, idempotents
//! `e_i = α_i ∂t + K(∂x + p_i ∂y)/N_i`, the semisimple product, the Euler
//! field, a finite-difference verification suite, and the kind1
//! obstruction `1/δ → 0` at singular points.

use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::chern::{gamma_at, integrating_factor, KConvention};
use crate::error::{Error, Result};
use crate::jet::Jet1;
use crate::scalar::{rat_to_f64, re, Rat, Scalar};
use crate::wdvv::Kind;
use crate::web::{discriminant, on_discriminant, track_roots, CubicWeb};

pub type Point = (Scalar, Scalar);

/// Components `(c_t, c_x, c_y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TangentVector(pub [Scalar; 3]);

impl TangentVector {
    pub fn unity() -> Self {
        TangentVector([re(1.0), re(0.0), re(0.0)])
    }
    pub fn basis(i: usize) -> Self {
        let mut c = [re(0.0); 3];
        c[i] = re(1.0);
        TangentVector(c)
    }
    pub fn scale(self, a: Scalar) -> Self {
        TangentVector(self.0.map(|c| c * a))
    }
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl std::ops::Add for TangentVector {
    type Output = TangentVector;
    fn add(self, o: TangentVector) -> Self {
        TangentVector([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl std::ops::Sub for TangentVector {
    type Output = TangentVector;
    fn sub(self, o: TangentVector) -> Self {
        self + o.scale(re(-1.0))
    }
}

/// Constant metric in the coordinates `(t, x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metric {
    pub kind: Kind,
    pub delta: Scalar,
    pub matrix: [[Scalar; 3]; 3],
}

impl Metric {
    pub fn new(kind: Kind, delta: Scalar) -> Result<Self> {
        if delta.norm() == 0.0 || !delta.re.is_finite() || !delta.im.is_finite() {
            return Err(Error::InvalidInput("metric parameter δ must be finite and nonzero".into()));
        }
        let (o, l) = (re(0.0), re(1.0));
        let matrix = match kind {
            Kind::Kind0 => [[o, l, o], [l, o, o], [o, o, delta]],
            Kind::Kind1 => [[delta, o, o], [o, o, l], [o, l, o]],
        };
        Ok(Metric { kind, delta, matrix })
    }

    pub fn inner(&self, u: &TangentVector, v: &TangentVector) -> Scalar {
        let mut s = re(0.0);
        for i in 0..3 {
            for j in 0..3 {
                s += u.0[i] * self.matrix[i][j] * v.0[j];
            }
        }
        s
    }
}

/// How `K` (with `dK/K = γ`) is obtained at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum KSource {
    Constant(Scalar),
    /// Integrated along the straight segment from an anchor.
    Path { anchor: Point, k_anchor: Scalar },
}

#[derive(Debug, Clone)]
pub struct FrobeniusGerm {
    pub web: CubicWeb,
    pub metric: Metric,
    /// `(w_t, w_x, w_y)`
    pub weights: Option<[Rat; 3]>,
    pub k: KSource,
}

fn time_weight(kind: Kind, w: (Rat, Rat)) -> Rat {
    match kind {
        Kind::Kind0 => w.1 * 2 - w.0,
        Kind::Kind1 => (w.0 + w.1) / 2,
    }
}

impl FrobeniusGerm {
    /// `K ≡ −1`, `δ = 1`.
    pub fn kind0(web: CubicWeb) -> Result<Self> {
        let weights = web.weights.map(|w| [time_weight(Kind::Kind0, w), w.0, w.1]);
        Ok(FrobeniusGerm { web, metric: Metric::new(Kind::Kind0, re(1.0))?, weights, k: KSource::Constant(re(-1.0)) })
    }

    /// `K` by path integration from `anchor`, normalized so that
    /// `δ = K²/(SA − B) = 1` there.
    pub fn kind1(web: CubicWeb, anchor: Point) -> Result<Self> {
        let [s, a, b] = web.sab_at(anchor.0, anchor.1)?;
        let q = s * a - b;
        if q.norm() < 1e-14 {
            return Err(Error::DenominatorZero("SA − B at the anchor".into()));
        }
        let weights = web.weights.map(|w| [time_weight(Kind::Kind1, w), w.0, w.1]);
        Ok(FrobeniusGerm {
            web,
            metric: Metric::new(Kind::Kind1, re(1.0))?,
            weights,
            k: KSource::Path { anchor, k_anchor: -q.sqrt() },
        })
    }

    pub fn kind(&self) -> Kind {
        self.metric.kind
    }

    pub fn k_at(&self, x: Scalar, y: Scalar) -> Result<Scalar> {
        match self.k {
            KSource::Constant(k) => Ok(k),
            KSource::Path { anchor, k_anchor } => {
                integrating_factor(&self.web, &[anchor, (x, y)], k_anchor, KConvention::DkOverKEqualsGamma)
            }
        }
    }

    pub fn to_json(&self) -> Value {
        let c = |z: Scalar| json!([z.re, z.im]);
        json!({
            "web": self.web.name,
            "kind": self.metric.kind,
            "delta": c(self.metric.delta),
            "metric": self.metric.matrix.iter().map(|r| r.iter().map(|z| c(*z)).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "weights": self.weights.map(|w| w.map(|r| r.to_string())),
            "k": match self.k {
                KSource::Constant(k) => json!({"constant": c(k)}),
                KSource::Path { anchor, k_anchor } => json!({"anchor": [c(anchor.0), c(anchor.1)], "k_anchor": c(k_anchor)}),
            },
        })
    }
}

/// `(α, β, 1 − α − β)` for ordered roots.
pub fn time_components(kind: Kind, p: [Scalar; 3]) -> [Scalar; 3] {
    let [p1, p2, p3] = p;
    let (a, b) = match kind {
        Kind::Kind0 => (
            (p2 * p3 - p1 * (p2 + p3)) / (2.0 * (p1 - p2) * (p1 - p3)),
            (p1 * p3 - p2 * (p1 + p3)) / (2.0 * (p2 - p1) * (p2 - p3)),
        ),
        Kind::Kind1 => (
            (p1 + p2) * (p1 + p3) / ((p1 - p2) * (p1 - p3)),
            (p2 + p1) * (p2 + p3) / ((p2 - p1) * (p2 - p3)),
        ),
    };
    [a, b, 1.0 - a - b]
}

/// Idempotents for ordered roots and a value of `K`.
pub fn idempotents_from_roots(kind: Kind, p: [Scalar; 3], k: Scalar) -> [TangentVector; 3] {
    let [p1, p2, p3] = p;
    let n = [(p3 - p1) * (p1 - p2), (p1 - p2) * (p2 - p3), (p2 - p3) * (p3 - p1)];
    let alpha = time_components(kind, p);
    [0, 1, 2].map(|i| TangentVector([alpha[i], k / n[i], k * p[i] / n[i]]))
}

fn regular_roots(germ: &FrobeniusGerm, x: Scalar, y: Scalar) -> Result<[Scalar; 3]> {
    if germ.web.is_degenerate() {
        return Err(Error::SingularBasis);
    }
    let [s, a, b] = germ.web.sab_at(x, y)?;
    let d = discriminant(&s, &a, &b);
    if on_discriminant(s, a, b, d) {
        return Err(Error::OnDiscriminant(d.norm()));
    }
    let r = germ.web.roots_at(x, y)?;
    if r.partition.len() != 3 {
        return Err(Error::OnDiscriminant(d.norm()));
    }
    Ok(r.roots)
}

pub fn idempotents_at(germ: &FrobeniusGerm, x: Scalar, y: Scalar) -> Result<[TangentVector; 3]> {
    let p = regular_roots(germ, x, y)?;
    Ok(idempotents_from_roots(germ.kind(), p, germ.k_at(x, y)?))
}

/// Coefficients of `u` in the idempotent basis.
fn expand(e: &[TangentVector; 3], u: &TangentVector) -> Result<[Scalar; 3]> {
    let m = Matrix3::from_fn(|r, c| e[c].0[r]);
    let scale: f64 = e.iter().map(|v| v.norm()).product();
    if !(m.determinant().norm() > 1e-12 * scale) {
        return Err(Error::SingularBasis);
    }
    let lu = m.lu();
    let sol = lu.solve(&nalgebra::Vector3::new(u.0[0], u.0[1], u.0[2])).ok_or(Error::SingularBasis)?;
    Ok([sol[0], sol[1], sol[2]])
}

fn product_in(e: &[TangentVector; 3], u: &TangentVector, v: &TangentVector) -> Result<TangentVector> {
    let a = expand(e, u)?;
    let b = expand(e, v)?;
    Ok((0..3).fold(TangentVector([re(0.0); 3]), |acc, i| acc + e[i].scale(a[i] * b[i])))
}

pub fn multiply(germ: &FrobeniusGerm, u: &TangentVector, v: &TangentVector, x: Scalar, y: Scalar) -> Result<TangentVector> {
    let e = idempotents_at(germ, x, y)?;
    product_in(&e, u, v)
}

/// `(w_t, w_x, w_y)` of `E = w_t t∂t + w_x x∂x + w_y y∂y`.
pub fn euler(germ: &FrobeniusGerm) -> Result<[Rat; 3]> {
    germ.weights.ok_or(Error::MissingWeights)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub max_residual: f64,
    pub points: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
    /// Fitted `c` in `L_E g = c g`.
    pub euler_constant: Option<f64>,
    pub fd_step: f64,
    pub tol: f64,
    #[serde(skip)]
    pub germ: Value,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
    pub fn residual(&self, name: &str) -> Option<f64> {
        self.checks.iter().find(|c| c.name == name).map(|c| c.max_residual)
    }
    pub fn to_json(&self) -> Value {
        json!({
            "checks": self.checks,
            "euler_constant": self.euler_constant,
            "fd_step": self.fd_step,
            "tol": self.tol,
            "germ": self.germ,
        })
    }
}

pub const CHECK_NAMES: [&str; 7] =
    ["unity", "orthogonality", "commutativity", "product", "invariance", "euler", "potentiality"];

fn distance_to_discriminant(web: &CubicWeb, x: Scalar, y: Scalar) -> Result<f64> {
    let sab = web.sab_jets(x, y, 1)?.map(|j| j.to_jet1());
    let d: Jet1 = discriminant(&sab[0], &sab[1], &sab[2]);
    let g = (d.x.norm_sqr() + d.y.norm_sqr()).sqrt();
    Ok(if g == 0.0 { f64::INFINITY } else { d.v.norm() / g })
}

/// Structure constants `c_abc = ⟨∂_a·∂_b, ∂_c⟩`.
fn structure_constants(germ: &FrobeniusGerm, e: &[TangentVector; 3]) -> Result<[[[Scalar; 3]; 3]; 3]> {
    let mut c = [[[re(0.0); 3]; 3]; 3];
    for a in 0..3 {
        for b in a..3 {
            let ab = product_in(e, &TangentVector::basis(a), &TangentVector::basis(b))?;
            for k in 0..3 {
                let v = germ.metric.inner(&ab, &TangentVector::basis(k));
                c[a][b][k] = v;
                c[b][a][k] = v;
            }
        }
    }
    Ok(c)
}

#[derive(Debug, Default, Clone, Copy)]
struct PointResiduals {
    r: [f64; 7],
}

fn euler_fit(weights: [Rat; 3], metric: &Metric, h: f64) -> (f64, f64) {
    let w = weights.map(rat_to_f64);
    let p = [1.0, 0.7, 1.3];
    let field = |q: [f64; 3]| [w[0] * q[0], w[1] * q[1], w[2] * q[2]];
    // ∂_i E^k by central differences
    let mut de = [[0.0; 3]; 3];
    for i in 0..3 {
        let (mut qp, mut qm) = (p, p);
        qp[i] += h;
        qm[i] -= h;
        let (ep, em) = (field(qp), field(qm));
        for k in 0..3 {
            de[i][k] = (ep[k] - em[k]) / (2.0 * h);
        }
    }
    let g = metric.matrix;
    let mut lg = [[re(0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                lg[i][j] += g[k][j] * de[i][k] + g[i][k] * de[j][k];
            }
        }
    }
    let (mut num, mut den) = (re(0.0), 0.0);
    for i in 0..3 {
        for j in 0..3 {
            num += lg[i][j] * g[i][j].conj();
            den += g[i][j].norm_sqr();
        }
    }
    let c = num / den;
    let mut res = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            res = res.max((lg[i][j] - c * g[i][j]).norm());
        }
    }
    (c.re, res)
}

fn point_residuals(germ: &FrobeniusGerm, x: Scalar, y: Scalar, h: f64, seed: u64) -> Result<PointResiduals> {
    let kind = germ.kind();
    let p0 = regular_roots(germ, x, y)?;
    let k0 = germ.k_at(x, y)?;
    let e = idempotents_from_roots(kind, p0, k0);
    let mut out = PointResiduals::default();

    out.r[0] = (e[0] + e[1] + e[2] - TangentVector::unity()).norm();
    for i in 0..3 {
        for j in i + 1..3 {
            out.r[1] = out.r[1].max(germ.metric.inner(&e[i], &e[j]).norm());
        }
    }

    // commutativity: [e_i, e_j]^c = e_i(e_j^c) − e_j(e_i^c); t-derivatives vanish.
    // Residuals are scaled by the size of the cancelling terms once that exceeds 1.
    let at = |dx: f64, dy: f64| -> Result<[TangentVector; 3]> {
        let (xs, ys) = (x + dx, y + dy);
        let p = track_roots(&p0, &regular_roots(germ, xs, ys)?);
        Ok(idempotents_from_roots(kind, p, germ.k_at(xs, ys)?))
    };
    let (xp, xm, yp, ym) = (at(h, 0.0)?, at(-h, 0.0)?, at(0.0, h)?, at(0.0, -h)?);
    let d = |i: usize, c: usize| {
        ((xp[i].0[c] - xm[i].0[c]) / (2.0 * h), (yp[i].0[c] - ym[i].0[c]) / (2.0 * h))
    };
    for i in 0..3 {
        for j in i + 1..3 {
            for c in 0..3 {
                let (djx, djy) = d(j, c);
                let (dix, diy) = d(i, c);
                let terms = [e[i].0[1] * djx, e[i].0[2] * djy, e[j].0[1] * dix, e[j].0[2] * diy];
                let br = terms[0] + terms[1] - terms[2] - terms[3];
                let mag: f64 = terms.iter().map(|t| t.norm()).sum();
                out.r[2] = out.r[2].max(br.norm() / mag.max(1.0));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rv = || TangentVector([0; 3].map(|_| Scalar::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
    for _ in 0..10 {
        let (u, v, w) = (rv(), rv(), rv());
        let uv = product_in(&e, &u, &v)?;
        let vu = product_in(&e, &v, &u)?;
        let vw = product_in(&e, &v, &w)?;
        let left = product_in(&e, &uv, &w)?;
        let right = product_in(&e, &u, &vw)?;
        let unit = product_in(&e, &TangentVector::unity(), &u)?;
        out.r[3] = out.r[3].max((left - right).norm()).max((uv - vu).norm()).max((unit - u).norm());
        let inv = germ.metric.inner(&uv, &w) - germ.metric.inner(&u, &vw);
        out.r[4] = out.r[4].max(inv.norm());
    }

    // potentiality: ∂_d c_abc symmetric in (d, a)
    let c_at = |dx: f64, dy: f64| -> Result<[[[Scalar; 3]; 3]; 3]> {
        let (xs, ys) = (x + dx, y + dy);
        let p = track_roots(&p0, &regular_roots(germ, xs, ys)?);
        structure_constants(germ, &idempotents_from_roots(kind, p, germ.k_at(xs, ys)?))
    };
    let (cxp, cxm, cyp, cym) = (c_at(h, 0.0)?, c_at(-h, 0.0)?, c_at(0.0, h)?, c_at(0.0, -h)?);
    let dc = |dir: usize, a: usize, b: usize, c: usize| match dir {
        0 => re(0.0),
        1 => (cxp[a][b][c] - cxm[a][b][c]) / (2.0 * h),
        _ => (cyp[a][b][c] - cym[a][b][c]) / (2.0 * h),
    };
    for dd in 0..3 {
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    let (u, v) = (dc(dd, a, b, c), dc(a, dd, b, c));
                    out.r[6] = out.r[6].max((u - v).norm() / (u.norm() + v.norm()).max(1.0));
                }
            }
        }
    }
    Ok(out)
}

/// Run the seven checks on a grid of regular points.
pub fn verify(germ: &FrobeniusGerm, grid: &[Point], fd_step: f64, tol: f64) -> Result<VerificationReport> {
    if !(fd_step > 0.0) || !(tol > 0.0) {
        return Err(Error::InvalidInput("fd_step and tol must be positive".into()));
    }
    if germ.web.is_degenerate() {
        return Err(Error::SingularBasis);
    }
    for &(x, y) in grid {
        let dist = distance_to_discriminant(&germ.web, x, y)?;
        if dist < 10.0 * fd_step {
            return Err(Error::GridTouchesDiscriminant { x: x.to_string(), y: y.to_string() });
        }
    }
    let per_point: Vec<PointResiduals> = grid
        .par_iter()
        .enumerate()
        .map(|(n, &(x, y))| point_residuals(germ, x, y, fd_step, 1000 + n as u64))
        .collect::<Result<_>>()?;
    let mut max = [0.0f64; 7];
    for p in &per_point {
        for i in 0..7 {
            max[i] = max[i].max(p.r[i]);
        }
    }
    let euler_constant = germ.weights.map(|w| {
        let (c, res) = euler_fit(w, &germ.metric, fd_step);
        max[5] = res;
        c
    });
    let checks = CHECK_NAMES
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != 5 || euler_constant.is_some())
        .map(|(i, name)| CheckResult { name: name.to_string(), max_residual: max[i], points: grid.len(), pass: max[i] < tol })
        .collect();
    Ok(VerificationReport { checks, euler_constant, fd_step, tol, germ: germ.to_json() })
}

/// `n × n` grid centred at `(cx, cy)` with spacing `h`.
pub fn grid_around(cx: f64, cy: f64, n: usize, h: f64) -> Vec<Point> {
    let off = (n as f64 - 1.0) / 2.0;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push((re(cx + (i as f64 - off) * h), re(cy + (j as f64 - off) * h)));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum DeltaLimit {
    /// `1/δ → 0`: no kind1 metric extends to the singular point.
    Obstructed { limit: Scalar },
    Finite { delta: Scalar },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaObstruction {
    pub result: DeltaLimit,
    /// `(t, 1/δ)` along `target + t (start − target)`.
    pub samples: Vec<(f64, Scalar)>,
}

fn neville_at_zero(xs: &[f64], ys: &[Scalar]) -> Scalar {
    let mut p = ys.to_vec();
    let n = xs.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (p[i + 1] * xs[i] - p[i] * xs[i + k]) / (xs[i] - xs[i + k]);
        }
    }
    p[0]
}

/// Limit of `1/δ = (SA − B)/K²` approaching `target` along a straight line
/// from `start`, with `K` path-integrated and normalized so `1/δ = 1` at
/// `start`.
pub fn delta_obstruction(web: &CubicWeb, start: Point, target: Point, steps: usize) -> Result<DeltaObstruction> {
    let q_at = |p: Point| -> Result<Scalar> {
        let [s, a, b] = web.sab_at(p.0, p.1)?;
        Ok(s * a - b)
    };
    let q0 = q_at(start)?;
    if q0.norm() < 1e-14 {
        return Err(Error::DenominatorZero("SA − B at the start point".into()));
    }
    let mut k = q0.sqrt();
    let mut prev = start;
    let mut samples = Vec::with_capacity(steps);
    for n in 1..=steps.max(4) {
        let t = 0.5f64.powi(n as i32);
        let p = (target.0 + (start.0 - target.0) * t, target.1 + (start.1 - target.1) * t);
        k = integrating_factor(web, &[prev, p], k, KConvention::DkOverKEqualsGamma)?;
        samples.push((t, q_at(p)? / (k * k)));
        prev = p;
    }
    let n = samples.len();
    let ts: Vec<f64> = samples[n - 4..].iter().map(|s| s.0).collect();
    let vs: Vec<Scalar> = samples[n - 4..].iter().map(|s| s.1).collect();
    let limit = neville_at_zero(&ts, &vs);
    let result = if limit.norm() < 1e-6 { DeltaLimit::Obstructed { limit } } else { DeltaLimit::Finite { delta: 1.0 / limit } };
    Ok(DeltaObstruction { result, samples })
}

/// `max |2g1 − ∂x ln(SA−B)| + |2g2 − ∂y ln(SA−B)|` over the grid.
pub fn kind1_connection_check(web: &CubicWeb, grid: &[Point]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &(x, y) in grid {
        let [s, a, b] = web.sab_jets(x, y, 1)?.map(|j| j.to_jet1());
        let q = s * a - b;
        if q.v.norm() < 1e-14 {
            return Err(Error::DenominatorZero(format!("SA − B at ({x}, {y})")));
        }
        let g = gamma_at(web, x, y)?;
        let r = (2.0 * g.g1 - q.x / q.v).norm() + (2.0 * g.g2 - q.y / q.v).norm();
        worst = worst.max(r);
    }
    Ok(worst)
}
