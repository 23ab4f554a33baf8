//! Quartic `cubic × (w_x x dy − w_y y dx)`, its classical invariants `i`, `j`,
//! the projective invariant `[i³ : j²]`, cross-ratios and fingerprints.

use num_integer::Integer;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::scalar::{rat_to_f64, re, Rat, Scalar};
use crate::web::{sort_roots, CubicWeb};

/// `a4 dy⁴ + 4a3 dy³dx + 6a2 dy²dx² + 4a1 dy dx³ + a0 dx⁴`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticCoeffs {
    pub a: [Scalar; 5],
}

impl QuarticCoeffs {
    pub fn from_cubic(k: [Scalar; 4], weights: (Rat, Rat), x: Scalar, y: Scalar) -> Self {
        let u = re(rat_to_f64(weights.0)) * x;
        let v = re(rat_to_f64(weights.1)) * y;
        let [k3, k2, k1, k0] = k;
        QuarticCoeffs {
            a: [-v * k0, (u * k0 - v * k1) / 4.0, (u * k1 - v * k2) / 6.0, (u * k2 - v * k3) / 4.0, u * k3],
        }
    }

    pub fn i(&self) -> Scalar {
        let [a0, a1, a2, a3, a4] = self.a;
        a0 * a4 - 4.0 * a1 * a3 + 3.0 * a2 * a2
    }

    pub fn j(&self) -> Scalar {
        let [a0, a1, a2, a3, a4] = self.a;
        a4 * a2 * a0 + 2.0 * a1 * a2 * a3 - a2 * a2 * a2 - a4 * a1 * a1 - a0 * a3 * a3
    }
}

fn weights_of(web: &CubicWeb) -> Result<(Rat, Rat)> {
    web.weights.ok_or(Error::MissingWeights)
}

pub fn quartic_at(web: &CubicWeb, x: Scalar, y: Scalar) -> Result<QuarticCoeffs> {
    let w = weights_of(web)?;
    Ok(QuarticCoeffs::from_cubic(web.coeffs_at(x, y)?, w, x, y))
}

pub fn ij_at(web: &CubicWeb, x: Scalar, y: Scalar) -> Result<(Scalar, Scalar)> {
    let q = quartic_at(web, x, y)?;
    Ok((q.i(), q.j()))
}

/// `[i³ : j²]` normalized to `[0:1]`, `[1:0]` or `[1 : j²/i³]`.
pub fn projective_pair(i3: Scalar, j2: Scalar) -> [Scalar; 2] {
    if i3.norm() < 1e-10 * j2.norm() {
        [re(0.0), re(1.0)]
    } else if j2.norm() < 1e-10 * i3.norm() {
        [re(1.0), re(0.0)]
    } else {
        [re(1.0), j2 / i3]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InvariantValue {
    Pair([Scalar; 2]),
    /// The ratio `j²/i³` at the listed first-integral samples.
    Varies { samples: Vec<(f64, Scalar)> },
}

/// First-integral sample points used when the invariant varies.
pub const ELLIPTIC_SAMPLES: [f64; 3] = [0.5, 1.0, 2.0];

const S0: f64 = 0.125;
const N_SAMPLES: usize = 12;

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

/// Limit of `[i³ : j²]` at the base point. Parabolic and hyperbolic webs
/// approach along `x → 0` at unit `y` (the first integral tends to its
/// singular value); webs with `w_y = 0` approach along `y → 0` at unit `x`.
/// Elliptic webs sample the ratio over three first-integral values and
/// return `Varies` unless they agree.
pub fn limit_invariant(web: &CubicWeb) -> Result<InvariantValue> {
    let (wx, wy) = weights_of(web)?;
    let zero = Rat::from_integer(0);
    let (bx, by) = web.base_point;
    if wx * wy > zero {
        return elliptic_samples(web);
    }
    let point = |t: f64| {
        if wy == zero {
            (bx + 1.0, by + t)
        } else {
            (bx + t, by + 1.0)
        }
    };
    let mut ts = Vec::with_capacity(N_SAMPLES);
    let mut i3s = Vec::with_capacity(N_SAMPLES);
    let mut j2s = Vec::with_capacity(N_SAMPLES);
    for n in 0..N_SAMPLES {
        let t = S0 * 0.5f64.powi(n as i32);
        let (x, y) = point(t);
        let (i, j) = ij_at(web, x, y)?;
        ts.push(t);
        i3s.push(i * i * i);
        j2s.push(j * j);
    }
    let last = N_SAMPLES - 1;
    let use_w = i3s[last].norm() <= j2s[last].norm();
    let ratios: Vec<Scalar> = (0..N_SAMPLES)
        .map(|n| if use_w { i3s[n] / j2s[n] } else { j2s[n] / i3s[n] })
        .collect();
    if ratios.iter().any(|r| !(r.re.is_finite() && r.im.is_finite())) {
        return Err(Error::NoLimit);
    }
    let tail = &ts[N_SAMPLES - 4..];
    let est4 = neville_at_zero(tail, &ratios[N_SAMPLES - 4..]);
    let est3 = neville_at_zero(&tail[1..], &ratios[N_SAMPLES - 3..]);
    let spread = (est4 - est3).norm();
    if spread > 1e-4 * est4.norm().max(1.0) {
        return Err(Error::NoLimit);
    }
    let pair = if use_w {
        if est4.norm() < 1e-10 {
            [re(0.0), re(1.0)]
        } else {
            projective_pair(est4, re(1.0))
        }
    } else {
        projective_pair(re(1.0), est4)
    };
    Ok(InvariantValue::Pair(pair))
}

fn elliptic_samples(web: &CubicWeb) -> Result<InvariantValue> {
    let (bx, by) = web.base_point;
    let mut samples = Vec::new();
    for &c in &ELLIPTIC_SAMPLES {
        // along x = 1, the first integral is a power of y; sample y = c
        let (i, j) = ij_at(web, bx + 1.0, by + c)?;
        let i3 = i * i * i;
        let j2 = j * j;
        let v = if i3.norm() < 1e-10 * j2.norm() { re(f64::INFINITY) } else { j2 / i3 };
        samples.push((c, v));
    }
    let first = samples[0].1;
    let constant = samples.iter().all(|(_, v)| (v - first).norm() <= 1e-8 * first.norm().max(1.0));
    if constant && first.re.is_finite() {
        Ok(InvariantValue::Pair(projective_pair(re(1.0), first)))
    } else {
        Ok(InvariantValue::Varies { samples })
    }
}

/// The six cross-ratios of `(p1, p2, p3, p_X)` as a canonically sorted set,
/// where `p_X` is the symmetry direction `[w_x x : w_y y]`.
pub fn cross_ratio_set(web: &CubicWeb, x: Scalar, y: Scalar) -> Result<[Scalar; 6]> {
    let (wx, wy) = weights_of(web)?;
    let r = web.roots_at(x, y)?;
    let dirs = [
        (re(1.0), r.roots[0]),
        (re(1.0), r.roots[1]),
        (re(1.0), r.roots[2]),
        (re(rat_to_f64(wx)) * x, re(rat_to_f64(wy)) * y),
    ];
    cross_ratios_projective(&dirs)
}

/// Six cross-ratio values of four points of `P¹` in homogeneous coordinates.
pub fn cross_ratios_projective(p: &[(Scalar, Scalar); 4]) -> Result<[Scalar; 6]> {
    let br = |i: usize, j: usize| p[i].0 * p[j].1 - p[i].1 * p[j].0;
    let scale: f64 = p.iter().map(|(a, b)| a.norm().max(b.norm())).product::<f64>().max(1e-300);
    for i in 0..4 {
        for j in i + 1..4 {
            if br(i, j).norm() <= 1e-12 * scale.sqrt() {
                return Err(Error::CoincidentDirection);
            }
        }
    }
    let l = (br(0, 2) * br(1, 3)) / (br(1, 2) * br(0, 3));
    let one = re(1.0);
    let mut out = [l, one / l, one - l, one / (one - l), (l - one) / l, l / (l - one)];
    sort_roots(&mut out, 1.0);
    Ok(out)
}

/// Classification data at the base point.
#[derive(Debug, Clone, PartialEq)]
pub struct Fingerprint {
    pub weights: [i64; 2],
    pub multiplicity: Vec<u8>,
    pub invariant: InvariantValue,
}

/// Weights as coprime integers with the first nonzero entry positive.
pub fn normalize_weights(w: (Rat, Rat)) -> [i64; 2] {
    let l = w.0.denom().lcm(w.1.denom());
    let (a, b) = ((w.0 * l).to_integer(), (w.1 * l).to_integer());
    let g = a.gcd(&b).max(1);
    let (mut a, mut b) = (a / g, b / g);
    if a < 0 || (a == 0 && b < 0) {
        a = -a;
        b = -b;
    }
    [a, b]
}

pub fn fingerprint(web: &CubicWeb) -> Result<Fingerprint> {
    let w = weights_of(web)?;
    let (x, y) = web.base_point;
    Ok(Fingerprint {
        weights: normalize_weights(w),
        multiplicity: web.multiplicity_at(x, y)?,
        invariant: limit_invariant(web)?,
    })
}

fn cjson(z: Scalar) -> Value {
    json!([z.re, z.im])
}

impl Fingerprint {
    pub fn to_json(&self) -> Value {
        let invariant = match &self.invariant {
            InvariantValue::Pair(p) => json!({"kind": "pair", "value": [cjson(p[0]), cjson(p[1])]}),
            InvariantValue::Varies { samples } => json!({
                "kind": "varies",
                "samples": samples.iter().map(|(c, v)| json!({"first_integral": c, "ratio": cjson(*v)})).collect::<Vec<_>>(),
            }),
        };
        json!({"weights": self.weights, "multiplicity": self.multiplicity, "invariant": invariant})
    }

    /// Whether two fingerprints tell the normal forms apart: different
    /// weights, multiplicities, or invariant values (relative 1e-6).
    pub fn distinct_from(&self, other: &Fingerprint) -> bool {
        if self.weights != other.weights || self.multiplicity != other.multiplicity {
            return true;
        }
        let near = |a: Scalar, b: Scalar| (a - b).norm() <= 1e-6 * a.norm().max(b.norm()).max(1.0);
        match (&self.invariant, &other.invariant) {
            (InvariantValue::Pair(a), InvariantValue::Pair(b)) => !(near(a[0], b[0]) && near(a[1], b[1])),
            (InvariantValue::Varies { samples: a }, InvariantValue::Varies { samples: b }) => {
                a.len() != b.len() || a.iter().zip(b).any(|(u, v)| u.0 != v.0 || !near(u.1, v.1))
            }
            _ => true,
        }
    }
}
