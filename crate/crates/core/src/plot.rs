//! Real-slice pictures of a web: leaves of the three families traced from
//! seed points, and the discriminant as a zero contour of `Re D`.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{re, Scalar};
use crate::web::{root_scale, CubicWeb};

pub const SVG_VERSION: &str = "frobweb-plot/1";
const SIZE: f64 = 600.0;
const MARGIN: f64 = 20.0;
const COLORS: [&str; 3] = ["#1f77b4", "#d62728", "#2ca02c"];
const REAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Region {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        if ![x0, y0, x1, y1].iter().all(|v| v.is_finite()) || x1 <= x0 || y1 <= y0 {
            return Err(Error::InvalidInput(format!("region [{x0}, {y0}, {x1}, {y1}] has no area")));
        }
        Ok(Region { x0, y0, x1, y1 })
    }

    /// `x0,y0,x1,y1`
    pub fn parse(s: &str) -> Result<Self> {
        let v: Vec<f64> = s
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| Error::ParseError(format!("bad region component `{t}`"))))
            .collect::<Result<_>>()?;
        match v.as_slice() {
            [x0, y0, x1, y1] => Region::new(*x0, *y0, *x1, *y1),
            _ => Err(Error::ParseError("region must be x0,y0,x1,y1".into())),
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    fn diag(&self) -> f64 {
        (self.x1 - self.x0).hypot(self.y1 - self.y0)
    }
}

impl Default for Region {
    fn default() -> Self {
        Region { x0: -1.0, y0: -1.0, x1: 1.0, y1: 1.0 }
    }
}

#[derive(Debug, Clone)]
pub struct PlotOptions {
    pub region: Region,
    pub seeds: usize,
    pub rng_seed: u64,
    /// Cells per side of the contour grid.
    pub contour_cells: usize,
    pub max_steps: usize,
}

impl Default for PlotOptions {
    fn default() -> Self {
        PlotOptions { region: Region::default(), seeds: 5, rng_seed: 0, contour_cells: 160, max_steps: 4000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeafEnd {
    Boundary,
    /// The tracked root left the real slice.
    Absent,
    Singular,
    MaxSteps,
}

impl LeafEnd {
    fn as_str(self) -> &'static str {
        match self {
            LeafEnd::Boundary => "boundary",
            LeafEnd::Absent => "absent",
            LeafEnd::Singular => "singular",
            LeafEnd::MaxSteps => "max_steps",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Leaf {
    pub family: usize,
    pub seed: (f64, f64),
    pub points: Vec<(f64, f64)>,
    /// How the backward and forward halves ended.
    pub ends: [LeafEnd; 2],
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub region: Region,
    pub leaves: Vec<Leaf>,
    pub discriminant: Vec<[(f64, f64); 2]>,
    /// Families with no real seed in the region.
    pub absent_families: Vec<usize>,
}

fn real_roots(web: &CubicWeb, x: f64, y: f64) -> Option<[f64; 3]> {
    let [s, a, b] = web.sab_at(re(x), re(y)).ok()?;
    let r = web.roots_at(re(x), re(y)).ok()?;
    let tol = REAL_TOL * root_scale(s, a, b);
    if r.partition.len() != 3 || r.roots.iter().any(|p| p.im.abs() > tol || !p.re.is_finite()) {
        return None;
    }
    let mut p = r.roots.map(|z| z.re);
    p.sort_by(|u, v| u.total_cmp(v));
    Some(p)
}

/// Slope of the real root nearest to `p_prev`.
fn tracked_slope(web: &CubicWeb, x: f64, y: f64, p_prev: f64) -> std::result::Result<f64, LeafEnd> {
    let [s, a, b] = web.sab_at(re(x), re(y)).map_err(|_| LeafEnd::Singular)?;
    let r = web.roots_at(re(x), re(y)).map_err(|_| LeafEnd::Singular)?;
    let target = re(p_prev);
    let best: Scalar = *r
        .roots
        .iter()
        .min_by(|u, v| (**u - target).norm().total_cmp(&(**v - target).norm()))
        .ok_or(LeafEnd::Singular)?;
    if !best.re.is_finite() {
        return Err(LeafEnd::Singular);
    }
    if best.im.abs() > REAL_TOL * root_scale(s, a, b) {
        return Err(LeafEnd::Absent);
    }
    Ok(best.re)
}

fn trace_half(web: &CubicWeb, opts: &PlotOptions, start: (f64, f64), p0: f64, sign: f64) -> (Vec<(f64, f64)>, LeafEnd) {
    let h = opts.region.diag() / 400.0;
    let dir = |p: f64| {
        let n = (1.0 + p * p).sqrt();
        (sign / n, sign * p / n)
    };
    let (mut x, mut y, mut p) = (start.0, start.1, p0);
    let mut out = Vec::new();
    for _ in 0..opts.max_steps {
        let step = |x: f64, y: f64, p: f64| tracked_slope(web, x, y, p).map(|q| (q, dir(q)));
        let r = (|| {
            let (q1, k1) = step(x, y, p)?;
            let (q2, k2) = step(x + 0.5 * h * k1.0, y + 0.5 * h * k1.1, q1)?;
            let (q3, k3) = step(x + 0.5 * h * k2.0, y + 0.5 * h * k2.1, q2)?;
            let (_, k4) = step(x + h * k3.0, y + h * k3.1, q3)?;
            let nx = x + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            let ny = y + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
            let q = tracked_slope(web, nx, ny, q1)?;
            Ok::<_, LeafEnd>((nx, ny, q))
        })();
        match r {
            Ok((nx, ny, q)) => {
                if !opts.region.contains(nx, ny) {
                    return (out, LeafEnd::Boundary);
                }
                out.push((nx, ny));
                (x, y, p) = (nx, ny, q);
            }
            Err(end) => return (out, end),
        }
    }
    (out, LeafEnd::MaxSteps)
}

/// Seeds where all three roots are real, by rejection sampling.
pub fn seed_points(web: &CubicWeb, opts: &PlotOptions) -> Vec<((f64, f64), [f64; 3])> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.rng_seed);
    let Region { x0, y0, x1, y1 } = opts.region;
    let mut out = Vec::with_capacity(opts.seeds);
    let mut tries = 0;
    while out.len() < opts.seeds && tries < 2000 * opts.seeds.max(1) {
        tries += 1;
        let x = rng.gen_range(x0..=x1);
        let y = rng.gen_range(y0..=y1);
        if let Some(p) = real_roots(web, x, y) {
            let gap = (p[1] - p[0]).min(p[2] - p[1]);
            if gap > 1e-6 * (1.0 + p[2].abs().max(p[0].abs())) {
                out.push(((x, y), p));
            }
        }
    }
    out
}

fn contour(web: &CubicWeb, region: Region, cells: usize) -> Vec<[(f64, f64); 2]> {
    let n = cells.max(2);
    let dx = (region.x1 - region.x0) / n as f64;
    let dy = (region.y1 - region.y0) / n as f64;
    let val: Vec<Vec<f64>> = (0..=n)
        .map(|j| {
            (0..=n)
                .map(|i| {
                    let (x, y) = (region.x0 + i as f64 * dx, region.y0 + j as f64 * dy);
                    web.discriminant_at(re(x), re(y)).map(|d| d.re).unwrap_or(f64::NAN)
                })
                .collect()
        })
        .collect();
    let mut segs = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let v: Vec<f64> = corners.iter().map(|&(a, b)| val[b][a]).collect();
            if v.iter().any(|t| !t.is_finite()) {
                continue;
            }
            let mut pts = Vec::with_capacity(4);
            for e in 0..4 {
                let (a, b) = (e, (e + 1) % 4);
                let (va, vb) = (v[a], v[b]);
                if (va >= 0.0) != (vb >= 0.0) {
                    let t = va / (va - vb);
                    let (ia, ja) = corners[a];
                    let (ib, jb) = corners[b];
                    let xa = region.x0 + ia as f64 * dx;
                    let ya = region.y0 + ja as f64 * dy;
                    let xb = region.x0 + ib as f64 * dx;
                    let yb = region.y0 + jb as f64 * dy;
                    pts.push((xa + t * (xb - xa), ya + t * (yb - ya)));
                }
            }
            match pts.len() {
                2 => segs.push([pts[0], pts[1]]),
                4 => {
                    segs.push([pts[0], pts[1]]);
                    segs.push([pts[2], pts[3]]);
                }
                _ => {}
            }
        }
    }
    segs
}

pub fn plot(web: &CubicWeb, opts: &PlotOptions) -> Plot {
    let seeds = seed_points(web, opts);
    let mut leaves = Vec::with_capacity(3 * seeds.len());
    for (pt, roots) in &seeds {
        for (family, &p0) in roots.iter().enumerate() {
            let (mut back, e0) = trace_half(web, opts, *pt, p0, -1.0);
            let (fwd, e1) = trace_half(web, opts, *pt, p0, 1.0);
            back.reverse();
            back.push(*pt);
            back.extend(fwd);
            leaves.push(Leaf { family, seed: *pt, points: back, ends: [e0, e1] });
        }
    }
    let absent_families = if seeds.is_empty() && opts.seeds > 0 { vec![0, 1, 2] } else { Vec::new() };
    leaves.sort_by_key(|l| l.family);
    Plot { region: opts.region, leaves, discriminant: contour(web, opts.region, opts.contour_cells), absent_families }
}

impl Plot {
    fn map(&self, (x, y): (f64, f64)) -> (f64, f64) {
        let r = &self.region;
        let w = SIZE - 2.0 * MARGIN;
        (MARGIN + w * (x - r.x0) / (r.x1 - r.x0), SIZE - MARGIN - w * (y - r.y0) / (r.y1 - r.y0))
    }

    pub fn to_svg(&self, title: &str) -> String {
        let r = &self.region;
        let mut s = String::new();
        s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        let _ = writeln!(
            s,
            "<!-- {SVG_VERSION}: viewBox 0 0 {SIZE} {SIZE}; px = {MARGIN} + {w}(x - x0)/(x1 - x0), \
             py = {b} - {w}(y - y0)/(y1 - y0); region [{}, {}, {}, {}]; leaf-0 {}, leaf-1 {}, leaf-2 {}, \
             discriminant black dashed; coordinates rounded to 3 decimals -->",
            r.x0,
            r.y0,
            r.x1,
            r.y1,
            COLORS[0],
            COLORS[1],
            COLORS[2],
            w = SIZE - 2.0 * MARGIN,
            b = SIZE - MARGIN,
        );
        let _ = writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">"
        );
        let _ = writeln!(s, "<title>{}</title>", escape(title));
        s.push_str("<style>\n");
        for (i, c) in COLORS.iter().enumerate() {
            let _ = writeln!(s, ".leaf-{i} {{ fill: none; stroke: {c}; stroke-width: 1.2; }}");
        }
        s.push_str(".discriminant { fill: none; stroke: #000000; stroke-width: 1.6; stroke-dasharray: 4 2; }\n");
        s.push_str(".frame { fill: #ffffff; stroke: #888888; stroke-width: 0.8; }\n</style>\n");
        let w = SIZE - 2.0 * MARGIN;
        let _ = writeln!(s, "<rect class=\"frame\" x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{w}\" height=\"{w}\"/>");
        for leaf in &self.leaves {
            if leaf.points.len() < 2 {
                continue;
            }
            let pts: Vec<String> = leaf
                .points
                .iter()
                .map(|&p| {
                    let (a, b) = self.map(p);
                    format!("{a:.3},{b:.3}")
                })
                .collect();
            let _ = writeln!(s, "<polyline class=\"leaf-{}\" points=\"{}\"/>", leaf.family, pts.join(" "));
        }
        if !self.discriminant.is_empty() {
            let mut d = String::new();
            for seg in &self.discriminant {
                let (a, b) = self.map(seg[0]);
                let (c, e) = self.map(seg[1]);
                let _ = write!(d, "M{a:.3} {b:.3}L{c:.3} {e:.3}");
            }
            let _ = writeln!(s, "<path class=\"discriminant\" d=\"{d}\"/>");
        }
        s.push_str("</svg>\n");
        s
    }

    /// `kind,family,leaf,index,x,y,status` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("kind,family,leaf,index,x,y,status\n");
        let mut counter = [0usize; 3];
        for leaf in &self.leaves {
            let id = counter[leaf.family];
            counter[leaf.family] += 1;
            let last = leaf.points.len().saturating_sub(1);
            for (i, (x, y)) in leaf.points.iter().enumerate() {
                let status = match i {
                    0 => leaf.ends[0].as_str(),
                    _ if i == last => leaf.ends[1].as_str(),
                    _ => "real",
                };
                let _ = writeln!(s, "leaf,{},{id},{i},{x:.6},{y:.6},{status}", leaf.family);
            }
        }
        for f in &self.absent_families {
            let _ = writeln!(s, "leaf,{f},,,,,absent");
        }
        for (i, seg) in self.discriminant.iter().enumerate() {
            for (k, (x, y)) in seg.iter().enumerate() {
                let _ = writeln!(s, "discriminant,,{i},{k},{x:.6},{y:.6},segment");
            }
        }
        s
    }
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
