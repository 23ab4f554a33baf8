//! `frobweb analyze|verify|build|plot|report --in <file> --out <file>`.
//!
//! Exit codes: 0 ok, 1 analysis failure, 2 input error. Errors are printed
//! to stdout as `{"error": {"kind": ..., "message": ...}}`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::chern::{curvature_at, gamma_at, is_flat_exact};
use crate::error::{Error, Result};
use crate::frobenius::{delta_obstruction, euler, grid_around, verify, FrobeniusGerm, Point, VerificationReport};
use crate::invariant::fingerprint;
use crate::io::{parse_json, profile_settings, web_from_json, web_to_json, Params};
use crate::plot::{plot, PlotOptions, Region};
use crate::reduce::{self, q_json};
use crate::scalar::{re, Scalar};
use crate::wdvv::{wdvv0_identically_zero, wdvv0_residual};
use crate::web::CubicWeb;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Analyze,
    Verify,
    Build,
    Plot,
    Report,
}

#[derive(Debug, Parser)]
#[command(name = "frobweb", version, about = "Flat 3-webs, WDVV and Frobenius 3-fold germs")]
struct Args {
    #[arg(value_enum)]
    command: Command,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Points per side of the verification grid.
    #[arg(long, default_value_t = 5)]
    grid: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// x0,y0,x1,y1
    #[arg(long, allow_hyphen_values = true)]
    region: Option<String>,
    /// Seed points per leaf family.
    #[arg(long, default_value_t = 5)]
    seeds: usize,
    #[arg(long = "fd-step", default_value_t = 1e-4)]
    fd_step: f64,
}

#[derive(Debug, Clone)]
pub struct RunSpec {
    pub command: Command,
    pub input: PathBuf,
    pub output: PathBuf,
    pub grid: usize,
    pub tol: f64,
    pub fd_step: f64,
    pub region: Option<Region>,
    pub seeds: usize,
}

impl RunSpec {
    fn from_args(a: Args) -> Result<Self> {
        if !(a.tol > 0.0 && a.tol.is_finite()) {
            return Err(Error::InvalidInput("--tol must be positive".into()));
        }
        if !(a.fd_step > 0.0 && a.fd_step.is_finite()) {
            return Err(Error::InvalidInput("--fd-step must be positive".into()));
        }
        if a.grid == 0 {
            return Err(Error::InvalidInput("--grid must be at least 1".into()));
        }
        let region = a.region.as_deref().map(Region::parse).transpose()?;
        Ok(RunSpec {
            command: a.command,
            input: a.input,
            output: a.out,
            grid: a.grid,
            tol: a.tol,
            fd_step: a.fd_step,
            region,
            seeds: a.seeds,
        })
    }
}

/// Outcome of a command: the document to write and whether the analysis
/// met its tolerances.
pub struct Outcome {
    pub body: String,
    pub ok: bool,
}

fn error_json(e: &Error) -> Value {
    json!({"error": {"kind": e.kind(), "message": e.to_string()}})
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_input_error() {
        2
    } else {
        1
    }
}

/// Parse arguments, run, write `--out`; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let err = Error::InvalidInput(e.to_string().trim().to_string());
            println!("{}", error_json(&err));
            return 2;
        }
    };
    match RunSpec::from_args(args).and_then(|spec| execute(&spec).map(|o| (spec, o))) {
        Ok((spec, outcome)) => match std::fs::write(&spec.output, &outcome.body) {
            Ok(()) => {
                if outcome.ok {
                    0
                } else {
                    1
                }
            }
            Err(e) => {
                let err = Error::InvalidInput(format!("cannot write {}: {e}", spec.output.display()));
                println!("{}", error_json(&err));
                2
            }
        },
        Err(e) => {
            println!("{}", error_json(&e));
            exit_code(&e)
        }
    }
}

fn read_input(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    parse_json(&text)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

pub fn execute(spec: &RunSpec) -> Result<Outcome> {
    let input = read_input(&spec.input)?;
    match spec.command {
        Command::Analyze => {
            let web = web_from_json(&input)?;
            Ok(Outcome { body: pretty(&analyze(&web, region_for(&input, spec))?), ok: true })
        }
        Command::Report => {
            let web = web_from_json(&input)?;
            Ok(Outcome { body: pretty(&report(&web, &input, region_for(&input, spec))?), ok: true })
        }
        Command::Verify => {
            let (v, ok) = cmd_verify(&input, spec)?;
            Ok(Outcome { body: pretty(&v), ok })
        }
        Command::Build => {
            let (v, ok) = build(&input, spec)?;
            Ok(Outcome { body: pretty(&v), ok })
        }
        Command::Plot => {
            let web = web_from_json(&input)?;
            let opts = PlotOptions { region: spec.region.unwrap_or_default(), seeds: spec.seeds, ..Default::default() };
            let p = plot(&web, &opts);
            let csv = spec.output.with_extension("csv");
            std::fs::write(&csv, p.to_csv()).map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", csv.display())))?;
            Ok(Outcome { body: p.to_svg(&web.name), ok: true })
        }
    }
}

fn family_of(input: &Value) -> Option<&str> {
    let web = input.get("web").unwrap_or(input);
    match web.get("kind").and_then(Value::as_str) {
        Some("profile") => web.get("family").and_then(Value::as_str),
        _ => input.get("family").and_then(Value::as_str),
    }
}

fn region_for(input: &Value, spec: &RunSpec) -> Region {
    spec.region.unwrap_or_else(|| match family_of(input) {
        Some("parabolic") => Region { x0: -0.3, y0: 0.5, x1: 0.3, y1: 1.5 },
        Some("hyperbolic") => Region { x0: -0.3, y0: 0.6, x1: 0.3, y1: 1.4 },
        _ => Region::default(),
    })
}

fn default_center(family: Option<&str>) -> (f64, f64) {
    match family {
        Some("parabolic") => (0.1, 1.0),
        Some("hyperbolic") => (0.2, 1.0),
        _ => (1.0, 1.0),
    }
}

fn cj(z: Scalar) -> Value {
    json!([z.re, z.im])
}

const SAMPLES: usize = 8;

/// Regular points of the web in `region`, drawn deterministically.
fn sample_points(web: &CubicWeb, region: Region) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut out = Vec::with_capacity(SAMPLES);
    let mut tries = 0;
    while out.len() < SAMPLES && tries < 200 * SAMPLES {
        tries += 1;
        let p = (re(rng.gen_range(region.x0..=region.x1)), re(rng.gen_range(region.y0..=region.y1)));
        let ok = gamma_at(web, p.0, p.1)
            .map(|g| [g.g1, g.g2].iter().all(|z| z.re.is_finite() && z.im.is_finite()))
            .unwrap_or(false);
        if ok {
            out.push(p);
        }
    }
    out
}

/// Fingerprint plus a connection summary on sample points of `region`.
pub fn analyze(web: &CubicWeb, region: Region) -> Result<Value> {
    let fp = fingerprint(web)?;
    let points = sample_points(web, region);
    let mut samples = Vec::with_capacity(points.len());
    let mut curvature_max = 0.0f64;
    for &(x, y) in &points {
        let g = gamma_at(web, x, y)?;
        let c = curvature_at(web, x, y)?;
        curvature_max = curvature_max.max(c.norm());
        samples.push(json!({"x": cj(x), "y": cj(y), "gamma": [cj(g.g1), cj(g.g2)], "curvature": cj(c)}));
    }
    let exact = is_flat_exact(web);
    Ok(json!({
        "web": web.name,
        "fingerprint": fp.to_json(),
        "connection": {
            "samples": samples,
            "curvature_max": curvature_max,
            "exact": exact,
            "flat": exact.unwrap_or(curvature_max < 1e-8),
        },
    }))
}

fn obstruction_json(web: &CubicWeb, start: Point) -> Value {
    match delta_obstruction(web, start, web.base_point, 16) {
        Ok(o) => {
            let (verdict, value) = match o.result {
                crate::frobenius::DeltaLimit::Obstructed { limit } => ("obstructed", json!({"inverse_delta_limit": cj(limit)})),
                crate::frobenius::DeltaLimit::Finite { delta } => ("finite", json!({"delta": cj(delta)})),
            };
            json!({
                "start": [cj(start.0), cj(start.1)],
                "verdict": verdict,
                "limit": value,
                "samples": o.samples.iter().map(|(t, v)| json!([t, cj(*v)])).collect::<Vec<_>>(),
            })
        }
        Err(e) => error_json(&e),
    }
}

/// Analysis, WDVV0 residuals on the sample points, and the kind1
/// obstruction at the base point.
pub fn report(web: &CubicWeb, input: &Value, region: Region) -> Result<Value> {
    let mut v = analyze(web, region)?;
    let mut worst = 0.0f64;
    for (x, y) in sample_points(web, region) {
        let r = wdvv0_residual(web, x, y)?;
        worst = worst.max(r.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    v["wdvv0"] = json!({"max_residual": worst, "identically_zero": wdvv0_identically_zero(web)});
    let start = match input.get("probe").and_then(Value::as_array) {
        Some(a) if a.len() == 2 => match (a[0].as_f64(), a[1].as_f64()) {
            (Some(x), Some(y)) => (re(x), re(y)),
            _ => return Err(Error::ParseError("`probe` must be [x, y]".into())),
        },
        Some(_) => return Err(Error::ParseError("`probe` must be [x, y]".into())),
        None => match family_of(input) {
            Some("hyperbolic") => (re(0.3), re(0.8)),
            Some("parabolic") => (re(0.1), re(0.8)),
            _ => (web.base_point.0 + 0.4, web.base_point.1 + 0.3),
        },
    };
    v["delta_obstruction"] = obstruction_json(web, start);
    Ok(v)
}

fn point_field(v: &Value, key: &str) -> Result<Option<(f64, f64)>> {
    match v.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Array(a)) if a.len() == 2 => match (a[0].as_f64(), a[1].as_f64()) {
            (Some(x), Some(y)) => Ok(Some((x, y))),
            _ => Err(Error::ParseError(format!("`{key}` must be [x, y]"))),
        },
        _ => Err(Error::ParseError(format!("`{key}` must be [x, y]"))),
    }
}

fn spacing(v: &Value) -> Result<f64> {
    match v.get("spacing") {
        None | Some(Value::Null) => Ok(0.05),
        Some(s) => s
            .as_f64()
            .filter(|h| *h > 0.0)
            .ok_or_else(|| Error::InvalidInput("`spacing` must be a positive number".into())),
    }
}

fn verification(germ: &FrobeniusGerm, center: (f64, f64), h: f64, spec: &RunSpec) -> Result<(VerificationReport, Value)> {
    let rep = verify(germ, &grid_around(center.0, center.1, spec.grid, h), spec.fd_step, spec.tol)?;
    let weights = euler(germ).ok().map(|w| w.map(|r| r.to_string()));
    let mut v = rep.to_json();
    v["all_pass"] = json!(rep.all_pass());
    v["grid"] = json!({"center": [center.0, center.1], "spacing": h, "n": spec.grid});
    v["euler_weights"] = json!(weights);
    Ok((rep, v))
}

/// `{"web": <web spec>, "metric": "kind0"|"kind1", "center": [x, y],
/// "spacing": h, "anchor": [x, y], "shear": {"k": 2, "r": "-1/12"}}`, or a
/// bare web spec for a kind0 germ.
fn cmd_verify(input: &Value, spec: &RunSpec) -> Result<(Value, bool)> {
    let web_spec = input.get("web").unwrap_or(input);
    let mut web = web_from_json(web_spec)?;
    if let Some(sh) = input.get("shear") {
        let k = sh.get("k").and_then(Value::as_u64).ok_or_else(|| Error::ParseError("`shear.k` must be 2 or 3".into()))? as u32;
        let r = match sh.get("r") {
            Some(Value::String(s)) => crate::scalar::parse_rat(s),
            Some(Value::Number(n)) => n.as_f64().and_then(crate::scalar::f64_to_rat_exact),
            _ => None,
        }
        .ok_or_else(|| Error::ParseError("`shear.r` must be rational".into()))?;
        web = web.pushforward_shear(k, crate::scalar::Q::new(*r.numer() as i128, *r.denom() as i128))?;
    }
    let center = point_field(input, "center")?.unwrap_or_else(|| default_center(family_of(input)));
    let germ = match input.get("metric").and_then(Value::as_str).unwrap_or("kind0") {
        "kind0" => FrobeniusGerm::kind0(web)?,
        "kind1" => {
            let a = point_field(input, "anchor")?.unwrap_or(center);
            FrobeniusGerm::kind1(web, (re(a.0), re(a.1)))?
        }
        other => return Err(Error::ParseError(format!("unknown metric kind `{other}`"))),
    };
    let (rep, v) = verification(&germ, center, spacing(input)?, spec)?;
    Ok((v, rep.all_pass()))
}

fn param_or(p: &Params, key: &str, default: f64) -> Result<Scalar> {
    Ok(p.scalar(key)?.unwrap_or(re(default)))
}

/// Recipes: `{"family": "elliptic", "form": 3}`,
/// `{"family": "parabolic", "L": 0.785, "a0": 0.333}`,
/// `{"family": "hyperbolic", "m0": 2, "a0": 0.1}`.
pub fn build(recipe: &Value, spec: &RunSpec) -> Result<(Value, bool)> {
    let family = recipe.get("family").and_then(Value::as_str).ok_or_else(|| Error::ParseError("recipe needs `family`".into()))?;
    let p = Params(recipe);
    let center = point_field(recipe, "center")?.unwrap_or_else(|| default_center(Some(family)));
    let h = spacing(recipe)?;
    let mut out = json!({"recipe": recipe});
    let web = match family {
        "elliptic" => {
            let form = crate::io::normal_form_from_json(recipe)?;
            let web = crate::web::catalog(&form);
            let (wx, wy) = web.weights.ok_or(Error::MissingWeights)?;
            let ratio = wy / wx;
            if !ratio.is_integer() || !(2..=3).contains(&ratio.to_integer()) {
                return Err(Error::InvalidInput(format!("{} has no shear of order 2 or 3 (weights {wx}, {wy})", form.label())));
            }
            let k = ratio.to_integer() as u32;
            let r = reduce::shear_fit(&web, k)?;
            out["shear"] = json!({"k": k, "r": q_json(&r)});
            let sheared = web.pushforward_shear(k, r)?;
            out["web"] = web_to_json(&sheared);
            sheared
        }
        "parabolic" => {
            let (range, step) = profile_settings(recipe, (-0.5, 0.5))?;
            let a0 = param_or(&p, "a0", 1.0 / 3.0)?;
            let s0 = param_or(&p, "s0", 0.0)?;
            let b0 = match (p.scalar("b0")?, p.scalar("L")?) {
                (Some(b), _) => b,
                (None, Some(l)) => reduce::parabolic_b0_for(l),
                (None, None) => return Err(Error::InvalidInput("parabolic recipe needs `L` or `b0`".into())),
            };
            let (prof, web) = reduce::integrate_parabolic(s0, a0, b0, range, step)?;
            out["profile"] = prof.to_json();
            web
        }
        "hyperbolic" => {
            let (range, step) = profile_settings(recipe, (-0.6, 0.6))?;
            let m0 = p.uint("m0")?.unwrap_or(0);
            let sigma0 = param_or(&p, "sigma0", 0.0)?;
            let alpha0 = p.scalar("alpha0")?.or(p.scalar("a0")?).unwrap_or(re(0.1));
            let beta0 = param_or(&p, "beta0", 0.0)?;
            let (prof, web) = reduce::integrate_hyperbolic(sigma0, alpha0, beta0, m0, range, step)?;
            let applicable = m0 % 2 == 0 && sigma0.norm() == 0.0 && beta0.norm() == 0.0;
            out["parity"] = json!({
                "applicable": applicable,
                "residual": if applicable { json!(reduce::parity_residual(&prof)?) } else { Value::Null },
            });
            out["profile"] = prof.to_json();
            web
        }
        other => return Err(Error::InvalidInput(format!("unknown recipe family `{other}`"))),
    };
    let germ = FrobeniusGerm::kind0(web)?;
    out["germ"] = germ.to_json();
    let (rep, v) = verification(&germ, center, h, spec)?;
    out["verification"] = v;
    Ok((out, rep.all_pass()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(cmd: Command, input: &Path, out: &Path) -> RunSpec {
        RunSpec {
            command: cmd,
            input: input.to_path_buf(),
            output: out.to_path_buf(),
            grid: 3,
            tol: 1e-6,
            fd_step: 1e-4,
            region: None,
            seeds: 5,
        }
    }

    #[test]
    fn analyze_form2() {
        let web = crate::web::catalog(&crate::web::NormalForm::Form2);
        let v = analyze(&web, Region::default()).unwrap();
        assert_eq!(v["fingerprint"]["weights"], json!([2, 3]));
        assert_eq!(v["fingerprint"]["multiplicity"], json!([3]));
        assert_eq!(v["connection"]["curvature_max"], json!(0.0));
        assert_eq!(v["connection"]["exact"], json!(true));
    }

    #[test]
    fn build_elliptic_form3() {
        let dir = tempfile::tempdir().unwrap();
        let s = spec(Command::Build, &dir.path().join("in.json"), &dir.path().join("out.json"));
        let (v, ok) = build(&json!({"family": "elliptic", "form": 3}), &s).unwrap();
        assert!(ok, "{v:#}");
        assert_eq!((v["shear"]["r"]["num"].as_str(), v["shear"]["r"]["den"].as_str()), (Some("-1"), Some("12")));
    }

    #[test]
    fn malformed_json_exits_two() {
        let dir = tempfile::tempdir().unwrap();
        let inp = dir.path().join("in.json");
        std::fs::write(&inp, "{ not json").unwrap();
        let out = dir.path().join("out.json");
        let code = run(["frobweb", "analyze", "--in", inp.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code, 2);
        assert!(!out.exists());
    }
}
