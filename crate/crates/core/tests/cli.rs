use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};

struct Run {
    code: i32,
    stdout: String,
    out: PathBuf,
}

fn frobweb(dir: &Path, cmd: &str, input: &Value, extra: &[&str], out_name: &str) -> Run {
    let inp = dir.join(format!("{cmd}-{out_name}.in.json"));
    std::fs::write(&inp, input.to_string()).unwrap();
    raw(dir, cmd, &inp, extra, out_name)
}

fn raw(dir: &Path, cmd: &str, inp: &Path, extra: &[&str], out_name: &str) -> Run {
    let out = dir.join(out_name);
    let o = Command::new(env!("CARGO_BIN_EXE_frobweb"))
        .args([cmd, "--in", inp.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .args(extra)
        .output()
        .unwrap();
    Run { code: o.status.code().unwrap(), stdout: String::from_utf8(o.stdout).unwrap(), out }
}

fn read(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn analyze_form6_fingerprint() {
    let d = tempfile::tempdir().unwrap();
    let r = frobweb(d.path(), "analyze", &json!({"kind": "catalog", "name": "form6", "params": {"L": std::f64::consts::FRAC_PI_4}}), &[], "a.json");
    assert_eq!(r.code, 0, "{}", r.stdout);
    let v = read(&r.out);
    assert_eq!(v["fingerprint"]["weights"], json!([0, 1]));
    assert_eq!(v["fingerprint"]["multiplicity"], json!([3]));
    let p = &v["fingerprint"]["invariant"]["value"];
    assert!((p[0][0].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((p[1][0].as_f64().unwrap() + 1.0 / 27.0).abs() < 1e-9);
    assert_eq!(v["connection"]["flat"], json!(true));
}

#[test]
fn analyze_form2_is_exactly_flat() {
    let d = tempfile::tempdir().unwrap();
    let r = frobweb(d.path(), "analyze", &json!({"kind": "catalog", "name": "form2"}), &[], "a.json");
    assert_eq!(r.code, 0);
    let v = read(&r.out);
    assert_eq!(v["fingerprint"]["weights"], json!([2, 3]));
    assert_eq!(v["connection"]["curvature_max"], json!(0.0));
}

#[test]
fn polynomial_spec_matches_catalog() {
    let d = tempfile::tempdir().unwrap();
    let spec = json!({"kind": "polynomial", "coefficients": {"S": [], "A": [[1, 0, "2"]], "B": [[0, 1, 1]]}, "weights": [2, 3]});
    let a = frobweb(d.path(), "analyze", &spec, &[], "p.json");
    let b = frobweb(d.path(), "analyze", &json!({"kind": "catalog", "name": "form2"}), &[], "c.json");
    assert_eq!(read(&a.out)["fingerprint"], read(&b.out)["fingerprint"]);
}

#[test]
fn malformed_json_is_an_input_error() {
    let d = tempfile::tempdir().unwrap();
    let inp = d.path().join("bad.json");
    std::fs::write(&inp, "{ nope").unwrap();
    let r = raw(d.path(), "analyze", &inp, &[], "o.json");
    assert_eq!(r.code, 2);
    let e: Value = serde_json::from_str(r.stdout.trim()).unwrap();
    assert_eq!(e["error"]["kind"], json!("ParseError"));
    assert!(!r.out.exists());
}

#[test]
fn input_errors_exit_two() {
    let d = tempfile::tempdir().unwrap();
    let f2 = json!({"kind": "catalog", "name": "form2"});
    assert_eq!(frobweb(d.path(), "analyze", &json!({"kind": "catalog", "name": "form9"}), &[], "o.json").code, 2);
    assert_eq!(frobweb(d.path(), "analyze", &json!({"kind": "catalog", "name": "form8"}), &[], "o.json").code, 2);
    assert_eq!(frobweb(d.path(), "plot", &f2, &["--region", "0,0,0,1"], "o.svg").code, 2);
    assert_eq!(frobweb(d.path(), "verify", &f2, &["--tol", "0"], "o.json").code, 2);
    let r = frobweb(d.path(), "frobnicate", &f2, &[], "o.json");
    assert_eq!(r.code, 2);
    assert!(r.stdout.contains("\"error\""));
}

#[test]
fn build_elliptic_form3() {
    let d = tempfile::tempdir().unwrap();
    let r = frobweb(d.path(), "build", &json!({"family": "elliptic", "form": 3}), &[], "b.json");
    assert_eq!(r.code, 0, "{}", r.stdout);
    let v = read(&r.out);
    assert_eq!(v["shear"]["r"]["num"], json!("-1"));
    assert_eq!(v["shear"]["r"]["den"], json!("12"));
    assert_eq!(v["verification"]["all_pass"], json!(true));
    assert_eq!(v["verification"]["checks"].as_array().unwrap().len(), 7);
}

#[test]
fn build_reduced_families() {
    let d = tempfile::tempdir().unwrap();
    let r = frobweb(d.path(), "build", &json!({"family": "parabolic", "L": std::f64::consts::FRAC_PI_4, "a0": "1/3"}), &["--grid", "3"], "p.json");
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert!(read(&r.out)["profile"]["knots"].is_array() || read(&r.out)["profile"].is_object());
    let r = frobweb(d.path(), "build", &json!({"family": "hyperbolic", "m0": 2, "a0": 0.1}), &["--grid", "3"], "h.json");
    assert_eq!(r.code, 0, "{}", r.stdout);
    let v = read(&r.out);
    assert_eq!(v["parity"]["applicable"], json!(true));
    assert!(v["parity"]["residual"].as_f64().unwrap() < 1e-9);
}

#[test]
fn verify_failure_exits_one_with_report() {
    let d = tempfile::tempdir().unwrap();
    let r = frobweb(d.path(), "verify", &json!({"web": {"kind": "catalog", "name": "form3"}}), &["--grid", "3"], "v.json");
    assert_eq!(r.code, 1);
    let v = read(&r.out);
    assert_eq!(v["all_pass"], json!(false));
    let sheared = json!({"web": {"kind": "catalog", "name": "form3"}, "shear": {"k": 2, "r": "-1/12"}});
    assert_eq!(frobweb(d.path(), "verify", &sheared, &["--grid", "3"], "s.json").code, 0);
}

#[test]
fn report_contains_obstruction() {
    let d = tempfile::tempdir().unwrap();
    let r = frobweb(d.path(), "report", &json!({"kind": "catalog", "name": "form4"}), &[], "r.json");
    assert_eq!(r.code, 0);
    let v = read(&r.out);
    assert_eq!(v["delta_obstruction"]["verdict"], json!("obstructed"));
    assert!(v["wdvv0"]["max_residual"].is_number());
}

#[test]
fn plot_form2_and_determinism() {
    let d = tempfile::tempdir().unwrap();
    let f2 = json!({"kind": "catalog", "name": "form2"});
    let a = frobweb(d.path(), "plot", &f2, &["--seeds", "5", "--region", "-1,-1,1,1"], "a.svg");
    let b = frobweb(d.path(), "plot", &f2, &["--seeds", "5", "--region", "-1,-1,1,1"], "b.svg");
    assert_eq!(a.code, 0);
    let sa = std::fs::read_to_string(&a.out).unwrap();
    assert_eq!(sa, std::fs::read_to_string(&b.out).unwrap());
    assert_eq!(sa.matches("<polyline").count(), 15);
    assert!(sa.contains("class=\"discriminant\""));
    assert!(sa.starts_with("<?xml") && sa.contains("frobweb-plot/1"));
    let csv = std::fs::read_to_string(a.out.with_extension("csv")).unwrap();
    assert!(csv.starts_with("kind,family,leaf,index,x,y,status"));
    let e = frobweb(d.path(), "plot", &f2, &["--seeds", "0"], "e.svg");
    let se = std::fs::read_to_string(&e.out).unwrap();
    assert!(!se.contains("<polyline") && se.contains("class=\"discriminant\""));
}
