use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use frobweb::chern::{curvature_at, gamma_at, gamma_numerators_exact};
use frobweb::frobenius::{delta_obstruction, grid_around, verify, DeltaLimit, FrobeniusGerm};
use frobweb::invariant::{fingerprint, limit_invariant, InvariantValue};
use frobweb::reduce::{
    hyperbolic_derivatives, hyperbolic_rederive, integrate_hyperbolic, integrate_parabolic, parabolic_b0_for,
    parity_residual, shear_fit,
};
use frobweb::scalar::{q, re, Scalar};
use frobweb::wdvv::{associativity_exact, characteristic_web, reconstruct_potential, wdvv0_identically_zero, wdvv0_residual};
use frobweb::web::{catalog, CubicWeb, NormalForm};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: String) -> Outcome {
    if cond {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn flat_catalog() -> Outcome {
    let t = Instant::now();
    let forms = [
        NormalForm::Form1 { m0: 0 },
        NormalForm::Form1 { m0: 2 },
        NormalForm::Form2,
        NormalForm::Form3,
        NormalForm::Form4,
        NormalForm::Form5,
        NormalForm::Form6 { l: re(PI / 4.0) },
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for form in &forms {
        let web = catalog(form);
        let mut n = 0;
        let mut tries = 0;
        while n < 50 {
            tries += 1;
            if tries > 5000 {
                return Err(format!("{}: only {n} regular points found", form.label()));
            }
            let (x, y) = (re(rng.gen_range(-1.0..1.0)), re(rng.gen_range(-1.0..1.0)));
            let Ok(g) = gamma_at(&web, x, y) else { continue };
            let scale = 1.0 + g.g1.norm().powi(2) + g.g2.norm().powi(2);
            if !scale.is_finite() || scale > 1e6 {
                continue;
            }
            let k = curvature_at(&web, x, y).map_err(|e| format!("{}: {e}", form.label()))?;
            worst = worst.max(k.norm() / scale);
            n += 1;
        }
    }
    let secs = t.elapsed().as_secs_f64();
    check(worst < 1e-8 && secs < 5.0, format!("max curvature {worst:.1e}, {secs:.2} s"))
}

fn gamma_closed_forms() -> Outcome {
    for form in [NormalForm::Form2, NormalForm::Form3, NormalForm::Form4] {
        let sab = catalog(&form).exact_sab().ok_or("no exact coefficients")?;
        let (g1, g2, _) = gamma_numerators_exact(&sab);
        if !g1.is_zero_poly() || !g2.is_zero_poly() {
            return Err(format!("{} has nonzero gamma", form.label()));
        }
    }
    let l = re(0.4);
    let web = catalog(&NormalForm::Form6 { l });
    let mut worst = 0.0f64;
    for i in 0..20 {
        let x = re(-0.3 + 0.03 * i as f64);
        let y = re(0.2 + 0.05 * i as f64);
        let g = gamma_at(&web, x, y).map_err(|e| e.to_string())?;
        let expect = 2.0 / 3f64.sqrt() * (2.0 * 3f64.sqrt() * x + l).tan();
        worst = worst.max((g.g1 - expect).norm()).max(g.g2.norm());
    }
    check(worst < 1e-10, format!("forms 2-4 gamma = 0 exactly; form 6 max error {worst:.1e}"))
}

fn pair(v: InvariantValue) -> Result<[Scalar; 2], String> {
    match v {
        InvariantValue::Pair(p) => Ok(p),
        other => Err(format!("no limit: {other:?}")),
    }
}

fn invariants() -> Outcome {
    let p = pair(limit_invariant(&catalog(&NormalForm::Form5)).map_err(|e| e.to_string())?)?;
    if p[0].norm() > 1e-6 || (p[1] - 1.0).norm() > 1e-6 {
        return Err(format!("form 5 gives {p:?}"));
    }
    let sigma0 = re(0.3);
    let (_, web) = integrate_hyperbolic(sigma0, sigma0 * sigma0 / 3.0, re(0.1), 0, (-0.3, 0.3), 1e-2).map_err(|e| e.to_string())?;
    let p = pair(limit_invariant(&web).map_err(|e| e.to_string())?)?;
    if p[0].norm() > 1e-6 || (p[1] - 1.0).norm() > 1e-6 {
        return Err(format!("hyperbolic form-8 class gives {p:?}"));
    }
    let mut worst = 0.0f64;
    for l in [re(PI / 6.0), re(PI / 4.0), Scalar::new(1.0, 0.3)] {
        let p = pair(limit_invariant(&catalog(&NormalForm::Form6 { l })).map_err(|e| e.to_string())?)?;
        let expect = -(l.tan() * l.tan()) / 27.0;
        let got = p[1] / p[0];
        worst = worst.max((got - expect).norm() / expect.norm());
    }
    check(worst < 1e-6, format!("form 5 and form-8 class [0:1]; form 6 max relative error {worst:.1e}"))
}

fn shear_constants() -> Outcome {
    let mut got = Vec::new();
    for (form, k, want) in [(NormalForm::Form3, 2, q(-1, 12)), (NormalForm::Form4, 3, q(-1, 9))] {
        let web = catalog(&form);
        let r = shear_fit(&web, k).map_err(|e| e.to_string())?;
        let sheared = web.pushforward_shear(k, r).map_err(|e| e.to_string())?;
        if r != want || wdvv0_identically_zero(&sheared) != Some(true) {
            return Err(format!("{}: r = {r}", form.label()));
        }
        got.push(r.to_string());
    }
    check(true, format!("r = {} and {}, WDVV0 symbolically zero", got[0], got[1]))
}

fn potential_round_trip() -> Outcome {
    let web = catalog(&NormalForm::Form2);
    let pot = reconstruct_potential(&web).map_err(|e| e.to_string())?;
    let ass = associativity_exact(&pot).map(|p| p.is_zero_poly());
    let back = characteristic_web(&pot).map_err(|e| e.to_string())?;
    check(ass == Some(true) && back.exact_sab() == web.exact_sab(), format!("associativity zero: {ass:?}"))
}

fn grid_wdvv0(web: &CubicWeb, x0: f64, dx: f64, y0: f64, dy: f64) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for i in 0..10 {
        for j in 0..10 {
            let r = wdvv0_residual(web, re(x0 + dx * i as f64), re(y0 + dy * j as f64)).map_err(|e| e.to_string())?;
            worst = r.iter().map(|z| z.norm()).fold(worst, f64::max);
        }
    }
    Ok(worst)
}

fn reduced_families() -> Outcome {
    let t = Instant::now();
    let l = re(PI / 4.0);
    let (_, par) = integrate_parabolic(re(0.0), re(1.0 / 3.0), parabolic_b0_for(l), (-0.5, 0.5), 1e-2).map_err(|e| e.to_string())?;
    let wp = grid_wdvv0(&par, -0.25, 0.05, 0.5, 0.1)?;
    let (prof, hyp) = integrate_hyperbolic(re(0.0), re(0.1), re(0.0), 2, (-0.6, 0.6), 1e-2).map_err(|e| e.to_string())?;
    let wh = grid_wdvv0(&hyp, -0.3, 0.06, 0.6, 0.08)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut oracle = 0.0f64;
    for m0 in 0..4 {
        for _ in 0..20 {
            let s = re(rng.gen_range(-0.5..0.5));
            let st = [0; 3].map(|_| Scalar::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let a = hyperbolic_derivatives(m0, s, st).map_err(|e| e.to_string())?;
            let b = hyperbolic_rederive(m0, s, st).map_err(|e| e.to_string())?;
            for i in 0..3 {
                oracle = oracle.max((a[i] - b[i]).norm() / (1.0 + a[i].norm()));
            }
        }
    }
    let parity = parity_residual(&prof).map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    check(
        wp < 1e-8 && wh < 1e-8 && oracle < 1e-10 && parity < 1e-9 && secs < 30.0,
        format!("WDVV0 parabolic {wp:.1e}, hyperbolic {wh:.1e}; oracle {oracle:.1e}; parity {parity:.1e}; {secs:.2} s"),
    )
}

fn germs() -> Outcome {
    let mut webs: Vec<(String, CubicWeb, (f64, f64))> = vec![("form2".into(), catalog(&NormalForm::Form2), (1.0, 1.0))];
    for (form, k) in [(NormalForm::Form3, 2), (NormalForm::Form4, 3)] {
        let web = catalog(&form);
        let r = shear_fit(&web, k).map_err(|e| e.to_string())?;
        webs.push((format!("{} sheared", form.label()), web.pushforward_shear(k, r).map_err(|e| e.to_string())?, (1.0, 1.0)));
    }
    let l = re(PI / 4.0);
    let (_, par) = integrate_parabolic(re(0.0), re(1.0 / 3.0), parabolic_b0_for(l), (-0.5, 0.5), 1e-2).map_err(|e| e.to_string())?;
    webs.push(("parabolic".into(), par, (0.1, 1.0)));
    let (_, hyp) = integrate_hyperbolic(re(0.0), re(0.1), re(0.0), 2, (-0.6, 0.6), 1e-2).map_err(|e| e.to_string())?;
    webs.push(("hyperbolic".into(), hyp, (0.2, 1.0)));
    let mut worst = 0.0f64;
    let mut ratios = Vec::new();
    for (name, web, (cx, cy)) in webs {
        let germ = FrobeniusGerm::kind0(web).map_err(|e| e.to_string())?;
        let grid = grid_around(cx, cy, 5, 0.05);
        let fine = verify(&germ, &grid, 1e-4, 1e-6).map_err(|e| format!("{name}: {e}"))?;
        if !fine.all_pass() {
            return Err(format!("{name}: {:?}", fine.checks));
        }
        worst = fine.checks.iter().map(|c| c.max_residual).fold(worst, f64::max);
        let coarse = verify(&germ, &grid, 1e-3, 1e-6).map_err(|e| format!("{name}: {e}"))?;
        let ratio = coarse.residual("commutativity").unwrap_or(0.0) / fine.residual("commutativity").unwrap_or(1.0);
        ratios.push(format!("{ratio:.0}"));
        if !(30.0..=300.0).contains(&ratio) {
            return Err(format!("{name}: commutativity shrinks by {ratio:.1} for a tenfold smaller step"));
        }
    }
    check(true, format!("5 germs, all 7 checks, max residual {worst:.1e}; commutativity ratios {}", ratios.join("/")))
}

fn obstruction() -> Outcome {
    let origin = (re(0.0), re(0.0));
    let mut cases: Vec<(String, CubicWeb, (Scalar, Scalar))> = [
        NormalForm::Form2,
        NormalForm::Form3,
        NormalForm::Form4,
        NormalForm::Form5,
        NormalForm::Form6 { l: re(0.7) },
    ]
    .into_iter()
    .map(|f| (f.label(), catalog(&f), (re(0.4), re(0.3))))
    .collect();
    let (_, hyp) = integrate_hyperbolic(re(0.0), re(0.1), re(0.0), 2, (-0.6, 0.6), 1e-2).map_err(|e| e.to_string())?;
    cases.push(("hyperbolic".into(), hyp, (re(0.3), re(0.8))));
    let mut worst = 0.0f64;
    for (name, web, start) in cases {
        match delta_obstruction(&web, start, origin, 16).map_err(|e| format!("{name}: {e}"))?.result {
            DeltaLimit::Obstructed { limit } => worst = worst.max(limit.norm()),
            DeltaLimit::Finite { delta } => return Err(format!("{name}: finite delta {delta}")),
        }
    }
    check(worst < 1e-6, format!("forms 2-6 and hyperbolic obstructed, max |1/delta| limit {worst:.1e}"))
}

fn fingerprints() -> Outcome {
    let forms = [
        NormalForm::Form1 { m0: 0 },
        NormalForm::Form2,
        NormalForm::Form3,
        NormalForm::Form4,
        NormalForm::Form5,
        NormalForm::Form6 { l: re(PI / 4.0) },
        NormalForm::Form6 { l: re(PI / 6.0) },
    ];
    let fps = forms
        .iter()
        .map(|f| fingerprint(&catalog(f)).map_err(|e| format!("{}: {e}", f.label())))
        .collect::<Result<Vec<_>, _>>()?;
    for i in 0..fps.len() {
        for j in i + 1..fps.len() {
            if !fps[i].distinct_from(&fps[j]) {
                return Err(format!("{} and {} collide", forms[i].label(), forms[j].label()));
            }
        }
    }
    check(true, format!("{} fingerprints pairwise distinct", fps.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("catalog flatness", flat_catalog),
        ("connection closed forms", gamma_closed_forms),
        ("limit invariants", invariants),
        ("exact shear constants", shear_constants),
        ("potential round trip", potential_round_trip),
        ("reduced families", reduced_families),
        ("germ verification", germs),
        ("kind1 obstruction", obstruction),
        ("fingerprint separation", fingerprints),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(msg) => println!("criterion {} ({name}): PASS - {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL - {msg}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
