//! Limit invariants and fingerprints of the catalog.
use frobweb::invariant::{fingerprint, limit_invariant};
use frobweb::scalar::re;
use frobweb::web::{catalog, NormalForm};

fn main() -> frobweb::Result<()> {
    let pi = std::f64::consts::PI;
    for form in [
        NormalForm::Form1 { m0: 0 },
        NormalForm::Form2,
        NormalForm::Form3,
        NormalForm::Form4,
        NormalForm::Form5,
        NormalForm::Form6 { l: re(pi / 4.0) },
        NormalForm::Form6 { l: re(pi / 6.0) },
    ] {
        let web = catalog(&form);
        println!("{:<12} {}", form.label(), fingerprint(&web)?.to_json());
    }
    let l = re(pi / 6.0);
    println!("form 6 at pi/6: {:?}, expected [1 : {:.6}]", limit_invariant(&catalog(&NormalForm::Form6 { l }))?, -(l.tan() * l.tan()).re / 27.0);
    Ok(())
}
