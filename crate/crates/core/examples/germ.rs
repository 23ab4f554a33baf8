//! Assemble and verify the Frobenius germ over sheared form 3.
use frobweb::frobenius::{euler, grid_around, verify, FrobeniusGerm};
use frobweb::reduce::shear_fit;
use frobweb::web::{catalog, NormalForm};

fn main() -> frobweb::Result<()> {
    let web = catalog(&NormalForm::Form3);
    let r = shear_fit(&web, 2)?;
    let germ = FrobeniusGerm::kind0(web.pushforward_shear(2, r)?)?;
    println!("Euler weights (t, x, y): {:?}", euler(&germ)?.map(|w| w.to_string()));
    for fd in [1e-3, 1e-4] {
        let rep = verify(&germ, &grid_around(1.0, 1.0, 5, 0.05), fd, 1e-6)?;
        println!("fd_step {fd:e}:");
        for c in &rep.checks {
            println!("  {:<14} {:.2e} {}", c.name, c.max_residual, if c.pass { "ok" } else { "FAIL" });
        }
    }
    Ok(())
}
