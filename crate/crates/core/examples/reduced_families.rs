//! Parabolic and hyperbolic families from the reduced ODE systems.
use frobweb::invariant::limit_invariant;
use frobweb::reduce::{integrate_hyperbolic, integrate_parabolic, parabolic_b0_for, parity_residual, riccati_f};
use frobweb::scalar::re;
use frobweb::wdvv::wdvv0_residual;

fn main() -> frobweb::Result<()> {
    let l = re(std::f64::consts::FRAC_PI_4);
    let (_, web) = integrate_parabolic(re(0.0), re(1.0 / 3.0), parabolic_b0_for(l), (-0.5, 0.5), 1e-2)?;
    let r = wdvv0_residual(&web, re(0.2), re(1.3))?;
    println!("parabolic: WDVV0 residual {:.1e}, invariant {:?}", r.iter().map(|z| z.norm()).fold(0.0, f64::max), limit_invariant(&web)?);

    let (prof, web) = integrate_hyperbolic(re(0.0), re(0.1), re(0.0), 2, (-0.6, 0.6), 1e-2)?;
    let r = wdvv0_residual(&web, re(0.2), re(0.9))?;
    println!(
        "hyperbolic m0=2: WDVV0 residual {:.1e}, parity residual {:.1e}, invariant {:?}",
        r.iter().map(|z| z.norm()).fold(0.0, f64::max),
        parity_residual(&prof)?,
        limit_invariant(&web)?
    );

    let f = riccati_f(l, re(0.0), (-0.2, 0.2), 1e-2)?;
    println!("scale function F: max second-order residual {:.1e}", f.max_residual()?);
    Ok(())
}
