//! Potential of form 2 and the web it characterizes.
use frobweb::wdvv::{associativity_exact, characteristic_web, reconstruct_potential};
use frobweb::web::{catalog, NormalForm};

fn main() -> frobweb::Result<()> {
    let web = catalog(&NormalForm::Form2);
    let pot = reconstruct_potential(&web)?;
    println!("potential: {}", pot.to_json());
    println!("associativity residual is zero: {:?}", associativity_exact(&pot).map(|p| p.is_zero_poly()));
    let back = characteristic_web(&pot)?;
    println!("round trip exact: {}", back.exact_sab() == web.exact_sab());
    Ok(())
}
