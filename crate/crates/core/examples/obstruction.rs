//! No kind1 metric extends to the singular point: 1/delta tends to zero.
use frobweb::frobenius::{delta_obstruction, DeltaLimit};
use frobweb::scalar::re;
use frobweb::web::{catalog, NormalForm};

fn main() -> frobweb::Result<()> {
    let origin = (re(0.0), re(0.0));
    for form in [NormalForm::Form2, NormalForm::Form3, NormalForm::Form4, NormalForm::Form5, NormalForm::Form6 { l: re(0.7) }] {
        let o = delta_obstruction(&catalog(&form), (re(0.4), re(0.3)), origin, 16)?;
        let verdict = match o.result {
            DeltaLimit::Obstructed { limit } => format!("obstructed (1/delta -> {:.1e})", limit.norm()),
            DeltaLimit::Finite { delta } => format!("finite delta = {delta}"),
        };
        println!("{:<10} {verdict}", form.label());
    }
    Ok(())
}
