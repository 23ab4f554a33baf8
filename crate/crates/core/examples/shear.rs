//! Exact shear parameters that put forms 3 and 4 on WDVV0.
use frobweb::reduce::shear_fit;
use frobweb::wdvv::wdvv0_identically_zero;
use frobweb::web::{catalog, NormalForm};

fn main() -> frobweb::Result<()> {
    for (form, k) in [(NormalForm::Form3, 2), (NormalForm::Form4, 3)] {
        let web = catalog(&form);
        let r = shear_fit(&web, k)?;
        let sheared = web.pushforward_shear(k, r)?;
        println!("{}: shear order {k}, r = {r}; WDVV0 identically zero: {:?}", form.label(), wdvv0_identically_zero(&sheared));
    }
    Ok(())
}
