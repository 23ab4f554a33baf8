//! Chern connection and curvature of the catalog webs.
use frobweb::chern::{curvature_at, gamma_at, is_flat_exact};
use frobweb::scalar::re;
use frobweb::web::{catalog, NormalForm};

fn main() -> frobweb::Result<()> {
    let forms = [
        NormalForm::Form1 { m0: 1 },
        NormalForm::Form2,
        NormalForm::Form3,
        NormalForm::Form4,
        NormalForm::Form5,
        NormalForm::Form6 { l: re(std::f64::consts::FRAC_PI_4) },
    ];
    let (x, y) = (re(-0.3), re(0.7));
    for form in &forms {
        let web = catalog(form);
        let g = gamma_at(&web, x, y)?;
        let k = curvature_at(&web, x, y)?;
        println!(
            "{:<10} gamma = ({:+.6}, {:+.6})  curvature = {:.1e}  exact flat: {:?}",
            form.label(),
            g.g1.re,
            g.g2.re,
            k.norm(),
            is_flat_exact(&web)
        );
    }
    Ok(())
}
