//! SVG and CSV of form 2: fifteen leaves and the cusp -32x^3 = 27y^2.
use frobweb::plot::{plot, PlotOptions};
use frobweb::web::{catalog, NormalForm};

fn main() -> std::io::Result<()> {
    let web = catalog(&NormalForm::Form2);
    let p = plot(&web, &PlotOptions::default());
    let dir = std::env::temp_dir();
    std::fs::write(dir.join("form2.svg"), p.to_svg("form 2"))?;
    std::fs::write(dir.join("form2.csv"), p.to_csv())?;
    println!("{} leaves, {} discriminant segments, written to {}", p.leaves.len(), p.discriminant.len(), dir.display());
    Ok(())
}
