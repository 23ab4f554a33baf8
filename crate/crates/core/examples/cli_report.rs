//! Drive the command-line front end on a catalog spec.
use std::io::Write;

fn main() -> std::io::Result<()> {
    let dir = std::env::temp_dir();
    let input = dir.join("frobweb_form6.json");
    let output = dir.join("frobweb_form6_report.json");
    std::fs::File::create(&input)?.write_all(br#"{"kind": "catalog", "name": "form6", "params": {"L": 0.7853981633974483}}"#)?;
    let code = frobweb::cli::run(["frobweb", "report", "--in", input.to_str().unwrap(), "--out", output.to_str().unwrap()]);
    println!("exit {code}");
    println!("{}", std::fs::read_to_string(&output)?.lines().take(12).collect::<Vec<_>>().join("\n"));
    Ok(())
}
