// Drive the benchmark harness from code: one run with CSV and manifest
// output, then a comparison table over several seeds.

use std::error::Error;

use mftr::harness::{compare, run, summary_csv, RunConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let dir = std::env::temp_dir().join(format!("mftr-benchmark-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;

    let mut base = RunConfig::default();
    base.apply_text(&format!(
        "dataset = {}/tests/data/australian_scale\nloss = ls\nsolver = cp\nrepeats = 3\n",
        env!("CARGO_MANIFEST_DIR")
    ))?;

    let mut single = base.clone();
    single.set("method", "str")?;
    single.set("t", "50%")?;
    single.set("output", dir.join("str.csv").to_str().unwrap())?;
    for report in run(&single).map_err(|e| e.to_string())? {
        println!(
            "seed {}: {:?} in {} iterations -> {}",
            report.seed,
            report.status,
            report.iterations,
            report.csv_path.display()
        );
    }

    let variants: Vec<RunConfig> = [
        ("tr", "50%"),
        ("str", "25%"),
        ("str", "50%"),
        ("svdtr", "50%"),
    ]
    .iter()
    .map(|&(method, t)| {
        let mut c = base.clone();
        c.set("method", method).unwrap();
        c.set("t", t).unwrap();
        c
    })
    .collect();
    let rows = compare(&variants).map_err(|e| e.to_string())?;
    print!("{}", summary_csv(&rows));

    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
