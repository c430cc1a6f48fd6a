// Parse a small LIBSVM file, write it back out, and compress its features
// with a Gaussian sketch.

use std::error::Error;

use mftr::{parse_libsvm, reduce_features, serialize_libsvm, Projection};

const TEXT: &str = "\
# label index:value ...
+1 1:0.5 3:-1.25
-1 2:2.0 4:0.75
0 1:-0.5 2:0.25 3:1.0
";

pub fn run_example() -> Result<(), Box<dyn Error>> {
    // Label 0 is read as -1. Four features are implied by the largest index;
    // forcing six pads with zero columns.
    let d = parse_libsvm(TEXT, Some(6))?;
    println!("n = {} features, q = {} samples", d.n(), d.q());
    println!("labels: {:?}", d.labels().as_slice());

    let round_trip = parse_libsvm(&serialize_libsvm(&d), Some(6))?;
    assert_eq!(round_trip.features(), d.features());

    let s = Projection::gaussian_sketch(d.n(), 2, 42)?;
    let reduced = reduce_features(&d, &s)?;
    println!("reduced features ({} x {}):", reduced.n(), reduced.q());
    for row in reduced.features().row_iter() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:+.4}")).collect();
        println!("  {}", cells.join("  "));
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
