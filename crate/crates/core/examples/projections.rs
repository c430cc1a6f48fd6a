// Build the two reduced-space maps, inspect them, and persist one to disk.

use std::error::Error;

use mftr::{read_libsvm, Projection};
use nalgebra::DMatrix;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/australian_scale");
    let d = read_libsvm(path, None)?;
    let x = d.features();
    let total = x.norm_squared();

    for t in [2, 4, 7, 11] {
        let svd = Projection::truncated_svd(x, t)?;
        let sketch = Projection::gaussian_sketch(d.n(), t, 1)?;
        let captured = (svd.matrix() * x).norm_squared() / total;
        let sketched = (sketch.matrix() * x).norm_squared() / total;
        println!("t={t:>2}  svd energy {captured:.4}  sketch energy {sketched:.4}");
    }

    // Rows of the SVD map are orthonormal.
    let s = Projection::truncated_svd(x, 5)?;
    let gram = s.matrix() * s.matrix().transpose();
    println!(
        "max |S S^T - I| = {:.2e}",
        (gram - DMatrix::<f64>::identity(5, 5)).amax()
    );
    println!("singular values: {:?}", s.singular_values().unwrap_or(&[]));

    let mut bytes = Vec::new();
    s.write_to(&mut bytes)?;
    let back = Projection::read_from(bytes.as_slice())?;
    assert_eq!(back.matrix(), s.matrix());
    println!("serialized projection: {} bytes", bytes.len());
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
