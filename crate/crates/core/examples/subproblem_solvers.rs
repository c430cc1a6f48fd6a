// Cauchy point and Steihaug-CG on the same trust-region subproblem, once with
// positive curvature and once with an indefinite matrix.

use std::error::Error;

use mftr::{cauchy_point, steihaug_cg};
use nalgebra::{DMatrix, DVector};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let g = DVector::from_vec(vec![1.0, -2.0, 0.5]);
    let spd = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 2.0]);
    let indefinite = DMatrix::from_row_slice(3, 3, &[2.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0]);

    for (name, h) in [("spd", &spd), ("indefinite", &indefinite)] {
        for delta in [0.1, 10.0] {
            let cp = cauchy_point(&g, h, delta)?;
            let cg = steihaug_cg(&g, h, delta, 3, 1e-10)?;
            println!(
                "{name:>10} delta={delta:<4}  cp: |p|={:.4} decrease={:.5}  cg: |p|={:.4} decrease={:.5} ({:?}, {} its)",
                cp.step.norm(),
                cp.predicted_decrease,
                cg.step.norm(),
                cg.predicted_decrease,
                cg.termination,
                cg.inner_iterations,
            );
            assert!(cg.predicted_decrease >= cp.predicted_decrease - 1e-12);
        }
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
