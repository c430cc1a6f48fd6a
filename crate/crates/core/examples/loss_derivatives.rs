// Evaluate both losses, check the gradient against central differences and
// apply the Hessian without forming it.

use std::error::Error;

use mftr::subproblem::LinearOperator;
use mftr::{parse_libsvm, LossKind, LossModel};
use nalgebra::DVector;

const TEXT: &str = "\
+1 1:0.8 2:-0.3 3:0.1
-1 1:-0.4 2:0.9
+1 2:0.2 3:-0.7
-1 1:0.6 3:0.5
";

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let d = parse_libsvm(TEXT, None)?;
    let w = DVector::from_vec(vec![0.3, -0.2, 0.5]);
    for kind in [LossKind::LogLoss, LossKind::LeastSquaresSigmoid] {
        // lambda = 1/q
        let m = LossModel::for_dataset(kind, &d);
        let (f, g) = m.value_and_gradient(&d, &w)?;

        let h = 1e-6;
        let mut fd = DVector::zeros(3);
        for j in 0..3 {
            let mut wp = w.clone();
            let mut wm = w.clone();
            wp[j] += h;
            wm[j] -= h;
            fd[j] = (m.value(&d, &wp)? - m.value(&d, &wm)?) / (2.0 * h);
        }

        let hess = m.hessian_at(&d, &w)?;
        let v = DVector::from_vec(vec![1.0, 0.0, -1.0]);
        let hv = hess.apply(&v);
        println!("{kind:?}: f = {f:.10}");
        println!("  |grad - fd| = {:.2e}", (&g - &fd).norm());
        println!("  v.Hv = {:.6}", v.dot(&hv));
        println!("  dense Hessian:\n{}", hess.to_dense());
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
