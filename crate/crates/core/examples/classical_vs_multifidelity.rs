// Classical trust region against its sketched and SVD variants on the bundled
// Australian data, with the least-squares sigmoid loss.

use std::error::Error;

use mftr::{minimize, read_libsvm, FullSolver, LossKind, LossModel, Method, TrustRegionConfig};
use nalgebra::DVector;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/australian_scale");
    let d = read_libsvm(path, None)?;
    let m = LossModel::for_dataset(LossKind::LeastSquaresSigmoid, &d);
    let w0 = DVector::zeros(d.n());
    let t = 7;

    for solver in [
        FullSolver::CauchyPoint,
        FullSolver::SteihaugCg { max_iter: 2 },
    ] {
        let cfg = TrustRegionConfig {
            full_solver: solver,
            ..Default::default()
        };
        println!("{solver:?}");
        for method in [
            Method::Tr,
            Method::Str { t, base_seed: 0 },
            Method::Svdtr { t },
        ] {
            let out = minimize(&d, &m, &cfg, method, &w0)?;
            let used = out.history.iter().filter(|r| r.pl_used).count();
            println!(
                "  {:<6} {:>5} iterations  {:?}  |grad| {:.2e}  corrections used {used}",
                method.name(),
                out.iterations(),
                out.status,
                out.final_grad_norm(),
            );
        }
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
