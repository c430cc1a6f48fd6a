// Run the Cauchy-point variants on a larger LIBSVM file under a wall-clock
// budget, e.g. Gisette:
//
//     cargo run --release --example large_dataset -- path/to/gisette_scale 60
//
// Without arguments the bundled Mushroom data is used with a short budget.

use std::error::Error;
use std::path::Path;

use mftr::harness::DimSpec;
use mftr::{minimize, read_libsvm, FullSolver, LossKind, LossModel, Method, TrustRegionConfig};
use nalgebra::DVector;

pub fn run_on(path: &Path, budget_s: f64, max_outer: usize) -> Result<(), Box<dyn Error>> {
    let d = read_libsvm(path, None)?;
    println!("{}: n = {}, q = {}", path.display(), d.n(), d.q());
    let m = LossModel::for_dataset(LossKind::LeastSquaresSigmoid, &d);
    let cfg = TrustRegionConfig {
        full_solver: FullSolver::CauchyPoint,
        time_budget_s: Some(budget_s),
        max_outer,
        ..Default::default()
    };
    let w0 = DVector::zeros(d.n());
    let mut methods = vec![Method::Tr];
    for pct in [10.0, 25.0] {
        let t = DimSpec::Percent(pct).resolve(d.n())?;
        methods.push(Method::Str { t, base_seed: 0 });
        methods.push(Method::Svdtr { t });
    }
    for method in methods {
        let out = minimize(&d, &m, &cfg, method, &w0)?;
        let last = out.history.last().unwrap();
        println!(
            "  {:<6} t={:<5} {:>6} iterations  {:?}  |grad| {:.3e}  {:.2} s",
            method.name(),
            method.reduced_dim().map_or("-".into(), |t| t.to_string()),
            out.iterations(),
            out.status,
            last.grad_norm,
            last.wall_time_s,
        );
    }
    Ok(())
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/mushrooms");
    run_on(Path::new(path), 5.0, 40)
}

fn main() -> Result<(), Box<dyn Error>> {
    let mut args = std::env::args().skip(1);
    match args.next() {
        Some(path) => {
            let budget = args.next().map_or(Ok(600.0), |s| s.parse())?;
            run_on(Path::new(&path), budget, usize::MAX)
        }
        None => run_example(),
    }
}
