// Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use mftr::{Dataset, LossKind, LossModel};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

pub fn random_matrix(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| r.random_range(-1.0..1.0))
}

pub fn random_vector(r: &mut ChaCha8Rng, n: usize, scale: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| scale * r.random_range(-1.0..1.0))
}

/// Dense random dataset with `n` features and `q` samples.
pub fn random_dataset(r: &mut ChaCha8Rng, n: usize, q: usize) -> Dataset {
    let x = random_matrix(r, n, q);
    let y = DVector::from_fn(q, |_, _| if r.random_bool(0.5) { 1.0 } else { -1.0 });
    Dataset::new(x, y).unwrap()
}

/// Random symmetric matrix; shifted to be positive definite when `spd`.
pub fn random_symmetric(r: &mut ChaCha8Rng, dim: usize, spd: bool) -> DMatrix<f64> {
    let a = random_matrix(r, dim, dim);
    if spd {
        &a * a.transpose() + DMatrix::identity(dim, dim) * 0.5
    } else {
        (&a + a.transpose()) * 0.5
    }
}

pub fn both_losses() -> [LossKind; 2] {
    [LossKind::LogLoss, LossKind::LeastSquaresSigmoid]
}

/// Objective written out per sample, straight from the loss definitions,
/// without the library's stable reformulations.
pub fn naive_objective(kind: LossKind, d: &Dataset, w: &DVector<f64>, lambda: f64) -> f64 {
    let x = d.features();
    let q = d.q();
    let mut sum = 0.0;
    for i in 0..q {
        let z: f64 = (0..d.n()).map(|j| x[(j, i)] * w[j]).sum();
        let y = d.labels()[i];
        sum += match kind {
            LossKind::LogLoss => (1.0 + (-y * z).exp()).ln(),
            LossKind::LeastSquaresSigmoid => {
                let s = z.exp() / (1.0 + z.exp());
                (y - s) * (y - s)
            }
        };
    }
    sum / q as f64 + 0.5 * lambda * w.norm_squared()
}

pub fn fd_gradient(m: &LossModel, d: &Dataset, w: &DVector<f64>, h: f64) -> DVector<f64> {
    DVector::from_fn(w.len(), |j, _| {
        let mut wp = w.clone();
        let mut wm = w.clone();
        wp[j] += h;
        wm[j] -= h;
        (m.value(d, &wp).unwrap() - m.value(d, &wm).unwrap()) / (2.0 * h)
    })
}

pub fn fd_hvp(
    m: &LossModel,
    d: &Dataset,
    w: &DVector<f64>,
    v: &DVector<f64>,
    h: f64,
) -> DVector<f64> {
    let gp = m.gradient(d, &(w + v * h)).unwrap();
    let gm = m.gradient(d, &(w - v * h)).unwrap();
    (gp - gm) / (2.0 * h)
}

pub fn rel_err(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1e-12)
}

/// Quadratic model decrease `-(g.p + p.H p / 2)` computed from scratch.
pub fn model_decrease(g: &DVector<f64>, h: &DMatrix<f64>, p: &DVector<f64>) -> f64 {
    -(g.dot(p) + 0.5 * p.dot(&(h * p)))
}

/// Squared singular values from nalgebra's SVD, sorted descending.
pub fn oracle_sq_singular_values(x: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = x
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .map(|v| v * v)
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Product written as explicit loops.
pub fn matmul_loops(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut c = DMatrix::zeros(a.nrows(), b.ncols());
    for i in 0..a.nrows() {
        for j in 0..b.ncols() {
            let mut acc = 0.0;
            for k in 0..a.ncols() {
                acc += a[(i, k)] * b[(k, j)];
            }
            c[(i, j)] = acc;
        }
    }
    c
}

pub fn median_usize(mut v: Vec<usize>) -> f64 {
    v.sort_unstable();
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m] as f64
    } else {
        (v[m - 1] + v[m]) as f64 / 2.0
    }
}
