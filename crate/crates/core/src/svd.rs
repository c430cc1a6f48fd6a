//! Leading left singular vectors of a dense matrix.
//!
//! Small problems use one-sided (Hestenes) Jacobi on the smaller Gram
//! dimension, which is accurate to working precision. When both dimensions
//! exceed [`JACOBI_LIMIT`], a subspace iteration with Rayleigh-Ritz extraction
//! is used instead and stops once the captured energy has settled.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Above this smaller dimension Jacobi sweeps get too slow.
pub const JACOBI_LIMIT: usize = 2000;

const MAX_SWEEPS: usize = 80;

/// Result of [`leading_left_singular_vectors`].
#[derive(Debug, Clone)]
pub struct LeftSingular {
    /// `n x t`, orthonormal columns ordered by nonincreasing singular value.
    pub vectors: DMatrix<f64>,
    /// The corresponding `t` singular values.
    pub values: Vec<f64>,
    /// How many of the returned columns belong to (numerically) zero singular
    /// values and were completed to an orthonormal basis.
    pub deficient: usize,
}

/// One-sided Jacobi: rotates the columns of `a` in place until they are
/// mutually orthogonal and returns the accumulated right rotation `V`, so that
/// on exit `a_in * V = a_out`.
pub fn one_sided_jacobi(a: &mut DMatrix<f64>) -> DMatrix<f64> {
    let k = a.ncols();
    let mut v = DMatrix::identity(k, k);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let (alpha, beta, gamma) = {
                    let cp = a.column(p);
                    let cq = a.column(q);
                    (cp.norm_squared(), cq.norm_squared(), cp.dot(&cq))
                };
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(a, p, q, c, s);
                rotate_columns(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    v
}

fn rotate_columns(m: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    for i in 0..m.nrows() {
        let x = m[(i, p)];
        let y = m[(i, q)];
        m[(i, p)] = c * x - s * y;
        m[(i, q)] = s * x + c * y;
    }
}

fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx
}

/// Fills columns `from..` of `u` with unit vectors orthogonal to everything
/// before them, drawn from the coordinate basis.
fn complete_basis(u: &mut DMatrix<f64>, from: usize) {
    let n = u.nrows();
    let mut next_axis = 0;
    for col in from..u.ncols() {
        loop {
            assert!(next_axis < n, "cannot complete basis beyond dimension");
            let mut e = DVector::zeros(n);
            e[next_axis] = 1.0;
            next_axis += 1;
            for _ in 0..2 {
                for j in 0..col {
                    let proj = u.column(j).dot(&e);
                    e.axpy(-proj, &u.column(j), 1.0);
                }
            }
            let norm = e.norm();
            if norm > 0.5 {
                u.set_column(col, &(e / norm));
                break;
            }
        }
    }
}

fn is_negligible(sigma: f64, sigma_max: f64, dims: usize) -> bool {
    sigma <= sigma_max * dims as f64 * f64::EPSILON || sigma == 0.0
}

fn jacobi_left(x: &DMatrix<f64>, t: usize) -> LeftSingular {
    let (n, q) = x.shape();
    let dims = n.max(q);
    if n <= q {
        // X^T = V S U^T, so the right rotation of X^T holds U.
        let mut a = x.transpose();
        let v = one_sided_jacobi(&mut a);
        let sigma: Vec<f64> = a.column_iter().map(|c| c.norm()).collect();
        let order = descending_order(&sigma);
        let smax = sigma[order[0]];
        let mut vectors = DMatrix::zeros(n, t);
        let mut values = Vec::with_capacity(t);
        for (slot, &j) in order.iter().take(t).enumerate() {
            vectors.set_column(slot, &v.column(j));
            values.push(sigma[j]);
        }
        let deficient = values
            .iter()
            .filter(|&&s| is_negligible(s, smax, dims))
            .count();
        LeftSingular {
            vectors,
            values,
            deficient,
        }
    } else {
        let mut a = x.clone();
        one_sided_jacobi(&mut a);
        let sigma: Vec<f64> = a.column_iter().map(|c| c.norm()).collect();
        let order = descending_order(&sigma);
        let smax = sigma[order[0]];
        let mut vectors = DMatrix::zeros(n, t);
        let mut values = Vec::with_capacity(t);
        let mut filled = 0;
        for &j in order.iter().take(t) {
            if is_negligible(sigma[j], smax, dims) {
                break;
            }
            vectors.set_column(filled, &(a.column(j) / sigma[j]));
            values.push(sigma[j]);
            filled += 1;
        }
        let deficient = t - filled;
        for &j in order.iter().skip(filled).take(deficient) {
            values.push(sigma[j]);
        }
        complete_basis(&mut vectors, filled);
        LeftSingular {
            vectors,
            values,
            deficient,
        }
    }
}

fn subspace_iteration_left(x: &DMatrix<f64>, t: usize) -> LeftSingular {
    let (n, q) = x.shape();
    let k = (t + 10).min(n.min(q));
    // Fixed seed: the start block only has to be generic.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_5eed);
    let start = DMatrix::from_fn(n, k, |_, _| StandardNormal.sample(&mut rng));
    let mut basis = start.qr().q();
    let mut last_energy = f64::NAN;
    let mut best = None;
    for _ in 0..200 {
        let z = x * (x.tr_mul(&basis));
        basis = z.qr().q();
        // Rayleigh-Ritz on the k-dimensional range.
        let small = basis.tr_mul(x);
        let inner = jacobi_left(&small, t);
        let energy: f64 = inner.values.iter().map(|s| s * s).sum();
        let vectors = &basis * &inner.vectors;
        let settled = (energy - last_energy).abs() <= 1e-14 * energy.max(f64::MIN_POSITIVE);
        last_energy = energy;
        best = Some(LeftSingular {
            vectors,
            values: inner.values,
            deficient: inner.deficient,
        });
        if settled {
            break;
        }
    }
    best.expect("at least one iteration")
}

/// Leading `t` left singular vectors of `x` (`n x q`), `1 <= t <= min(n, q)`.
pub fn leading_left_singular_vectors(x: &DMatrix<f64>, t: usize) -> LeftSingular {
    let (n, q) = x.shape();
    assert!(t >= 1 && t <= n.min(q), "t must lie in 1..=min(n, q)");
    if n.min(q) > JACOBI_LIMIT {
        subspace_iteration_left(x, t)
    } else {
        jacobi_left(x, t)
    }
}
