//! Approximate solvers for the trust-region subproblem
//!
//! ```text
//! min  m(p) = <g, p> + 1/2 <p, H p>   subject to  |p| <= delta
//! ```
//!
//! where `H` is only available through products.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A symmetric linear map accessed only through matrix-vector products.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, v: &DVector<f64>) -> DVector<f64>;
}

impl LinearOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        self * v
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        (**self).apply(v)
    }
}

/// Why an inner solve stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Residual fell below the relative tolerance.
    SmallResidual,
    /// A direction with nonpositive curvature was followed to the boundary.
    NegativeCurvature,
    /// The next iterate would have left the ball; stopped on the boundary.
    BoundaryExit,
    /// The iteration budget ran out inside the ball. The interior Cauchy point
    /// also reports this: it is a single steepest-descent iteration.
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct SubproblemResult {
    pub step: DVector<f64>,
    /// `m(0) - m(step)`, nonnegative.
    pub predicted_decrease: f64,
    pub hit_boundary: bool,
    pub inner_iterations: usize,
    pub termination: Termination,
}

fn check_radius(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Domain(format!(
            "trust-region radius must be positive, got {delta}"
        )));
    }
    Ok(())
}

/// Cauchy point: minimizer of the model along `-g` inside the ball.
///
/// Uses exactly one operator product. `g` must be nonzero; stationarity is
/// detected by the caller before a step is requested.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn cauchy_point<H: LinearOperator>(
    g: &DVector<f64>,
    hess: &H,
    delta: f64,
) -> Result<SubproblemResult> {
    check_radius(delta)?;
    let gnorm = g.norm();
    if !(gnorm > 0.0) {
        return Err(Error::Domain(
            "Cauchy point needs a nonzero gradient".into(),
        ));
    }
    let hg = hess.apply(g);
    let ghg = g.dot(&hg);
    if !ghg.is_finite() {
        return Err(Error::Numeric {
            context: "Cauchy point curvature",
            iteration: 1,
        });
    }
    let tau = if ghg <= 0.0 {
        1.0
    } else {
        (gnorm.powi(3) / (delta * ghg)).min(1.0)
    };
    let scale = tau * delta / gnorm;
    let step = g * (-scale);
    // m(0) - m(p) = scale |g|^2 - 1/2 scale^2 <g, H g>
    let predicted_decrease = scale * gnorm * gnorm - 0.5 * scale * scale * ghg;
    let termination = if ghg <= 0.0 {
        Termination::NegativeCurvature
    } else if tau == 1.0 {
        Termination::BoundaryExit
    } else {
        Termination::MaxIterations
    };
    Ok(SubproblemResult {
        step,
        predicted_decrease,
        hit_boundary: tau == 1.0,
        inner_iterations: 1,
        termination,
    })
}

/// Positive root `sigma` of `|p + sigma d| = delta`, assuming `|p| <= delta`.
fn boundary_root(p: &DVector<f64>, d: &DVector<f64>, delta: f64) -> f64 {
    let a = d.norm_squared();
    let b = 2.0 * p.dot(d);
    let c = (p.norm_squared() - delta * delta).min(0.0);
    let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
    if b > 0.0 {
        -2.0 * c / (b + disc)
    } else {
        (disc - b) / (2.0 * a)
    }
}

/// Steihaug-Toint truncated conjugate gradient.
///
/// Runs CG on `H p = -g` from `p = 0`, stopping at a nonpositive-curvature
/// direction or at the first iterate outside the ball (both end on the
/// boundary), when `|r| <= rtol |g|`, or after `max_iter` iterations.
pub fn steihaug_cg<H: LinearOperator>(
    g: &DVector<f64>,
    hess: &H,
    delta: f64,
    max_iter: usize,
    rtol: f64,
) -> Result<SubproblemResult> {
    check_radius(delta)?;
    if max_iter == 0 {
        return Err(Error::Domain("steihaug_cg needs max_iter >= 1".into()));
    }
    let n = g.len();
    let gnorm = g.norm();
    if !gnorm.is_finite() {
        return Err(Error::Numeric {
            context: "Steihaug-CG gradient",
            iteration: 0,
        });
    }
    let tol = rtol * gnorm;

    let mut p = DVector::zeros(n);
    // H p, accumulated from the products already computed
    let mut hp = DVector::zeros(n);
    let mut r = g.clone();
    let mut d = -g;
    let mut rr = r.norm_squared();

    let finish = |p: DVector<f64>, hp: &DVector<f64>, k: usize, hit: bool, t: Termination| {
        let predicted_decrease = -(g.dot(&p) + 0.5 * p.dot(hp));
        SubproblemResult {
            step: p,
            predicted_decrease: predicted_decrease.max(0.0),
            hit_boundary: hit,
            inner_iterations: k,
            termination: t,
        }
    };

    if gnorm <= tol || gnorm == 0.0 {
        return Ok(finish(p, &hp, 0, false, Termination::SmallResidual));
    }

    for k in 1..=max_iter {
        let hd = hess.apply(&d);
        let curv = d.dot(&hd);
        if !curv.is_finite() {
            return Err(Error::Numeric {
                context: "Steihaug-CG curvature",
                iteration: k,
            });
        }
        if curv <= 0.0 {
            let sigma = boundary_root(&p, &d, delta);
            p.axpy(sigma, &d, 1.0);
            hp.axpy(sigma, &hd, 1.0);
            return Ok(finish(p, &hp, k, true, Termination::NegativeCurvature));
        }
        let alpha = rr / curv;
        let next = &p + alpha * &d;
        if next.norm() >= delta {
            let sigma = boundary_root(&p, &d, delta);
            p.axpy(sigma, &d, 1.0);
            hp.axpy(sigma, &hd, 1.0);
            return Ok(finish(p, &hp, k, true, Termination::BoundaryExit));
        }
        p = next;
        hp.axpy(alpha, &hd, 1.0);
        r.axpy(alpha, &hd, 1.0);
        let rr_next = r.norm_squared();
        if !rr_next.is_finite() {
            return Err(Error::Numeric {
                context: "Steihaug-CG residual",
                iteration: k,
            });
        }
        if rr_next.sqrt() <= tol {
            return Ok(finish(p, &hp, k, false, Termination::SmallResidual));
        }
        let beta = rr_next / rr;
        rr = rr_next;
        d *= beta;
        d -= &r;
    }
    Ok(finish(p, &hp, max_iter, false, Termination::MaxIterations))
}
