//! Trust-region driver with an optional low-fidelity corrective step.
//!
//! Each outer iteration:
//!
//! 1. solves the full-space subproblem at `w_k` for `p_H` (Cauchy point or
//!    Steihaug-CG) and forms `w_half = w_k + p_H`;
//! 2. for the multifidelity methods, projects `w_half` and the data with `S`,
//!    solves the reduced subproblem for `p_L` (radius `delta_k`, at most `t`
//!    CG iterations), lifts it to `S^T p_L` and keeps it only if
//!    `f(w_half + alpha S^T p_L) < f(w_half)`;
//! 3. measures the composite step with
//!    `rho = (f(w_k) - f(w_k + p)) / (m(0) - m(p_H) + f(w_half) - f(w_k + p))`,
//!    accepts it when `rho > eta1` and updates the radius.
//!
//! When the correction contributes nothing (classical TR, `alpha = 0`, or
//! every correction rejected) the iterates are exactly those of the
//! classical method.

use std::time::Instant;

use nalgebra::DVector;

use crate::dataset::{reduce_features, Dataset};
use crate::error::{Error, Result};
use crate::loss::LossModel;
use crate::projection::Projection;
use crate::subproblem::{cauchy_point, steihaug_cg, SubproblemResult};

/// Full-space subproblem solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FullSolver {
    CauchyPoint,
    SteihaugCg { max_iter: usize },
}

/// How the lifted correction is scaled before the strict-decrease test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaStrategy {
    Fixed(f64),
    /// Start at `initial` and halve up to `halvings` times until the
    /// correction decreases the objective.
    Backtracking {
        initial: f64,
        halvings: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Classical trust region, no correction.
    Tr,
    /// Fresh Gaussian sketch each iteration, seeded with `base_seed + k`.
    Str { t: usize, base_seed: u64 },
    /// Fixed projection onto the leading `t` left singular vectors of `X`.
    Svdtr { t: usize },
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Tr => "tr",
            Method::Str { .. } => "str",
            Method::Svdtr { .. } => "svdtr",
        }
    }

    /// Reduced dimension, if any.
    pub fn reduced_dim(&self) -> Option<usize> {
        match *self {
            Method::Tr => None,
            Method::Str { t, .. } | Method::Svdtr { t } => Some(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrustRegionConfig {
    pub eta1: f64,
    pub eta2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub delta0: f64,
    pub delta_max: f64,
    pub grow_factor: f64,
    pub full_solver: FullSolver,
    /// Relative residual tolerance of the full-space Steihaug-CG.
    pub full_rtol: f64,
    /// Relative residual tolerance of the reduced Steihaug-CG.
    pub reduced_rtol: f64,
    pub alpha: AlphaStrategy,
    pub grad_tol: f64,
    pub max_outer: usize,
    /// Wall-clock budget in seconds.
    pub time_budget_s: Option<f64>,
    /// Reuse the first sketch for every iteration instead of drawing a new one.
    pub freeze_sketch: bool,
    /// Reduced Hessians with `t` up to this size are assembled densely once
    /// per iteration.
    pub dense_reduced_limit: usize,
    /// Store the full-space steps in the history (memory heavy for large n).
    pub keep_steps: bool,
}

impl Default for TrustRegionConfig {
    fn default() -> Self {
        Self {
            eta1: 0.1,
            eta2: 0.75,
            gamma1: 0.25,
            gamma2: 0.5,
            delta0: 1.0,
            delta_max: 1e6,
            grow_factor: 2.0,
            full_solver: FullSolver::SteihaugCg { max_iter: 2 },
            full_rtol: 1e-8,
            reduced_rtol: 1e-8,
            alpha: AlphaStrategy::Fixed(1.0),
            grad_tol: 1e-6,
            max_outer: 10_000,
            time_budget_s: None,
            freeze_sketch: false,
            dense_reduced_limit: 200,
            keep_steps: false,
        }
    }
}

impl TrustRegionConfig {
    // Negated comparisons also reject NaN.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if !(0.0 < self.eta1 && self.eta1 <= self.eta2 && self.eta2 < 1.0) {
            return bad("need 0 < eta1 <= eta2 < 1");
        }
        if !(0.0 < self.gamma1 && self.gamma1 <= self.gamma2 && self.gamma2 < 1.0) {
            return bad("need 0 < gamma1 <= gamma2 < 1");
        }
        if !(self.delta0 > 0.0 && self.delta0.is_finite()) {
            return bad("delta0 must be positive");
        }
        if !(self.delta_max >= self.delta0) {
            return bad("delta_max must be at least delta0");
        }
        if !(self.grow_factor > 1.0) {
            return bad("grow_factor must exceed 1");
        }
        if let FullSolver::SteihaugCg { max_iter: 0 } = self.full_solver {
            return bad("Steihaug-CG needs at least one inner iteration");
        }
        match self.alpha {
            AlphaStrategy::Fixed(a) if !(a >= 0.0 && a.is_finite()) => {
                return bad("alpha must be finite and nonnegative")
            }
            AlphaStrategy::Backtracking { initial, .. }
                if !(initial > 0.0 && initial.is_finite()) =>
            {
                return bad("initial alpha must be positive")
            }
            _ => {}
        }
        if !(self.grad_tol >= 0.0) {
            return bad("grad_tol must be nonnegative");
        }
        Ok(())
    }
}

/// Full-space steps of one iteration, kept when `keep_steps` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct StepLog {
    pub high: DVector<f64>,
    /// Lifted correction `S^T p_L`, before scaling by alpha.
    pub lifted_low: DVector<f64>,
}

/// Telemetry for outer iteration `k`.
///
/// The record for the final iterate carries no step: `rho` is `None` and the
/// step fields are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub f: f64,
    pub grad_norm: f64,
    pub delta: f64,
    /// `Some(-inf)` when the ratio denominator was too small to trust.
    pub rho: Option<f64>,
    pub ph_norm: f64,
    /// Norm of the reduced step as solved, whether or not it was applied.
    pub pl_norm: f64,
    pub pl_used: bool,
    pub accepted: bool,
    pub wall_time_s: f64,
    pub predicted_decrease: f64,
    pub alpha: f64,
    /// `f(w_k + p_H)`.
    pub f_half: Option<f64>,
    /// `f(w_k + p_H + alpha S^T p_L)` (equal to `f_half` when unused).
    pub f_trial: Option<f64>,
    pub steps: Option<StepLog>,
}

impl IterationRecord {
    fn at(k: usize, f: f64, grad_norm: f64, delta: f64, wall_time_s: f64) -> Self {
        Self {
            k,
            f,
            grad_norm,
            delta,
            rho: None,
            ph_norm: 0.0,
            pl_norm: 0.0,
            pl_used: false,
            accepted: false,
            wall_time_s,
            predicted_decrease: 0.0,
            alpha: 0.0,
            f_half: None,
            f_trial: None,
            steps: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    IterBudget,
    TimeBudget,
    NumericFailure,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Converged => "Converged",
            Status::IterBudget => "IterBudget",
            Status::TimeBudget => "TimeBudget",
            Status::NumericFailure => "NumericFailure",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub w: DVector<f64>,
    pub history: Vec<IterationRecord>,
    pub status: Status,
}

impl Outcome {
    /// Outer iterations performed (one less than the number of records).
    pub fn iterations(&self) -> usize {
        self.history.len().saturating_sub(1)
    }

    pub fn final_grad_norm(&self) -> f64 {
        self.history.last().map_or(f64::NAN, |r| r.grad_norm)
    }
}

/// Composite trust-region ratio. Returns `None` when the denominator is not
/// safely positive, which callers treat as a rejected step.
pub fn composite_rho(
    f_wk: f64,
    f_wk_ph: f64,
    f_wk_p: f64,
    predicted_decrease_h: f64,
) -> Option<f64> {
    let denom = predicted_decrease_h + f_wk_ph - f_wk_p;
    if denom > 1e-14 * f_wk.abs().max(1.0) {
        Some((f_wk - f_wk_p) / denom)
    } else {
        None
    }
}

/// Settings for the reduced solve and the decrease test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectionSettings {
    pub alpha: AlphaStrategy,
    pub rtol: f64,
    pub dense_limit: usize,
}

impl From<&TrustRegionConfig> for CorrectionSettings {
    fn from(cfg: &TrustRegionConfig) -> Self {
        Self {
            alpha: cfg.alpha,
            rtol: cfg.reduced_rtol,
            dense_limit: cfg.dense_reduced_limit,
        }
    }
}

/// Outcome of one low-fidelity correction attempt.
#[derive(Debug, Clone)]
pub struct Correction {
    /// `S^T p_L` (unscaled); zero when the correction is not used.
    pub lifted: DVector<f64>,
    pub alpha: f64,
    pub used: bool,
    /// Objective at `w_half + alpha * lifted`, or `f(w_half)` when unused.
    pub f_trial: f64,
    /// The reduced solve, if one was attempted.
    pub reduced: Option<SubproblemResult>,
}

/// Computes the low-fidelity correction around `w_half`.
///
/// `f_half` must be `f(w_half)`; it is reused instead of re-evaluated.
pub fn low_fidelity_correction(
    d: &Dataset,
    model: &LossModel,
    proj: &Projection,
    w_half: &DVector<f64>,
    f_half: f64,
    delta: f64,
    settings: CorrectionSettings,
) -> Result<Correction> {
    let reduced = reduce_features(d, proj)?;
    correction_on(d, &reduced, model, proj, w_half, f_half, delta, settings)
}

#[allow(clippy::too_many_arguments)]
fn correction_on(
    d: &Dataset,
    reduced: &Dataset,
    model: &LossModel,
    proj: &Projection,
    w_half: &DVector<f64>,
    f_half: f64,
    delta: f64,
    settings: CorrectionSettings,
) -> Result<Correction> {
    let n = d.n();
    let unused = |reduced: Option<SubproblemResult>| Correction {
        lifted: DVector::zeros(n),
        alpha: 0.0,
        used: false,
        f_trial: f_half,
        reduced,
    };

    let w_low = proj.project(w_half)?;
    let g_low = model.gradient(reduced, &w_low)?;
    if g_low.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric {
            context: "reduced gradient",
            iteration: 0,
        });
    }
    if g_low.norm() == 0.0 {
        return Ok(unused(None));
    }
    let t = proj.t();
    let hess = model.hessian_at(reduced, &w_low)?;
    let sub = if t <= settings.dense_limit {
        steihaug_cg(&g_low, &hess.to_dense(), delta, t, settings.rtol)?
    } else {
        steihaug_cg(&g_low, &hess, delta, t, settings.rtol)?
    };
    if sub.step.norm() == 0.0 {
        return Ok(unused(Some(sub)));
    }
    let lifted = proj.lift(&sub.step)?;

    let try_alpha = |alpha: f64| -> Result<Option<f64>> {
        if alpha == 0.0 {
            return Ok(None);
        }
        let trial = w_half + alpha * &lifted;
        if trial.iter().any(|v| !v.is_finite()) {
            return Ok(None);
        }
        let f_try = model.value(d, &trial)?;
        Ok((f_try < f_half).then_some(f_try))
    };

    let accepted = match settings.alpha {
        AlphaStrategy::Fixed(a) => try_alpha(a)?.map(|f| (a, f)),
        AlphaStrategy::Backtracking { initial, halvings } => {
            let mut a = initial;
            let mut found = None;
            for _ in 0..=halvings {
                if let Some(f) = try_alpha(a)? {
                    found = Some((a, f));
                    break;
                }
                a *= 0.5;
            }
            found
        }
    };

    Ok(match accepted {
        Some((alpha, f_trial)) => Correction {
            lifted,
            alpha,
            used: true,
            f_trial,
            reduced: Some(sub),
        },
        None => unused(Some(sub)),
    })
}

fn finite(v: &DVector<f64>) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Runs the trust-region method from `w0` until the gradient norm drops to
/// `cfg.grad_tol`, or a budget runs out, or a non-finite value appears.
pub fn minimize(
    d: &Dataset,
    model: &LossModel,
    cfg: &TrustRegionConfig,
    method: Method,
    w0: &DVector<f64>,
) -> Result<Outcome> {
    cfg.validate()?;
    if w0.len() != d.n() {
        return Err(Error::Shape(format!(
            "initial point has length {} but n = {}",
            w0.len(),
            d.n()
        )));
    }
    if !finite(w0) {
        return Err(Error::Domain("initial point is not finite".into()));
    }
    if let Some(t) = method.reduced_dim() {
        if t == 0 || t > d.n() {
            return Err(Error::Config(format!(
                "reduced dimension t = {t} must lie in 1..={}",
                d.n()
            )));
        }
    }

    let clock = Instant::now();
    let settings = CorrectionSettings::from(cfg);

    // SVDTR: one projection and one reduced dataset for the whole run.
    let fixed = match method {
        Method::Svdtr { t } => {
            let p = Projection::truncated_svd(d.features(), t)?;
            let r = reduce_features(d, &p)?;
            Some((p, r))
        }
        Method::Str { t, base_seed } if cfg.freeze_sketch => {
            let p = Projection::gaussian_sketch(d.n(), t, base_seed)?;
            let r = reduce_features(d, &p)?;
            Some((p, r))
        }
        _ => None,
    };

    let mut w = w0.clone();
    let mut history = Vec::new();
    let (mut f, mut g) = model.value_and_gradient(d, &w)?;
    if !f.is_finite() || !finite(&g) {
        history.push(IterationRecord::at(0, f, g.norm(), cfg.delta0, 0.0));
        return Ok(Outcome {
            w,
            history,
            status: Status::NumericFailure,
        });
    }
    let mut delta = cfg.delta0;
    let mut k = 0usize;

    let status = loop {
        let elapsed = clock.elapsed().as_secs_f64();
        let grad_norm = g.norm();
        let mut rec = IterationRecord::at(k, f, grad_norm, delta, elapsed);

        if grad_norm <= cfg.grad_tol {
            history.push(rec);
            break Status::Converged;
        }
        if k >= cfg.max_outer {
            history.push(rec);
            break Status::IterBudget;
        }
        if cfg.time_budget_s.is_some_and(|b| elapsed >= b) {
            history.push(rec);
            break Status::TimeBudget;
        }

        let hess = model.hessian_at(d, &w)?;
        let solved = match cfg.full_solver {
            FullSolver::CauchyPoint => cauchy_point(&g, &hess, delta),
            FullSolver::SteihaugCg { max_iter } => {
                steihaug_cg(&g, &hess, delta, max_iter, cfg.full_rtol)
            }
        };
        let sub = match solved {
            Ok(sub) => sub,
            Err(Error::Numeric { .. }) => {
                history.push(rec);
                break Status::NumericFailure;
            }
            Err(e) => return Err(e),
        };
        let w_half = &w + &sub.step;
        let f_half = model.value(d, &w_half)?;

        let correction = match method {
            Method::Tr => None,
            Method::Str { t, base_seed } => {
                let outcome = match &fixed {
                    Some((p, r)) => correction_on(d, r, model, p, &w_half, f_half, delta, settings),
                    None => {
                        let p = Projection::gaussian_sketch(
                            d.n(),
                            t,
                            base_seed.wrapping_add(k as u64),
                        )?;
                        let r = reduce_features(d, &p)?;
                        correction_on(d, &r, model, &p, &w_half, f_half, delta, settings)
                    }
                };
                Some(outcome)
            }
            Method::Svdtr { .. } => {
                let (p, r) = fixed.as_ref().expect("SVD projection precomputed");
                Some(correction_on(
                    d, r, model, p, &w_half, f_half, delta, settings,
                ))
            }
        };
        let correction = match correction.transpose() {
            Ok(c) => c,
            Err(Error::Numeric { .. }) => {
                history.push(rec);
                break Status::NumericFailure;
            }
            Err(e) => return Err(e),
        };

        let (f_trial, w_trial) = match &correction {
            Some(c) if c.used => (c.f_trial, &w_half + c.alpha * &c.lifted),
            _ => (f_half, w_half),
        };

        let rho = composite_rho(f, f_half, f_trial, sub.predicted_decrease);
        let accepted = rho.is_some_and(|r| r > cfg.eta1);

        rec.rho = Some(rho.unwrap_or(f64::NEG_INFINITY));
        rec.ph_norm = sub.step.norm();
        rec.predicted_decrease = sub.predicted_decrease;
        rec.f_half = Some(f_half);
        rec.f_trial = Some(f_trial);
        rec.accepted = accepted;
        if let Some(c) = &correction {
            rec.pl_norm = c.reduced.as_ref().map_or(0.0, |r| r.step.norm());
            rec.pl_used = c.used;
            rec.alpha = c.alpha;
        }
        if cfg.keep_steps {
            rec.steps = Some(StepLog {
                high: sub.step.clone(),
                lifted_low: correction
                    .as_ref()
                    .map_or_else(|| DVector::zeros(d.n()), |c| c.lifted.clone()),
            });
        }
        history.push(rec);

        if accepted {
            let (f_new, g_new) = model.value_and_gradient(d, &w_trial)?;
            if !f_new.is_finite() || !finite(&g_new) {
                break Status::NumericFailure;
            }
            w = w_trial;
            f = f_new;
            g = g_new;
        }

        delta = match rho {
            Some(r) if r >= cfg.eta2 => (cfg.grow_factor * delta).min(cfg.delta_max),
            Some(r) if r >= cfg.eta1 => delta,
            _ => cfg.gamma2 * delta,
        };
        k += 1;
    };

    Ok(Outcome { w, history, status })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::LossKind;
    use nalgebra::DMatrix;

    #[test]
    fn rho_arithmetic() {
        let r = composite_rho(1.0, 0.8, 0.7, 0.25).unwrap();
        assert!((r - 0.3 / 0.35).abs() < 1e-15);
    }

    #[test]
    fn rho_without_correction_is_classical() {
        let r = composite_rho(2.0, 1.5, 1.5, 0.6).unwrap();
        assert!((r - 0.5 / 0.6).abs() < 1e-15);
    }

    #[test]
    fn rho_guard() {
        assert!(composite_rho(1.0, 1.0, 1.0, 0.0).is_none());
        assert!(composite_rho(1.0, 1.0, 1.1, 0.05).is_none());
        assert!(composite_rho(1.0, f64::NAN, 1.0, 0.1).is_none());
    }

    #[test]
    fn config_validation() {
        let ok = TrustRegionConfig::default();
        assert!(ok.validate().is_ok());
        let mut c = ok.clone();
        c.eta1 = 0.8;
        assert!(c.validate().is_err());
        let mut c = ok.clone();
        c.gamma2 = 1.0;
        assert!(c.validate().is_err());
        let mut c = ok.clone();
        c.grow_factor = 1.0;
        assert!(c.validate().is_err());
        let mut c = ok;
        c.delta_max = 0.5;
        assert!(c.validate().is_err());
    }

    #[test]
    fn stationary_start_returns_immediately() {
        // Symmetric data: w = 0 is the minimizer of the log-loss.
        let d = Dataset::new(
            DMatrix::from_row_slice(1, 2, &[1.0, -1.0]),
            DVector::from_vec(vec![1.0, -1.0]),
        )
        .unwrap();
        let d2 = Dataset::new(
            DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
            DVector::from_vec(vec![1.0, -1.0]),
        )
        .unwrap();
        let m = LossModel::new(LossKind::LogLoss, 0.5).unwrap();
        let out = minimize(
            &d2,
            &m,
            &TrustRegionConfig::default(),
            Method::Tr,
            &DVector::zeros(1),
        )
        .unwrap();
        assert_eq!(out.status, Status::Converged);
        assert_eq!(out.history.len(), 1);
        assert_eq!(out.iterations(), 0);
        // and a non-stationary start does move
        let out = minimize(
            &d,
            &m,
            &TrustRegionConfig::default(),
            Method::Tr,
            &DVector::zeros(1),
        )
        .unwrap();
        assert!(out.iterations() > 0);
    }

    #[test]
    fn iteration_budget() {
        let d = Dataset::new(
            DMatrix::from_row_slice(2, 3, &[1.0, 0.2, -0.7, 0.4, 1.0, 0.3]),
            DVector::from_vec(vec![1.0, -1.0, 1.0]),
        )
        .unwrap();
        let m = LossModel::for_dataset(LossKind::LogLoss, &d);
        let cfg = TrustRegionConfig {
            max_outer: 1,
            grad_tol: 0.0,
            ..Default::default()
        };
        let out = minimize(&d, &m, &cfg, Method::Tr, &DVector::zeros(2)).unwrap();
        assert_eq!(out.status, Status::IterBudget);
        assert_eq!(out.history.len(), 2);
        assert!(out.history[1].rho.is_none());
    }

    #[test]
    fn rejects_bad_reduced_dimension() {
        let d = Dataset::new(
            DMatrix::from_element(2, 2, 1.0),
            DVector::from_element(2, 1.0),
        )
        .unwrap();
        let m = LossModel::for_dataset(LossKind::LogLoss, &d);
        let err = minimize(
            &d,
            &m,
            &TrustRegionConfig::default(),
            Method::Str { t: 3, base_seed: 0 },
            &DVector::zeros(2),
        );
        assert!(matches!(err, Err(Error::Config(_))));
    }
}
