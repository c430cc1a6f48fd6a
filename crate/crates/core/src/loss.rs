//! Regularized empirical-risk objectives for binary labels `y in {-1, +1}`.
//!
//! Both losses are linear models with margin `z_i = <w, x_i>`:
//!
//! * [`LossKind::LogLoss`]: `(1/q) sum log(1 + exp(-y_i z_i)) + (lambda/2) |w|^2`
//! * [`LossKind::LeastSquaresSigmoid`]: `(1/q) sum (y_i - sigma(z_i))^2 + (lambda/2) |w|^2`
//!
//! The squared-sigmoid loss keeps the `{-1, +1}` labels as they are, so a
//! negative sample has residuals between -1 and -2.
//!
//! Hessians are only exposed through products. [`LossModel::hessian_at`]
//! freezes the per-sample curvature at a point and returns an operator that
//! can be applied repeatedly at `O(nq)` per product.
//!
//! Sums over samples always run in index order, so results are reproducible
//! bit for bit.

use nalgebra::{DMatrix, DVector};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::subproblem::LinearOperator;

/// Which per-sample loss to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    LogLoss,
    LeastSquaresSigmoid,
}

/// A loss kind together with its l2 regularization weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossModel {
    kind: LossKind,
    lambda: f64,
}

/// Logistic function, evaluated branch-wise so that it never overflows.
pub fn sigmoid(z: f64) -> f64 {
    if z > 40.0 {
        1.0 - (-z).exp()
    } else if z < -40.0 {
        z.exp()
    } else if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(-m))` without overflow or cancellation.
fn log1p_exp_neg(m: f64) -> f64 {
    (-m).max(0.0) + (-m.abs()).exp().ln_1p()
}

impl LossModel {
    pub fn new(kind: LossKind, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::Domain(format!(
                "regularization must be finite and nonnegative, got {lambda}"
            )));
        }
        Ok(Self { kind, lambda })
    }

    /// Uses the default regularization `lambda = 1/q`.
    pub fn for_dataset(kind: LossKind, d: &Dataset) -> Self {
        Self {
            kind,
            lambda: 1.0 / d.q() as f64,
        }
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn check(d: &Dataset, w: &DVector<f64>, what: &str) -> Result<()> {
        if w.len() != d.n() {
            return Err(Error::Shape(format!(
                "{what} has length {} but n = {}",
                w.len(),
                d.n()
            )));
        }
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("{what} is not finite")));
        }
        Ok(())
    }

    fn margins(d: &Dataset, w: &DVector<f64>) -> DVector<f64> {
        d.features().tr_mul(w)
    }

    fn sample_loss(&self, z: f64, y: f64) -> f64 {
        match self.kind {
            LossKind::LogLoss => log1p_exp_neg(y * z),
            LossKind::LeastSquaresSigmoid => {
                let r = y - sigmoid(z);
                r * r
            }
        }
    }

    /// Derivative of the per-sample loss with respect to the margin.
    fn sample_slope(&self, z: f64, y: f64) -> f64 {
        match self.kind {
            LossKind::LogLoss => -y * sigmoid(-y * z),
            LossKind::LeastSquaresSigmoid => {
                let s = sigmoid(z);
                let ds = s * sigmoid(-z);
                -2.0 * (y - s) * ds
            }
        }
    }

    /// Second derivative of the per-sample loss with respect to the margin.
    fn sample_curvature(&self, z: f64, y: f64) -> f64 {
        match self.kind {
            LossKind::LogLoss => {
                let m = y * z;
                sigmoid(m) * sigmoid(-m)
            }
            LossKind::LeastSquaresSigmoid => {
                let s = sigmoid(z);
                let ds = s * sigmoid(-z);
                let r = y - s;
                2.0 * (ds * ds - r * ds * (1.0 - 2.0 * s))
            }
        }
    }

    fn regularizer(&self, w: &DVector<f64>) -> f64 {
        0.5 * self.lambda * w.norm_squared()
    }

    fn value_from_margins(&self, d: &Dataset, z: &DVector<f64>, w: &DVector<f64>) -> f64 {
        let mut sum = 0.0;
        for (zi, yi) in z.iter().zip(d.labels().iter()) {
            sum += self.sample_loss(*zi, *yi);
        }
        sum / d.q() as f64 + self.regularizer(w)
    }

    fn gradient_from_margins(
        &self,
        d: &Dataset,
        z: &DVector<f64>,
        w: &DVector<f64>,
    ) -> DVector<f64> {
        let q = d.q() as f64;
        let coeffs = DVector::from_iterator(
            d.q(),
            z.iter()
                .zip(d.labels().iter())
                .map(|(zi, yi)| self.sample_slope(*zi, *yi) / q),
        );
        let mut g = d.features() * coeffs;
        g.axpy(self.lambda, w, 1.0);
        g
    }

    /// Objective value at `w`.
    pub fn value(&self, d: &Dataset, w: &DVector<f64>) -> Result<f64> {
        Self::check(d, w, "weight vector")?;
        let z = Self::margins(d, w);
        Ok(self.value_from_margins(d, &z, w))
    }

    /// Analytic gradient at `w`.
    pub fn gradient(&self, d: &Dataset, w: &DVector<f64>) -> Result<DVector<f64>> {
        Self::check(d, w, "weight vector")?;
        let z = Self::margins(d, w);
        Ok(self.gradient_from_margins(d, &z, w))
    }

    /// Value and gradient sharing one pass over the margins.
    pub fn value_and_gradient(&self, d: &Dataset, w: &DVector<f64>) -> Result<(f64, DVector<f64>)> {
        Self::check(d, w, "weight vector")?;
        let z = Self::margins(d, w);
        Ok((
            self.value_from_margins(d, &z, w),
            self.gradient_from_margins(d, &z, w),
        ))
    }

    /// Hessian-vector product `H(w) v`.
    pub fn hvp(&self, d: &Dataset, w: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
        Self::check(d, v, "direction")?;
        Ok(self.hessian_at(d, w)?.apply(v))
    }

    /// Freezes the Hessian at `w` as a reusable operator.
    pub fn hessian_at<'a>(&self, d: &'a Dataset, w: &DVector<f64>) -> Result<HessianOperator<'a>> {
        Self::check(d, w, "weight vector")?;
        let z = Self::margins(d, w);
        let q = d.q() as f64;
        let weights = DVector::from_iterator(
            d.q(),
            z.iter()
                .zip(d.labels().iter())
                .map(|(zi, yi)| self.sample_curvature(*zi, *yi) / q),
        );
        Ok(HessianOperator {
            features: d.features(),
            weights,
            lambda: self.lambda,
        })
    }
}

/// `v -> X diag(c) X^T v + lambda v`, with the per-sample curvature `c`
/// (already divided by `q`) frozen at construction.
#[derive(Debug, Clone)]
pub struct HessianOperator<'a> {
    features: &'a DMatrix<f64>,
    weights: DVector<f64>,
    lambda: f64,
}

impl HessianOperator<'_> {
    /// Dense `n x n` Hessian, built column by column from products with unit
    /// vectors so it agrees with [`LinearOperator::apply`].
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut h = DMatrix::zeros(n, n);
        let mut e = DVector::zeros(n);
        for j in 0..n {
            e[j] = 1.0;
            h.set_column(j, &self.apply(&e));
            e[j] = 0.0;
        }
        h
    }
}

impl LinearOperator for HessianOperator<'_> {
    fn dim(&self) -> usize {
        self.features.nrows()
    }

    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut u = self.features.tr_mul(v);
        u.component_mul_assign(&self.weights);
        let mut out = self.features * u;
        out.axpy(self.lambda, v, 1.0);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn toy() -> Dataset {
        Dataset::new(
            DMatrix::from_row_slice(2, 3, &[1.0, -0.5, 2.0, 0.3, 1.5, -1.0]),
            DVector::from_vec(vec![1.0, -1.0, -1.0]),
        )
        .unwrap()
    }

    #[test]
    fn logloss_at_zero_is_log2() {
        let d = toy();
        let m = LossModel::new(LossKind::LogLoss, 3.7).unwrap();
        assert_eq!(m.value(&d, &DVector::zeros(2)).unwrap(), LN_2);
    }

    #[test]
    fn squared_sigmoid_at_zero() {
        // one +1 sample (0.25) and two -1 samples (2.25 each)
        let d = toy();
        let m = LossModel::new(LossKind::LeastSquaresSigmoid, 1.0).unwrap();
        let v = m.value(&d, &DVector::zeros(2)).unwrap();
        assert!((v - (0.25 + 2.0 * 2.25) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn scalar_logloss_value() {
        let d = Dataset::new(
            DMatrix::from_element(1, 1, 1.0),
            DVector::from_element(1, 1.0),
        )
        .unwrap();
        let m = LossModel::new(LossKind::LogLoss, 1.0).unwrap();
        let v = m.value(&d, &DVector::from_element(1, 2.0)).unwrap();
        assert!((v - 2.1269280110429727).abs() < 1e-15);
    }

    #[test]
    fn logloss_gradient_at_zero() {
        let d = toy();
        let m = LossModel::new(LossKind::LogLoss, 0.0).unwrap();
        let g = m.gradient(&d, &DVector::zeros(2)).unwrap();
        let mut expected = DVector::zeros(2);
        for i in 0..3 {
            expected += d.features().column(i) * d.labels()[i];
        }
        expected *= -1.0 / 6.0;
        assert!((g - expected).amax() < 1e-15);
    }

    #[test]
    fn zero_features_leave_regularizer() {
        let d = Dataset::new(DMatrix::zeros(2, 4), DVector::from_element(4, 1.0)).unwrap();
        let w = DVector::from_vec(vec![3.0, -2.0]);
        let v = DVector::from_vec(vec![0.25, 7.0]);
        for kind in [LossKind::LogLoss, LossKind::LeastSquaresSigmoid] {
            let m = LossModel::new(kind, 1.0).unwrap();
            assert_eq!(m.gradient(&d, &w).unwrap(), w);
        }
        let m = LossModel::new(LossKind::LogLoss, 1.0).unwrap();
        assert_eq!(m.hvp(&d, &w, &v).unwrap(), v);
    }

    #[test]
    fn hvp_of_zero_direction() {
        let d = toy();
        let m = LossModel::new(LossKind::LeastSquaresSigmoid, 0.3).unwrap();
        let w = DVector::from_vec(vec![0.4, -1.1]);
        assert_eq!(
            m.hvp(&d, &w, &DVector::zeros(2)).unwrap(),
            DVector::zeros(2)
        );
    }

    #[test]
    fn sigmoid_extremes() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert_eq!(sigmoid(1000.0), 1.0);
        assert_eq!(sigmoid(-1000.0), 0.0);
        assert!((sigmoid(-50.0) - (-50.0f64).exp()).abs() < 1e-35);
        assert!((sigmoid(3.0) + sigmoid(-3.0) - 1.0).abs() <= f64::EPSILON);
    }

    #[test]
    fn logloss_large_margins_stay_finite() {
        let d = Dataset::new(
            DMatrix::from_element(1, 1, 1.0),
            DVector::from_element(1, -1.0),
        )
        .unwrap();
        let m = LossModel::new(LossKind::LogLoss, 0.0).unwrap();
        let v = m.value(&d, &DVector::from_element(1, 800.0)).unwrap();
        assert!((v - 800.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let d = toy();
        let m = LossModel::new(LossKind::LogLoss, 0.1).unwrap();
        assert!(matches!(
            m.value(&d, &DVector::from_vec(vec![f64::NAN, 0.0])),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            m.value(&d, &DVector::zeros(3)),
            Err(Error::Shape(_))
        ));
        assert!(LossModel::new(LossKind::LogLoss, -1.0).is_err());
    }

    #[test]
    fn default_lambda_is_inverse_sample_count() {
        let m = LossModel::for_dataset(LossKind::LogLoss, &toy());
        assert_eq!(m.lambda(), 1.0 / 3.0);
    }

    #[test]
    fn dense_hessian_matches_products() {
        let d = toy();
        let m = LossModel::new(LossKind::LeastSquaresSigmoid, 0.2).unwrap();
        let w = DVector::from_vec(vec![0.7, -0.3]);
        let h = m.hessian_at(&d, &w).unwrap();
        let v = DVector::from_vec(vec![1.3, 0.4]);
        assert!((h.to_dense() * &v - h.apply(&v)).amax() < 1e-14);
    }
}
