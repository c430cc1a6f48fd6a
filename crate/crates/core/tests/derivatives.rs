mod common;

use common::*;
use mftr::{LinearOperator, LossKind, LossModel};
use nalgebra::DVector;
use proptest::prelude::*;

#[test]
fn value_matches_naive_formula() {
    let mut r = rng(11);
    for &kind in &both_losses() {
        for _ in 0..10 {
            let d = random_dataset(&mut r, 7, 9);
            let m = LossModel::for_dataset(kind, &d);
            let w = random_vector(&mut r, 7, 2.0);
            let got = m.value(&d, &w).unwrap();
            let want = naive_objective(kind, &d, &w, 1.0 / 9.0);
            assert!(
                (got - want).abs() <= 1e-13 * want.abs().max(1.0),
                "{kind:?}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn gradient_and_hvp_match_finite_differences() {
    let mut r = rng(12);
    for &kind in &both_losses() {
        for case in 0..10 {
            let n = 2 + case % 9;
            let q = 3 + case;
            let d = random_dataset(&mut r, n, q);
            let m = LossModel::for_dataset(kind, &d);
            let w = random_vector(&mut r, n, 1.5);
            let g = m.gradient(&d, &w).unwrap();
            assert!(rel_err(&g, &fd_gradient(&m, &d, &w, 1e-6)) <= 1e-5);
            let v = random_vector(&mut r, n, 1.0);
            let hv = m.hvp(&d, &w, &v).unwrap();
            assert!(rel_err(&hv, &fd_hvp(&m, &d, &w, &v, 1e-6)) <= 1e-4);
        }
    }
}

#[test]
fn value_and_gradient_agree_with_separate_calls() {
    let mut r = rng(13);
    let d = random_dataset(&mut r, 5, 8);
    for &kind in &both_losses() {
        let m = LossModel::for_dataset(kind, &d);
        let w = random_vector(&mut r, 5, 1.0);
        let (f, g) = m.value_and_gradient(&d, &w).unwrap();
        assert_eq!(f, m.value(&d, &w).unwrap());
        assert_eq!(g, m.gradient(&d, &w).unwrap());
    }
}

#[test]
fn operator_matches_hvp() {
    let mut r = rng(14);
    let d = random_dataset(&mut r, 6, 10);
    let m = LossModel::for_dataset(LossKind::LeastSquaresSigmoid, &d);
    let w = random_vector(&mut r, 6, 1.0);
    let h = m.hessian_at(&d, &w).unwrap();
    for _ in 0..5 {
        let v = random_vector(&mut r, 6, 1.0);
        let a = h.apply(&v);
        let b = m.hvp(&d, &w, &v).unwrap();
        assert!((a - b).amax() <= 1e-14);
    }
}

#[test]
fn huge_margins_stay_finite() {
    let mut r = rng(15);
    let d = random_dataset(&mut r, 4, 6);
    let w = DVector::from_element(4, 1e4);
    for &kind in &both_losses() {
        let m = LossModel::for_dataset(kind, &d);
        assert!(m.value(&d, &w).unwrap().is_finite());
        assert!(m.gradient(&d, &w).unwrap().iter().all(|v| v.is_finite()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hessian_is_symmetric(seed in any::<u64>(), n in 1usize..9, q in 1usize..12, ls in any::<bool>()) {
        let mut r = rng(seed);
        let d = random_dataset(&mut r, n, q);
        let kind = if ls { LossKind::LeastSquaresSigmoid } else { LossKind::LogLoss };
        let m = LossModel::for_dataset(kind, &d);
        let w = random_vector(&mut r, n, 3.0);
        let h = m.hessian_at(&d, &w).unwrap().to_dense();
        prop_assert!((&h - h.transpose()).amax() <= 1e-14 * h.amax().max(1.0));
    }

    #[test]
    fn logloss_hessian_is_positive_definite(seed in any::<u64>(), n in 1usize..9, q in 1usize..12) {
        let mut r = rng(seed);
        let d = random_dataset(&mut r, n, q);
        let m = LossModel::for_dataset(LossKind::LogLoss, &d);
        let w = random_vector(&mut r, n, 3.0);
        let v = random_vector(&mut r, n, 1.0);
        prop_assume!(v.norm() > 1e-6);
        let vhv = v.dot(&m.hvp(&d, &w, &v).unwrap());
        // curvature is at least lambda |v|^2
        prop_assert!(vhv >= (1.0 - 1e-12) * m.lambda() * v.norm_squared());
    }

    #[test]
    fn gradient_fd_property(seed in any::<u64>(), n in 1usize..8, q in 1usize..10, ls in any::<bool>()) {
        let mut r = rng(seed);
        let d = random_dataset(&mut r, n, q);
        let kind = if ls { LossKind::LeastSquaresSigmoid } else { LossKind::LogLoss };
        let m = LossModel::for_dataset(kind, &d);
        let w = random_vector(&mut r, n, 1.0);
        let g = m.gradient(&d, &w).unwrap();
        let fd = fd_gradient(&m, &d, &w, 1e-6);
        prop_assert!((&g - &fd).norm() <= 1e-5 * fd.norm().max(1e-3));
    }
}
