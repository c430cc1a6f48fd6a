mod common;

use common::*;
use mftr::{parse_libsvm, reduce_features, serialize_libsvm, Dataset, Projection, ProjectionKind};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;

fn energy(s: &Projection, x: &DMatrix<f64>) -> f64 {
    (s.matrix() * x).norm_squared()
}

#[test]
fn svd_energy_matches_oracle_on_the_8x12_example() {
    let mut r = rng(31);
    let x = random_matrix(&mut r, 8, 12);
    let s = Projection::truncated_svd(&x, 3).unwrap();
    let want: f64 = oracle_sq_singular_values(&x)[..3].iter().sum();
    assert!((energy(&s, &x) - want).abs() <= 1e-8 * want);
}

#[test]
fn svd_of_tall_and_wide_matrices_matches_oracle() {
    let mut r = rng(32);
    for &(n, q) in &[
        (50, 50),
        (50, 7),
        (7, 50),
        (30, 45),
        (45, 30),
        (1, 5),
        (5, 1),
    ] {
        let x = random_matrix(&mut r, n, q);
        for t in [1, n.min(q) / 2 + 1, n.min(q)] {
            let s = Projection::truncated_svd(&x, t).unwrap();
            let want: f64 = oracle_sq_singular_values(&x)[..t].iter().sum();
            assert!(
                (energy(&s, &x) - want).abs() <= 1e-8 * want,
                "{n}x{q} t={t}"
            );
            let gram = s.matrix() * s.matrix().transpose();
            assert!((gram - DMatrix::<f64>::identity(t, t)).amax() <= 1e-8);
        }
    }
}

#[test]
fn svd_rows_follow_sign_convention() {
    let mut r = rng(33);
    let x = random_matrix(&mut r, 12, 20);
    let s = Projection::truncated_svd(&x, 5).unwrap();
    for row in s.matrix().row_iter() {
        let big = row
            .iter()
            .copied()
            .max_by(|a, b| a.abs().total_cmp(&b.abs()))
            .unwrap();
        assert!(big > 0.0);
    }
}

#[test]
fn rank_deficient_svd_is_completed() {
    let mut r = rng(34);
    // rank 2 matrix with n = 6 rows
    let a = random_matrix(&mut r, 6, 2);
    let b = random_matrix(&mut r, 2, 9);
    let x = a * b;
    let s = Projection::truncated_svd(&x, 4).unwrap();
    assert_eq!(s.rank_deficient(), 2);
    let gram = s.matrix() * s.matrix().transpose();
    assert!((gram - DMatrix::<f64>::identity(4, 4)).amax() <= 1e-10);
}

#[test]
fn sketch_entries_have_the_right_law() {
    let (n, t) = (1000, 50);
    let s = Projection::gaussian_sketch(n, t, 7).unwrap();
    let count = (n * t) as f64;
    let mean = s.matrix().iter().sum::<f64>() / count;
    let var = s
        .matrix()
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / (count - 1.0);
    let sd = (1.0 / t as f64).sqrt();
    assert!(mean.abs() <= 3.0 * sd / count.sqrt(), "mean {mean}");
    assert!((var - 0.02).abs() <= 0.05 * 0.02, "var {var}");
}

#[test]
fn sketch_roughly_preserves_norms() {
    let mut r = rng(35);
    let (n, t) = (200, 50);
    let x = random_vector(&mut r, n, 1.0);
    let mut ratios: Vec<f64> = (0..100)
        .map(|seed| {
            let s = Projection::gaussian_sketch(n, t, seed).unwrap();
            s.project(&x).unwrap().norm_squared() / x.norm_squared()
        })
        .collect();
    ratios.sort_by(f64::total_cmp);
    let med = 0.5 * (ratios[49] + ratios[50]);
    assert!((0.8..=1.25).contains(&med), "median ratio {med}");
}

#[test]
fn sketch_is_reproducible_per_seed() {
    let a = Projection::gaussian_sketch(30, 4, 99).unwrap();
    let b = Projection::gaussian_sketch(30, 4, 99).unwrap();
    let c = Projection::gaussian_sketch(30, 4, 100).unwrap();
    assert_eq!(a.matrix(), b.matrix());
    assert_ne!(a.matrix(), c.matrix());
    assert_eq!(a.seed(), Some(99));
    assert_eq!(a.kind(), ProjectionKind::GaussianSketch);
}

#[test]
fn lift_and_project_match_loops() {
    let mut r = rng(36);
    let m = random_matrix(&mut r, 4, 9);
    let s = Projection::from_matrix(m.clone()).unwrap();
    let p = random_vector(&mut r, 4, 1.0);
    let lifted = s.lift(&p).unwrap();
    for j in 0..9 {
        let want: f64 = (0..4).map(|i| m[(i, j)] * p[i]).sum();
        assert!((lifted[j] - want).abs() <= 1e-12);
    }
    let w = random_vector(&mut r, 9, 1.0);
    let projected = s.project(&w).unwrap();
    for i in 0..4 {
        let want: f64 = (0..9).map(|j| m[(i, j)] * w[j]).sum();
        assert!((projected[i] - want).abs() <= 1e-12);
    }
    assert!(s.lift(&DVector::zeros(3)).is_err());
}

#[test]
fn reduce_features_matches_loops() {
    let mut r = rng(37);
    let s = Projection::from_matrix(random_matrix(&mut r, 3, 10)).unwrap();
    let d = random_dataset(&mut r, 10, 5);
    let red = reduce_features(&d, &s).unwrap();
    let want = matmul_loops(s.matrix(), d.features());
    assert_eq!(red.n(), 3);
    assert_eq!(red.labels(), d.labels());
    assert!((red.features() - want).amax() <= 1e-12);
    let wrong = Projection::identity(4);
    assert!(reduce_features(&d, &wrong).is_err());
}

#[test]
fn binary_persistence_round_trips() {
    for p in [
        Projection::gaussian_sketch(11, 3, 5).unwrap(),
        Projection::identity(4),
        Projection::truncated_svd(&random_matrix(&mut rng(38), 6, 9), 2).unwrap(),
    ] {
        let mut buf = Vec::new();
        p.write_to(&mut buf).unwrap();
        let back = Projection::read_from(buf.as_slice()).unwrap();
        assert_eq!(back.matrix(), p.matrix());
        assert_eq!(back.kind(), p.kind());
        assert_eq!(back.seed(), p.seed());
    }
    assert!(Projection::read_from(&b"NOTAPROJ"[..]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn svd_energy_property(seed in any::<u64>(), n in 1usize..=30, q in 1usize..=30) {
        let mut r = rng(seed);
        let x = random_matrix(&mut r, n, q);
        let t = r.random_range(1..=n.min(q));
        let s = Projection::truncated_svd(&x, t).unwrap();
        let want: f64 = oracle_sq_singular_values(&x)[..t].iter().sum();
        prop_assert!((energy(&s, &x) - want).abs() <= 1e-8 * want.max(1e-300));
    }

    #[test]
    fn libsvm_round_trip(seed in any::<u64>(), n in 1usize..12, q in 1usize..15, extra in 0usize..4) {
        let mut r = rng(seed);
        let x = DMatrix::from_fn(n, q, |_, _| {
            if r.random_bool(0.4) { 0.0 } else { r.random_range(-1e3..1e3) }
        });
        let y = DVector::from_fn(q, |_, _| if r.random_bool(0.5) { 1.0 } else { -1.0 });
        let d = Dataset::new(x, y).unwrap();
        let text = serialize_libsvm(&d);
        let back = parse_libsvm(&text, Some(n + extra)).unwrap();
        prop_assert_eq!(back.n(), n + extra);
        prop_assert_eq!(back.labels(), d.labels());
        prop_assert_eq!(back.features().rows(0, n), d.features().rows(0, n));
        prop_assert!(back.features().rows(n, extra).iter().all(|&v| v == 0.0));
    }
}
