mod common;

use common::{divergence, random_problem};
use lars::oracles::{
    epsilon_stagewise, lasso_at_t, soft_threshold_path, subset_least_squares, StepSize,
};
use lars::preprocess::StandardizedDesign;
use lars::select::hybrid_r2;
use lars::{datasets, fit_path, interpolate, standardize, FitOptions, Variant};
use ndarray::{Array1, Array2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Orthonormal `n × n` columns by Gram–Schmidt on Gaussian noise.
fn orthonormal(n: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let mut q = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut v = Array1::from_shape_fn(n, |_| rng.sample::<f64, _>(StandardNormal));
        for _ in 0..2 {
            for i in 0..j {
                let p = q.column(i).dot(&v);
                v.scaled_add(-p, &q.column(i));
            }
        }
        let norm = v.dot(&v).sqrt();
        q.column_mut(j).assign(&(v / norm));
    }
    q
}

fn names(m: usize) -> Vec<String> {
    (0..m).map(|j| format!("x{j}")).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn orthonormal_lars_is_soft_thresholding(seed in 0u64..1_000_000, n in 1usize..16) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = orthonormal(n, &mut rng);
        let y = Array1::from_shape_fn(n, |_| rng.sample::<f64, _>(StandardNormal));
        let d = StandardizedDesign::from_unit_columns(q.view(), y.view(), &names(n)).unwrap();
        let z: Vec<f64> = q.t().dot(&y).to_vec();
        for v in Variant::PATH_VARIANTS.into_iter().filter(|v| *v != Variant::PositiveLasso) {
            let path = fit_path(&d, v, &FitOptions::default()).unwrap();
            prop_assert_eq!(path.num_steps(), n);
            for (k, step) in path.steps.iter().enumerate() {
                let expected = soft_threshold_path(&z, k).unwrap();
                let err = (&step.beta - &expected).iter().fold(0.0f64, |a, x| a.max(x.abs()));
                prop_assert!(err < 1e-10, "{} step {}: {}", v, k, err);
            }
        }
    }

    #[test]
    fn hybrid_gain_identity_and_subset_fit(seed in 0u64..1_000_000, n in 15usize..60, m in 2usize..9) {
        let d = random_problem(seed, n, m);
        let path = fit_path(&d, Variant::Lars, &FitOptions::default()).unwrap();
        let yy = path.steps[0].rss;
        for k in 1..path.steps.len() {
            let h = hybrid_r2(&path, k).unwrap();
            let set = &path.steps[k - 1].active;
            let b = subset_least_squares(&d, set).unwrap();
            let r = &d.response() - &d.predict(b.view());
            let direct = 1.0 - r.dot(&r) / yy;
            prop_assert!((h.r2_ols - direct).abs() < 1e-8);
            if h.rho < 1.0 - 1e-12 {
                prop_assert!((h.r2_ols - h.r2_lars - h.predicted_gain()).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn lasso_path_matches_coordinate_descent() {
    let mut worst: f64 = 0.0;
    for seed in 0..6 {
        let d = random_problem(100 + seed, 50, 8);
        let path = fit_path(&d, Variant::Lasso, &FitOptions::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..8 {
            let t = rng.random_range(0.0..1.0) * path.t_max();
            let a = interpolate(&path, t).unwrap();
            let b = lasso_at_t(&d, t, 1e-13).unwrap();
            worst = worst.max((&a - &b).iter().fold(0.0f64, |m, v| m.max(v.abs())));
        }
    }
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn divergence_of_lars_fits_counts_steps() {
    for seed in 0..3 {
        let d = random_problem(200 + seed, 25, 6);
        let h = 1e-5 * d.response().dot(&d.response()).sqrt();
        for k in 1..=4 {
            let div = divergence(&d, h, |dd| {
                let p = fit_path(dd, Variant::Lars, &FitOptions::with_step_limit(k)).unwrap();
                dd.predict(p.last().beta.view())
            });
            assert!((div - k as f64).abs() < 0.01, "seed {seed} k {k}: {div}");
        }
    }
}

#[test]
fn small_step_stagewise_approaches_the_stagewise_path() {
    let (x, y, names) = datasets::diabetes();
    let d = standardize(x.view(), y.view(), &names).unwrap();
    let path = fit_path(&d, Variant::Stagewise, &FitOptions::default()).unwrap();
    let t_max = path.t_max();
    let sup = |eps: f64| {
        let tr = epsilon_stagewise(&d, StepSize::Fixed(eps), (1.1 * t_max / eps) as usize).unwrap();
        tr.l1_norms()
            .iter()
            .zip(&tr.betas)
            .filter(|(t, _)| **t <= t_max)
            .map(|(&t, b)| {
                (b - &interpolate(&path, t).unwrap())
                    .iter()
                    .fold(0.0f64, |m, v| m.max(v.abs()))
            })
            .fold(0.0f64, f64::max)
    };
    let (coarse, fine) = (sup(0.4), sup(0.2));
    assert!(fine < coarse && coarse / fine > 1.5, "{coarse} {fine}");
}
