#![allow(dead_code)]

use lars::preprocess::StandardizedDesign;
use lars::{standardize, Action, Path, Variant};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Gaussian design and a response with a few real effects plus noise.
pub fn random_problem(seed: u64, n: usize, m: usize) -> StandardizedDesign {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Array2::from_shape_fn((n, m), |_| rng.sample::<f64, _>(StandardNormal));
    let coef: Vec<f64> = (0..m)
        .map(|j| {
            if j % 3 == 0 {
                rng.random_range(-3.0..3.0)
            } else {
                0.0
            }
        })
        .collect();
    let y = Array1::from_shape_fn(n, |i| {
        (0..m).map(|j| x[[i, j]] * coef[j]).sum::<f64>() + rng.sample::<f64, _>(StandardNormal)
    });
    let names: Vec<String> = (0..m).map(|j| format!("x{}", j + 1)).collect();
    standardize(x.view(), y.view(), &names).expect("random design is regular")
}

pub fn correlations(design: &StandardizedDesign, beta: &Array1<f64>) -> Array1<f64> {
    let r = &design.response() - &design.predict(beta.view());
    design.columns().t().dot(&r)
}

/// Every breach of the vertex conditions along `path`, described in words.
///
/// `ĉ` at each vertex is recomputed from scratch, so the check does not trust
/// anything the solver cached.
pub fn invariant_violations(path: &Path, design: &StandardizedDesign, rel_tol: f64) -> Vec<String> {
    let mut out = Vec::new();
    let c0 = path.steps[0].c_max.max(1.0);
    let tol = rel_tol * c0;
    let positive = path.variant == Variant::PositiveLasso;
    for (k, step) in path.steps.iter().enumerate() {
        let c = correlations(design, &step.beta);
        let score = |v: f64| if positive { v } else { v.abs() };
        if !step.active.is_empty() {
            let level =
                step.active.iter().map(|&j| score(c[j])).sum::<f64>() / step.active.len() as f64;
            for (&j, &s) in step.active.iter().zip(&step.signs) {
                if (score(c[j]) - level).abs() > tol {
                    out.push(format!(
                        "vertex {k}: active {j} has |c| {} vs {level}",
                        c[j]
                    ));
                }
                if level > tol && c[j] * s < 0.0 {
                    out.push(format!(
                        "vertex {k}: active {j} correlation sign disagrees with s"
                    ));
                }
            }
            for j in (0..design.m()).filter(|j| !step.active.contains(j)) {
                if score(c[j]) > level + tol {
                    out.push(format!(
                        "vertex {k}: inactive {j} has |c| {} above {level}",
                        c[j]
                    ));
                }
            }
        }
        if matches!(path.variant, Variant::Lasso | Variant::PositiveLasso) {
            for (&j, &s) in step.active.iter().zip(&step.signs) {
                if step.beta[j] != 0.0 && step.beta[j].signum() != s {
                    out.push(format!(
                        "vertex {k}: β_{j} = {} has the wrong sign",
                        step.beta[j]
                    ));
                }
            }
        }
        if positive && step.beta.iter().any(|&b| b < 0.0) {
            out.push(format!(
                "vertex {k}: negative coefficient on a positive path"
            ));
        }
        if k >= 1 {
            let prev = &path.steps[k - 1];
            if path.variant == Variant::Stagewise {
                for (&j, &s) in prev.active.iter().zip(&prev.signs) {
                    let delta = step.beta[j] - prev.beta[j];
                    if delta * s < -tol * 1e-6 {
                        out.push(format!("vertex {k}: β_{j} moved against its sign"));
                    }
                }
            }
            if step.action != Action::Final && !(step.gamma < step.gamma_bar) {
                out.push(format!(
                    "vertex {k}: γ̂ {} not below γ̄ {}",
                    step.gamma, step.gamma_bar
                ));
            }
            if k >= 2 && !(step.c_max < prev.c_max) {
                out.push(format!(
                    "vertex {k}: Ĉ {} did not decrease from {}",
                    step.c_max, prev.c_max
                ));
            }
        }
    }
    out
}

/// Central-difference divergence `Σ ∂μ̂_i/∂y_i` of `fit`.
pub fn divergence<F>(design: &StandardizedDesign, h: f64, fit: F) -> f64
where
    F: Fn(&StandardizedDesign) -> Array1<f64>,
{
    let y = design.response().to_owned();
    let mut total = 0.0;
    for i in 0..design.n() {
        let mut up = y.clone();
        up[i] += h;
        let mut down = y.clone();
        down[i] -= h;
        let f_up = fit(&design.with_response(up.view()).unwrap());
        let f_down = fit(&design.with_response(down.view()).unwrap());
        total += (f_up[i] - f_down[i]) / (2.0 * h);
    }
    total
}
