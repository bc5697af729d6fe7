//! Degrees of freedom, Cp, the LARS–OLS hybrid and the prediction simulation.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{LarsError, Result};
use crate::oracles::{forward_selection, subset_least_squares};
use crate::path::{fit_path, FitOptions, Path, Variant};
use crate::preprocess::{quadratic_expand, standardize, StandardizedDesign};

/// Full least squares fit on every column: `(fitted values, residual variance)`
/// with divisor `n - m - 1`.
pub fn full_ols(design: &StandardizedDesign) -> Result<(Array1<f64>, f64)> {
    let (n, m) = (design.n(), design.m());
    if n <= m + 1 {
        return Err(LarsError::Underdetermined { n, m });
    }
    let all: Vec<usize> = (0..m).collect();
    let beta = subset_least_squares(design, &all)?;
    let fitted = design.predict(beta.view());
    let r = &design.response() - &fitted;
    Ok((fitted, r.dot(&r) / (n - m - 1) as f64))
}

pub fn sigma2_full_ols(design: &StandardizedDesign) -> Result<f64> {
    full_ols(design).map(|(_, s2)| s2)
}

/// Degrees of freedom charged to each vertex.
#[derive(Debug, Clone, PartialEq)]
pub enum DfRule {
    /// `df = k` at step `k`. Only valid for plain LARS.
    SimpleK,
    /// Number of nonzero coefficients at the vertex.
    SupportSize,
    /// Caller supplied values, one per vertex.
    Given(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CpReport {
    pub sigma2_bar: f64,
    pub rss: Vec<f64>,
    pub cp: Vec<f64>,
    pub df_used: Vec<f64>,
    pub argmin_k: usize,
}

/// `Cp_k = rss_k / σ̄² - n + 2 df_k` for every vertex of `path`.
pub fn cp_curve(path: &Path, sigma2: f64, rule: &DfRule) -> Result<CpReport> {
    if !(sigma2 > 0.0) {
        return Err(LarsError::InvalidArgument(format!(
            "σ² must be positive, got {sigma2}"
        )));
    }
    let df_used: Vec<f64> = match rule {
        DfRule::SimpleK => {
            if path.variant != Variant::Lars {
                return Err(LarsError::VariantMismatch(path.variant));
            }
            (0..path.steps.len()).map(|k| k as f64).collect()
        }
        DfRule::SupportSize => path
            .steps
            .iter()
            .map(|s| s.beta.iter().filter(|&&b| b != 0.0).count() as f64)
            .collect(),
        DfRule::Given(v) => {
            if v.len() != path.steps.len() {
                return Err(LarsError::DimensionMismatch {
                    what: "degrees of freedom",
                    expected: path.steps.len(),
                    found: v.len(),
                });
            }
            v.clone()
        }
    };
    let n = path.n as f64;
    let rss: Vec<f64> = path.steps.iter().map(|s| s.rss).collect();
    let cp: Vec<f64> = rss
        .iter()
        .zip(&df_used)
        .map(|(r, df)| r / sigma2 - n + 2.0 * df)
        .collect();
    let argmin_k = cp
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap_or(0);
    Ok(CpReport {
        sigma2_bar: sigma2,
        rss,
        cp,
        df_used,
        argmin_k,
    })
}

/// How bootstrap responses are drawn around the full least squares fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Resampling {
    /// `y* = μ̄ + σ̄ z` with standard normal `z`.
    Normal,
    /// `y* = μ̄ + e*` with `e*` drawn with replacement from the residuals.
    Residuals,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapConfig {
    pub replications: usize,
    pub groups: usize,
    pub seed: u64,
    pub resampling: Resampling,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            replications: 500,
            groups: 10,
            seed: 0,
            resampling: Resampling::Normal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DfEstimate {
    pub k: usize,
    pub df_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub replications: usize,
    pub groups: usize,
    /// Per-group estimates whose mean is `df_hat`.
    pub group_estimates: Vec<f64>,
}

/// Draws replication `b` of the bootstrap response.
fn draw(
    mean: &Array1<f64>,
    residuals: &Array1<f64>,
    sigma: f64,
    mode: Resampling,
    seed: u64,
    b: usize,
) -> Array1<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(b as u64);
    let n = mean.len();
    match mode {
        Resampling::Normal => mean.mapv(|mu| mu + sigma * rng.sample::<f64, _>(StandardNormal)),
        Resampling::Residuals => {
            Array1::from_shape_fn(n, |i| mean[i] + residuals[rng.random_range(0..n)])
        }
    }
}

/// Bootstrap covariance estimate of the degrees of freedom of a family of
/// estimators.
///
/// `estimator` maps a design with a bootstrap response to fitted values
/// `μ̂_0, …, μ̂_K`; shorter outputs are padded with their last entry so every
/// replication reports `K + 1` fits, where `K + 1` is the length returned for
/// the observed response. Replications are split into `groups` equal groups;
/// each group gives `Σ_i côv_i / σ̄²` and the interval is Student-t over the
/// group estimates.
pub fn bootstrap_df<F>(
    design: &StandardizedDesign,
    estimator: F,
    config: &BootstrapConfig,
) -> Result<Vec<DfEstimate>>
where
    F: Fn(&StandardizedDesign) -> Result<Vec<Array1<f64>>> + Sync,
{
    let b_total = config.replications;
    let groups = config.groups;
    if groups < 2 || b_total < 2 * groups || !b_total.is_multiple_of(groups) {
        return Err(LarsError::InvalidArgument(format!(
            "need at least two groups of at least two replications, got B = {b_total} in {groups} groups"
        )));
    }
    let (fitted, sigma2) = full_ols(design)?;
    let residuals = &design.response() - &fitted;
    let sigma = sigma2.sqrt();
    let width = estimator(design)?.len();
    if width == 0 {
        return Err(LarsError::InvalidArgument(
            "estimator returned no fits".into(),
        ));
    }
    let n = design.n();
    let per_group = b_total / groups;

    let draws: Vec<(Array1<f64>, Vec<Array1<f64>>)> = (0..b_total)
        .into_par_iter()
        .map(|b| {
            let y_star = draw(
                &fitted,
                &residuals,
                sigma,
                config.resampling,
                config.seed,
                b,
            );
            let boot = design.with_response(y_star.view())?;
            let mut fits = estimator(&boot)?;
            if fits.is_empty() {
                return Err(LarsError::InvalidArgument(
                    "estimator returned no fits".into(),
                ));
            }
            fits.truncate(width);
            while fits.len() < width {
                fits.push(fits.last().expect("nonempty").clone());
            }
            Ok((y_star, fits))
        })
        .collect::<Result<_>>()?;

    let mut group_df = Array2::<f64>::zeros((groups, width));
    for g in 0..groups {
        let block = &draws[g * per_group..(g + 1) * per_group];
        let mut y_mean = Array1::<f64>::zeros(n);
        for (y, _) in block {
            y_mean += y;
        }
        y_mean /= per_group as f64;
        for k in 0..width {
            let mut cov = 0.0;
            for (y, fits) in block {
                cov += fits[k]
                    .iter()
                    .zip(y.iter().zip(y_mean.iter()))
                    .map(|(mu, (yi, ym))| mu * (yi - ym))
                    .sum::<f64>();
            }
            group_df[[g, k]] = cov / (per_group - 1) as f64 / sigma2;
        }
    }

    let t = StudentsT::new(0.0, 1.0, (groups - 1) as f64)
        .map_err(|e| LarsError::InvalidArgument(e.to_string()))?
        .inverse_cdf(0.975);
    Ok((0..width)
        .map(|k| {
            let est: Vec<f64> = group_df.column(k).to_vec();
            let mean = est.iter().sum::<f64>() / groups as f64;
            let var = est.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (groups - 1) as f64;
            let half = t * (var / groups as f64).sqrt();
            DfEstimate {
                k,
                df_hat: mean,
                ci_low: mean - half,
                ci_high: mean + half,
                replications: b_total,
                groups,
                group_estimates: est,
            }
        })
        .collect())
}

/// Fitted values at each of the first `k_max` LARS steps.
pub fn lars_fits(design: &StandardizedDesign, k_max: usize) -> Result<Vec<Array1<f64>>> {
    let path = fit_path(design, Variant::Lars, &FitOptions::with_step_limit(k_max))?;
    Ok(path
        .steps
        .iter()
        .map(|s| design.predict(s.beta.view()))
        .collect())
}

/// Fitted values of the last Lasso vertex with exactly `k` nonzero
/// coefficients, for `k = 0..=m`. Sizes the path never visits repeat the
/// previous one.
pub fn lasso_fits_by_support(design: &StandardizedDesign) -> Result<Vec<Array1<f64>>> {
    let path = fit_path(design, Variant::Lasso, &FitOptions::default())?;
    let m = design.m();
    let mut last: Vec<Option<usize>> = vec![None; m + 1];
    for (v, s) in path.steps.iter().enumerate() {
        let size = s.beta.iter().filter(|&&b| b != 0.0).count();
        last[size] = Some(v);
    }
    let mut out = Vec::with_capacity(m + 1);
    let mut prev = 0;
    for entry in last {
        let v = entry.unwrap_or(prev);
        prev = v;
        out.push(design.predict(path.steps[v].beta.view()));
    }
    Ok(out)
}

/// Bootstrap df of the Lasso indexed by support size.
pub fn lasso_df_by_support(
    design: &StandardizedDesign,
    config: &BootstrapConfig,
) -> Result<Vec<DfEstimate>> {
    bootstrap_df(design, lasso_fits_by_support, config)
}

/// Empirical fit of step `k` of a LARS path and of least squares on the same
/// active set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HybridR2 {
    pub r2_lars: f64,
    pub r2_previous: f64,
    pub r2_ols: f64,
    /// `γ̂_k / γ̄_k`.
    pub rho: f64,
}

impl HybridR2 {
    /// Gain of the hybrid over LARS predicted from the LARS increment:
    /// `(1-ρ)² / (ρ(2-ρ))` times `R²_k - R²_{k-1}`.
    pub fn predicted_gain(&self) -> f64 {
        let rho = self.rho;
        (1.0 - rho).powi(2) / (rho * (2.0 - rho)) * (self.r2_lars - self.r2_previous)
    }
}

/// Moving the full `γ̄_k` along the step-`k` direction reaches the least
/// squares fit of that step's active set, and the residual sum of squares
/// there is `rss_{k-1} - γ̄_k²`.
pub fn hybrid_r2(path: &Path, k: usize) -> Result<HybridR2> {
    if path.variant != Variant::Lars {
        return Err(LarsError::VariantMismatch(path.variant));
    }
    if k == 0 || k >= path.steps.len() {
        return Err(LarsError::IndexOutOfRange {
            index: k,
            len: path.steps.len(),
        });
    }
    let yy = path.steps[0].rss;
    let step = &path.steps[k];
    let prev = path.steps[k - 1].rss;
    let ols_rss = (prev - step.gamma_bar * step.gamma_bar).max(0.0);
    Ok(HybridR2 {
        r2_lars: 1.0 - step.rss / yy,
        r2_previous: 1.0 - prev / yy,
        r2_ols: 1.0 - ols_rss / yy,
        rho: step.gamma / step.gamma_bar,
    })
}

/// Methods compared in the prediction simulation.
pub const SIMULATION_METHODS: [Variant; 4] = [
    Variant::Lars,
    Variant::Lasso,
    Variant::Stagewise,
    Variant::ForwardSelection,
];

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub seed: u64,
    pub replications: usize,
    pub steps: usize,
    /// Number of LARS steps on the observed data that define the true mean.
    pub truth_steps: usize,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            replications: 100,
            steps: 40,
            truth_steps: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodCurve {
    pub method: Variant,
    /// Mean proportion explained at steps `0..=K`.
    pub pe_mean: Vec<f64>,
    pub pe_sd: Vec<f64>,
    /// Mean number of nonzero coefficients at each step.
    pub mean_nonzero: Vec<f64>,
}

impl MethodCurve {
    /// `(step, value)` of the largest mean proportion explained.
    pub fn peak(&self) -> (usize, f64) {
        self.pe_mean
            .iter()
            .copied()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((0, 0.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationResult {
    pub true_r2: f64,
    pub curves: Vec<MethodCurve>,
}

impl SimulationResult {
    pub fn curve(&self, method: Variant) -> Option<&MethodCurve> {
        self.curves.iter().find(|c| c.method == method)
    }
}

/// `pe(μ̂) = 1 - ‖μ̂ - μ‖² / ‖μ‖²`.
pub fn proportion_explained(fit: &Array1<f64>, truth: &Array1<f64>) -> f64 {
    let d = fit - truth;
    1.0 - d.dot(&d) / truth.dot(truth)
}

fn method_betas(
    design: &StandardizedDesign,
    method: Variant,
    steps: usize,
) -> Result<Vec<Array1<f64>>> {
    let path = match method {
        Variant::ForwardSelection => forward_selection(design, steps.min(design.rank_limit()))?,
        v => fit_path(design, v, &FitOptions::with_step_limit(steps))?,
    };
    let mut betas: Vec<Array1<f64>> = path.steps.into_iter().map(|s| s.beta).collect();
    while betas.len() < steps + 1 {
        betas.push(betas.last().expect("origin").clone());
    }
    Ok(betas)
}

/// Prediction simulation on the quadratic expansion of `raw_columns`.
///
/// The true mean is the `truth_steps`-step LARS fit of the observed response on
/// the quadratic design and the errors are its residuals. Each replication
/// resamples those residuals with replacement, refits every method for `steps`
/// steps and scores each step by the proportion of `‖μ‖²` explained.
pub fn run_simulation_study(
    raw_columns: ndarray::ArrayView2<'_, f64>,
    raw_response: ndarray::ArrayView1<'_, f64>,
    names: &[String],
    binary_columns: &[usize],
    config: &SimulationConfig,
) -> Result<SimulationResult> {
    if config.replications == 0 {
        return Err(LarsError::InvalidArgument(
            "need at least one replication".into(),
        ));
    }
    let (q, labels) = quadratic_expand(raw_columns, names, binary_columns)?;
    let design = standardize(q.view(), raw_response, &labels)?;
    let truth_path = fit_path(
        &design,
        Variant::Lars,
        &FitOptions::with_step_limit(config.truth_steps),
    )?;
    let mu = design.predict(truth_path.last().beta.view());
    let eps = &design.response() - &mu;
    let mu_sq = mu.dot(&mu);
    let true_r2 = mu_sq / (mu_sq + eps.dot(&eps));
    let n = design.n();
    let k = config.steps;

    let runs: Vec<Vec<(Vec<f64>, Vec<f64>)>> = (0..config.replications)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(b as u64);
            let y_star = Array1::from_shape_fn(n, |i| mu[i] + eps[rng.random_range(0..n)]);
            let boot = design.with_response(y_star.view())?;
            SIMULATION_METHODS
                .iter()
                .map(|&method| {
                    let betas = method_betas(&boot, method, k)?;
                    let pe = betas
                        .iter()
                        .map(|beta| proportion_explained(&boot.predict(beta.view()), &mu))
                        .collect();
                    let nz = betas
                        .iter()
                        .map(|beta| beta.iter().filter(|&&v| v != 0.0).count() as f64)
                        .collect();
                    Ok((pe, nz))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let reps = config.replications as f64;
    let curves = SIMULATION_METHODS
        .iter()
        .enumerate()
        .map(|(mi, &method)| {
            let mut pe_mean = vec![0.0; k + 1];
            let mut nz_mean = vec![0.0; k + 1];
            for run in &runs {
                for s in 0..=k {
                    pe_mean[s] += run[mi].0[s] / reps;
                    nz_mean[s] += run[mi].1[s] / reps;
                }
            }
            let pe_sd = (0..=k)
                .map(|s| {
                    if runs.len() < 2 {
                        return 0.0;
                    }
                    let ss: f64 = runs.iter().map(|r| (r[mi].0[s] - pe_mean[s]).powi(2)).sum();
                    (ss / (reps - 1.0)).sqrt()
                })
                .collect();
            MethodCurve {
                method,
                pe_mean,
                pe_sd,
                mean_nonzero: nz_mean,
            }
        })
        .collect();
    Ok(SimulationResult { true_r2, curves })
}
