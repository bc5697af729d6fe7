//! Rules that turn the LARS engine into the Lasso, Stagewise and positive
//! Lasso paths, and the two-stage main-effects-first fit.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, ShapeBuilder};

use crate::error::{LarsError, Result};
use crate::linalg::{nnls_inner_loop, CholeskyFactor, NnlsFace};
use crate::path::{
    self, admissible_ratio, fit_path, select_join, tie_tolerance, FitOptions, Join, Path, Variant,
};
use crate::preprocess::{standardize, StandardizedDesign};

/// A coefficient reaching zero along the current direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DropCandidate {
    /// `γ̃`, the step at which the coefficient crosses zero.
    pub gamma: f64,
    /// Position in the active set.
    pub position: usize,
}

/// `γ̃ = min { -β_j / d_j > 0 }` over the active set, or `None` when no
/// coefficient is heading towards zero.
pub fn lasso_drop_candidate(beta_active: &[f64], direction: &[f64]) -> Option<DropCandidate> {
    beta_active
        .iter()
        .zip(direction)
        .enumerate()
        .filter_map(|(position, (&b, &d))| {
            let g = -b / d;
            (b != 0.0 && d != 0.0 && g > 0.0).then_some(DropCandidate { gamma: g, position })
        })
        .min_by(|x, y| x.gamma.total_cmp(&y.gamma))
}

/// Returns the drop when it happens no later than the planned step `γ̂`.
/// Coincident events within `tol` resolve to the drop.
pub fn apply_lasso_modification(
    gamma_hat: f64,
    drop: Option<DropCandidate>,
    tol: f64,
) -> Option<DropCandidate> {
    drop.filter(|d| d.gamma <= gamma_hat + tol)
}

/// Stagewise restriction of the equiangular direction to the signed cone.
///
/// Returns `None` when every weight is already positive, so the direction lies
/// inside the cone. Otherwise returns the face found by the Lawson–Hanson
/// projection; its `dropped()` positions leave the active set.
pub fn stagewise_direction(factor: &CholeskyFactor, signs: &[f64]) -> Result<Option<NnlsFace>> {
    let (_, z) = path::direction(factor, signs)?;
    if z.iter().zip(signs).all(|(z, s)| z * s > 0.0) {
        return Ok(None);
    }
    nnls_inner_loop(factor, signs).map(Some)
}

/// Positive Lasso join rule: only the one-sided ratio `(Ĉ - ĉ_j)/(A - a_j)`
/// is considered and every entrant gets sign `+1`.
pub fn positive_lasso_step(
    correlations: ArrayView1<'_, f64>,
    c_max: f64,
    a_norm: f64,
    inner: ArrayView1<'_, f64>,
    candidates: &[usize],
    fresh: &[usize],
) -> Result<Join> {
    let tol = tie_tolerance(c_max);
    let options = candidates.iter().filter_map(|&j| {
        admissible_ratio(
            c_max - correlations[j],
            a_norm - inner[j],
            tol,
            fresh.contains(&j),
        )
        .map(|g| (j, g, 1.0))
    });
    select_join(options, tol)
}

/// Pairwise products of the centered raw columns listed in `active`, labelled
/// `a:b`.
pub fn pairwise_interactions(
    raw_columns: ArrayView2<'_, f64>,
    names: &[String],
    active: &[usize],
) -> Result<(Array2<f64>, Vec<String>)> {
    let (n, p) = raw_columns.dim();
    if names.len() != p {
        return Err(LarsError::WrongColumnCount {
            expected: names.len(),
            found: p,
        });
    }
    if let Some(&bad) = active.iter().find(|&&j| j >= p) {
        return Err(LarsError::IndexOutOfRange { index: bad, len: p });
    }
    let centered: Vec<Array1<f64>> = active
        .iter()
        .map(|&j| {
            let c = raw_columns.column(j);
            let mean = c.mean().unwrap_or(0.0);
            c.mapv(|v| v - mean)
        })
        .collect();
    let k = active.len();
    let mut out = Array2::zeros((n, k * k.saturating_sub(1) / 2).f());
    let mut labels = Vec::new();
    let mut col = 0;
    for a in 0..k {
        for b in (a + 1)..k {
            out.column_mut(col).assign(&(&centered[a] * &centered[b]));
            labels.push(format!("{}:{}", names[active[a]], names[active[b]]));
            col += 1;
        }
    }
    Ok((out, labels))
}

/// Second-stage LARS fit of the step-`k` residual on extra columns.
///
/// Returns the second-stage design, whose response is the residual, and its
/// path.
pub fn main_effects_first(
    design_main: &StandardizedDesign,
    path: &Path,
    k: usize,
    extra_columns: ArrayView2<'_, f64>,
    extra_names: &[String],
) -> Result<(StandardizedDesign, Path)> {
    let vertex = path.steps.get(k).ok_or(LarsError::IndexOutOfRange {
        index: k,
        len: path.steps.len(),
    })?;
    if extra_columns.nrows() != design_main.n() {
        return Err(LarsError::DimensionMismatch {
            what: "interaction rows",
            expected: design_main.n(),
            found: extra_columns.nrows(),
        });
    }
    let residual = &design_main.response() - &design_main.predict(vertex.beta.view());
    let second = standardize(extra_columns, residual.view(), extra_names)?;
    let second_path = fit_path(&second, Variant::Lars, &FitOptions::default())?;
    Ok((second, second_path))
}

/// Nonzero coefficients of the `k`-step fit, in entry order.
pub fn active_at(path: &Path, k: usize) -> Vec<usize> {
    let Some(vertex) = path.steps.get(k) else {
        return Vec::new();
    };
    let mut a: Vec<usize> = (0..vertex.beta.len())
        .filter(|&j| vertex.beta[j] != 0.0)
        .collect();
    let order = path.entry_order();
    a.sort_by_key(|j| order.iter().position(|o| o == j));
    a
}
