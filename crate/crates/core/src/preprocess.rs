//! Standardization of raw covariates and the quadratic feature expansion.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, ShapeBuilder};

use crate::error::{LarsError, Result};

/// Centered, unit-length predictors plus the metadata needed to map
/// coefficients back to the raw covariates.
///
/// The response is centered but keeps its original scale, so coefficients and
/// correlations are in response units.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedDesign {
    columns: Array2<f64>,
    response: Array1<f64>,
    column_means: Array1<f64>,
    column_scales: Array1<f64>,
    response_mean: f64,
    names: Vec<String>,
    centered: bool,
}

/// Mean and root sum of squared deviations of a column.
fn center_scale(col: ArrayView1<'_, f64>) -> (f64, f64) {
    let mean = col.mean().unwrap_or(0.0);
    let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, ss.sqrt())
}

/// Standardizes raw columns to mean zero and unit length and centers the
/// response.
pub fn standardize(
    raw_columns: ArrayView2<'_, f64>,
    raw_response: ArrayView1<'_, f64>,
    names: &[String],
) -> Result<StandardizedDesign> {
    let (n, m) = raw_columns.dim();
    if raw_response.len() != n {
        return Err(LarsError::DimensionMismatch {
            what: "response length",
            expected: n,
            found: raw_response.len(),
        });
    }
    if names.len() != m {
        return Err(LarsError::DimensionMismatch {
            what: "column names",
            expected: m,
            found: names.len(),
        });
    }
    if n < 2 {
        return Err(LarsError::InvalidArgument(format!(
            "need at least two observations, got {n}"
        )));
    }
    let mut columns = Array2::zeros((n, m).f());
    let mut means = Array1::zeros(m);
    let mut scales = Array1::zeros(m);
    for (j, col) in raw_columns.axis_iter(Axis(1)).enumerate() {
        let (mean, scale) = center_scale(col);
        // Relative test so that large constant values are still caught.
        let magnitude = col.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if !(scale > 1e-12 * magnitude.max(1.0)) {
            return Err(LarsError::ConstantColumn(names[j].clone()));
        }
        means[j] = mean;
        scales[j] = scale;
        columns
            .column_mut(j)
            .assign(&col.mapv(|v| (v - mean) / scale));
    }
    let response_mean = raw_response.mean().unwrap_or(0.0);
    let response = raw_response.mapv(|v| v - response_mean);
    Ok(StandardizedDesign {
        columns,
        response,
        column_means: means,
        column_scales: scales,
        response_mean,
        names: names.to_vec(),
        centered: true,
    })
}

impl StandardizedDesign {
    /// Wraps columns that are already on the working scale, without centering
    /// either the columns or the response. Every column must have unit length.
    ///
    /// This is the setting of designs such as `X = I`, where the saturated fit
    /// uses all `n` coordinates.
    pub fn from_unit_columns(
        columns: ArrayView2<'_, f64>,
        response: ArrayView1<'_, f64>,
        names: &[String],
    ) -> Result<Self> {
        let (n, m) = columns.dim();
        if response.len() != n {
            return Err(LarsError::DimensionMismatch {
                what: "response length",
                expected: n,
                found: response.len(),
            });
        }
        if names.len() != m {
            return Err(LarsError::DimensionMismatch {
                what: "column names",
                expected: m,
                found: names.len(),
            });
        }
        for (j, col) in columns.axis_iter(Axis(1)).enumerate() {
            let norm_sq = col.dot(&col);
            if (norm_sq - 1.0).abs() > 1e-9 {
                return Err(LarsError::InvalidArgument(format!(
                    "column `{}` has squared norm {norm_sq}, expected 1",
                    names[j]
                )));
            }
        }
        let mut owned = Array2::zeros((n, m).f());
        owned.assign(&columns);
        Ok(Self {
            columns: owned,
            response: response.to_owned(),
            column_means: Array1::zeros(m),
            column_scales: Array1::ones(m),
            response_mean: 0.0,
            names: names.to_vec(),
            centered: false,
        })
    }

    /// Same predictors with a different response. The new response is centered
    /// when the design is.
    pub fn with_response(&self, response: ArrayView1<'_, f64>) -> Result<Self> {
        if response.len() != self.n() {
            return Err(LarsError::DimensionMismatch {
                what: "response length",
                expected: self.n(),
                found: response.len(),
            });
        }
        let (response, response_mean) = if self.centered {
            let mean = response.mean().unwrap_or(0.0);
            (response.mapv(|v| v - mean), mean)
        } else {
            (response.to_owned(), 0.0)
        };
        Ok(Self {
            response,
            response_mean,
            ..self.clone()
        })
    }

    /// Replaces the working response without touching the stored mean.
    pub(crate) fn with_working_response(&self, response: Array1<f64>) -> Self {
        Self {
            response,
            ..self.clone()
        }
    }

    pub fn n(&self) -> usize {
        self.columns.nrows()
    }

    pub fn m(&self) -> usize {
        self.columns.ncols()
    }

    pub fn columns(&self) -> ArrayView2<'_, f64> {
        self.columns.view()
    }

    pub fn column(&self, j: usize) -> ArrayView1<'_, f64> {
        self.columns.column(j)
    }

    pub fn response(&self) -> ArrayView1<'_, f64> {
        self.response.view()
    }

    pub fn column_means(&self) -> ArrayView1<'_, f64> {
        self.column_means.view()
    }

    pub fn column_scales(&self) -> ArrayView1<'_, f64> {
        self.column_scales.view()
    }

    pub fn response_mean(&self) -> f64 {
        self.response_mean
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    /// Largest number of linearly independent columns the design can carry:
    /// centering removes one dimension from the row space.
    pub fn rank_limit(&self) -> usize {
        let rows = if self.centered {
            self.n() - 1
        } else {
            self.n()
        };
        rows.min(self.m())
    }

    /// `X β` in working units.
    pub fn predict(&self, beta: ArrayView1<'_, f64>) -> Array1<f64> {
        self.columns.dot(&beta)
    }

    /// Subset of the predictors, keeping the response and metadata.
    pub fn select_columns(&self, indices: &[usize]) -> Self {
        let n = self.n();
        let mut columns = Array2::zeros((n, indices.len()).f());
        for (k, &j) in indices.iter().enumerate() {
            columns.column_mut(k).assign(&self.columns.column(j));
        }
        Self {
            columns,
            response: self.response.clone(),
            column_means: indices.iter().map(|&j| self.column_means[j]).collect(),
            column_scales: indices.iter().map(|&j| self.column_scales[j]).collect(),
            response_mean: self.response_mean,
            names: indices.iter().map(|&j| self.names[j].clone()).collect(),
            centered: self.centered,
        }
    }
}

/// Maps standardized coefficients back to the raw covariates.
///
/// Returns `(beta_original, intercept)` such that
/// `X_raw β_original + intercept = X_std β_std + ȳ`.
pub fn to_original_units(
    design: &StandardizedDesign,
    beta_standardized: ArrayView1<'_, f64>,
) -> Result<(Array1<f64>, f64)> {
    if beta_standardized.len() != design.m() {
        return Err(LarsError::DimensionMismatch {
            what: "coefficient vector",
            expected: design.m(),
            found: beta_standardized.len(),
        });
    }
    let beta = &beta_standardized / &design.column_scales;
    let intercept = design.response_mean - beta.dot(&design.column_means);
    Ok((beta, intercept))
}

/// Quadratic model: main effects, pairwise interactions `i < j`, and squares of
/// every column not listed in `binary_columns`, in that order.
///
/// Main effects are centered before products are formed, so an interaction
/// column is the product of two centered covariates.
pub fn quadratic_expand(
    raw_columns: ArrayView2<'_, f64>,
    names: &[String],
    binary_columns: &[usize],
) -> Result<(Array2<f64>, Vec<String>)> {
    let (n, p) = raw_columns.dim();
    if names.len() != p {
        return Err(LarsError::WrongColumnCount {
            expected: names.len(),
            found: p,
        });
    }
    if p == 0 {
        return Err(LarsError::WrongColumnCount {
            expected: 1,
            found: 0,
        });
    }
    if let Some(&bad) = binary_columns.iter().find(|&&b| b >= p) {
        return Err(LarsError::IndexOutOfRange { index: bad, len: p });
    }
    let centered: Vec<Array1<f64>> = raw_columns
        .axis_iter(Axis(1))
        .map(|c| {
            let mean = c.mean().unwrap_or(0.0);
            c.mapv(|v| v - mean)
        })
        .collect();

    let squares: Vec<usize> = (0..p).filter(|j| !binary_columns.contains(j)).collect();
    let total = p + p * (p - 1) / 2 + squares.len();
    let mut out = Array2::zeros((n, total).f());
    let mut labels = Vec::with_capacity(total);
    let mut k = 0;
    for (j, col) in centered.iter().enumerate() {
        out.column_mut(k).assign(col);
        labels.push(names[j].clone());
        k += 1;
    }
    for i in 0..p {
        for j in (i + 1)..p {
            out.column_mut(k).assign(&(&centered[i] * &centered[j]));
            labels.push(format!("{}:{}", names[i], names[j]));
            k += 1;
        }
    }
    for &j in &squares {
        out.column_mut(k).assign(&centered[j].mapv(|v| v * v));
        labels.push(format!("{}^2", names[j]));
        k += 1;
    }
    Ok((out, labels))
}

/// Indices of columns taking exactly two distinct values.
pub fn binary_columns(raw_columns: ArrayView2<'_, f64>) -> Vec<usize> {
    raw_columns
        .axis_iter(Axis(1))
        .enumerate()
        .filter(|(_, col)| {
            let first = col[0];
            let other = col.iter().find(|&&v| v != first);
            match other {
                Some(&second) => col.iter().all(|&v| v == first || v == second),
                None => false,
            }
        })
        .map(|(j, _)| j)
        .collect()
}
