//! Slow, independent reference solvers used to validate the path engine.

use ndarray::{Array1, Array2};

use crate::error::{LarsError, Result};
use crate::linalg::CholeskyFactor;
use crate::path::{Action, Path, PathStep, Variant};
use crate::preprocess::StandardizedDesign;

/// `|y|_(1) ≥ |y|_(2) ≥ … ≥ |y|_(n)` followed by `|y|_(n+1) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderStatistics {
    pub sorted_abs: Vec<f64>,
    /// `permutation[r]` is the coordinate holding `|y|_(r+1)`.
    pub permutation: Vec<usize>,
}

impl OrderStatistics {
    pub fn new(y: &[f64]) -> Self {
        let mut permutation: Vec<usize> = (0..y.len()).collect();
        permutation.sort_by(|&a, &b| y[b].abs().total_cmp(&y[a].abs()).then(a.cmp(&b)));
        let mut sorted_abs: Vec<f64> = permutation.iter().map(|&i| y[i].abs()).collect();
        sorted_abs.push(0.0);
        Self {
            sorted_abs,
            permutation,
        }
    }

    /// `|y|_(r)` with 1-based rank `r`.
    pub fn get(&self, r: usize) -> f64 {
        self.sorted_abs[r - 1]
    }
}

/// `η(y; t) = sign(y) (|y| - t)_+`.
pub fn soft_threshold(y: f64, t: f64) -> f64 {
    if y > t {
        y - t
    } else if y < -t {
        y + t
    } else {
        0.0
    }
}

/// The `k`-step LARS fit when the design is the identity: every coordinate is
/// soft-thresholded at `|y|_(k+1)`.
pub fn soft_threshold_path(y: &[f64], k: usize) -> Result<Array1<f64>> {
    if k > y.len() {
        return Err(LarsError::IndexOutOfRange {
            index: k,
            len: y.len() + 1,
        });
    }
    let order = OrderStatistics::new(y);
    let t = order.get(k + 1);
    Ok(y.iter().map(|&v| soft_threshold(v, t)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSize {
    Fixed(f64),
    /// `ε = |ĉ_ĵ|`, the full correlation of the selected variable.
    FullCorrelation,
}

/// Forward Stagewise by small steps along the most correlated column.
#[derive(Debug, Clone, PartialEq)]
pub struct StagewiseTrajectory {
    /// `betas[s]` is the coefficient vector after `s` updates.
    pub betas: Vec<Array1<f64>>,
    pub selected: Vec<usize>,
}

impl StagewiseTrajectory {
    pub fn l1_norms(&self) -> Vec<f64> {
        self.betas
            .iter()
            .map(|b| b.iter().map(|v| v.abs()).sum())
            .collect()
    }
}

/// Runs `n_steps` updates `β_ĵ += ε sign(ĉ_ĵ)` with `ĵ = argmax |ĉ_j|`, ties to
/// the lowest index.
pub fn epsilon_stagewise(
    design: &StandardizedDesign,
    step: StepSize,
    n_steps: usize,
) -> Result<StagewiseTrajectory> {
    if let StepSize::Fixed(eps) = step {
        if !(eps > 0.0) {
            return Err(LarsError::InvalidArgument(format!(
                "step size must be positive, got {eps}"
            )));
        }
    }
    let x = design.columns();
    let g = x.t().dot(&x);
    let mut c = x.t().dot(&design.response());
    let mut beta = Array1::zeros(design.m());
    let mut betas = Vec::with_capacity(n_steps + 1);
    let mut selected = Vec::with_capacity(n_steps);
    betas.push(beta.clone());
    for _ in 0..n_steps {
        let mut j = 0;
        for i in 1..c.len() {
            if c[i].abs() > c[j].abs() {
                j = i;
            }
        }
        let delta = match step {
            StepSize::Fixed(eps) => eps * c[j].signum(),
            StepSize::FullCorrelation => c[j],
        };
        beta[j] += delta;
        c.scaled_add(-delta, &g.row(j));
        selected.push(j);
        betas.push(beta.clone());
    }
    Ok(StagewiseTrajectory { betas, selected })
}

fn gram_subset(g: &Array2<f64>, set: &[usize]) -> Array2<f64> {
    Array2::from_shape_fn((set.len(), set.len()), |(p, q)| g[[set[p], set[q]]])
}

/// Least squares on the columns in `set`, returned as an `m`-vector.
pub fn subset_least_squares(design: &StandardizedDesign, set: &[usize]) -> Result<Array1<f64>> {
    let x = design.columns();
    let mut beta = Array1::zeros(design.m());
    if set.is_empty() {
        return Ok(beta);
    }
    let g = Array2::from_shape_fn((set.len(), set.len()), |(p, q)| {
        x.column(set[p]).dot(&x.column(set[q]))
    });
    let rhs: Vec<f64> = set
        .iter()
        .map(|&j| x.column(j).dot(&design.response()))
        .collect();
    let sol = CholeskyFactor::from_gram(g.view())?.solve_gram(&rhs)?;
    for (&j, v) in set.iter().zip(sol) {
        beta[j] = v;
    }
    Ok(beta)
}

const CD_TOL: f64 = 1e-10;
const CD_MAX_SWEEPS: usize = 100_000;

/// Cyclic coordinate descent for `½‖y - Xβ‖² + λ‖β‖₁` on unit columns, warm
/// started from `beta`.
fn coordinate_descent(
    g: &Array2<f64>,
    xty: &Array1<f64>,
    lambda: f64,
    beta: &mut Array1<f64>,
) -> Result<()> {
    let m = beta.len();
    let mut c = xty - &g.dot(&*beta);
    let scale = xty.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    for _ in 0..CD_MAX_SWEEPS {
        let mut biggest = 0.0f64;
        for j in 0..m {
            let old = beta[j];
            let z = c[j] + old * g[[j, j]];
            let new = soft_threshold(z, lambda) / g[[j, j]];
            let delta = new - old;
            if delta != 0.0 {
                beta[j] = new;
                c.scaled_add(-delta, &g.row(j));
                biggest = biggest.max(delta.abs());
            }
        }
        if biggest < CD_TOL * scale {
            return Ok(());
        }
    }
    Err(LarsError::MaxIterations(CD_MAX_SWEEPS))
}

/// Refines a coordinate-descent solution by solving the stationarity
/// conditions exactly on its support, with `λ` chosen so that `‖β‖₁ = t`.
/// Returns `None` when the refined point violates the conditions.
fn polish(
    g: &Array2<f64>,
    xty: &Array1<f64>,
    beta: &Array1<f64>,
    t: f64,
) -> Option<(Array1<f64>, f64)> {
    let support: Vec<usize> = (0..beta.len()).filter(|&j| beta[j] != 0.0).collect();
    if support.is_empty() {
        return None;
    }
    let signs: Vec<f64> = support.iter().map(|&j| beta[j].signum()).collect();
    let f = CholeskyFactor::from_gram(gram_subset(g, &support).view()).ok()?;
    let rhs: Vec<f64> = support.iter().map(|&j| xty[j]).collect();
    let p = f.solve_gram(&rhs).ok()?;
    let q = f.solve_gram(&signs).ok()?;
    // β_S = p - λ q and s'β_S = t.
    let sp: f64 = signs.iter().zip(&p).map(|(s, v)| s * v).sum();
    let sq: f64 = signs.iter().zip(&q).map(|(s, v)| s * v).sum();
    let lambda = (sp - t) / sq;
    if !(lambda >= 0.0) {
        return None;
    }
    let mut out = Array1::zeros(beta.len());
    for (k, &j) in support.iter().enumerate() {
        let v = p[k] - lambda * q[k];
        if v * signs[k] <= 0.0 {
            return None;
        }
        out[j] = v;
    }
    let c = xty - &g.dot(&out);
    let slack = 1e-9 * xty.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    for j in 0..beta.len() {
        let ok = if out[j] != 0.0 {
            (c[j] - lambda * out[j].signum()).abs() <= slack
        } else {
            c[j].abs() <= lambda + slack
        };
        if !ok {
            return None;
        }
    }
    Some((out, lambda))
}

/// Solves `min ‖y - Xβ‖²` subject to `‖β‖₁ ≤ t` independently of the path
/// engine: coordinate descent on the penalized form, with the penalty found
/// by bisection so that the constraint is active.
pub fn lasso_at_t(design: &StandardizedDesign, t: f64, tol: f64) -> Result<Array1<f64>> {
    if !(t >= 0.0) {
        return Err(LarsError::TOutOfRange {
            t,
            t_max: f64::INFINITY,
        });
    }
    let m = design.m();
    if t == 0.0 {
        return Ok(Array1::zeros(m));
    }
    let x = design.columns();
    let g = x.t().dot(&x);
    let xty = x.t().dot(&design.response());
    if design.rank_limit() >= m {
        let all: Vec<usize> = (0..m).collect();
        let ols = subset_least_squares(design, &all)?;
        if ols.iter().map(|v| v.abs()).sum::<f64>() <= t {
            return Ok(ols);
        }
    }
    let l1 = |b: &Array1<f64>| b.iter().map(|v| v.abs()).sum::<f64>();
    let mut lo = 0.0;
    let mut hi = xty.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut beta = Array1::zeros(m);
    let mut best = beta.clone();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        coordinate_descent(&g, &xty, mid, &mut beta)?;
        let norm = l1(&beta);
        best.assign(&beta);
        if (norm - t).abs() <= tol * t.max(1.0) {
            break;
        }
        if norm > t {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(polish(&g, &xty, &best, t).map(|(b, _)| b).unwrap_or(best))
}

/// Classic forward selection: repeatedly add the column most correlated with
/// the residual after orthogonalizing on the selected ones, then refit by
/// least squares.
///
/// Vertex `k` holds the least squares fit on the first `k` selected columns
/// and its action names the column entering next; the last vertex is `Final`.
/// `gamma` is the distance the fit moved.
pub fn forward_selection(design: &StandardizedDesign, k_max: usize) -> Result<Path> {
    let (n, m) = (design.n(), design.m());
    let limit = design.rank_limit();
    if k_max > limit {
        return Err(LarsError::InvalidArgument(format!(
            "forward selection can take at most {limit} steps, asked for {k_max}"
        )));
    }
    let x = design.columns();
    let g = x.t().dot(&x);
    let xty = x.t().dot(&design.response());
    let y = design.response();
    let yy = y.dot(&y);

    let mut selected: Vec<usize> = Vec::new();
    let mut factor = CholeskyFactor::new();
    let mut beta = Array1::zeros(m);
    let mut steps = vec![PathStep {
        step: 0,
        action: Action::Final,
        active: Vec::new(),
        signs: Vec::new(),
        projected_out: Vec::new(),
        gamma: 0.0,
        gamma_bar: 0.0,
        c_max: xty.iter().fold(0.0f64, |a, v| a.max(v.abs())),
        a: 0.0,
        beta: beta.clone(),
        rss: yy,
        l1_norm: 0.0,
    }];
    for k in 1..=k_max {
        let c = &xty - &g.dot(&beta);
        let mut best: Option<(usize, f64)> = None;
        for j in (0..m).filter(|j| !selected.contains(j)) {
            let cross: Vec<f64> = selected.iter().map(|&i| g[[i, j]]).collect();
            let resid_sq = if selected.is_empty() {
                g[[j, j]]
            } else {
                let r = factor.solve_lower(&cross)?;
                g[[j, j]] - r.iter().map(|v| v * v).sum::<f64>()
            };
            if resid_sq <= 1e-12 * g[[j, j]] {
                continue;
            }
            let score = c[j].abs() / resid_sq.sqrt();
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((j, score));
            }
        }
        let Some((j, _)) = best else { break };
        steps.last_mut().expect("origin").action = Action::Add(j);
        let cross: Vec<f64> = selected.iter().map(|&i| g[[i, j]]).collect();
        factor.append_column(&cross, g[[j, j]])?;
        selected.push(j);
        let rhs: Vec<f64> = selected.iter().map(|&i| xty[i]).collect();
        let sol = factor.solve_gram(&rhs)?;
        let mut next = Array1::zeros(m);
        for (&i, v) in selected.iter().zip(sol) {
            next[i] = v;
        }
        let diff = &next - &beta;
        let moved = diff.dot(&g.dot(&diff)).max(0.0).sqrt();
        let c_max = c.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        beta = next;
        let c_after = &xty - &g.dot(&beta);
        let rss = (yy - beta.dot(&(&xty + &c_after))).max(0.0);
        steps.push(PathStep {
            step: k,
            action: Action::Final,
            active: selected.clone(),
            signs: selected.iter().map(|&i| beta[i].signum()).collect(),
            projected_out: Vec::new(),
            gamma: moved,
            gamma_bar: moved,
            c_max,
            a: 0.0,
            beta: beta.clone(),
            rss,
            l1_norm: beta.iter().map(|v| v.abs()).sum(),
        });
    }
    Ok(Path {
        variant: Variant::ForwardSelection,
        steps,
        warnings: Vec::new(),
        n,
        m,
        jittered_response: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::{fit_path, FitOptions};
    use crate::preprocess::standardize;
    use ndarray::array;

    fn names(m: usize) -> Vec<String> {
        (1..=m).map(|j| format!("x{j}")).collect()
    }

    #[test]
    fn order_statistics_sort_by_magnitude() {
        let o = OrderStatistics::new(&[3.0, 1.0, -2.0]);
        assert_eq!(o.sorted_abs, vec![3.0, 2.0, 1.0, 0.0]);
        assert_eq!(o.permutation, vec![0, 2, 1]);
    }

    #[test]
    fn soft_threshold_hand_values() {
        let y = [3.0, 1.0, -2.0];
        assert_eq!(soft_threshold_path(&y, 0).unwrap(), array![0.0, 0.0, 0.0]);
        assert_eq!(soft_threshold_path(&y, 1).unwrap(), array![1.0, 0.0, 0.0]);
        assert_eq!(soft_threshold_path(&y, 2).unwrap(), array![2.0, 0.0, -1.0]);
        assert_eq!(soft_threshold_path(&y, 3).unwrap(), array![3.0, 1.0, -2.0]);
        assert!(soft_threshold_path(&y, 4).is_err());
    }

    fn one_column() -> StandardizedDesign {
        let x = array![[1.0], [2.0], [3.0], [4.0], [6.0]];
        let y = array![1.5, 1.9, 3.6, 4.1, 6.2];
        standardize(x.view(), y.view(), &names(1)).unwrap()
    }

    #[test]
    fn single_predictor_stagewise_creeps_up_to_least_squares() {
        let d = one_column();
        let ols = d.column(0).dot(&d.response());
        let eps = 0.01;
        let traj = epsilon_stagewise(&d, StepSize::Fixed(eps), (ols / eps) as usize + 50).unwrap();
        let path: Vec<f64> = traj.betas.iter().map(|b| b[0]).collect();
        let first_past = path.iter().position(|&b| b >= ols).unwrap();
        assert!(path[..=first_past].windows(2).all(|w| w[1] > w[0]));
        assert!(path.iter().all(|&b| b - ols < eps));
    }

    #[test]
    fn full_correlation_step_is_one_forward_selection_step() {
        let x = array![
            [1.0, 0.2, -0.4],
            [2.0, -0.7, 0.3],
            [0.5, 1.1, 0.9],
            [-1.0, 0.4, -1.5],
            [0.3, -1.2, 0.8]
        ];
        let y = array![1.2, 2.9, 0.1, -1.8, 0.0];
        let d = standardize(x.view(), y.view(), &names(3)).unwrap();
        let traj = epsilon_stagewise(&d, StepSize::FullCorrelation, 1).unwrap();
        let fs = forward_selection(&d, 1).unwrap();
        for (a, b) in traj.betas[1].iter().zip(fs.steps[1].beta.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn full_correlation_steps_match_forward_selection_on_orthogonal_design() {
        let x = Array2::<f64>::eye(4);
        let y = [0.5, -3.0, 2.0, 1.0];
        let d = StandardizedDesign::from_unit_columns(
            x.view(),
            Array1::from(y.to_vec()).view(),
            &names(4),
        )
        .unwrap();
        let traj = epsilon_stagewise(&d, StepSize::FullCorrelation, 4).unwrap();
        let fs = forward_selection(&d, 4).unwrap();
        for k in 0..=4 {
            assert_eq!(traj.betas[k], fs.steps[k].beta);
        }
    }

    #[test]
    fn lasso_oracle_endpoints() {
        let x = array![
            [1.0, 0.2],
            [2.0, -0.7],
            [0.5, 1.1],
            [-1.0, 0.4],
            [0.3, -1.2]
        ];
        let y = array![1.2, 2.9, 0.1, -1.8, 0.0];
        let d = standardize(x.view(), y.view(), &names(2)).unwrap();
        assert_eq!(lasso_at_t(&d, 0.0, 1e-12).unwrap(), Array1::<f64>::zeros(2));
        let ols = subset_least_squares(&d, &[0, 1]).unwrap();
        let t_ols: f64 = ols.iter().map(|v| v.abs()).sum();
        let got = lasso_at_t(&d, t_ols * 2.0, 1e-12).unwrap();
        for (a, b) in got.iter().zip(ols.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        let half = lasso_at_t(&d, 0.5 * t_ols, 1e-12).unwrap();
        assert!((half.iter().map(|v| v.abs()).sum::<f64>() - 0.5 * t_ols).abs() < 1e-9);
    }

    #[test]
    fn forward_selection_residual_is_orthogonal_to_the_selection() {
        let x = array![
            [1.0, 0.2, -0.4, 0.0],
            [2.0, -0.7, 0.3, 1.0],
            [0.5, 1.1, 0.9, -0.3],
            [-1.0, 0.4, -1.5, 0.8],
            [0.3, -1.2, 0.8, 0.1],
            [1.4, 0.6, 0.2, -1.1]
        ];
        let y = array![1.2, 2.9, 0.1, -1.8, 0.0, 1.1];
        let d = standardize(x.view(), y.view(), &names(4)).unwrap();
        let fs = forward_selection(&d, 4).unwrap();
        for s in &fs.steps[1..] {
            let r = &d.response() - &d.predict(s.beta.view());
            for &j in &s.active {
                assert!(d.column(j).dot(&r).abs() < 1e-10);
            }
            assert!((s.rss - r.dot(&r)).abs() < 1e-9);
        }
    }

    #[test]
    fn forward_selection_on_orthogonal_design_orders_like_lars() {
        let x = Array2::<f64>::eye(5);
        let y = array![0.3, -4.0, 2.5, 1.0, -0.2];
        let d = StandardizedDesign::from_unit_columns(x.view(), y.view(), &names(5)).unwrap();
        let fs = forward_selection(&d, 5).unwrap();
        let lars = fit_path(&d, Variant::Lars, &FitOptions::default()).unwrap();
        assert_eq!(fs.entry_order(), lars.entry_order());
        let one = one_column();
        let p = forward_selection(&one, 1).unwrap();
        assert!((p.steps[1].beta[0] - one.column(0).dot(&one.response())).abs() < 1e-12);
    }
}
