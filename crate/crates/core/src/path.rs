//! The piecewise-linear path engine shared by LARS and its modifications.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LarsError, Result};
use crate::linalg::CholeskyFactor;
use crate::preprocess::StandardizedDesign;
use crate::variants;

/// Which path the engine traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Lars,
    Lasso,
    Stagewise,
    PositiveLasso,
    /// Classic greedy forward selection; only produced by
    /// [`crate::oracles::forward_selection`].
    ForwardSelection,
}

impl Variant {
    pub const PATH_VARIANTS: [Variant; 4] = [
        Variant::Lars,
        Variant::Lasso,
        Variant::Stagewise,
        Variant::PositiveLasso,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Lars => "lars",
            Variant::Lasso => "lasso",
            Variant::Stagewise => "stagewise",
            Variant::PositiveLasso => "positive-lasso",
            Variant::ForwardSelection => "forward-selection",
        }
    }

    fn positive(self) -> bool {
        self == Variant::PositiveLasso
    }

    fn drops_at_zero(self) -> bool {
        matches!(self, Variant::Lasso | Variant::PositiveLasso)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = LarsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lars" => Ok(Variant::Lars),
            "lasso" => Ok(Variant::Lasso),
            "stagewise" => Ok(Variant::Stagewise),
            "positive-lasso" | "positive_lasso" | "positivelasso" => Ok(Variant::PositiveLasso),
            "forward-selection" | "forward_selection" => Ok(Variant::ForwardSelection),
            other => Err(LarsError::InvalidArgument(format!(
                "unknown variant `{other}`"
            ))),
        }
    }
}

/// Event that ends a segment of the path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Action {
    Add(usize),
    Drop(usize),
    Final,
}

/// One vertex of the path.
///
/// Vertex 0 is the origin. For `step ≥ 1` the vertex lies at the end of a
/// segment of length `gamma` along the equiangular direction with norm
/// constant `a`, started when the common active correlation was `c_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathStep {
    pub step: usize,
    pub action: Action,
    /// Active variables after the event, in factor order.
    pub active: Vec<usize>,
    pub signs: Vec<f64>,
    /// Variables removed by a Stagewise cone projection at this vertex.
    pub projected_out: Vec<usize>,
    pub gamma: f64,
    /// Distance `Ĉ/A` to the least squares fit on the segment's active set.
    pub gamma_bar: f64,
    pub c_max: f64,
    pub a: f64,
    pub beta: Array1<f64>,
    pub rss: f64,
    pub l1_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PathWarning {
    /// Several candidates reached the same step length. The lowest index was
    /// taken.
    Tie { step: usize, candidates: Vec<usize> },
    /// The response was perturbed this many times to break ties.
    Jittered { restarts: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub variant: Variant,
    pub steps: Vec<PathStep>,
    pub warnings: Vec<PathWarning>,
    pub n: usize,
    pub m: usize,
    /// Working response actually fitted, when jitter replaced the original.
    pub jittered_response: Option<Array1<f64>>,
}

impl Path {
    /// Number of segments, i.e. vertices after the origin.
    pub fn num_steps(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }

    pub fn last(&self) -> &PathStep {
        self.steps.last().expect("a path always has its origin")
    }

    /// Variables in order of first entry.
    pub fn entry_order(&self) -> Vec<usize> {
        let mut seen = Vec::new();
        for step in &self.steps {
            if let Action::Add(j) = step.action {
                if !seen.contains(&j) {
                    seen.push(j);
                }
            }
        }
        seen
    }

    /// Every `Add` event in order, including re-entries.
    pub fn additions(&self) -> Vec<usize> {
        self.steps
            .iter()
            .filter_map(|s| match s.action {
                Action::Add(j) => Some(j),
                _ => None,
            })
            .collect()
    }

    pub fn drops(&self) -> Vec<(usize, usize)> {
        self.steps
            .iter()
            .filter_map(|s| match s.action {
                Action::Drop(j) => Some((s.step, j)),
                _ => None,
            })
            .collect()
    }

    /// Stagewise projection events as `(step, removed variables)`.
    pub fn projections(&self) -> Vec<(usize, Vec<usize>)> {
        self.steps
            .iter()
            .filter(|s| !s.projected_out.is_empty())
            .map(|s| (s.step, s.projected_out.clone()))
            .collect()
    }

    pub fn t_max(&self) -> f64 {
        self.steps.iter().map(|s| s.l1_norm).fold(0.0, f64::max)
    }

    pub fn tie_warnings(&self) -> usize {
        self.warnings
            .iter()
            .filter(|w| matches!(w, PathWarning::Tie { .. }))
            .count()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FitOptions {
    /// Guard on the number of segments; exceeding it is an error.
    pub max_steps: Option<usize>,
    /// Stop normally after this many segments.
    pub step_limit: Option<usize>,
    /// Break ties by perturbing the response with this seed.
    pub jitter_seed: Option<u64>,
    /// Use the precomputed Gram matrix. Defaults to `m ≤ n`.
    pub use_gram: Option<bool>,
}

impl FitOptions {
    pub fn with_step_limit(limit: usize) -> Self {
        Self {
            step_limit: Some(limit),
            ..Self::default()
        }
    }
}

/// Equiangular quantities for a signed active set.
#[derive(Debug, Clone, PartialEq)]
pub struct EquiangularBasis {
    pub active: Vec<usize>,
    pub signs: Vec<f64>,
    pub a: f64,
    /// `w_A`, in active order.
    pub w: Vec<f64>,
    /// Unit equiangular vector `u_A = X_A S w_A`.
    pub u: Array1<f64>,
    /// `X'u_A` for every column.
    pub inner: Array1<f64>,
}

impl EquiangularBasis {
    /// Coefficient direction `s_j w_j` in active order.
    pub fn beta_direction(&self) -> Vec<f64> {
        self.w.iter().zip(&self.signs).map(|(w, s)| w * s).collect()
    }
}

/// `A` and `z = G⁻¹s`, from which `w_j = A s_j z_j` and `d = A z`.
pub(crate) fn direction(factor: &CholeskyFactor, signs: &[f64]) -> Result<(f64, Vec<f64>)> {
    let z = factor.solve_gram(signs)?;
    let q: f64 = z.iter().zip(signs).map(|(z, s)| z * s).sum();
    if !(q > 0.0) {
        return Err(LarsError::DegenerateColumn {
            position: signs.len().saturating_sub(1),
        });
    }
    Ok((q.powf(-0.5), z))
}

pub fn compute_equiangular(
    design: &StandardizedDesign,
    active: &[usize],
    signs: &[f64],
    factor: &CholeskyFactor,
) -> Result<EquiangularBasis> {
    if active.is_empty() {
        return Err(LarsError::EmptyFace);
    }
    if factor.dim() != active.len() || signs.len() != active.len() {
        return Err(LarsError::DimensionMismatch {
            what: "active set",
            expected: factor.dim(),
            found: active.len().max(signs.len()),
        });
    }
    if let Some(&bad) = active.iter().find(|&&j| j >= design.m()) {
        return Err(LarsError::IndexOutOfRange {
            index: bad,
            len: design.m(),
        });
    }
    let (a, z) = direction(factor, signs)?;
    let mut u = Array1::zeros(design.n());
    for (&j, &zj) in active.iter().zip(&z) {
        u.scaled_add(a * zj, &design.column(j));
    }
    let inner = design.columns().t().dot(&u);
    let w = z.iter().zip(signs).map(|(z, s)| a * z * s).collect();
    Ok(EquiangularBasis {
        active: active.to_vec(),
        signs: signs.to_vec(),
        a,
        w,
        u,
        inner,
    })
}

/// Outcome of a join search.
#[derive(Debug, Clone, PartialEq)]
pub struct Join {
    pub gamma: f64,
    pub index: usize,
    pub sign: f64,
    /// Other candidates reaching the same step length within tolerance.
    pub tied: Vec<usize>,
}

pub(crate) fn tie_tolerance(c_max: f64) -> f64 {
    1e-12 * c_max.abs().max(1.0)
}

/// Smallest admissible ratio `num/den` with `den > 0`.
///
/// A numerator at or below the tie tolerance is a variable that already sits at
/// the maximal correlation and joins immediately, unless it was removed at the
/// current vertex.
pub(crate) fn admissible_ratio(num: f64, den: f64, tol: f64, fresh: bool) -> Option<f64> {
    if !(den > 0.0) {
        return None;
    }
    if num <= tol {
        return if fresh { None } else { Some(0.0) };
    }
    Some(num / den)
}

pub(crate) fn select_join<I>(options: I, tol: f64) -> Result<Join>
where
    I: IntoIterator<Item = (usize, f64, f64)>,
{
    let all: Vec<(usize, f64, f64)> = options.into_iter().collect();
    let best = all
        .iter()
        .copied()
        .min_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)))
        .ok_or(LarsError::NoPositiveCandidate)?;
    let mut tied: Vec<usize> = all
        .iter()
        .filter(|(j, g, _)| *j != best.0 && *g <= best.1 + tol)
        .map(|(j, _, _)| *j)
        .collect();
    tied.sort_unstable();
    tied.dedup();
    Ok(Join {
        gamma: best.1,
        index: best.0,
        sign: best.2,
        tied,
    })
}

/// LARS join rule: the smallest positive step at which an inactive
/// correlation catches up with the shrinking maximal one.
///
/// `a_norm` is `A_A` and `inner` holds `X'u_A`. Variables in `fresh` were
/// removed at the current vertex and cannot rejoin with a zero step.
pub fn next_join(
    correlations: ArrayView1<'_, f64>,
    c_max: f64,
    a_norm: f64,
    inner: ArrayView1<'_, f64>,
    candidates: &[usize],
    fresh: &[usize],
) -> Result<Join> {
    let tol = tie_tolerance(c_max);
    let options = candidates.iter().flat_map(|&j| {
        let c = correlations[j];
        let a = inner[j];
        let f = fresh.contains(&j);
        [
            admissible_ratio(c_max - c, a_norm - a, tol, f).map(|g| (j, g, 1.0)),
            admissible_ratio(c_max + c, a_norm + a, tol, f).map(|g| (j, g, -1.0)),
        ]
        .into_iter()
        .flatten()
    });
    select_join(options, tol)
}

/// Step that lands on the least squares fit of the active set.
pub fn final_gamma(c_max: f64, a: f64) -> f64 {
    if c_max == 0.0 {
        0.0
    } else {
        c_max / a
    }
}

/// Correlation and inner-product evaluation, through the Gram matrix when it
/// is cheaper than touching the design.
enum Workspace {
    Gram { g: Array2<f64>, xty: Array1<f64> },
    Direct,
}

impl Workspace {
    fn new(design: &StandardizedDesign, use_gram: bool) -> Self {
        if use_gram {
            let x = design.columns();
            Workspace::Gram {
                g: x.t().dot(&x),
                xty: x.t().dot(&design.response()),
            }
        } else {
            Workspace::Direct
        }
    }

    fn correlations(&self, design: &StandardizedDesign, beta: &Array1<f64>) -> Array1<f64> {
        match self {
            Workspace::Gram { g, xty } => {
                let mut c = xty.clone();
                for (j, &b) in beta.iter().enumerate() {
                    if b != 0.0 {
                        c.scaled_add(-b, &g.row(j));
                    }
                }
                c
            }
            Workspace::Direct => {
                let r = residual(design, beta);
                design.columns().t().dot(&r)
            }
        }
    }

    fn inner(&self, design: &StandardizedDesign, active: &[usize], d: &[f64]) -> Array1<f64> {
        match self {
            Workspace::Gram { g, .. } => {
                let mut a = Array1::zeros(g.nrows());
                for (&j, &dj) in active.iter().zip(d) {
                    a.scaled_add(dj, &g.row(j));
                }
                a
            }
            Workspace::Direct => {
                let mut u = Array1::zeros(design.n());
                for (&j, &dj) in active.iter().zip(d) {
                    u.scaled_add(dj, &design.column(j));
                }
                design.columns().t().dot(&u)
            }
        }
    }

    fn cross(&self, design: &StandardizedDesign, active: &[usize], j: usize) -> (Vec<f64>, f64) {
        match self {
            Workspace::Gram { g, .. } => (active.iter().map(|&i| g[[i, j]]).collect(), g[[j, j]]),
            Workspace::Direct => {
                let xj = design.column(j);
                (
                    active.iter().map(|&i| design.column(i).dot(&xj)).collect(),
                    xj.dot(&xj),
                )
            }
        }
    }

    fn active_gram(&self, design: &StandardizedDesign, active: &[usize]) -> Array2<f64> {
        let k = active.len();
        match self {
            Workspace::Gram { g, .. } => {
                Array2::from_shape_fn((k, k), |(p, q)| g[[active[p], active[q]]])
            }
            Workspace::Direct => Array2::from_shape_fn((k, k), |(p, q)| {
                design.column(active[p]).dot(&design.column(active[q]))
            }),
        }
    }

    fn rss(
        &self,
        design: &StandardizedDesign,
        yy: f64,
        beta: &Array1<f64>,
        c: &Array1<f64>,
    ) -> f64 {
        match self {
            Workspace::Gram { xty, .. } => {
                let v: f64 = (0..beta.len()).map(|j| beta[j] * (xty[j] + c[j])).sum();
                (yy - v).max(0.0)
            }
            Workspace::Direct => {
                let r = residual(design, beta);
                r.dot(&r)
            }
        }
    }
}

fn residual(design: &StandardizedDesign, beta: &Array1<f64>) -> Array1<f64> {
    let mut r = design.response().to_owned();
    for (j, &b) in beta.iter().enumerate() {
        if b != 0.0 {
            r.scaled_add(-b, &design.column(j));
        }
    }
    r
}

enum Attempt {
    Done(Path),
    Tie,
}

/// Traces the full coefficient path of `variant` on `design`.
pub fn fit_path(
    design: &StandardizedDesign,
    variant: Variant,
    options: &FitOptions,
) -> Result<Path> {
    if variant == Variant::ForwardSelection {
        return Err(LarsError::InvalidArgument(
            "forward selection is not an equiangular path; use oracles::forward_selection".into(),
        ));
    }
    let Some(seed) = options.jitter_seed else {
        return match fit_once(design, variant, options, false)? {
            Attempt::Done(path) => Ok(path),
            Attempt::Tie => unreachable!("ties are only reported when jitter is enabled"),
        };
    };
    const RESTARTS: usize = 8;
    let y = design.response();
    let scale = 1e-9 * y.dot(&y).sqrt().max(f64::MIN_POSITIVE);
    let mut current = design.clone();
    for restart in 0..=RESTARTS {
        let last = restart == RESTARTS;
        if let Attempt::Done(mut path) = fit_once(&current, variant, options, !last)? {
            if restart > 0 {
                path.warnings
                    .push(PathWarning::Jittered { restarts: restart });
                path.jittered_response = Some(current.response().to_owned());
            }
            return Ok(path);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(restart as u64);
        let mut noisy = y.to_owned();
        noisy.mapv_inplace(|v| v + scale * rng.random_range(-1.0..1.0));
        if design.is_centered() {
            let mean = noisy.mean().unwrap_or(0.0);
            noisy.mapv_inplace(|v| v - mean);
        }
        current = design.with_working_response(noisy);
    }
    unreachable!("the last attempt never reports a tie")
}

struct State {
    beta: Array1<f64>,
    active: Vec<usize>,
    signs: Vec<f64>,
    factor: CholeskyFactor,
}

impl State {
    fn add(
        &mut self,
        ws: &Workspace,
        design: &StandardizedDesign,
        j: usize,
        sign: f64,
    ) -> Result<()> {
        let (cross, norm_sq) = ws.cross(design, &self.active, j);
        self.factor.append_column(&cross, norm_sq)?;
        self.active.push(j);
        self.signs.push(sign);
        Ok(())
    }

    fn remove(
        &mut self,
        ws: &Workspace,
        design: &StandardizedDesign,
        position: usize,
    ) -> Result<()> {
        self.factor.drop_column(position)?;
        self.active.remove(position);
        self.signs.remove(position);
        if !self.active.is_empty() {
            let g = ws.active_gram(design, &self.active);
            self.factor.refresh(g.view())?;
        }
        Ok(())
    }
}

fn fit_once(
    design: &StandardizedDesign,
    variant: Variant,
    options: &FitOptions,
    report_ties: bool,
) -> Result<Attempt> {
    let (n, m) = (design.n(), design.m());
    let use_gram = options.use_gram.unwrap_or(m <= n);
    let ws = Workspace::new(design, use_gram);
    let max_steps = options.max_steps.unwrap_or(8 * m.max(1));
    let rank_limit = design.rank_limit();
    let y = design.response();
    let yy = y.dot(&y);
    let positive = variant.positive();

    let mut state = State {
        beta: Array1::zeros(m),
        active: Vec::new(),
        signs: Vec::new(),
        factor: CholeskyFactor::new(),
    };
    let mut path = Path {
        variant,
        steps: Vec::new(),
        warnings: Vec::new(),
        n,
        m,
        jittered_response: None,
    };

    let c = ws.correlations(design, &state.beta);
    let score = |v: f64| if positive { v } else { v.abs() };
    let c0 = c
        .iter()
        .copied()
        .map(score)
        .fold(f64::NEG_INFINITY, f64::max);
    let origin = |action, c_max| PathStep {
        step: 0,
        action,
        active: Vec::new(),
        signs: Vec::new(),
        projected_out: Vec::new(),
        gamma: 0.0,
        gamma_bar: 0.0,
        c_max,
        a: 0.0,
        beta: Array1::zeros(m),
        rss: yy,
        l1_norm: 0.0,
    };
    if m == 0 || rank_limit == 0 || !(c0 > 1e-12 * yy.sqrt()) {
        path.steps.push(origin(Action::Final, c0.max(0.0)));
        return Ok(Attempt::Done(path));
    }
    let tol0 = tie_tolerance(c0);
    let leaders: Vec<usize> = (0..m).filter(|&j| score(c[j]) >= c0 - tol0).collect();
    let first = leaders[0];
    if leaders.len() > 1 {
        if report_ties {
            return Ok(Attempt::Tie);
        }
        path.warnings.push(PathWarning::Tie {
            step: 0,
            candidates: leaders.clone(),
        });
    }
    let s0 = if positive { 1.0 } else { c[first].signum() };
    state.add(&ws, design, first, s0)?;
    let mut vertex0 = origin(Action::Add(first), c0);
    vertex0.active = state.active.clone();
    vertex0.signs = state.signs.clone();
    path.steps.push(vertex0);

    let mut fresh: Vec<usize> = Vec::new();
    let mut zero_run = 0usize;
    loop {
        let step = path.steps.len();
        if options.step_limit.is_some_and(|limit| step > limit) {
            break;
        }
        if step > max_steps {
            return Err(LarsError::MaxStepsExceeded(max_steps));
        }
        let c = ws.correlations(design, &state.beta);
        let c_max = state
            .active
            .iter()
            .zip(&state.signs)
            .map(|(&j, &s)| s * c[j])
            .fold(f64::NEG_INFINITY, f64::max);
        if !(c_max > 1e-10 * c0) {
            break;
        }
        let (a_norm, z) = direction(&state.factor, &state.signs)?;
        let d: Vec<f64> = z.iter().map(|v| a_norm * v).collect();
        let inner = ws.inner(design, &state.active, &d);
        let gamma_bar = final_gamma(c_max, a_norm);
        let candidates: Vec<usize> = if state.active.len() < rank_limit {
            (0..m).filter(|j| !state.active.contains(j)).collect()
        } else {
            Vec::new()
        };
        let join = if candidates.is_empty() {
            None
        } else {
            let found = if positive {
                variants::positive_lasso_step(
                    c.view(),
                    c_max,
                    a_norm,
                    inner.view(),
                    &candidates,
                    &fresh,
                )
            } else {
                next_join(c.view(), c_max, a_norm, inner.view(), &candidates, &fresh)
            };
            match found {
                Ok(join) => Some(join),
                Err(LarsError::NoPositiveCandidate) => None,
                Err(e) => return Err(e),
            }
        };
        let tol = tie_tolerance(c_max);
        let (mut action, mut gamma) = match &join {
            Some(j) if j.gamma < gamma_bar - tol => (Action::Add(j.index), j.gamma),
            _ => (Action::Final, gamma_bar),
        };
        let mut drop_position = None;
        if variant.drops_at_zero() {
            let beta_active: Vec<f64> = state.active.iter().map(|&j| state.beta[j]).collect();
            let drop = variants::lasso_drop_candidate(&beta_active, &d);
            if let Some(choice) = variants::apply_lasso_modification(gamma, drop, tol) {
                drop_position = Some(choice.position);
                action = Action::Drop(state.active[choice.position]);
                gamma = choice.gamma;
            }
        }

        for (&j, &dj) in state.active.iter().zip(&d) {
            state.beta[j] += gamma * dj;
        }
        fresh.clear();
        let mut projected_out = Vec::new();
        match action {
            Action::Add(j) => {
                let join = join.expect("an add always comes from a join");
                if !join.tied.is_empty() {
                    if report_ties {
                        return Ok(Attempt::Tie);
                    }
                    let mut candidates = join.tied.clone();
                    candidates.push(j);
                    candidates.sort_unstable();
                    path.warnings.push(PathWarning::Tie { step, candidates });
                }
                let sign = if positive { 1.0 } else { join.sign };
                state.add(&ws, design, j, sign)?;
                if variant == Variant::Stagewise {
                    if let Some(face) = variants::stagewise_direction(&state.factor, &state.signs)?
                    {
                        let dropped = face.dropped();
                        for &p in dropped.iter().rev() {
                            let var = state.active[p];
                            projected_out.push(var);
                            state.remove(&ws, design, p)?;
                        }
                        projected_out.reverse();
                        fresh.extend(&projected_out);
                    }
                }
            }
            Action::Drop(j) => {
                state.beta[j] = 0.0;
                state.remove(&ws, design, drop_position.expect("drop position recorded"))?;
                fresh.push(j);
            }
            Action::Final => {}
        }

        let c_after = ws.correlations(design, &state.beta);
        let rss = ws.rss(design, yy, &state.beta, &c_after);
        let l1_norm = state.beta.iter().map(|v| v.abs()).sum();
        path.steps.push(PathStep {
            step,
            action,
            active: state.active.clone(),
            signs: state.signs.clone(),
            projected_out,
            gamma,
            gamma_bar,
            c_max,
            a: a_norm,
            beta: state.beta.clone(),
            rss,
            l1_norm,
        });

        if gamma <= tol {
            zero_run += 1;
            if zero_run >= 2 {
                return Err(LarsError::StalledPath { step });
            }
        } else {
            zero_run = 0;
        }
        if action == Action::Final {
            break;
        }
    }
    Ok(Attempt::Done(path))
}

/// Coefficients at L1 norm `t`.
///
/// Coefficients move linearly within a segment, so `‖β‖₁` is piecewise linear
/// there with kinks where a coordinate crosses zero. The first point along the
/// path with norm `t` is returned.
pub fn interpolate(path: &Path, t: f64) -> Result<Array1<f64>> {
    let t_max = path.t_max();
    if !(t >= 0.0 && t <= t_max * (1.0 + 1e-12)) {
        return Err(LarsError::TOutOfRange { t, t_max });
    }
    let l1 = |b: &Array1<f64>| b.iter().map(|v| v.abs()).sum::<f64>();
    if path.steps.len() == 1 || t <= path.steps[0].l1_norm {
        return Ok(path.steps[0].beta.clone());
    }
    for pair in path.steps.windows(2) {
        let (lo, hi) = (&pair[0].beta, &pair[1].beta);
        let delta = hi - lo;
        let mut knots: Vec<f64> = lo
            .iter()
            .zip(delta.iter())
            .filter(|(_, d)| **d != 0.0)
            .map(|(b, d)| -b / d)
            .filter(|f| *f > 0.0 && *f < 1.0)
            .collect();
        knots.push(0.0);
        knots.push(1.0);
        knots.sort_by(f64::total_cmp);
        let at = |f: f64| lo + &(&delta * f);
        for w in knots.windows(2) {
            let (f0, f1) = (w[0], w[1]);
            let (t0, t1) = (l1(&at(f0)), l1(&at(f1)));
            if (t0 - t) * (t1 - t) <= 0.0 {
                if t1 == t0 {
                    return Ok(at(f1));
                }
                let f = f0 + (f1 - f0) * (t - t0) / (t1 - t0);
                return Ok(if f1 == 1.0 && t == t1 {
                    hi.clone()
                } else {
                    at(f)
                });
            }
        }
    }
    let best = path
        .steps
        .iter()
        .min_by(|a, b| (a.l1_norm - t).abs().total_cmp(&(b.l1_norm - t).abs()))
        .expect("nonempty path");
    Ok(best.beta.clone())
}
