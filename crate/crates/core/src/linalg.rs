//! Dense kernel for active-set Gram matrices.
//!
//! The factor is stored column by column: column `j` of the upper-triangular
//! `R` holds rows `0..=j`. Appending a variable pushes one column, and dropping
//! one removes a column and re-triangularizes the trailing block with Givens
//! rotations, so both operations stay `O(k²)`.

use ndarray::{Array2, ArrayView2};

use crate::error::{LarsError, Result};

/// A pivot is degenerate when its square falls below this fraction of the
/// column's squared norm.
pub const DEGENERACY_RATIO: f64 = 1e-12;

/// Relative Frobenius residual above which a downdated factor is rebuilt.
pub const REFACTOR_THRESHOLD: f64 = 1e-8;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Upper-triangular Cholesky factor `R` with `R'R = G`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CholeskyFactor {
    cols: Vec<Vec<f64>>,
}

impl CholeskyFactor {
    pub fn new() -> Self {
        Self::default()
    }

    /// Factor a full symmetric positive definite matrix by successive appends.
    pub fn from_gram(gram: ArrayView2<'_, f64>) -> Result<Self> {
        let k = gram.nrows();
        if gram.ncols() != k {
            return Err(LarsError::DimensionMismatch {
                what: "gram matrix columns",
                expected: k,
                found: gram.ncols(),
            });
        }
        let mut factor = Self::new();
        for j in 0..k {
            let cross: Vec<f64> = (0..j).map(|i| gram[[i, j]]).collect();
            factor.append_column(&cross, gram[[j, j]])?;
        }
        Ok(factor)
    }

    /// Number of variables `k` in the factored Gram matrix.
    pub fn dim(&self) -> usize {
        self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cols.is_empty()
    }

    /// Entry `R[i, j]`; zero below the diagonal.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i <= j {
            self.cols[j][i]
        } else {
            0.0
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.cols.iter().enumerate().map(|(j, c)| c[j]).collect()
    }

    /// Dense copy of `R`.
    pub fn upper(&self) -> Array2<f64> {
        let k = self.dim();
        Array2::from_shape_fn((k, k), |(i, j)| self.get(i, j))
    }

    /// Reconstructs `R'R`.
    pub fn gram(&self) -> Array2<f64> {
        let k = self.dim();
        let mut g = Array2::zeros((k, k));
        for i in 0..k {
            for j in i..k {
                let len = i + 1;
                let v = dot(&self.cols[i][..len], &self.cols[j][..len]);
                g[[i, j]] = v;
                g[[j, i]] = v;
            }
        }
        g
    }

    /// Relative Frobenius error `‖R'R − G‖ / ‖G‖`.
    pub fn relative_residual(&self, gram: ArrayView2<'_, f64>) -> f64 {
        let rebuilt = self.gram();
        if rebuilt.dim() != gram.dim() {
            return f64::INFINITY;
        }
        let diff: f64 = rebuilt
            .iter()
            .zip(gram.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let norm: f64 = gram.iter().map(|v| v * v).sum();
        if norm == 0.0 {
            diff.sqrt()
        } else {
            (diff / norm).sqrt()
        }
    }

    /// Appends a variable whose inner products with the current variables are
    /// `cross` and whose squared norm is `norm_sq`.
    pub fn append_column(&mut self, cross: &[f64], norm_sq: f64) -> Result<()> {
        let k = self.dim();
        if cross.len() != k {
            return Err(LarsError::DimensionMismatch {
                what: "cross products",
                expected: k,
                found: cross.len(),
            });
        }
        if !(norm_sq > 0.0) {
            return Err(LarsError::DegenerateColumn { position: k });
        }
        let mut col = self.solve_lower(cross)?;
        let pivot_sq = norm_sq - dot(&col, &col);
        if !(pivot_sq > DEGENERACY_RATIO * norm_sq) {
            return Err(LarsError::DegenerateColumn { position: k });
        }
        col.push(pivot_sq.sqrt());
        self.cols.push(col);
        Ok(())
    }

    /// Removes the variable at `position`; the remaining variables keep their
    /// relative order.
    pub fn drop_column(&mut self, position: usize) -> Result<()> {
        let k = self.dim();
        if position >= k {
            return Err(LarsError::IndexOutOfRange {
                index: position,
                len: k,
            });
        }
        self.cols.remove(position);
        // Columns from `position` on now carry one subdiagonal entry each.
        for j in position..k - 1 {
            let a = self.cols[j][j];
            let b = self.cols[j][j + 1];
            let r = a.hypot(b);
            let (c, s) = if r == 0.0 { (1.0, 0.0) } else { (a / r, b / r) };
            self.cols[j][j] = r;
            self.cols[j].truncate(j + 1);
            for col in self.cols.iter_mut().skip(j + 1) {
                let x = col[j];
                let y = col[j + 1];
                col[j] = c * x + s * y;
                col[j + 1] = -s * x + c * y;
            }
        }
        Ok(())
    }

    /// Rebuilds the factor from `gram` when the maintained one has drifted past
    /// [`REFACTOR_THRESHOLD`]. Returns whether a rebuild happened.
    pub fn refresh(&mut self, gram: ArrayView2<'_, f64>) -> Result<bool> {
        if self.relative_residual(gram) > REFACTOR_THRESHOLD {
            *self = Self::from_gram(gram)?;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    /// Solves `R' x = rhs`.
    pub fn solve_lower(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let k = self.dim();
        if rhs.len() != k {
            return Err(LarsError::DimensionMismatch {
                what: "right-hand side",
                expected: k,
                found: rhs.len(),
            });
        }
        let mut x = Vec::with_capacity(k);
        for (i, col) in self.cols.iter().enumerate() {
            let v = (rhs[i] - dot(&col[..i], &x)) / col[i];
            x.push(v);
        }
        Ok(x)
    }

    /// Solves `R x = rhs`.
    pub fn solve_upper(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let k = self.dim();
        if rhs.len() != k {
            return Err(LarsError::DimensionMismatch {
                what: "right-hand side",
                expected: k,
                found: rhs.len(),
            });
        }
        let mut b = rhs.to_vec();
        for j in (0..k).rev() {
            let col = &self.cols[j];
            let xj = b[j] / col[j];
            b[j] = xj;
            for (bi, rij) in b[..j].iter_mut().zip(&col[..j]) {
                *bi -= xj * rij;
            }
        }
        Ok(b)
    }

    /// Solves `G x = rhs` with `G = R'R`.
    pub fn solve_gram(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let y = self.solve_lower(rhs)?;
        self.solve_upper(&y)
    }
}

/// Face of the signed active cone selected by the Lawson–Hanson iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct NnlsFace {
    /// Equiangular weights `w_B` in factor order, zero outside the face.
    pub weights: Vec<f64>,
    /// Factor positions that stay in the face, ascending.
    pub retained: Vec<usize>,
    /// `A_B` for the retained set.
    pub a: f64,
}

impl NnlsFace {
    pub fn dropped(&self) -> Vec<usize> {
        (0..self.weights.len())
            .filter(|p| !self.retained.contains(p))
            .collect()
    }
}

/// Projects the equiangular vector of the signed active set into the convex
/// cone of its signed columns.
///
/// `factor` holds the unsigned Gram matrix of the active columns and `signs`
/// their correlation signs. Because `X_A' u_A = A_A 1`, the projection only
/// depends on the signed Gram matrix: it solves `min ½ p' S G S p − 1'p` over
/// `p ≥ 0`, warm-started from the longest leading subset whose unconstrained
/// solution is positive.
pub fn nnls_inner_loop(factor: &CholeskyFactor, signs: &[f64]) -> Result<NnlsFace> {
    let k = factor.dim();
    if k == 0 {
        return Err(LarsError::EmptyFace);
    }
    if signs.len() != k {
        return Err(LarsError::DimensionMismatch {
            what: "signs",
            expected: k,
            found: signs.len(),
        });
    }
    let g = factor.gram();
    let gs = Array2::from_shape_fn((k, k), |(i, j)| signs[i] * signs[j] * g[[i, j]]);

    let solve_face = |set: &[usize]| -> Result<Vec<f64>> {
        let sub = Array2::from_shape_fn((set.len(), set.len()), |(i, j)| gs[[set[i], set[j]]]);
        let f = CholeskyFactor::from_gram(sub.view())?;
        f.solve_gram(&vec![1.0; set.len()])
    };

    let mut x = vec![0.0; k];
    let mut passive: Vec<usize> = Vec::new();
    for len in (1..=k).rev() {
        let set: Vec<usize> = (0..len).collect();
        let p = solve_face(&set)?;
        if p.iter().all(|&v| v > 0.0) {
            for (&j, v) in set.iter().zip(p) {
                x[j] = v;
            }
            passive = set;
            break;
        }
    }
    if passive.is_empty() {
        return Err(LarsError::EmptyFace);
    }

    let guard = 4 * k + 16;
    let mut iterations = 0;
    'outer: loop {
        loop {
            iterations += 1;
            if iterations > guard {
                break 'outer;
            }
            let z = solve_face(&passive)?;
            if z.iter().all(|&v| v > 0.0) {
                x.iter_mut().for_each(|v| *v = 0.0);
                for (&j, v) in passive.iter().zip(z) {
                    x[j] = v;
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            let mut blocking = passive[0];
            for (&j, &zj) in passive.iter().zip(&z) {
                if zj <= 0.0 {
                    let step = x[j] / (x[j] - zj);
                    if step < alpha {
                        alpha = step;
                        blocking = j;
                    }
                }
            }
            for (&j, &zj) in passive.iter().zip(&z) {
                x[j] += alpha * (zj - x[j]);
            }
            let scale = passive.iter().map(|&j| x[j].abs()).fold(0.0, f64::max);
            x[blocking] = 0.0;
            for &j in &passive {
                if x[j] <= 1e-14 * scale {
                    x[j] = 0.0;
                }
            }
            passive.retain(|&j| x[j] > 0.0);
            if passive.is_empty() {
                return Err(LarsError::EmptyFace);
            }
        }
        let mut best: Option<(usize, f64)> = None;
        for j in (0..k).filter(|j| !passive.contains(j)) {
            let grad = 1.0 - (0..k).map(|i| gs[[j, i]] * x[i]).sum::<f64>();
            if grad > 1e-12 && best.is_none_or(|(_, g)| grad > g) {
                best = Some((j, grad));
            }
        }
        match best {
            Some((j, _)) => {
                passive.push(j);
                passive.sort_unstable();
            }
            None => break,
        }
    }

    passive.sort_unstable();
    let total: f64 = passive.iter().map(|&j| x[j]).sum();
    if !(total > 0.0) {
        return Err(LarsError::EmptyFace);
    }
    let a = total.powf(-0.5);
    let weights = (0..k)
        .map(|j| if passive.contains(&j) { a * x[j] } else { 0.0 })
        .collect();
    Ok(NnlsFace {
        weights,
        retained: passive,
        a,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_columns(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Array2<f64> {
        Array2::from_shape_fn((n, k), |_| rng.random::<f64>() - 0.5)
    }

    fn gram_of(x: &Array2<f64>) -> Array2<f64> {
        x.t().dot(x)
    }

    fn submatrix(g: &Array2<f64>, idx: &[usize]) -> Array2<f64> {
        Array2::from_shape_fn((idx.len(), idx.len()), |(i, j)| g[[idx[i], idx[j]]])
    }

    #[test]
    fn single_unit_column() {
        let mut f = CholeskyFactor::new();
        f.append_column(&[], 1.0).unwrap();
        assert_eq!(f.upper(), array![[1.0]]);
    }

    #[test]
    fn orthonormal_pair_gives_identity() {
        let mut f = CholeskyFactor::new();
        f.append_column(&[], 1.0).unwrap();
        f.append_column(&[0.0], 1.0).unwrap();
        assert_eq!(f.upper(), Array2::<f64>::eye(2));
    }

    #[test]
    fn correlated_pair_matches_hand_factor() {
        let mut f = CholeskyFactor::new();
        f.append_column(&[], 1.0).unwrap();
        f.append_column(&[0.5], 1.0).unwrap();
        let r = f.upper();
        assert!((r[[0, 0]] - 1.0).abs() < 1e-15);
        assert!((r[[0, 1]] - 0.5).abs() < 1e-15);
        assert_eq!(r[[1, 0]], 0.0);
        assert!((r[[1, 1]] - 0.75f64.sqrt()).abs() < 1e-15);
        let g = array![[1.0, 0.5], [0.5, 1.0]];
        assert!(f.relative_residual(g.view()) < 1e-15);
    }

    #[test]
    fn dependent_column_is_degenerate() {
        let mut f = CholeskyFactor::new();
        f.append_column(&[], 1.0).unwrap();
        let err = f.append_column(&[1.0], 1.0).unwrap_err();
        assert_eq!(err, LarsError::DegenerateColumn { position: 1 });
        assert_eq!(f.dim(), 1);
    }

    #[test]
    fn append_then_drop_restores_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = random_columns(&mut rng, 20, 5);
        let g = gram_of(&x);
        let mut f = CholeskyFactor::from_gram(submatrix(&g, &[0, 1, 2, 3]).view()).unwrap();
        let before = f.clone();
        f.append_column(&[g[[0, 4]], g[[1, 4]], g[[2, 4]], g[[3, 4]]], g[[4, 4]])
            .unwrap();
        f.drop_column(4).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((f.get(i, j) - before.get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn drop_from_identity() {
        let mut f = CholeskyFactor::from_gram(Array2::eye(3).view()).unwrap();
        f.drop_column(1).unwrap();
        assert_eq!(f.upper(), Array2::<f64>::eye(2));
    }

    #[test]
    fn drop_middle_matches_fresh_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = random_columns(&mut rng, 30, 5);
        let g = gram_of(&x);
        let mut f = CholeskyFactor::from_gram(g.view()).unwrap();
        f.drop_column(2).unwrap();
        let fresh = CholeskyFactor::from_gram(submatrix(&g, &[0, 1, 3, 4]).view()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((f.get(i, j) - fresh.get(i, j)).abs() < 1e-10);
            }
        }
        assert!(f.diagonal().iter().all(|&d| d > 0.0));
    }

    #[test]
    fn drop_out_of_range() {
        let mut f = CholeskyFactor::from_gram(Array2::eye(2).view()).unwrap();
        assert_eq!(
            f.drop_column(2).unwrap_err(),
            LarsError::IndexOutOfRange { index: 2, len: 2 }
        );
    }

    #[test]
    fn solve_identity_and_closed_form_pair() {
        let f = CholeskyFactor::from_gram(Array2::eye(3).view()).unwrap();
        assert_eq!(f.solve_gram(&[1.0, 1.0, 1.0]).unwrap(), vec![1.0, 1.0, 1.0]);

        let rho = 0.3;
        let g = array![[1.0, rho], [rho, 1.0]];
        let f = CholeskyFactor::from_gram(g.view()).unwrap();
        let x = f.solve_gram(&[1.0, 1.0]).unwrap();
        for v in &x {
            assert!((v - 1.0 / (1.0 + rho)).abs() < 1e-14);
        }
        let back = g.dot(&ndarray::Array1::from(x));
        assert!(back.iter().all(|v| (v - 1.0).abs() < 1e-10));
    }

    #[test]
    fn solve_dimension_mismatch() {
        let f = CholeskyFactor::from_gram(Array2::eye(2).view()).unwrap();
        assert!(matches!(
            f.solve_gram(&[1.0]),
            Err(LarsError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn nnls_interior_point_is_unchanged() {
        let g = array![[1.0, 0.2, 0.1], [0.2, 1.0, 0.3], [0.1, 0.3, 1.0]];
        let f = CholeskyFactor::from_gram(g.view()).unwrap();
        let signs = [1.0, 1.0, 1.0];
        let face = nnls_inner_loop(&f, &signs).unwrap();
        assert_eq!(face.retained, vec![0, 1, 2]);
        let z = f.solve_gram(&signs).unwrap();
        let a = 1.0 / z.iter().sum::<f64>().sqrt();
        for (w, zj) in face.weights.iter().zip(&z) {
            assert!((w - a * zj).abs() < 1e-14);
        }
    }

    /// Brute force: the nearest point of the cone to `u_A` over every face.
    fn brute_force_face(g: &Array2<f64>, signs: &[f64]) -> Vec<usize> {
        let k = signs.len();
        let gs = Array2::from_shape_fn((k, k), |(i, j)| signs[i] * signs[j] * g[[i, j]]);
        let full = CholeskyFactor::from_gram(gs.view()).unwrap();
        let z = full.solve_gram(&vec![1.0; k]).unwrap();
        let a_full = 1.0 / z.iter().sum::<f64>().sqrt();
        // ‖u_A − v‖² = 1 − 2 A_A 1'p + p' Gs p for v = X_A p.
        let mut best = (f64::INFINITY, Vec::new());
        for mask in 1u32..(1 << k) {
            let set: Vec<usize> = (0..k).filter(|j| mask & (1 << j) != 0).collect();
            let sub = submatrix(&gs, &set);
            let f = CholeskyFactor::from_gram(sub.view()).unwrap();
            let p = f.solve_gram(&vec![a_full; set.len()]).unwrap();
            if p.iter().any(|&v| v < 0.0) {
                continue;
            }
            let quad: f64 = (0..set.len())
                .map(|i| {
                    (0..set.len())
                        .map(|j| p[i] * sub[[i, j]] * p[j])
                        .sum::<f64>()
                })
                .sum();
            let dist = 1.0 - 2.0 * a_full * p.iter().sum::<f64>() + quad;
            if dist < best.0 - 1e-14 {
                best = (dist, set);
            }
        }
        best.1
    }

    #[test]
    fn nnls_two_variable_cone_picks_nearest_face() {
        // Correlated pair with unequal norms: the second weight turns negative.
        let g = array![[1.0, 1.2], [1.2, 2.0]];
        let f = CholeskyFactor::from_gram(g.view()).unwrap();
        let signs = [1.0, 1.0];
        let z = f.solve_gram(&signs).unwrap();
        assert!(z[1] < 0.0, "second weight should be negative: {z:?}");
        let face = nnls_inner_loop(&f, &signs).unwrap();
        assert_eq!(face.retained, brute_force_face(&g, &signs));
        assert_eq!(face.retained.len(), 1);
    }

    #[test]
    fn nnls_matches_brute_force_on_random_cones() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut nontrivial = 0;
        for _ in 0..300 {
            let k = rng.random_range(2..=6);
            // Columns sharing a common factor so that negative weights are common.
            let common: Vec<f64> = (0..12).map(|_| rng.random::<f64>() - 0.5).collect();
            let x = Array2::from_shape_fn((12, k), |(i, _)| {
                common[i] + 0.4 * (rng.random::<f64>() - 0.5)
            });
            let g = gram_of(&x);
            let signs: Vec<f64> = (0..k)
                .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                .collect();
            let f = CholeskyFactor::from_gram(g.view()).unwrap();
            let face = nnls_inner_loop(&f, &signs).unwrap();
            if face.retained.len() < k {
                nontrivial += 1;
            }
            assert_eq!(face.retained, brute_force_face(&g, &signs));
            assert!(face.retained.iter().all(|&j| face.weights[j] > 0.0));
        }
        assert!(
            nontrivial > 30,
            "only {nontrivial} projections dropped something"
        );
    }

    #[test]
    fn nnls_face_is_equiangular_and_satisfies_constraint_three() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let k = rng.random_range(2..=7);
            let n = 15;
            let common: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            let x = Array2::from_shape_fn((n, k), |(i, _)| {
                common[i] + 0.5 * (rng.random::<f64>() - 0.5)
            });
            let signs: Vec<f64> = (0..k)
                .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                .collect();
            let f = CholeskyFactor::from_gram(gram_of(&x).view()).unwrap();
            let face = nnls_inner_loop(&f, &signs).unwrap();
            // v_B = A_B u_B with u_B = Σ s_j x_j w_j.
            let mut u = ndarray::Array1::<f64>::zeros(n);
            for &j in &face.retained {
                u.scaled_add(signs[j] * face.weights[j], &x.column(j));
            }
            assert!((u.dot(&u) - 1.0).abs() < 1e-10);
            for j in 0..k {
                let inner = signs[j] * x.column(j).dot(&u) * face.a;
                if face.retained.contains(&j) {
                    assert!((inner - face.a * face.a).abs() < 1e-10);
                } else {
                    assert!(inner >= face.a * face.a - 1e-10);
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn maintained_factor_tracks_fresh_factorization(
            seed in any::<u64>(),
            ops in proptest::collection::vec(any::<u8>(), 1..80),
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pool = 30;
            let x = random_columns(&mut rng, 60, pool);
            let g = gram_of(&x);
            let mut active: Vec<usize> = Vec::new();
            let mut f = CholeskyFactor::new();
            for op in ops {
                let inactive: Vec<usize> = (0..pool).filter(|j| !active.contains(j)).collect();
                let add = active.is_empty() || (op % 3 != 0 && !inactive.is_empty());
                if add {
                    let j = inactive[op as usize % inactive.len()];
                    let cross: Vec<f64> = active.iter().map(|&i| g[[i, j]]).collect();
                    f.append_column(&cross, g[[j, j]]).unwrap();
                    active.push(j);
                } else {
                    let p = op as usize % active.len();
                    f.drop_column(p).unwrap();
                    active.remove(p);
                }
                let sub = submatrix(&g, &active);
                prop_assert!(f.relative_residual(sub.view()) < 1e-9);
                prop_assert!(f.diagonal().iter().all(|&d| d > 0.0));
            }
        }
    }
}
