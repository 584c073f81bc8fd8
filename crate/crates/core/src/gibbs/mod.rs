//! Gibbs distributions over score vectors and the samplers that draw from them.
//!
//! The Gibbs distribution of a score vector `s` is `exp(s) / ‖exp(s)‖₁`.
//! Scores are either kept explicitly ([`ScoreState`], updated each iteration
//! with a row and a column of the matrix) or evaluated on demand from a
//! cumulative strategy ([`ScoreOracle`]) by the rejection samplers.

mod rejection;

use rand::Rng;

use crate::error::{Error, Result};
use crate::game::PayoffMatrix;
use crate::tree::{SparseWeights, WeightTree};

pub use rejection::{
    exact_gibbs_sample, ramp, rejection_gibbs, two_regime_gibbs, two_regime_yields, BranchYields,
    GibbsSample, ROUND_CAP,
};

/// `exp(s) / ‖exp(s)‖₁`, computed after subtracting `max s`.
pub fn gibbs_exact(scores: &[f64]) -> Result<Vec<f64>> {
    if scores.is_empty() {
        return Err(Error::EmptyScores);
    }
    if let Some(&bad) = scores.iter().find(|s| !s.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite score {bad}")));
    }
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / total).collect())
}

/// `ln Σ exp(s)`.
pub fn log_sum_exp(scores: &[f64]) -> f64 {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln()
}

/// Which side of the matrix the scored coordinates live on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Coordinates are columns `j`; weights live on rows and `score_j = σ Σ_i x_i A_ij`.
    Columns,
    /// Coordinates are rows `i`; weights live on columns and `score_i = σ Σ_j y_j A_ij`.
    Rows,
}

/// A view of a payoff matrix that evaluates scores of a cumulative strategy.
///
/// The "lines" of the view are the rows (for [`Orientation::Columns`]) or the
/// columns (for [`Orientation::Rows`]) of the matrix, i.e. the direction the
/// weights run along. Every call is a counted oracle query on the matrix.
#[derive(Debug, Clone, Copy)]
pub struct ScoreOracle<'a> {
    matrix: &'a PayoffMatrix,
    orientation: Orientation,
    sign: f64,
}

impl<'a> ScoreOracle<'a> {
    /// Scores `xᵀA` over columns.
    pub fn columns(matrix: &'a PayoffMatrix) -> Self {
        ScoreOracle {
            matrix,
            orientation: Orientation::Columns,
            sign: 1.0,
        }
    }

    /// Bob's scores `-Aᵀx` over columns.
    pub fn bob(matrix: &'a PayoffMatrix) -> Self {
        ScoreOracle {
            matrix,
            orientation: Orientation::Columns,
            sign: -1.0,
        }
    }

    /// Alice's scores `Ay` over rows.
    pub fn alice(matrix: &'a PayoffMatrix) -> Self {
        ScoreOracle {
            matrix,
            orientation: Orientation::Rows,
            sign: 1.0,
        }
    }

    pub fn matrix(&self) -> &'a PayoffMatrix {
        self.matrix
    }

    /// Number of scored coordinates.
    pub fn dim(&self) -> usize {
        match self.orientation {
            Orientation::Columns => self.matrix.cols(),
            Orientation::Rows => self.matrix.rows(),
        }
    }

    /// Dimension of the weight vector.
    pub fn weight_dim(&self) -> usize {
        match self.orientation {
            Orientation::Columns => self.matrix.rows(),
            Orientation::Rows => self.matrix.cols(),
        }
    }

    /// Unsigned matrix entry linking weight `line` and coordinate `coord`.
    fn raw(&self, line: usize, coord: usize) -> Result<f64> {
        match self.orientation {
            Orientation::Columns => self.matrix.entry(line, coord),
            Orientation::Rows => self.matrix.entry(coord, line),
        }
    }

    /// Maximum nonzeros along a line.
    pub fn line_sparsity(&self) -> usize {
        match self.orientation {
            Orientation::Columns => self.matrix.row_sparsity(),
            Orientation::Rows => self.matrix.col_sparsity(),
        }
    }

    pub fn line_nnz(&self, line: usize) -> Result<usize> {
        match self.orientation {
            Orientation::Columns => self.matrix.row_nnz(line),
            Orientation::Rows => self.matrix.col_nnz(line),
        }
    }

    /// The `rank`-th nonzero along `line` as `(coordinate, unsigned value)`.
    pub fn line_nonzero(&self, line: usize, rank: usize) -> Result<(usize, f64)> {
        match self.orientation {
            Orientation::Columns => self.matrix.row_nonzero(line, rank),
            Orientation::Rows => self.matrix.col_nonzero(line, rank),
        }
    }

    /// `(score_k, w_k)` with `w_k = Σ_l x_l |A_lk|`, from the support of `x`.
    ///
    /// Costs exactly `|supp(x)|` entry queries.
    pub fn score(&self, x: &SparseWeights, coord: usize) -> Result<(f64, f64)> {
        let mut score = 0.0;
        let mut abs = 0.0;
        for (line, weight) in x.support() {
            let a = self.raw(line, coord)?;
            score += weight * a;
            abs += weight * a.abs();
        }
        Ok((self.sign * score, abs))
    }

    /// Every score, costing `dim · |supp(x)|` entry queries.
    pub fn all_scores(&self, x: &SparseWeights) -> Result<Vec<f64>> {
        (0..self.dim()).map(|k| self.score(x, k).map(|s| s.0)).collect()
    }
}

/// `max_k score_k` by evaluating every score from the support of `x`.
///
/// With [`ScoreOracle::columns`] this is `max_j (xᵀA)_j`; an empty `x` gives 0.
pub fn u_max_scan(x: &SparseWeights, oracle: &ScoreOracle<'_>) -> Result<f64> {
    if x.dim() != oracle.weight_dim() {
        return Err(Error::DimensionMismatch {
            expected: oracle.weight_dim(),
            got: x.dim(),
        });
    }
    let mut best = f64::NEG_INFINITY;
    for k in 0..oracle.dim() {
        best = best.max(oracle.score(x, k)?.0);
    }
    Ok(best)
}

/// Explicitly maintained scores `u = -Aᵀx`, `v = Ay` and their Gibbs trees.
///
/// `p_tree` holds `exp(u)` over columns and `q_tree` holds `exp(v)` over rows.
#[derive(Debug, Clone)]
pub struct ScoreState {
    u: Vec<f64>,
    v: Vec<f64>,
    p_tree: WeightTree,
    q_tree: WeightTree,
    p_rescales: u64,
    q_rescales: u64,
}

impl ScoreState {
    /// All-zero scores for an `n × m` game.
    pub fn new(rows: usize, cols: usize) -> Self {
        ScoreState {
            u: vec![0.0; cols],
            v: vec![0.0; rows],
            p_tree: WeightTree::from_weights(&vec![1.0; cols]).expect("unit weights"),
            q_tree: WeightTree::from_weights(&vec![1.0; rows]).expect("unit weights"),
            p_rescales: 0,
            q_rescales: 0,
        }
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn p_tree(&self) -> &WeightTree {
        &self.p_tree
    }

    pub fn q_tree(&self) -> &WeightTree {
        &self.q_tree
    }

    /// `ln Φ = ln Σ_j exp(u_j) + ln Σ_i exp(v_i)` from the tree roots.
    pub fn log_potential(&self) -> f64 {
        self.p_tree.log_total() + self.q_tree.log_total()
    }

    /// Draws Bob's column from `G(u)`.
    pub fn sample_bob<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        self.p_tree.sample(rng)
    }

    /// Draws Alice's row from `G(v)`.
    pub fn sample_alice<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        self.q_tree.sample(rng)
    }

    fn check_move(&self, a: &PayoffMatrix, bob: usize, alice: usize) -> Result<()> {
        if a.cols() != self.u.len() || a.rows() != self.v.len() {
            return Err(Error::DimensionMismatch {
                expected: self.v.len() * self.u.len(),
                got: a.rows() * a.cols(),
            });
        }
        if bob >= a.cols() || alice >= a.rows() {
            return Err(Error::IndexOutOfRange {
                row: alice,
                col: bob,
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        Ok(())
    }

    fn bump_u(&mut self, j: usize, step: f64, a_bj: f64) -> Result<()> {
        self.u[j] -= step * a_bj;
        self.p_tree.multiply(j, (-step * a_bj).exp())
    }

    fn bump_v(&mut self, i: usize, step: f64, a_ia: f64) -> Result<()> {
        self.v[i] += step * a_ia;
        self.q_tree.multiply(i, (step * a_ia).exp())
    }

    /// Applies the moves `bob = a` (a column) and `alice = b` (a row) with step `η`.
    ///
    /// Reads row `b` and column `a` with exactly `n + m` entry queries.
    pub fn update_dense(&mut self, a: &PayoffMatrix, bob: usize, alice: usize, step: f64) -> Result<()> {
        self.check_move(a, bob, alice)?;
        for j in 0..a.cols() {
            let a_bj = a.entry(alice, j)?;
            self.bump_u(j, step, a_bj)?;
        }
        for i in 0..a.rows() {
            let a_ia = a.entry(i, bob)?;
            self.bump_v(i, step, a_ia)?;
        }
        self.resync_after_rescale()
    }

    /// Same update through the sparse oracle: one query per nonzero of row `b`
    /// and of column `a`, touching only those tree leaves.
    pub fn update_sparse(&mut self, a: &PayoffMatrix, bob: usize, alice: usize, step: f64) -> Result<()> {
        if !a.is_sparse() {
            return Err(Error::SparseUnavailable);
        }
        self.check_move(a, bob, alice)?;
        for k in 0..a.row_nnz(alice)? {
            let (j, a_bj) = a.row_nonzero(alice, k)?;
            self.bump_u(j, step, a_bj)?;
        }
        for k in 0..a.col_nnz(bob)? {
            let (i, a_ia) = a.col_nonzero(bob, k)?;
            self.bump_v(i, step, a_ia)?;
        }
        self.resync_after_rescale()
    }

    /// After a tree renormalizes, rebuilds its leaves from the explicit scores
    /// so leaves that drifted toward underflow regain full precision.
    fn resync_after_rescale(&mut self) -> Result<()> {
        if self.p_tree.rescales() != self.p_rescales {
            self.p_tree.reset_from_log_weights(&self.u)?;
            self.p_rescales = self.p_tree.rescales();
        }
        if self.q_tree.rescales() != self.q_rescales {
            self.q_tree.reset_from_log_weights(&self.v)?;
            self.q_rescales = self.q_tree.rescales();
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pennies() -> PayoffMatrix {
        PayoffMatrix::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap()
    }

    #[test]
    fn exact_examples() {
        let p = gibbs_exact(&[0.0, 0.0, 0.0]).unwrap();
        assert!(p.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-15));

        let s: Vec<f64> = [1.0f64, 2.0, 3.0, 4.0].iter().map(|v| v.ln()).collect();
        let p = gibbs_exact(&s).unwrap();
        for (got, want) in p.iter().zip([0.1, 0.2, 0.3, 0.4]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert_eq!(gibbs_exact(&[]), Err(Error::EmptyScores));
        assert!(gibbs_exact(&[f64::NAN]).is_err());
    }

    #[test]
    fn exact_survives_huge_scores() {
        let p = gibbs_exact(&[1e6, 1e6 - 1.0]).unwrap();
        let want = 1.0 / (1.0 + (-1f64).exp());
        assert!((p[0] - want).abs() < 1e-15);
    }

    #[test]
    fn dense_update_example() {
        let a = pennies();
        let mut st = ScoreState::new(2, 2);
        st.update_dense(&a, 0, 0, 0.25).unwrap();
        assert_eq!(st.u(), &[-0.25, 0.25]);
        assert_eq!(st.v(), &[0.25, -0.25]);
        assert!((st.p_tree().weight(0) - (-0.25f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn zero_step_is_identity() {
        let a = pennies();
        let mut st = ScoreState::new(2, 2);
        st.update_dense(&a, 1, 0, 0.0).unwrap();
        assert_eq!(st.u(), &[0.0, 0.0]);
        assert_eq!(st.p_tree().total(), 2.0);
        let s = a.to_sparse();
        st.update_sparse(&s, 1, 1, 0.0).unwrap();
        assert_eq!(st.q_tree().total(), 2.0);
    }

    #[test]
    fn dense_update_costs_n_plus_m() {
        let a = PayoffMatrix::from_dense(3, 5, vec![0.1; 15]).unwrap();
        let mut st = ScoreState::new(3, 5);
        st.update_dense(&a, 4, 2, 0.5).unwrap();
        assert_eq!(a.queries().dense_entry_queries, 8);
    }

    #[test]
    fn sparse_update_costs_nonzeros() {
        // Row 1 has two nonzeros, column 2 has three.
        let a = PayoffMatrix::from_triplets(
            3,
            4,
            &[(0, 2, 0.5), (1, 2, -0.5), (1, 3, 0.25), (2, 2, 1.0), (2, 0, -1.0)],
        )
        .unwrap();
        let mut st = ScoreState::new(3, 4);
        st.update_sparse(&a, 2, 1, 0.3).unwrap();
        let q = a.queries();
        assert_eq!(q.sparse_row_queries + q.sparse_col_queries, 5);
        assert_eq!(q.dense_entry_queries, 0);
        assert_eq!(st.update_sparse(&pennies(), 0, 0, 0.1), Err(Error::SparseUnavailable));
    }

    #[test]
    fn sparse_update_matches_recomputation_on_dense_matrix() {
        let rows: Vec<Vec<f64>> = (0..4)
            .map(|i| (0..5).map(|j| ((i * 5 + j) as f64 * 0.37).sin()).collect())
            .collect();
        let a = PayoffMatrix::from_rows(&rows).unwrap().to_sparse();
        let mut st = ScoreState::new(4, 5);
        let mut x = [0.0; 4];
        let moves = [(0, 1), (3, 2), (4, 0), (0, 3), (2, 2)];
        for (t, &(bob, alice)) in moves.iter().enumerate() {
            let step = 0.5 / ((t + 1) as f64).sqrt();
            st.update_sparse(&a, bob, alice, step).unwrap();
            x[alice] += step;
        }
        for j in 0..5 {
            let u: f64 = -x.iter().zip(&rows).map(|(xi, row)| xi * row[j]).sum::<f64>();
            let leaf = st.p_tree().weight(j);
            assert!((leaf - u.exp()).abs() <= 1e-9 * u.exp(), "{leaf} vs {}", u.exp());
        }
    }

    #[test]
    fn scan_examples() {
        let a = pennies();
        let o = ScoreOracle::columns(&a);
        let mut x = SparseWeights::new(2);
        assert_eq!(u_max_scan(&x, &o).unwrap(), 0.0);
        x.add(0, 1.0).unwrap();
        assert_eq!(u_max_scan(&x, &o).unwrap(), 1.0);
        let half = SparseWeights::from_dense(&[0.5, 0.5]).unwrap();
        assert_eq!(u_max_scan(&half, &o).unwrap(), 0.0);
        // m · |supp(x)| queries for the last scan.
        let before = a.queries().dense_entry_queries;
        u_max_scan(&half, &o).unwrap();
        assert_eq!(a.queries().dense_entry_queries - before, 4);
    }

    #[test]
    fn oracle_orientations() {
        let a = PayoffMatrix::from_rows(&[vec![0.5, -0.25, 0.0], vec![1.0, 0.0, -1.0]]).unwrap();
        let x = SparseWeights::from_dense(&[2.0, 1.0]).unwrap();
        let y = SparseWeights::from_dense(&[1.0, 0.0, 3.0]).unwrap();
        assert_eq!(ScoreOracle::bob(&a).all_scores(&x).unwrap(), vec![-2.0, 0.5, 1.0]);
        assert_eq!(ScoreOracle::alice(&a).all_scores(&y).unwrap(), vec![0.5, -2.0]);
        assert_eq!(ScoreOracle::bob(&a).score(&x, 1).unwrap(), (0.5, 0.5));
    }

    proptest! {
        #[test]
        fn exact_is_distribution_and_shift_invariant(
            s in prop::collection::vec(-50.0f64..50.0, 1..30),
            c in -1e3f64..1e3,
        ) {
            let p = gibbs_exact(&s).unwrap();
            prop_assert!(p.iter().all(|v| *v >= 0.0));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let q = gibbs_exact(&s.iter().map(|v| v + c).collect::<Vec<_>>()).unwrap();
            for (a, b) in p.iter().zip(&q) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
