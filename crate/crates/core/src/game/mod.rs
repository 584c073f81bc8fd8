//! Matrix games behind a query-counted oracle.
//!
//! Alice picks a row `i`, Bob picks a column `j` and Alice receives `A[i][j]`.
//! Every read of the payoff matrix goes through [`PayoffMatrix::entry`],
//! [`PayoffMatrix::row_nonzero`] or [`PayoffMatrix::col_nonzero`], and each of
//! those calls bumps exactly one counter of the matrix's [`QueryLedger`].

pub mod io;
mod value;

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{parse_dense, parse_matrix, parse_sparse, write_dense, write_sparse};
pub use value::{exact_value_small, EXACT_VALUE_LIMIT};

/// Tolerance used when checking that a strategy sums to one.
pub const STRATEGY_TOLERANCE: f64 = 1e-9;

/// Atomic query counters attached to a matrix.
#[derive(Debug, Default)]
pub struct QueryLedger {
    dense_entry: AtomicU64,
    sparse_row: AtomicU64,
    sparse_col: AtomicU64,
}

/// A point-in-time copy of a [`QueryLedger`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryCounts {
    pub dense_entry_queries: u64,
    pub sparse_row_queries: u64,
    pub sparse_col_queries: u64,
}

impl QueryCounts {
    pub fn total(&self) -> u64 {
        self.dense_entry_queries + self.sparse_row_queries + self.sparse_col_queries
    }

    /// Component-wise difference `self - earlier`.
    pub fn since(&self, earlier: &QueryCounts) -> QueryCounts {
        QueryCounts {
            dense_entry_queries: self.dense_entry_queries - earlier.dense_entry_queries,
            sparse_row_queries: self.sparse_row_queries - earlier.sparse_row_queries,
            sparse_col_queries: self.sparse_col_queries - earlier.sparse_col_queries,
        }
    }
}

impl std::ops::Add for QueryCounts {
    type Output = QueryCounts;

    fn add(self, rhs: QueryCounts) -> QueryCounts {
        QueryCounts {
            dense_entry_queries: self.dense_entry_queries + rhs.dense_entry_queries,
            sparse_row_queries: self.sparse_row_queries + rhs.sparse_row_queries,
            sparse_col_queries: self.sparse_col_queries + rhs.sparse_col_queries,
        }
    }
}

impl std::ops::AddAssign for QueryCounts {
    fn add_assign(&mut self, rhs: QueryCounts) {
        *self = *self + rhs;
    }
}

impl QueryLedger {
    pub fn snapshot(&self) -> QueryCounts {
        QueryCounts {
            dense_entry_queries: self.dense_entry.load(Ordering::Relaxed),
            sparse_row_queries: self.sparse_row.load(Ordering::Relaxed),
            sparse_col_queries: self.sparse_col.load(Ordering::Relaxed),
        }
    }

    fn from_counts(counts: QueryCounts) -> Self {
        QueryLedger {
            dense_entry: AtomicU64::new(counts.dense_entry_queries),
            sparse_row: AtomicU64::new(counts.sparse_row_queries),
            sparse_col: AtomicU64::new(counts.sparse_col_queries),
        }
    }
}

#[derive(Debug, Clone)]
enum Storage {
    Dense(Vec<f64>),
    Sparse {
        /// Per row, `(column, value)` in ascending column order.
        rows: Vec<Vec<(usize, f64)>>,
        /// Per column, `(row, value)` in ascending row order.
        cols: Vec<Vec<(usize, f64)>>,
    },
}

/// A payoff matrix with entries in `[-1, 1]`.
#[derive(Debug)]
pub struct PayoffMatrix {
    rows: usize,
    cols: usize,
    storage: Storage,
    row_sparsity: usize,
    col_sparsity: usize,
    ledger: QueryLedger,
}

impl Clone for PayoffMatrix {
    fn clone(&self) -> Self {
        PayoffMatrix {
            rows: self.rows,
            cols: self.cols,
            storage: self.storage.clone(),
            row_sparsity: self.row_sparsity,
            col_sparsity: self.col_sparsity,
            ledger: QueryLedger::from_counts(self.ledger.snapshot()),
        }
    }
}

fn check_entry(row: usize, col: usize, value: f64) -> Result<()> {
    if value.is_finite() && (-1.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::EntryOutOfRange { row, col, value })
    }
}

impl PayoffMatrix {
    /// Builds a densely stored matrix from row-major entries.
    pub fn from_dense(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidMatrix("matrix must be at least 1x1".into()));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: entries.len(),
            });
        }
        let mut row_sparsity = 0;
        let mut col_nnz = vec![0usize; cols];
        for i in 0..rows {
            let mut nnz = 0;
            for j in 0..cols {
                let v = entries[i * cols + j];
                check_entry(i, j, v)?;
                if v != 0.0 {
                    nnz += 1;
                    col_nnz[j] += 1;
                }
            }
            row_sparsity = row_sparsity.max(nnz);
        }
        Ok(PayoffMatrix {
            rows,
            cols,
            storage: Storage::Dense(entries),
            row_sparsity,
            col_sparsity: col_nnz.into_iter().max().unwrap_or(0),
            ledger: QueryLedger::default(),
        })
    }

    /// Builds a densely stored matrix from nested rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(n * m);
        for row in rows {
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: row.len(),
                });
            }
            entries.extend_from_slice(row);
        }
        Self::from_dense(n, m, entries)
    }

    /// Builds a sparsely stored matrix from `(row, col, value)` triplets.
    ///
    /// Zero-valued triplets are dropped; a repeated coordinate is rejected.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidMatrix("matrix must be at least 1x1".into()));
        }
        let mut row_lists: Vec<Vec<(usize, f64)>> = vec![Vec::new(); rows];
        let mut col_lists: Vec<Vec<(usize, f64)>> = vec![Vec::new(); cols];
        for &(i, j, v) in triplets {
            if i >= rows || j >= cols {
                return Err(Error::IndexOutOfRange {
                    row: i,
                    col: j,
                    rows,
                    cols,
                });
            }
            check_entry(i, j, v)?;
            if v != 0.0 {
                row_lists[i].push((j, v));
                col_lists[j].push((i, v));
            }
        }
        for (i, list) in row_lists.iter_mut().enumerate() {
            list.sort_by_key(|&(j, _)| j);
            if let Some(w) = list.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(Error::InvalidMatrix(format!(
                    "duplicate entry at ({i}, {})",
                    w[0].0
                )));
            }
        }
        for list in col_lists.iter_mut() {
            list.sort_by_key(|&(i, _)| i);
        }
        let row_sparsity = row_lists.iter().map(Vec::len).max().unwrap_or(0);
        let col_sparsity = col_lists.iter().map(Vec::len).max().unwrap_or(0);
        Ok(PayoffMatrix {
            rows,
            cols,
            storage: Storage::Sparse {
                rows: row_lists,
                cols: col_lists,
            },
            row_sparsity,
            col_sparsity,
            ledger: QueryLedger::default(),
        })
    }

    /// The same logical matrix in sparse storage, with a fresh ledger.
    pub fn to_sparse(&self) -> PayoffMatrix {
        let dense = self.materialize();
        let mut triplets = Vec::new();
        for (i, row) in dense.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(self.rows, self.cols, &triplets).expect("entries already validated")
    }

    /// The same logical matrix in dense storage, with a fresh ledger.
    pub fn to_dense(&self) -> PayoffMatrix {
        let entries = self.materialize().concat();
        Self::from_dense(self.rows, self.cols, entries).expect("entries already validated")
    }

    /// Copies out every entry without touching the ledger.
    ///
    /// This is a test and I/O helper; algorithms must use the oracle calls.
    pub fn materialize(&self) -> Vec<Vec<f64>> {
        match &self.storage {
            Storage::Dense(e) => e.chunks(self.cols).map(<[f64]>::to_vec).collect(),
            Storage::Sparse { rows, .. } => rows
                .iter()
                .map(|list| {
                    let mut row = vec![0.0; self.cols];
                    for &(j, v) in list {
                        row[j] = v;
                    }
                    row
                })
                .collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Maximum number of nonzeros in a row (`s`).
    pub fn row_sparsity(&self) -> usize {
        self.row_sparsity
    }

    /// Maximum number of nonzeros in a column (`d`).
    pub fn col_sparsity(&self) -> usize {
        self.col_sparsity
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse { .. })
    }

    pub fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }

    pub fn queries(&self) -> QueryCounts {
        self.ledger.snapshot()
    }

    /// `n = m` and `A = -Aᵀ`.
    pub fn is_symmetric_game(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        let a = self.materialize();
        (0..self.rows).all(|i| (0..self.cols).all(|j| a[i][j] == -a[j][i]))
    }

    /// Dense oracle: returns `A[i][j]`.
    pub fn entry(&self, i: usize, j: usize) -> Result<f64> {
        if i >= self.rows || j >= self.cols {
            return Err(Error::IndexOutOfRange {
                row: i,
                col: j,
                rows: self.rows,
                cols: self.cols,
            });
        }
        self.ledger.dense_entry.fetch_add(1, Ordering::Relaxed);
        Ok(match &self.storage {
            Storage::Dense(e) => e[i * self.cols + j],
            Storage::Sparse { rows, .. } => rows[i]
                .binary_search_by_key(&j, |&(c, _)| c)
                .map_or(0.0, |k| rows[i][k].1),
        })
    }

    /// Sparse oracle: the `k`-th nonzero of row `i` as `(column, value)`.
    pub fn row_nonzero(&self, i: usize, k: usize) -> Result<(usize, f64)> {
        let list = self.row_list(i)?;
        let hit = *list.get(k).ok_or(Error::RankExceeded {
            line: i,
            rank: k,
            count: list.len(),
        })?;
        self.ledger.sparse_row.fetch_add(1, Ordering::Relaxed);
        Ok(hit)
    }

    /// Sparse oracle: the `k`-th nonzero of column `j` as `(row, value)`.
    pub fn col_nonzero(&self, j: usize, k: usize) -> Result<(usize, f64)> {
        let list = self.col_list(j)?;
        let hit = *list.get(k).ok_or(Error::RankExceeded {
            line: j,
            rank: k,
            count: list.len(),
        })?;
        self.ledger.sparse_col.fetch_add(1, Ordering::Relaxed);
        Ok(hit)
    }

    /// Number of nonzeros in row `i`. Structural metadata, not counted as a query.
    pub fn row_nnz(&self, i: usize) -> Result<usize> {
        self.row_list(i).map(<[_]>::len)
    }

    /// Number of nonzeros in column `j`. Structural metadata, not counted as a query.
    pub fn col_nnz(&self, j: usize) -> Result<usize> {
        self.col_list(j).map(<[_]>::len)
    }

    fn row_list(&self, i: usize) -> Result<&[(usize, f64)]> {
        match &self.storage {
            Storage::Dense(_) => Err(Error::SparseUnavailable),
            Storage::Sparse { rows, .. } => rows.get(i).map(Vec::as_slice).ok_or(
                Error::IndexOutOfRange {
                    row: i,
                    col: 0,
                    rows: self.rows,
                    cols: self.cols,
                },
            ),
        }
    }

    fn col_list(&self, j: usize) -> Result<&[(usize, f64)]> {
        match &self.storage {
            Storage::Dense(_) => Err(Error::SparseUnavailable),
            Storage::Sparse { cols, .. } => cols.get(j).map(Vec::as_slice).ok_or(
                Error::IndexOutOfRange {
                    row: 0,
                    col: j,
                    rows: self.rows,
                    cols: self.cols,
                },
            ),
        }
    }

    /// `Ay` through the oracle: `n·m` entry queries, or one sparse query per nonzero.
    pub fn mul_vec(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: y.len(),
            });
        }
        let mut out = vec![0.0; self.rows];
        for (i, o) in out.iter_mut().enumerate() {
            if self.is_sparse() {
                for k in 0..self.row_nnz(i)? {
                    let (j, a) = self.row_nonzero(i, k)?;
                    *o += a * y[j];
                }
            } else {
                for (j, &yj) in y.iter().enumerate() {
                    *o += self.entry(i, j)? * yj;
                }
            }
        }
        Ok(out)
    }

    /// `Aᵀx` through the oracle.
    pub fn mul_transpose_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                got: x.len(),
            });
        }
        let mut out = vec![0.0; self.cols];
        for (j, o) in out.iter_mut().enumerate() {
            if self.is_sparse() {
                for k in 0..self.col_nnz(j)? {
                    let (i, a) = self.col_nonzero(j, k)?;
                    *o += a * x[i];
                }
            } else {
                for (i, &xi) in x.iter().enumerate() {
                    *o += self.entry(i, j)? * xi;
                }
            }
        }
        Ok(out)
    }
}

/// A mixed strategy: a probability vector over pure strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Strategy(Vec<f64>);

impl Strategy {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidStrategy("empty strategy".into()));
        }
        if let Some(&p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidStrategy(format!("entry {p} is not a probability")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > STRATEGY_TOLERANCE {
            return Err(Error::InvalidStrategy(format!("entries sum to {total}")));
        }
        Ok(Strategy(probs))
    }

    /// Normalizes nonnegative weights `w / ‖w‖₁`.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidStrategy(format!("weights sum to {total}")));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn uniform(n: usize) -> Self {
        Strategy(vec![1.0 / n as f64; n])
    }

    pub fn point_mass(n: usize, i: usize) -> Self {
        let mut p = vec![0.0; n];
        p[i] = 1.0;
        Strategy(p)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Best-response values of a strategy pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapBounds {
    /// `max_i (Ay)_i`, an upper bound on the game value.
    pub upper: f64,
    pub upper_arg: usize,
    /// `min_j (Aᵀx)_j`, a lower bound on the game value.
    pub lower: f64,
    pub lower_arg: usize,
}

impl GapBounds {
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Both best-response values; ties go to the lowest index.
pub fn gap_bounds(a: &PayoffMatrix, x: &Strategy, y: &Strategy) -> Result<GapBounds> {
    let ay = a.mul_vec(y.probs())?;
    let atx = a.mul_transpose_vec(x.probs())?;
    let (upper_arg, upper) = ay
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    let (lower_arg, lower) = atx
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (j, v)| if v < best.1 { (j, v) } else { best });
    Ok(GapBounds {
        upper,
        upper_arg,
        lower,
        lower_arg,
    })
}

/// `max_i (Ay)_i - min_j (Aᵀx)_j`.
pub fn duality_gap(a: &PayoffMatrix, x: &Strategy, y: &Strategy) -> Result<f64> {
    gap_bounds(a, x, y).map(|b| b.gap())
}
