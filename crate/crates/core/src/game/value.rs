//! Exact game value for desk-scale games by vertex enumeration.

use super::PayoffMatrix;
use crate::error::{Error, Result};

/// Largest row or column count accepted by [`exact_value_small`].
pub const EXACT_VALUE_LIMIT: usize = 8;

const FEASIBILITY_TOL: f64 = 1e-9;

/// Solves `min λ s.t. Ay ≤ λe, y ∈ Δᵐ` exactly by enumerating vertices.
///
/// The feasible set in `(y, λ)` has `n + m` inequalities (`(Ay)_i ≤ λ` and
/// `y_j ≥ 0`) and one equality (`Σ y = 1`). Every vertex makes `m` of the
/// inequalities tight, so we solve each such square system and keep the
/// smallest feasible `λ`.
pub fn exact_value_small(a: &PayoffMatrix) -> Result<f64> {
    let (n, m) = (a.rows(), a.cols());
    if n > EXACT_VALUE_LIMIT || m > EXACT_VALUE_LIMIT {
        return Err(Error::TooLarge {
            rows: n,
            cols: m,
            limit: EXACT_VALUE_LIMIT,
        });
    }
    let mut entries = vec![vec![0.0; m]; n];
    for (i, row) in entries.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            *e = a.entry(i, j)?;
        }
    }

    let mut best = f64::INFINITY;
    let mut chosen: Vec<usize> = (0..m).collect();
    loop {
        if let Some((y, lambda)) = solve_vertex(&entries, &chosen) {
            let feasible = y.iter().all(|&v| v >= -FEASIBILITY_TOL)
                && entries.iter().all(|row| {
                    row.iter().zip(&y).map(|(aij, yj)| aij * yj).sum::<f64>()
                        <= lambda + FEASIBILITY_TOL
                });
            if feasible && lambda < best {
                best = lambda;
            }
        }
        if !next_combination(&mut chosen, n + m) {
            break;
        }
    }
    Ok(best)
}

/// Constraint `k < n` is row `k` tight; `k ≥ n` is `y_{k-n} = 0`.
fn solve_vertex(a: &[Vec<f64>], tight: &[usize]) -> Option<(Vec<f64>, f64)> {
    let n = a.len();
    let m = a[0].len();
    let dim = m + 1;
    // Augmented rows over unknowns (y_0..y_{m-1}, λ | rhs).
    let mut sys: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for &k in tight {
        let mut row = vec![0.0; dim + 1];
        if k < n {
            row[..m].copy_from_slice(&a[k]);
            row[m] = -1.0;
        } else {
            row[k - n] = 1.0;
        }
        sys.push(row);
    }
    let mut simplex = vec![1.0; dim + 1];
    simplex[m] = 0.0;
    sys.push(simplex);

    let sol = gaussian_solve(sys)?;
    Some((sol[..m].to_vec(), sol[m]))
}

/// Gaussian elimination with partial pivoting on an augmented square system.
#[allow(clippy::needless_range_loop)]
fn gaussian_solve(mut sys: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let dim = sys.len();
    for col in 0..dim {
        let pivot = (col..dim).max_by(|&r, &s| sys[r][col].abs().total_cmp(&sys[s][col].abs()))?;
        if sys[pivot][col].abs() < 1e-12 {
            return None;
        }
        sys.swap(col, pivot);
        for r in 0..dim {
            if r != col {
                let f = sys[r][col] / sys[col][col];
                if f != 0.0 {
                    for c in col..=dim {
                        sys[r][c] -= f * sys[col][c];
                    }
                }
            }
        }
    }
    Some((0..dim).map(|r| sys[r][dim] / sys[r][r]).collect())
}

/// Advances `c` to the next k-subset of `0..n` in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for pos in (0..k).rev() {
        if c[pos] < n - k + pos {
            c[pos] += 1;
            for later in pos + 1..k {
                c[later] = c[later - 1] + 1;
            }
            return true;
        }
    }
    false
}
