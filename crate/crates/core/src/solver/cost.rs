//! Query-cost report: classical counts and asymptotic quantum projections.

use serde::{Deserialize, Serialize};

use super::bounds::{check_delta, check_epsilon, iterations_needed};
use crate::error::{Error, Result};

/// Label attached to every projected (never measured) figure.
pub const PROJECTION_NOTE: &str =
    "asymptotic projection: constants and polylogarithmic factors omitted; not a measured count";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub rows: usize,
    pub cols: usize,
    pub row_sparsity: usize,
    pub col_sparsity: usize,
    pub epsilon: f64,
    pub delta: f64,
    /// Fixed-accuracy iteration count `T`.
    pub iterations: u64,
    /// Entry queries per iteration with explicit dense scores: `n + m`.
    pub classical_dense_per_iteration: u64,
    /// Sparse queries per iteration with explicit sparse scores, at most `s + d`.
    pub classical_sparse_per_iteration: u64,
    pub classical_dense_total: u64,
    pub classical_sparse_total: u64,
    pub quantum_projection: QuantumProjection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumProjection {
    /// `√(n + m) / ε³`.
    pub dense: f64,
    /// `√s / ε^3.5`.
    pub sparse: f64,
    pub note: String,
}

/// Cost report for solving an `n × m` game with row and column sparsity `s`, `d`.
pub fn quantum_cost_model(
    rows: usize,
    cols: usize,
    row_sparsity: usize,
    col_sparsity: usize,
    epsilon: f64,
    delta: f64,
) -> Result<CostReport> {
    check_epsilon(epsilon)?;
    check_delta(delta)?;
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidParameter("dimensions must be positive".into()));
    }
    let iterations = iterations_needed(epsilon, delta, rows, cols)?;
    let dense = (rows + cols) as u64;
    let sparse = (row_sparsity + col_sparsity) as u64;
    Ok(CostReport {
        rows,
        cols,
        row_sparsity,
        col_sparsity,
        epsilon,
        delta,
        iterations,
        classical_dense_per_iteration: dense,
        classical_sparse_per_iteration: sparse,
        classical_dense_total: iterations * dense,
        classical_sparse_total: iterations * sparse,
        quantum_projection: QuantumProjection {
            dense: ((rows + cols) as f64).sqrt() / epsilon.powi(3),
            sparse: (row_sparsity.max(col_sparsity) as f64).sqrt() / epsilon.powf(3.5),
            note: PROJECTION_NOTE.to_string(),
        },
    })
}

/// Projected LP-solver costs in terms of `γ = R(r + 1)/ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpCostProjection {
    pub gamma: f64,
    /// `(√n + √m) γ³`.
    pub dense: f64,
    /// `√s γ^3.5`.
    pub sparse: f64,
    pub note: String,
}

pub fn lp_cost_projection(
    rows: usize,
    cols: usize,
    sparsity: usize,
    primal_bound: f64,
    dual_bound: f64,
    epsilon: f64,
) -> Result<LpCostProjection> {
    check_epsilon(epsilon)?;
    if !(primal_bound > 0.0 && dual_bound > 0.0) {
        return Err(Error::InvalidParameter("R and r must be positive".into()));
    }
    let gamma = primal_bound * (dual_bound + 1.0) / epsilon;
    Ok(LpCostProjection {
        gamma,
        dense: ((rows as f64).sqrt() + (cols as f64).sqrt()) * gamma.powi(3),
        sparse: (sparsity as f64).sqrt() * gamma.powf(3.5),
        note: PROJECTION_NOTE.to_string(),
    })
}
