//! Result documents and their serialization.
//!
//! Numbers use the shortest decimal that round-trips to the same `f64`, so
//! output is exact and byte-for-byte reproducible.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use zsg_core::lp::LpRound;
use zsg_core::solver::{CostReport, LpCostProjection, QueryBreakdown};
use zsg_core::QueryCounts;

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct GameDocument {
    pub command: &'static str,
    pub rows: usize,
    pub cols: usize,
    pub seed: u64,
    pub schedule: &'static str,
    pub epsilon: Option<f64>,
    pub delta: f64,
    pub backend: &'static str,
    pub iterations: u64,
    pub alice: Vec<f64>,
    pub bob: Vec<f64>,
    pub value_estimate: f64,
    pub duality_gap: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// Fixed schedule: gap within `ε`. Anytime: gap within the anytime bound.
    pub certified: bool,
    pub queries: QueryCounts,
    pub total_queries: u64,
    pub query_breakdown: QueryBreakdown,
    pub mean_proposals: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct LpDocument {
    pub command: &'static str,
    pub n: usize,
    pub m: usize,
    #[serde(rename = "R")]
    pub primal_bound: f64,
    pub r: f64,
    pub seed: u64,
    pub epsilon: f64,
    pub delta: f64,
    pub backend: &'static str,
    pub game_accuracy: f64,
    pub round_delta: f64,
    pub opt_estimate: f64,
    pub interval: [f64; 2],
    pub y_hat: Vec<f64>,
    pub objective: f64,
    pub max_violation: f64,
    pub h_deviation: f64,
    pub rounds: Vec<LpRound>,
    pub queries: QueryCounts,
    pub total_queries: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct BenchEntry {
    pub backend: &'static str,
    pub tv_distance: f64,
    pub mean_proposals: Option<f64>,
    pub queries_per_sample: f64,
    /// Queries per score evaluation: the support size of the strategy.
    pub queries_per_score: u64,
    pub queries: QueryCounts,
}

#[derive(Debug, Serialize)]
pub struct BenchDocument {
    pub command: &'static str,
    pub rows: usize,
    pub cols: usize,
    pub seed: u64,
    pub samples: u64,
    pub support: Vec<usize>,
    pub weights: Vec<f64>,
    pub backends: Vec<BenchEntry>,
}

#[derive(Debug, Serialize)]
pub struct CostDocument {
    pub command: &'static str,
    #[serde(flatten)]
    pub report: CostReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lp_projection: Option<LpCostProjection>,
}

/// Pretty JSON plus a trailing newline, to `path` or standard output.
pub fn emit<T: Serialize>(doc: &T, path: Option<&Path>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(doc).map_err(|e| CliError::Solver(e.to_string()))?;
    text.push('\n');
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Input(format!("stdout: {e}"))),
    }
}

/// One compact JSON object per line.
pub fn write_jsonl<T: Serialize>(records: &[T], path: &Path) -> Result<(), CliError> {
    let mut text = String::new();
    for r in records {
        text.push_str(&serde_json::to_string(r).map_err(|e| CliError::Solver(e.to_string()))?);
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}
