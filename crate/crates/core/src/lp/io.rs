//! JSON LP files.
//!
//! ```json
//! { "n": 2, "m": 2, "R": 1.0, "r": 2.0,
//!   "A": [[1, 0], [0, 1]],
//!   "b": [1, 1], "c": [0.3, 0.4] }
//! ```
//!
//! `A` may instead be `{"entries": [[i, j, value], ...]}` with zero-based
//! indices, which builds sparse storage.

use serde::{Deserialize, Serialize};

use super::StandardLp;
use crate::error::{Error, Result};
use crate::game::PayoffMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LpMatrix {
    Dense(Vec<Vec<f64>>),
    Sparse { entries: Vec<(usize, usize, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LpFile {
    pub n: usize,
    pub m: usize,
    #[serde(rename = "R")]
    pub primal_bound: f64,
    pub r: f64,
    #[serde(rename = "A")]
    pub constraints: LpMatrix,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl LpFile {
    pub fn into_lp(self) -> Result<StandardLp> {
        let matrix = match self.constraints {
            LpMatrix::Dense(rows) => {
                if rows.len() != self.n {
                    return Err(Error::DimensionMismatch { expected: self.n, got: rows.len() });
                }
                if let Some(row) = rows.iter().find(|r| r.len() != self.m) {
                    return Err(Error::DimensionMismatch { expected: self.m, got: row.len() });
                }
                PayoffMatrix::from_dense(self.n, self.m, rows.concat())?
            }
            LpMatrix::Sparse { entries } => PayoffMatrix::from_triplets(self.n, self.m, &entries)?,
        };
        StandardLp::new(matrix, self.b, self.c, self.primal_bound, self.r)
    }

    pub fn from_lp(lp: &StandardLp) -> Self {
        let a = lp.constraints();
        let dense = a.materialize();
        let constraints = if a.is_sparse() {
            let entries = dense
                .iter()
                .enumerate()
                .flat_map(|(i, row)| {
                    row.iter().enumerate().filter(|(_, v)| **v != 0.0).map(move |(j, &v)| (i, j, v))
                })
                .collect();
            LpMatrix::Sparse { entries }
        } else {
            LpMatrix::Dense(dense)
        };
        LpFile {
            n: a.rows(),
            m: a.cols(),
            primal_bound: lp.primal_bound(),
            r: lp.dual_bound(),
            constraints,
            b: lp.objective().to_vec(),
            c: lp.rhs().to_vec(),
        }
    }
}

/// Parses and validates an LP file.
pub fn parse_lp(text: &str) -> Result<StandardLp> {
    let file: LpFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    file.into_lp()
}

pub fn write_lp(lp: &StandardLp) -> String {
    serde_json::to_string_pretty(&LpFile::from_lp(lp)).expect("LP files serialize")
}
