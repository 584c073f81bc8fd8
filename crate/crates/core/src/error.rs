use thiserror::Error;

/// Errors raised by the game, sampling, solver and LP layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index ({row}, {col}) out of range for a {rows}x{cols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },

    #[error("line {line} has {count} nonzeros, rank {rank} requested")]
    RankExceeded { line: usize, rank: usize, count: usize },

    #[error("sparse access requested but the matrix is stored densely")]
    SparseUnavailable,

    #[error("entry {value} at ({row}, {col}) lies outside [-1, 1]")]
    EntryOutOfRange { row: usize, col: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error("game of size {rows}x{cols} is too large for exhaustive enumeration (limit {limit})")]
    TooLarge { rows: usize, cols: usize, limit: usize },

    #[error("leaf {leaf} out of range for a tree with {len} leaves")]
    LeafOutOfRange { leaf: usize, len: usize },

    #[error("negative or non-finite weight {0}")]
    InvalidWeight(f64),

    #[error("cannot sample from a distribution with zero total weight")]
    EmptyDistribution,

    #[error("score vector is empty")]
    EmptyScores,

    #[error("shift {shift} is below the maximum score {max}")]
    ShiftTooSmall { shift: f64, max: f64 },

    #[error("acceptance probability {0} exceeds 1")]
    AcceptanceAboveOne(f64),

    #[error("rejection sampler gave up after {0} rounds")]
    RoundCapExceeded(u64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("backend {backend} requires sparse storage")]
    BackendStorageMismatch { backend: &'static str },

    #[error("extraction check failed: |h - 1/2| = {deviation} exceeds {bound}")]
    ExtractionFailed { deviation: f64, bound: f64 },

    #[error("solver stopped with duality gap {gap}, above the required {target}")]
    AccuracyNotReached { gap: f64, target: f64 },

    #[error("LP optimum lies below {0}: no threshold was certified feasible")]
    DegenerateLp(f64),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
