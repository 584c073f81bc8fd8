//! Sampling-based solvers for two-player zero-sum matrix games.
//!
//! The solver runs stochastic fictitious play with multiplicative weights:
//! each iteration samples one pure strategy per player from a Gibbs
//! distribution over accumulated scores and adds a step to that player's
//! cumulative strategy. Several interchangeable samplers are provided, from
//! explicit score trees to rejection samplers that evaluate scores on
//! demand, and linear programs are solved by embedding them in a game.
//!
//! Every access to a payoff matrix is counted, so query costs of the
//! different backends can be compared directly.

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod game;
pub mod gibbs;
pub mod lp;
pub mod rng;
pub mod solver;
pub mod tree;

pub use error::{Error, Result};
pub use game::{duality_gap, PayoffMatrix, QueryCounts, Strategy};
pub use solver::{solve, Backend, Schedule, SolveResult, SolverConfig};
