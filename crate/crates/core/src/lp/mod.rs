//! Linear programs solved through zero-sum games.
//!
//! An LP `max bᵀy s.t. Ay ≤ c, y ≥ 0` with `|A_ij|, |b_j| ≤ 1` and an optimum
//! of ℓ₁-norm at most `R` is feasible at threshold `α` (some `y` with
//! `bᵀy ≥ α`) exactly when the `(n+3)×(m+2)` game built by
//! [`build_game_matrix`] has value at most 0. Solving that game to accuracy
//! `ε/(6R(r+1))` decides the threshold up to `ε`, and a binary search over
//! `α ∈ [-R, R]` recovers the optimum.

mod io;

use log::info;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{gap_bounds, PayoffMatrix, QueryCounts, Strategy};
use crate::rng::replicate_seed;
use crate::solver::{Schedule, Solver, SolverConfig};

pub use io::{parse_lp, write_lp, LpFile, LpMatrix};

/// `max bᵀy s.t. Ay ≤ c, y ≥ 0`.
#[derive(Debug, Clone)]
pub struct StandardLp {
    constraints: PayoffMatrix,
    objective: Vec<f64>,
    rhs: Vec<f64>,
    primal_bound: f64,
    dual_bound: f64,
}

impl StandardLp {
    /// `constraints` is the `n×m` matrix `A`, `objective` is `b` (length `m`),
    /// `rhs` is `c` (length `n`). `primal_bound` (`R`) and `dual_bound` (`r`)
    /// bound the ℓ₁-norms of some optimal primal and dual solutions; they are
    /// trusted, and wrong values void the accuracy guarantees.
    pub fn new(
        constraints: PayoffMatrix,
        objective: Vec<f64>,
        rhs: Vec<f64>,
        primal_bound: f64,
        dual_bound: f64,
    ) -> Result<Self> {
        let (n, m) = (constraints.rows(), constraints.cols());
        if objective.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: objective.len() });
        }
        if rhs.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: rhs.len() });
        }
        if !(primal_bound > 0.0 && primal_bound.is_finite()) {
            return Err(Error::InvalidParameter(format!("R = {primal_bound} must be positive")));
        }
        if !(dual_bound > 0.0 && dual_bound.is_finite()) {
            return Err(Error::InvalidParameter(format!("r = {dual_bound} must be positive")));
        }
        if let Some((j, b)) = objective.iter().enumerate().find(|(_, b)| !(b.abs() <= 1.0)) {
            return Err(Error::InvalidParameter(format!(
                "objective entry b[{j}] = {b} lies outside [-1, 1]"
            )));
        }
        if let Some((i, c)) = rhs.iter().enumerate().find(|(_, c)| !(c.abs() <= primal_bound)) {
            return Err(Error::InvalidParameter(format!(
                "right-hand side c[{i}] = {c} exceeds R = {primal_bound} in magnitude; \
                 such a constraint is either redundant or must be rescaled"
            )));
        }
        Ok(StandardLp { constraints, objective, rhs, primal_bound, dual_bound })
    }

    pub fn constraints(&self) -> &PayoffMatrix {
        &self.constraints
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn primal_bound(&self) -> f64 {
        self.primal_bound
    }

    pub fn dual_bound(&self) -> f64 {
        self.dual_bound
    }

    /// Number of constraints `n`.
    pub fn num_constraints(&self) -> usize {
        self.constraints.rows()
    }

    /// Number of variables `m`.
    pub fn num_variables(&self) -> usize {
        self.constraints.cols()
    }

    /// Game accuracy needed to decide a threshold to within `ε`: `ε/(6R(r+1))`.
    pub fn game_accuracy(&self, epsilon: f64) -> f64 {
        epsilon / (6.0 * self.primal_bound * (self.dual_bound + 1.0))
    }

    /// `bᵀy` and `max_i ((Ay)_i - c_i)`, without touching the query ledger.
    pub fn evaluate(&self, y: &[f64]) -> Result<(f64, f64)> {
        if y.len() != self.num_variables() {
            return Err(Error::DimensionMismatch { expected: self.num_variables(), got: y.len() });
        }
        let objective = self.objective.iter().zip(y).map(|(b, v)| b * v).sum();
        let violation = self
            .constraints
            .materialize()
            .iter()
            .zip(&self.rhs)
            .map(|(row, c)| row.iter().zip(y).map(|(a, v)| a * v).sum::<f64>() - c)
            .fold(f64::NEG_INFINITY, f64::max);
        Ok((objective, violation))
    }
}

/// The threshold game for one `α`.
#[derive(Debug, Clone)]
pub struct GameEmbedding {
    pub matrix: PayoffMatrix,
    pub alpha: f64,
    /// `R`.
    pub scale: f64,
}

/// Builds the `(n+3)×(m+2)` game over columns `(y, z, h)`:
///
/// ```text
///   ( eᵀ    1   -1   )
///   (-eᵀ   -1    1   )
///   (-bᵀ    0   α/R  )
///   ( A     0  -c/R  )
/// ```
///
/// The first two rows together force `Σy + z = h`. The result is stored
/// sparsely when the constraint matrix is.
pub fn build_game_matrix(lp: &StandardLp, alpha: f64) -> Result<GameEmbedding> {
    let r = lp.primal_bound;
    if !(alpha.abs() <= r) {
        return Err(Error::InvalidParameter(format!("threshold {alpha} lies outside [-R, R] = [-{r}, {r}]")));
    }
    let (n, m) = (lp.num_constraints(), lp.num_variables());
    let (z, h) = (m, m + 1);
    let mut triplets = Vec::with_capacity(2 * (m + 2) + m + 1 + n * (m + 1));
    for j in 0..m {
        triplets.push((0, j, 1.0));
        triplets.push((1, j, -1.0));
    }
    triplets.extend([(0, z, 1.0), (0, h, -1.0), (1, z, -1.0), (1, h, 1.0)]);
    for (j, &b) in lp.objective.iter().enumerate() {
        triplets.push((2, j, -b));
    }
    triplets.push((2, h, alpha / r));
    for (i, row) in lp.constraints.materialize().iter().enumerate() {
        for (j, &a) in row.iter().enumerate() {
            triplets.push((3 + i, j, a));
        }
        triplets.push((3 + i, h, -lp.rhs[i] / r));
    }
    let sparse = PayoffMatrix::from_triplets(n + 3, m + 2, &triplets)?;
    let matrix = if lp.constraints.is_sparse() { sparse } else { sparse.to_dense() };
    Ok(GameEmbedding { matrix, alpha, scale: r })
}

/// Maps a feasible `y` with `bᵀy ≥ α` and `Σy ≤ R` to the game strategy
/// `(y/(2R), 1/2 - Σy/(2R), 1/2)`, whose payoff vector is nonpositive.
pub fn embed_feasible_point(lp: &StandardLp, y: &[f64]) -> Result<Vec<f64>> {
    if y.len() != lp.num_variables() {
        return Err(Error::DimensionMismatch { expected: lp.num_variables(), got: y.len() });
    }
    let two_r = 2.0 * lp.primal_bound;
    let mass: f64 = y.iter().sum();
    let mut point: Vec<f64> = y.iter().map(|v| v / two_r).collect();
    point.push(0.5 - mass / two_r);
    point.push(0.5);
    Ok(point)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// The game value is positive: no feasible `y` reaches `α`.
    OptBelowAlpha,
    /// The game value is at most `2ε‴`: `OPT ≥ α - ε`.
    OptAtLeastAlphaMinusEps,
}

#[derive(Debug, Clone)]
pub struct ThresholdDecision {
    pub verdict: Verdict,
    pub alpha: f64,
    /// Estimate of the embedded game's value.
    pub lambda_estimate: f64,
    /// Required game accuracy `ε‴`.
    pub game_accuracy: f64,
    pub duality_gap: f64,
    pub iterations: u64,
    pub queries: QueryCounts,
    /// Column (Bob) strategy over `(y, z, h)`.
    pub bob: Strategy,
}

/// Decides `OPT < α` versus `OPT ≥ α - ε` by solving the embedded game to
/// accuracy `ε‴ = ε/(6R(r+1))`.
///
/// `config` supplies the seed, backend and trace settings; its schedule and
/// failure probability are replaced by `FixedAccuracy(ε‴)` and `delta`.
/// The value estimate is the midpoint of the best-response bounds, which
/// brackets the value, so it is within half the duality gap of it. A run
/// whose measured gap exceeds `ε‴` is reported as an error.
pub fn decide_threshold(
    lp: &StandardLp,
    alpha: f64,
    epsilon: f64,
    delta: f64,
    config: &SolverConfig,
) -> Result<ThresholdDecision> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon {epsilon} must lie in (0, 1)")));
    }
    let embedding = build_game_matrix(lp, alpha)?;
    let matrix = if config.backend.needs_sparse() {
        embedding.matrix.to_sparse()
    } else {
        embedding.matrix
    };
    let accuracy = lp.game_accuracy(epsilon);
    let mut cfg = config.clone();
    cfg.schedule = Schedule::FixedAccuracy { epsilon: accuracy };
    cfg.delta = delta;
    cfg.exact_value = true;

    let mut solver = Solver::new(&matrix, cfg)?;
    solver.run()?;
    let (alice, bob) = solver.strategies()?;
    let bounds = gap_bounds(&matrix, &alice, &bob)?;
    let gap = bounds.gap();
    if gap > accuracy {
        return Err(Error::AccuracyNotReached { gap, target: accuracy });
    }
    let lambda = 0.5 * (bounds.lower + bounds.upper);
    let verdict = if lambda > accuracy {
        Verdict::OptBelowAlpha
    } else {
        Verdict::OptAtLeastAlphaMinusEps
    };
    Ok(ThresholdDecision {
        verdict,
        alpha,
        lambda_estimate: lambda,
        game_accuracy: accuracy,
        duality_gap: gap,
        iterations: solver.iteration(),
        queries: matrix.queries(),
        bob,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub y_hat: Vec<f64>,
    /// `bᵀŷ`.
    pub objective: f64,
    /// `max_i ((Aŷ)_i - c_i)`; nonpositive when `ŷ` is feasible.
    pub max_violation: f64,
    pub opt_estimate: f64,
    /// `|h - 1/2|` of the game strategy the solution came from.
    pub h_deviation: f64,
}

/// `ŷ = 2R·y` from a column strategy `(y, z, h)` of the embedded game.
///
/// Fails if `|h - 1/2| > ε/(6R(r+1))`, which means the strategy did not
/// come from a game solved to the accuracy the guarantees assume.
pub fn extract_primal(strategy: &Strategy, lp: &StandardLp, epsilon: f64) -> Result<LpSolution> {
    let m = lp.num_variables();
    if strategy.len() != m + 2 {
        return Err(Error::DimensionMismatch { expected: m + 2, got: strategy.len() });
    }
    let p = strategy.probs();
    let deviation = (p[m + 1] - 0.5).abs();
    let bound = lp.game_accuracy(epsilon);
    if deviation > bound {
        return Err(Error::ExtractionFailed { deviation, bound });
    }
    let y_hat: Vec<f64> = p[..m].iter().map(|v| 2.0 * lp.primal_bound * v).collect();
    let (objective, max_violation) = lp.evaluate(&y_hat)?;
    Ok(LpSolution { y_hat, objective, max_violation, opt_estimate: objective, h_deviation: deviation })
}

/// One binary-search round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpRound {
    pub alpha: f64,
    pub verdict: Verdict,
    pub lambda_estimate: f64,
    pub duality_gap: f64,
    pub iterations: u64,
    pub queries: QueryCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpReport {
    pub solution: LpSolution,
    pub rounds: Vec<LpRound>,
    /// Final search interval `[lo, hi]`.
    pub lower: f64,
    pub upper: f64,
    pub game_accuracy: f64,
    pub round_delta: f64,
    pub total_queries: QueryCounts,
}

/// `⌈log₂(2R/ε)⌉`.
pub fn search_rounds(primal_bound: f64, epsilon: f64) -> u32 {
    (2.0 * primal_bound / epsilon).log2().ceil().max(1.0) as u32
}

/// Binary search for `OPT` over `[-R, R]`.
///
/// Each round decides the midpoint with failure probability
/// `δ / rounds`; round `k` uses seed `replicate_seed(config.seed, k)`. The
/// returned solution is extracted from the last round that certified its
/// threshold, and `opt_estimate` is the final lower end of the interval.
pub fn binary_search_opt(lp: &StandardLp, epsilon: f64, delta: f64, config: &SolverConfig) -> Result<LpReport> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon {epsilon} must lie in (0, 1)")));
    }
    let rounds = search_rounds(lp.primal_bound, epsilon);
    let round_delta = delta / rounds as f64;
    let (mut lo, mut hi) = (-lp.primal_bound, lp.primal_bound);
    let mut log = Vec::with_capacity(rounds as usize);
    let mut best: Option<Strategy> = None;
    let mut total = QueryCounts::default();

    for k in 0..rounds {
        let alpha = 0.5 * (lo + hi);
        let mut cfg = config.clone();
        cfg.seed = replicate_seed(config.seed, k as u64);
        let d = decide_threshold(lp, alpha, epsilon, round_delta, &cfg)?;
        info!(
            "round {}/{rounds}: alpha={alpha:.6} lambda={:.3e} verdict={:?}",
            k + 1,
            d.lambda_estimate,
            d.verdict
        );
        total += d.queries;
        log.push(LpRound {
            alpha,
            verdict: d.verdict,
            lambda_estimate: d.lambda_estimate,
            duality_gap: d.duality_gap,
            iterations: d.iterations,
            queries: d.queries,
        });
        match d.verdict {
            Verdict::OptBelowAlpha => hi = alpha,
            Verdict::OptAtLeastAlphaMinusEps => {
                lo = alpha;
                best = Some(d.bob);
            }
        }
    }

    let bob = best.ok_or(Error::DegenerateLp(-lp.primal_bound + epsilon))?;
    let mut solution = extract_primal(&bob, lp, epsilon)?;
    solution.opt_estimate = lo;
    Ok(LpReport {
        solution,
        rounds: log,
        lower: lo,
        upper: hi,
        game_accuracy: lp.game_accuracy(epsilon),
        round_delta,
        total_queries: total,
    })
}
