//! Stochastic fictitious play with multiplicative weights.
//!
//! Starting from `x = 0`, `y = 0`, iteration `t` computes the step `η(t)`,
//! samples Bob's column `a ~ G(-Aᵀx)` and Alice's row `b ~ G(Ay)`, then sets
//! `y ← y + η e_a` and `x ← x + η e_b`. The normalized cumulative strategies
//! converge to a Nash equilibrium; with the fixed schedule their duality gap
//! is at most `ε` after `⌈16 ln(nm/δ)/ε²⌉` iterations with probability `1 - δ`.

mod bounds;
mod cost;

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{gap_bounds, PayoffMatrix, QueryCounts, Strategy};
use crate::gibbs::{rejection_gibbs, two_regime_gibbs, u_max_scan, ScoreOracle, ScoreState};
use crate::rng::{stream, SolverRng, Stream};
use crate::tree::SparseWeights;

pub use bounds::{
    anytime_bound, bilinear_value, estimate_value, eta, iterations_needed, log_potential,
    value_samples, Schedule,
};
pub use cost::{lp_cost_projection, quantum_cost_model, CostReport, LpCostProjection, QuantumProjection, PROJECTION_NOTE};

/// Accuracy used for the reported value estimate of anytime runs.
pub const ANYTIME_VALUE_EPSILON: f64 = 0.05;

/// How the Gibbs distributions are represented and sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Backend {
    /// Explicit scores updated with `n + m` entry queries; tree sampling.
    #[serde(rename = "dense")]
    ExactDense,
    /// Explicit scores updated through the sparse oracle; tree sampling.
    #[serde(rename = "sparse")]
    SparseIncremental,
    /// Scores evaluated on demand; uniform proposals shifted by the max score.
    #[serde(rename = "rejection")]
    Rejection,
    /// Scores evaluated on demand; the two-branch sparse sampler.
    #[serde(rename = "two-regime")]
    TwoRegime,
}

impl Backend {
    pub const ALL: [Backend; 4] = [
        Backend::ExactDense,
        Backend::SparseIncremental,
        Backend::Rejection,
        Backend::TwoRegime,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Backend::ExactDense => "dense",
            Backend::SparseIncremental => "sparse",
            Backend::Rejection => "rejection",
            Backend::TwoRegime => "two-regime",
        }
    }

    pub fn needs_sparse(self) -> bool {
        matches!(self, Backend::SparseIncremental | Backend::TwoRegime)
    }

    fn explicit_scores(self) -> bool {
        matches!(self, Backend::ExactDense | Backend::SparseIncremental)
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Backend::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown backend `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub schedule: Schedule,
    /// Failure probability in `(0, 1/3)`.
    pub delta: f64,
    pub seed: u64,
    pub backend: Backend,
    /// Required for the anytime schedule; caps the fixed schedule.
    pub max_iterations: Option<u64>,
    /// Iterations between trace records; 0 disables the trace.
    pub gap_check_period: u64,
    /// Accuracy of the reported value estimate; defaults to the schedule's `ε`.
    pub value_epsilon: Option<f64>,
    /// Report the exact `xᵀAy` instead of a sampled estimate.
    pub exact_value: bool,
    /// Two-regime only: the shift is the scanned max score plus this offset in `[0, 1]`.
    pub shift_offset: f64,
}

impl SolverConfig {
    pub fn fixed(epsilon: f64, delta: f64, seed: u64) -> Self {
        SolverConfig {
            schedule: Schedule::FixedAccuracy { epsilon },
            delta,
            seed,
            backend: Backend::ExactDense,
            max_iterations: None,
            gap_check_period: 0,
            value_epsilon: None,
            exact_value: false,
            shift_offset: 0.0,
        }
    }

    pub fn anytime(max_iterations: u64, delta: f64, seed: u64) -> Self {
        SolverConfig {
            schedule: Schedule::Anytime,
            max_iterations: Some(max_iterations),
            ..SolverConfig::fixed(0.1, delta, seed)
        }
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn with_gap_check_period(mut self, period: u64) -> Self {
        self.gap_check_period = period;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        bounds::check_delta(self.delta)?;
        if self.max_iterations == Some(0) {
            return Err(Error::InvalidParameter("max_iterations must be at least 1".into()));
        }
        if self.schedule == Schedule::Anytime && self.max_iterations.is_none() {
            return Err(Error::InvalidParameter(
                "the anytime schedule needs an iteration cap".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.shift_offset) {
            return Err(Error::InvalidParameter(format!(
                "shift offset {} must lie in [0, 1]",
                self.shift_offset
            )));
        }
        if let Some(e) = self.value_epsilon {
            if !(e > 0.0) {
                return Err(Error::InvalidParameter(format!("value epsilon {e} must be positive")));
            }
        }
        Ok(())
    }

    fn value_epsilon(&self) -> f64 {
        self.value_epsilon.unwrap_or(match self.schedule {
            Schedule::FixedAccuracy { epsilon } => epsilon,
            Schedule::Anytime => ANYTIME_VALUE_EPSILON,
        })
    }
}

/// Oracle calls split by what they were spent on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryBreakdown {
    /// Drawing `a` and `b` (including on-demand score evaluation and max scans).
    pub sampling: QueryCounts,
    /// Incremental score updates of the explicit backends.
    pub score_updates: QueryCounts,
    /// Trace checkpoints and the final duality gap.
    pub diagnostics: QueryCounts,
    /// Value estimation.
    pub value: QueryCounts,
}

impl QueryBreakdown {
    pub fn total(&self) -> QueryCounts {
        self.sampling + self.score_updates + self.diagnostics + self.value
    }
}

/// One trace record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    pub t: u64,
    pub eta: f64,
    pub log_potential: Option<f64>,
    pub gap: Option<f64>,
    /// Cumulative queries of the run up to and including this record.
    pub queries: QueryCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub alice: Strategy,
    pub bob: Strategy,
    pub value_estimate: f64,
    pub duality_gap: f64,
    /// `min_j (Aᵀx)_j`.
    pub lower_bound: f64,
    /// `max_i (Ay)_i`.
    pub upper_bound: f64,
    pub iterations: u64,
    pub ledger: QueryCounts,
    pub breakdown: QueryBreakdown,
    /// Mean proposal rounds per draw for the rejection backends.
    pub mean_proposals: Option<f64>,
    pub trace: Vec<IterationStats>,
}

/// A resumable run.
#[derive(Debug, Clone)]
pub struct Solver<'a> {
    matrix: &'a PayoffMatrix,
    config: SolverConfig,
    t: u64,
    target: u64,
    x: SparseWeights,
    y: SparseWeights,
    scores: Option<ScoreState>,
    bob_rng: SolverRng,
    alice_rng: SolverRng,
    breakdown: QueryBreakdown,
    proposals: u64,
    draws: u64,
    trace: Vec<IterationStats>,
}

impl<'a> Solver<'a> {
    pub fn new(matrix: &'a PayoffMatrix, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        if config.backend.needs_sparse() && !matrix.is_sparse() {
            return Err(Error::BackendStorageMismatch {
                backend: config.backend.name(),
            });
        }
        let target = match config.schedule {
            Schedule::Anytime => config.max_iterations.expect("validated"),
            Schedule::FixedAccuracy { epsilon } => {
                let t = iterations_needed(epsilon, config.delta, matrix.rows(), matrix.cols())?;
                config.max_iterations.map_or(t, |cap| t.min(cap))
            }
        };
        let scores = config
            .backend
            .explicit_scores()
            .then(|| ScoreState::new(matrix.rows(), matrix.cols()));
        Ok(Solver {
            matrix,
            t: 0,
            target,
            x: SparseWeights::new(matrix.rows()),
            y: SparseWeights::new(matrix.cols()),
            scores,
            bob_rng: stream(config.seed, Stream::Bob),
            alice_rng: stream(config.seed, Stream::Alice),
            breakdown: QueryBreakdown::default(),
            proposals: 0,
            draws: 0,
            trace: Vec::new(),
            config,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// Iterations completed.
    pub fn iteration(&self) -> u64 {
        self.t
    }

    /// Iteration at which [`Self::run`] stops.
    pub fn target(&self) -> u64 {
        self.target
    }

    /// Moves the stopping point `additional` iterations further out.
    pub fn extend(&mut self, additional: u64) {
        self.target += additional;
    }

    /// Cumulative row weights `x`.
    pub fn alice_weights(&self) -> &SparseWeights {
        &self.x
    }

    /// Cumulative column weights `y`.
    pub fn bob_weights(&self) -> &SparseWeights {
        &self.y
    }

    /// Explicit scores, for the dense and sparse backends.
    pub fn scores(&self) -> Option<&ScoreState> {
        self.scores.as_ref()
    }

    pub fn trace(&self) -> &[IterationStats] {
        &self.trace
    }

    pub fn breakdown(&self) -> QueryBreakdown {
        self.breakdown
    }

    /// Normalized `(x, y)`; uniform before the first iteration.
    pub fn strategies(&self) -> Result<(Strategy, Strategy)> {
        if self.t == 0 {
            return Ok((Strategy::uniform(self.matrix.rows()), Strategy::uniform(self.matrix.cols())));
        }
        Ok((
            Strategy::from_weights(&self.x.to_dense())?,
            Strategy::from_weights(&self.y.to_dense())?,
        ))
    }

    fn draw(&mut self) -> Result<(usize, usize)> {
        let a = self.matrix;
        match self.config.backend {
            Backend::ExactDense | Backend::SparseIncremental => {
                let scores = self.scores.as_ref().expect("explicit backend");
                Ok((scores.sample_bob(&mut self.bob_rng)?, scores.sample_alice(&mut self.alice_rng)?))
            }
            Backend::Rejection => {
                let bob = ScoreOracle::bob(a);
                let alice = ScoreOracle::alice(a);
                let u_max = u_max_scan(&self.x, &bob)?;
                let col = rejection_gibbs(&self.x, &bob, u_max, &mut self.bob_rng)?;
                let v_max = u_max_scan(&self.y, &alice)?;
                let row = rejection_gibbs(&self.y, &alice, v_max, &mut self.alice_rng)?;
                self.proposals += col.proposals_used + row.proposals_used;
                self.draws += 2;
                Ok((col.index, row.index))
            }
            Backend::TwoRegime => {
                let bob = ScoreOracle::bob(a);
                let alice = ScoreOracle::alice(a);
                let offset = self.config.shift_offset;
                let u_max = u_max_scan(&self.x, &bob)? + offset;
                let beta = self.x.total().max(1.0);
                let col = two_regime_gibbs(&self.x, &bob, beta, u_max, &mut self.bob_rng)?;
                let v_max = u_max_scan(&self.y, &alice)? + offset;
                let beta = self.y.total().max(1.0);
                let row = two_regime_gibbs(&self.y, &alice, beta, v_max, &mut self.alice_rng)?;
                self.proposals += col.proposals_used + row.proposals_used;
                self.draws += 2;
                Ok((col.index, row.index))
            }
        }
    }

    /// Runs one iteration.
    pub fn step(&mut self) -> Result<()> {
        let t = self.t + 1;
        let step = eta(t, self.config.schedule)?;
        let ledger = self.matrix.ledger();

        let before = ledger.snapshot();
        let (bob, alice) = self.draw()?;
        let sampled = ledger.snapshot();
        self.breakdown.sampling += sampled.since(&before);

        match (self.config.backend, self.scores.as_mut()) {
            (Backend::ExactDense, Some(s)) => s.update_dense(self.matrix, bob, alice, step)?,
            (Backend::SparseIncremental, Some(s)) => s.update_sparse(self.matrix, bob, alice, step)?,
            _ => {}
        }
        self.y.add(bob, step)?;
        self.x.add(alice, step)?;
        self.breakdown.score_updates += ledger.snapshot().since(&sampled);
        self.t = t;

        let period = self.config.gap_check_period;
        if period > 0 && t.is_multiple_of(period) {
            self.checkpoint(step)?;
        }
        Ok(())
    }

    fn checkpoint(&mut self, step: f64) -> Result<()> {
        let ledger = self.matrix.ledger();
        let before = ledger.snapshot();
        let log_potential = match &self.scores {
            Some(s) => s.log_potential(),
            None => log_potential(self.matrix, &self.x.to_dense(), &self.y.to_dense())?,
        };
        let (x, y) = self.strategies()?;
        let gap = gap_bounds(self.matrix, &x, &y)?.gap();
        self.breakdown.diagnostics += ledger.snapshot().since(&before);
        debug!("t={} eta={step:.3e} log_phi={log_potential:.6} gap={gap:.6e}", self.t);
        self.trace.push(IterationStats {
            t: self.t,
            eta: step,
            log_potential: Some(log_potential),
            gap: Some(gap),
            queries: self.breakdown.total(),
        });
        Ok(())
    }

    /// Runs until `t` iterations are complete.
    pub fn run_until(&mut self, t: u64) -> Result<()> {
        while self.t < t {
            self.step()?;
        }
        Ok(())
    }

    /// Runs until the target iteration.
    pub fn run(&mut self) -> Result<()> {
        self.run_until(self.target)
    }

    /// Normalized strategies, duality gap and value estimate at the current iterate.
    ///
    /// The value estimate draws from its own seeded stream, so repeated calls
    /// at the same iterate agree.
    pub fn result(&mut self) -> Result<SolveResult> {
        if self.t == 0 {
            return Err(Error::InvalidParameter("no iterations have been run".into()));
        }
        let ledger = self.matrix.ledger();
        let (alice, bob) = self.strategies()?;

        let before = ledger.snapshot();
        let bounds = gap_bounds(self.matrix, &alice, &bob)?;
        self.breakdown.diagnostics += ledger.snapshot().since(&before);

        let before = ledger.snapshot();
        let value_estimate = if self.config.exact_value {
            bilinear_value(self.matrix, &alice, &bob)?
        } else {
            let mut rng = stream(self.config.seed, Stream::Value);
            estimate_value(self.matrix, &alice, &bob, self.config.value_epsilon(), &mut rng)?
        };
        self.breakdown.value += ledger.snapshot().since(&before);

        Ok(SolveResult {
            alice,
            bob,
            value_estimate,
            duality_gap: bounds.gap(),
            lower_bound: bounds.lower,
            upper_bound: bounds.upper,
            iterations: self.t,
            ledger: self.breakdown.total(),
            breakdown: self.breakdown,
            mean_proposals: (self.draws > 0).then(|| self.proposals as f64 / self.draws as f64),
            trace: self.trace.clone(),
        })
    }
}

/// Runs a full solve.
pub fn solve(matrix: &PayoffMatrix, config: SolverConfig) -> Result<SolveResult> {
    let mut solver = Solver::new(matrix, config)?;
    solver.run()?;
    solver.result()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pennies() -> PayoffMatrix {
        PayoffMatrix::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap()
    }

    fn rps() -> PayoffMatrix {
        PayoffMatrix::from_rows(&[
            vec![0.0, -1.0, 1.0],
            vec![1.0, 0.0, -1.0],
            vec![-1.0, 1.0, 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn pennies_fixed_accuracy() {
        let r = solve(&pennies(), SolverConfig::fixed(0.05, 0.1, 42)).unwrap();
        assert!(r.duality_gap <= 0.05, "gap {}", r.duality_gap);
        assert!((r.bob.probs()[0] - 0.5).abs() <= 0.025);
        assert_eq!(r.iterations, iterations_needed(0.05, 0.1, 2, 2).unwrap());
    }

    #[test]
    fn rps_value_near_zero() {
        let r = solve(&rps(), SolverConfig::fixed(0.05, 0.1, 7)).unwrap();
        assert!(r.value_estimate.abs() <= 0.05);
        assert!(r.duality_gap <= 0.05);
    }

    #[test]
    fn one_by_one_game() {
        let a = PayoffMatrix::from_rows(&[vec![0.3]]).unwrap();
        let mut s = Solver::new(&a, SolverConfig::anytime(1, 0.1, 1)).unwrap();
        s.run().unwrap();
        let r = s.result().unwrap();
        assert_eq!(r.alice.probs(), &[1.0]);
        assert_eq!(r.bob.probs(), &[1.0]);
        assert_eq!(r.duality_gap, 0.0);
        assert!((r.value_estimate - 0.3).abs() < 1e-12);
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn config_errors() {
        let a = pennies();
        let mut cfg = SolverConfig::fixed(0.1, 0.1, 1);
        cfg.schedule = Schedule::Anytime;
        assert!(Solver::new(&a, cfg).is_err());
        let cfg = SolverConfig::fixed(0.1, 0.1, 1).with_backend(Backend::SparseIncremental);
        assert!(matches!(
            Solver::new(&a, cfg.clone()),
            Err(Error::BackendStorageMismatch { .. })
        ));
        assert!(Solver::new(&a.to_sparse(), cfg).is_ok());
        assert!(Solver::new(&a, SolverConfig::fixed(0.1, 0.5, 1)).is_err());
        assert!(Solver::new(&a, SolverConfig::fixed(1.5, 0.1, 1)).is_err());
        assert!(Solver::new(&a, SolverConfig::anytime(0, 0.1, 1)).is_err());
    }

    #[test]
    fn masses_match_step_sums() {
        let a = rps();
        let mut s = Solver::new(&a, SolverConfig::anytime(500, 0.1, 3)).unwrap();
        let mut sum = 0.0;
        for t in 1..=500u64 {
            s.step().unwrap();
            sum += eta(t, Schedule::Anytime).unwrap();
            assert_eq!(s.alice_weights().total(), s.bob_weights().total());
            assert_eq!(s.alice_weights().total(), sum);
            let (x, y) = s.strategies().unwrap();
            assert!((x.probs().iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!((y.probs().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn deterministic_per_backend() {
        let a = rps().to_sparse();
        for backend in Backend::ALL {
            let cfg = SolverConfig::fixed(0.3, 0.1, 99).with_backend(backend).with_gap_check_period(50);
            let r1 = solve(&a, cfg.clone()).unwrap();
            let r2 = solve(&a, cfg).unwrap();
            assert_eq!(r1, r2, "{backend:?}");
        }
    }

    #[test]
    fn resumable_matches_single_run() {
        let a = rps();
        let mut once = Solver::new(&a, SolverConfig::anytime(300, 0.1, 5)).unwrap();
        once.run().unwrap();
        let b = rps();
        let mut twice = Solver::new(&b, SolverConfig::anytime(100, 0.1, 5)).unwrap();
        twice.run().unwrap();
        twice.extend(200);
        twice.run().unwrap();
        assert_eq!(once.strategies().unwrap(), twice.strategies().unwrap());
    }

    #[test]
    fn trace_records_every_period() {
        let a = pennies();
        let r = solve(&a, SolverConfig::anytime(1000, 0.1, 2).with_gap_check_period(100)).unwrap();
        let ts: Vec<u64> = r.trace.iter().map(|s| s.t).collect();
        assert_eq!(ts, (1..=10).map(|k| k * 100).collect::<Vec<_>>());
        assert!(r.trace.windows(2).all(|w| w[1].queries.total() > w[0].queries.total()));
        assert_eq!(r.ledger, r.breakdown.total());
        assert_eq!(r.ledger, a.queries());
    }

    #[test]
    fn backend_parsing() {
        for b in Backend::ALL {
            assert_eq!(b.name().parse::<Backend>().unwrap(), b);
        }
        assert!("simplex".parse::<Backend>().is_err());
    }
}
