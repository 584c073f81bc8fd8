//! Rejection samplers that evaluate scores on demand.
//!
//! Both samplers draw from `G(score)` exactly without ever forming the full
//! score vector. Each proposal evaluates one score from the support of the
//! cumulative strategy, costing `|supp(x)|` entry queries.

use std::f64::consts::E;

use rand::Rng;

use super::{gibbs_exact, ScoreOracle};
use crate::error::{Error, Result};
use crate::tree::{SparseWeights, WeightTree};

/// Proposal rounds allowed before a sampler reports failure.
pub const ROUND_CAP: u64 = 1_000_000;

/// Slack allowed when checking that a shift dominates every score.
const SHIFT_TOLERANCE: f64 = 1e-9;

/// One draw plus the work it took.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GibbsSample {
    pub index: usize,
    /// Proposal rounds, including the accepted one. Zero for tree sampling.
    pub proposals_used: u64,
    /// Oracle calls made for this draw.
    pub queries_used: u64,
}

fn check_probability(p: f64) -> Result<()> {
    if p <= 1.0 + 1e-12 {
        Ok(())
    } else {
        Err(Error::AcceptanceAboveOne(p))
    }
}

fn check_shift(score: f64, shift: f64) -> Result<()> {
    if score <= shift + SHIFT_TOLERANCE {
        Ok(())
    } else {
        Err(Error::ShiftTooSmall { shift, max: score })
    }
}

fn check_weights(x: &SparseWeights, oracle: &ScoreOracle<'_>) -> Result<()> {
    if x.dim() == oracle.weight_dim() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: oracle.weight_dim(),
            got: x.dim(),
        })
    }
}

/// Computes every score, then draws from the exact Gibbs distribution.
pub fn exact_gibbs_sample<R: Rng + ?Sized>(
    x: &SparseWeights,
    oracle: &ScoreOracle<'_>,
    rng: &mut R,
) -> Result<GibbsSample> {
    check_weights(x, oracle)?;
    let scores = oracle.all_scores(x)?;
    let tree = WeightTree::from_weights(&gibbs_exact(&scores)?)?;
    Ok(GibbsSample {
        index: tree.sample(rng)?,
        proposals_used: 0,
        queries_used: (oracle.dim() * x.support_len()) as u64,
    })
}

/// Uniform proposals accepted with probability `exp(score_j - u_max)`.
///
/// `u_max` must dominate every score; the expected number of rounds is
/// `m · exp(u_max) / Σ_j exp(score_j)`.
pub fn rejection_gibbs<R: Rng + ?Sized>(
    x: &SparseWeights,
    oracle: &ScoreOracle<'_>,
    u_max: f64,
    rng: &mut R,
) -> Result<GibbsSample> {
    check_weights(x, oracle)?;
    let m = oracle.dim();
    let cost = x.support_len() as u64;
    let mut queries = 0;
    for round in 1..=ROUND_CAP {
        let j = rng.gen_range(0..m);
        let (score, _) = oracle.score(x, j)?;
        queries += cost;
        check_shift(score, u_max)?;
        let accept = (score - u_max).exp();
        if rng.gen::<f64>() < accept {
            return Ok(GibbsSample {
                index: j,
                proposals_used: round,
                queries_used: queries,
            });
        }
    }
    Err(Error::RoundCapExceeded(ROUND_CAP))
}

/// Piecewise-linear ramp: 0 below 1/2, 1 above 1, linear in between.
pub fn ramp(w: f64) -> f64 {
    (2.0 * w - 1.0).clamp(0.0, 1.0)
}

/// Mixture weights of the two branches, kept in log space so large shifts
/// do not overflow. Returns the probability of the uniform branch.
fn uniform_branch_probability(m: usize, beta: f64, s: usize, shift: f64) -> f64 {
    if s == 0 {
        return 1.0;
    }
    let log_uniform = (16.0 * E * m as f64).ln();
    let log_support = (64.0 * beta * s as f64).ln() + shift;
    1.0 / (1.0 + (log_support - log_uniform).exp())
}

fn check_two_regime(x: &SparseWeights, oracle: &ScoreOracle<'_>, beta: f64) -> Result<()> {
    check_weights(x, oracle)?;
    if !oracle.matrix().is_sparse() {
        return Err(Error::SparseUnavailable);
    }
    if !(beta >= 1.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("beta {beta} must be at least 1")));
    }
    if x.total() > beta * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "‖x‖₁ = {} exceeds beta = {beta}",
            x.total()
        )));
    }
    Ok(())
}

/// Two-branch sampler for sparse matrices with `‖x‖₁ ≤ β`.
///
/// Let `w_j = Σ_i x_i |A_ij|` and `N = 16em + 64βs·exp(ũ)`. With probability
/// `16em/N` the uniform branch proposes `j` uniformly and accepts with
/// `(1 - Q(w_j)²) · exp(u_j - 1) / 16`; it covers coordinates with small
/// `w_j`, where `|u_j| ≤ w_j < 1`. Otherwise the support branch proposes `i`
/// with probability `x_i/β`, a rank `k` uniformly in `[s]` and takes the
/// `k`-th nonzero `A_ij` of line `i` (failing if the line is shorter); it keeps
/// that proposal with probability `|A_ij|`, so `j` is proposed with probability
/// `w_j/(βs)`, then accepts with `Q(w_j)² · exp(u_j - ũ) / (64 w_j)`. The two
/// yields for `j` add up to `exp(u_j)/N`, so an accepted draw is exactly
/// Gibbs distributed.
pub fn two_regime_gibbs<R: Rng + ?Sized>(
    x: &SparseWeights,
    oracle: &ScoreOracle<'_>,
    beta: f64,
    u_max_approx: f64,
    rng: &mut R,
) -> Result<GibbsSample> {
    check_two_regime(x, oracle, beta)?;
    let m = oracle.dim();
    let s = oracle.line_sparsity();
    let cost = x.support_len() as u64;
    let p_uniform = uniform_branch_probability(m, beta, s, u_max_approx);
    let mass = x.total();
    let mut queries = 0;

    for round in 1..=ROUND_CAP {
        if rng.gen::<f64>() < p_uniform {
            let j = rng.gen_range(0..m);
            let (u, w) = oracle.score(x, j)?;
            queries += cost;
            check_shift(u, u_max_approx)?;
            let q = ramp(w);
            let accept = (1.0 - q * q) * (u - 1.0).exp() / 16.0;
            check_probability(accept)?;
            if rng.gen::<f64>() < accept {
                return Ok(GibbsSample {
                    index: j,
                    proposals_used: round,
                    queries_used: queries,
                });
            }
            continue;
        }

        if rng.gen::<f64>() * beta >= mass {
            continue;
        }
        let line = x.sample(rng)?;
        let rank = rng.gen_range(0..s);
        if rank >= oracle.line_nnz(line)? {
            continue;
        }
        let (j, a) = oracle.line_nonzero(line, rank)?;
        queries += 1;
        if rng.gen::<f64>() >= a.abs() {
            continue;
        }
        let (u, w) = oracle.score(x, j)?;
        queries += cost;
        check_shift(u, u_max_approx)?;
        let q = ramp(w);
        let accept = q * q * (u - u_max_approx).exp() / (64.0 * w);
        check_probability(accept)?;
        if rng.gen::<f64>() < accept {
            return Ok(GibbsSample {
                index: j,
                proposals_used: round,
                queries_used: queries,
            });
        }
    }
    Err(Error::RoundCapExceeded(ROUND_CAP))
}

/// Per-round probabilities that the two-branch sampler outputs `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchYields {
    /// Probability a round picks the uniform branch and accepts `j`.
    pub uniform: f64,
    /// Probability a round picks the support branch and accepts `j`.
    pub support: f64,
    /// `N = 16em + 64βs·exp(ũ)`.
    pub normalizer: f64,
    /// `u_j`.
    pub score: f64,
}

/// Evaluates both branch yields for coordinate `j` by walking every path the
/// sampler can take to it.
pub fn two_regime_yields(
    x: &SparseWeights,
    oracle: &ScoreOracle<'_>,
    beta: f64,
    u_max_approx: f64,
    j: usize,
) -> Result<BranchYields> {
    check_two_regime(x, oracle, beta)?;
    let m = oracle.dim();
    let s = oracle.line_sparsity();
    let p_uniform = uniform_branch_probability(m, beta, s, u_max_approx);
    let (u, w) = oracle.score(x, j)?;
    let q = ramp(w);

    let uniform = p_uniform * (1.0 / m as f64) * (1.0 - q * q) * (u - 1.0).exp() / 16.0;

    let mut proposal = 0.0;
    for (line, weight) in x.support() {
        for rank in 0..oracle.line_nnz(line)? {
            let (col, a) = oracle.line_nonzero(line, rank)?;
            if col == j {
                proposal += (weight / beta) * (1.0 / s as f64) * a.abs();
            }
        }
    }
    let support = if proposal > 0.0 {
        (1.0 - p_uniform) * proposal * q * q * (u - u_max_approx).exp() / (64.0 * w)
    } else {
        0.0
    };
    let normalizer = 16.0 * E * m as f64 + 64.0 * beta * s as f64 * u_max_approx.exp();
    Ok(BranchYields {
        uniform,
        support,
        normalizer,
        score: u,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::PayoffMatrix;
    use crate::gibbs::u_max_scan;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pennies() -> PayoffMatrix {
        PayoffMatrix::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap()
    }

    #[test]
    fn zero_scores_accept_first_proposal() {
        let a = PayoffMatrix::from_dense(3, 5, vec![0.3; 15]).unwrap();
        let o = ScoreOracle::columns(&a);
        let x = SparseWeights::new(3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut counts = [0usize; 5];
        for _ in 0..50_000 {
            let s = rejection_gibbs(&x, &o, 0.0, &mut rng).unwrap();
            assert_eq!(s.proposals_used, 1);
            assert_eq!(s.queries_used, 0);
            counts[s.index] += 1;
        }
        assert!(counts.iter().all(|&c| (c as f64 / 50_000.0 - 0.2).abs() < 0.01));
    }

    #[test]
    fn flat_scores_accept_immediately() {
        let a = PayoffMatrix::from_dense(2, 4, vec![0.5; 8]).unwrap();
        let o = ScoreOracle::columns(&a);
        let x = SparseWeights::from_dense(&[1.0, 2.0]).unwrap();
        let u_max = u_max_scan(&x, &o).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let s = rejection_gibbs(&x, &o, u_max, &mut rng).unwrap();
            assert_eq!(s.proposals_used, 1);
            assert_eq!(s.queries_used, 2);
        }
    }

    #[test]
    fn pennies_rejection_frequency() {
        let a = pennies();
        let o = ScoreOracle::columns(&a);
        let x = SparseWeights::from_dense(&[1.0, 0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 200_000;
        let hits = (0..n)
            .filter(|_| rejection_gibbs(&x, &o, 1.0, &mut rng).unwrap().index == 0)
            .count();
        let want = E / (E + 1.0 / E);
        assert!((want - 0.880_797).abs() < 1e-6);
        assert!((hits as f64 / n as f64 - want).abs() < 0.004);
    }

    #[test]
    fn shift_below_max_is_rejected() {
        let a = pennies();
        let o = ScoreOracle::columns(&a);
        let x = SparseWeights::from_dense(&[1.0, 0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let err = (0..100)
            .find_map(|_| rejection_gibbs(&x, &o, 0.5, &mut rng).err())
            .expect("column 0 scores 1 > 0.5");
        assert!(matches!(err, Error::ShiftTooSmall { .. }));
    }

    #[test]
    fn round_cap_reports_failure() {
        // Scores 0 against a shift of 40: acceptance exp(-40).
        let a = PayoffMatrix::from_dense(1, 3, vec![0.0; 3]).unwrap();
        let o = ScoreOracle::columns(&a);
        let x = SparseWeights::new(1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(
            rejection_gibbs(&x, &o, 40.0, &mut rng),
            Err(Error::RoundCapExceeded(ROUND_CAP))
        );
    }

    #[test]
    fn ramp_shape() {
        assert_eq!(ramp(0.0), 0.0);
        assert_eq!(ramp(0.5), 0.0);
        assert_eq!(ramp(0.75), 0.5);
        assert_eq!(ramp(1.0), 1.0);
        assert_eq!(ramp(7.0), 1.0);
    }

    #[test]
    fn two_regime_zero_weights_is_uniform() {
        let a = PayoffMatrix::from_triplets(4, 6, &[(0, 0, 1.0), (1, 3, -0.5), (3, 5, 0.25)]).unwrap();
        let o = ScoreOracle::columns(&a);
        let x = SparseWeights::new(4);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut counts = [0usize; 6];
        let n = 60_000;
        for _ in 0..n {
            counts[two_regime_gibbs(&x, &o, 1.0, 0.0, &mut rng).unwrap().index] += 1;
        }
        assert!(counts.iter().all(|&c| (c as f64 / n as f64 - 1.0 / 6.0).abs() < 0.01));
    }

    #[test]
    fn two_regime_rejects_bad_parameters() {
        let a = PayoffMatrix::from_triplets(2, 2, &[(0, 0, 1.0)]).unwrap();
        let o = ScoreOracle::columns(&a);
        let x = SparseWeights::from_dense(&[3.0, 0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert!(two_regime_gibbs(&x, &o, 2.0, 3.0, &mut rng).is_err());
        assert!(two_regime_gibbs(&x, &o, 0.5, 3.0, &mut rng).is_err());
        let dense = pennies();
        assert_eq!(
            two_regime_gibbs(&x, &ScoreOracle::columns(&dense), 3.0, 3.0, &mut rng),
            Err(Error::SparseUnavailable)
        );
    }

    #[test]
    fn yields_add_up_per_coordinate() {
        let a = PayoffMatrix::from_triplets(
            3,
            5,
            &[
                (0, 0, 0.9),
                (0, 2, -0.4),
                (1, 1, 0.7),
                (1, 2, 0.3),
                (1, 4, -1.0),
                (2, 3, 0.5),
                (2, 4, 0.2),
            ],
        )
        .unwrap();
        let o = ScoreOracle::columns(&a);
        let x = SparseWeights::from_dense(&[0.8, 0.6, 1.1]).unwrap();
        let beta = 3.0;
        let umax = u_max_scan(&x, &o).unwrap();
        for shift in [umax, umax + 0.5, umax + 1.0] {
            for j in 0..5 {
                let y = two_regime_yields(&x, &o, beta, shift, j).unwrap();
                let want = y.score.exp() / y.normalizer;
                assert!(
                    (y.uniform + y.support - want).abs() <= 1e-12 * want.max(1e-300),
                    "j={j}: {} + {} vs {want}",
                    y.uniform,
                    y.support
                );
            }
        }
    }
}
