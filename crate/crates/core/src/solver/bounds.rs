//! Step sizes, iteration counts, accuracy bounds and the potential function.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{PayoffMatrix, Strategy};
use crate::gibbs::log_sum_exp;
use crate::tree::WeightTree;

/// Step-size schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Schedule {
    /// `η(t) = 1/(2√t)`; accuracy improves for as long as the run continues.
    Anytime,
    /// `η(t) = ε/4`, run for a precomputed number of iterations.
    FixedAccuracy { epsilon: f64 },
}

impl Schedule {
    pub fn fixed(epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(Schedule::FixedAccuracy { epsilon })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Schedule::Anytime => Ok(()),
            Schedule::FixedAccuracy { epsilon } => check_epsilon(epsilon),
        }
    }
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("epsilon {epsilon} must lie in (0, 1)")))
    }
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 / 3.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("delta {delta} must lie in (0, 1/3)")))
    }
}

/// Step size at iteration `t ≥ 1`.
pub fn eta(t: u64, schedule: Schedule) -> Result<f64> {
    if t == 0 {
        return Err(Error::InvalidParameter("iterations are numbered from 1".into()));
    }
    Ok(match schedule {
        Schedule::Anytime => 0.5 / (t as f64).sqrt(),
        Schedule::FixedAccuracy { epsilon } => epsilon / 4.0,
    })
}

/// `⌈16 ln(nm/δ) / ε²⌉`, the fixed-accuracy iteration count.
pub fn iterations_needed(epsilon: f64, delta: f64, rows: usize, cols: usize) -> Result<u64> {
    check_epsilon(epsilon)?;
    check_delta(delta)?;
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidParameter("dimensions must be positive".into()));
    }
    let nm = rows as f64 * cols as f64;
    Ok((16.0 * (nm / delta).ln() / (epsilon * epsilon)).ceil() as u64)
}

/// `(2/√t)·(3 ln t + ln(nm) + ln(1/δ) + 2)`: the accuracy that holds at every
/// `t` simultaneously with probability `1 - δ` under the anytime schedule.
pub fn anytime_bound(t: u64, rows: usize, cols: usize, delta: f64) -> f64 {
    let t = t.max(1) as f64;
    let nm = rows as f64 * cols as f64;
    2.0 / t.sqrt() * (3.0 * t.ln() + nm.ln() + (1.0 / delta).ln() + 2.0)
}

/// `ln Φ` with `Φ = (Σ_j exp(-(Aᵀx)_j)) · (Σ_i exp((Ay)_i))` for raw
/// (unnormalized) cumulative weights. Costs two full matrix-vector products.
pub fn log_potential(a: &PayoffMatrix, x: &[f64], y: &[f64]) -> Result<f64> {
    let u: Vec<f64> = a.mul_transpose_vec(x)?.into_iter().map(|v| -v).collect();
    let v = a.mul_vec(y)?;
    Ok(log_sum_exp(&u) + log_sum_exp(&v))
}

/// Number of play-outs used by [`estimate_value`]: `⌈8/ε²⌉`.
pub fn value_samples(epsilon: f64) -> u64 {
    (8.0 / (epsilon * epsilon)).ceil() as u64
}

/// Estimates `xᵀAy` by averaging `⌈8/ε²⌉` sampled payoffs `A[i][j]`,
/// `i ~ x`, `j ~ y`. By Hoeffding the result is within `ε` of `xᵀAy` with
/// probability at least `1 - 2e⁻⁴`.
pub fn estimate_value<R: Rng + ?Sized>(
    a: &PayoffMatrix,
    x: &Strategy,
    y: &Strategy,
    epsilon: f64,
    rng: &mut R,
) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon {epsilon} must be positive")));
    }
    if x.len() != a.rows() || y.len() != a.cols() {
        return Err(Error::DimensionMismatch {
            expected: a.rows() + a.cols(),
            got: x.len() + y.len(),
        });
    }
    let rows = WeightTree::from_weights(x.probs())?;
    let cols = WeightTree::from_weights(y.probs())?;
    let k = value_samples(epsilon);
    let mut sum = 0.0;
    for _ in 0..k {
        let i = rows.sample(rng)?;
        let j = cols.sample(rng)?;
        sum += a.entry(i, j)?;
    }
    Ok(sum / k as f64)
}

/// Exact `xᵀAy` with `n·m` entry queries.
pub fn bilinear_value(a: &PayoffMatrix, x: &Strategy, y: &Strategy) -> Result<f64> {
    let ay = a.mul_vec(y.probs())?;
    Ok(x.probs().iter().zip(&ay).map(|(p, v)| p * v).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn eta_examples() {
        assert_eq!(eta(1, Schedule::Anytime).unwrap(), 0.5);
        assert_eq!(eta(4, Schedule::Anytime).unwrap(), 0.25);
        let fixed = Schedule::fixed(0.1).unwrap();
        assert_eq!(eta(1, fixed).unwrap(), 0.025);
        assert_eq!(eta(1000, fixed).unwrap(), 0.025);
        assert!(eta(0, Schedule::Anytime).is_err());
    }

    #[test]
    fn iteration_examples() {
        assert_eq!(iterations_needed(0.1, 0.01, 10, 10).unwrap(), 14737);
        assert_eq!(iterations_needed(0.5, 0.25, 1, 1).unwrap(), 89);
        assert!(iterations_needed(1.0, 0.1, 2, 2).is_err());
        assert!(iterations_needed(0.1, 1.0 / 3.0, 2, 2).is_err());
        assert!(iterations_needed(0.1, 0.0, 2, 2).is_err());
    }

    #[test]
    fn doubling_nm_adds_bounded_iterations() {
        for eps in [0.05, 0.1, 0.3] {
            for nm in [1usize, 3, 10, 77] {
                let base = iterations_needed(eps, 0.1, nm, 1).unwrap();
                let doubled = iterations_needed(eps, 0.1, 2 * nm, 1).unwrap();
                let step = (16.0 * 2f64.ln() / (eps * eps)).ceil() as u64;
                assert!(doubled >= base && doubled - base <= step);
            }
        }
    }

    #[test]
    fn anytime_bound_examples() {
        let delta = (-2f64).exp();
        assert!((anytime_bound(1, 1, 1, delta) - 8.0).abs() < 1e-12);
        for t in 8..5000u64 {
            assert!(anytime_bound(t + 1, 10, 10, 0.1) < anytime_bound(t, 10, 10, 0.1));
        }
        // Linear in ln(1/δ) with slope 2/√t.
        let t = 400;
        let diff = anytime_bound(t, 3, 4, 0.01) - anytime_bound(t, 3, 4, 0.1);
        assert!((diff - 2.0 / 20.0 * 10f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn potential_examples() {
        let a = PayoffMatrix::from_dense(3, 4, vec![0.2; 12]).unwrap();
        let lp = log_potential(&a, &[0.0; 3], &[0.0; 4]).unwrap();
        assert!((lp - 12f64.ln()).abs() < 1e-12);
        let z = PayoffMatrix::from_rows(&[vec![0.0]]).unwrap();
        assert_eq!(log_potential(&z, &[5.0], &[2.0]).unwrap(), 0.0);
    }

    #[test]
    fn value_estimate_examples() {
        let a = PayoffMatrix::from_rows(&[vec![1.0, -1.0], vec![-1.0, 0.5]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let v = estimate_value(&a, &Strategy::point_mass(2, 1), &Strategy::point_mass(2, 1), 0.3, &mut rng)
            .unwrap();
        assert_eq!(v, 0.5);
        assert_eq!(a.queries().dense_entry_queries, value_samples(0.3));
        assert_eq!(value_samples(0.05), 3200);

        let pennies = PayoffMatrix::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        let half = Strategy::uniform(2);
        assert_eq!(bilinear_value(&pennies, &half, &half).unwrap(), 0.0);
        let v = estimate_value(&pennies, &half, &half, 0.05, &mut rng).unwrap();
        assert!(v.abs() <= 0.05);
    }
}
