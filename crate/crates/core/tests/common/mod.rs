#![allow(dead_code, clippy::needless_range_loop)]

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use zsg_core::tree::SparseWeights;
use zsg_core::PayoffMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn dense_game(rng: &mut impl Rng, n: usize, m: usize) -> PayoffMatrix {
    let entries = (0..n * m).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    PayoffMatrix::from_dense(n, m, entries).unwrap()
}

/// Every row has exactly `s` nonzeros at random columns.
pub fn sparse_game(rng: &mut impl Rng, n: usize, m: usize, s: usize) -> PayoffMatrix {
    let mut triplets = Vec::new();
    for i in 0..n {
        for j in index::sample(rng, m, s) {
            let mut v: f64 = rng.gen_range(-1.0..=1.0);
            if v == 0.0 {
                v = 0.5;
            }
            triplets.push((i, j, v));
        }
    }
    PayoffMatrix::from_triplets(n, m, &triplets).unwrap()
}

/// Random weights on `support` distinct coordinates of `[dim]`, summing to `mass`.
pub fn sparse_weights(rng: &mut impl Rng, dim: usize, support: usize, mass: f64) -> SparseWeights {
    let idx = index::sample(rng, dim, support).into_vec();
    let raw: Vec<f64> = idx.iter().map(|_| rng.gen_range(0.1..1.0)).collect();
    let sum: f64 = raw.iter().sum();
    let mut w = SparseWeights::new(dim);
    for (i, r) in idx.into_iter().zip(raw) {
        w.add(i, mass * r / sum).unwrap();
    }
    w
}

/// Independent reference: `exp(s_j - max) / Σ exp(s_k - max)`.
pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|v| v / z).collect()
}

/// Pearson goodness-of-fit p-value. Cells with expected count below 5 are
/// pooled into one cell (dropped if the pool is still below 5).
pub fn chi_square_p_value(counts: &[u64], probs: &[f64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let n = total as f64;
    let (mut stat, mut cells) = (0.0, 0usize);
    let (mut pool_obs, mut pool_exp) = (0.0, 0.0);
    for (&c, &p) in counts.iter().zip(probs) {
        let e = n * p;
        if e < 5.0 {
            pool_obs += c as f64;
            pool_exp += e;
        } else {
            stat += (c as f64 - e).powi(2) / e;
            cells += 1;
        }
    }
    if pool_exp >= 5.0 {
        stat += (pool_obs - pool_exp).powi(2) / pool_exp;
        cells += 1;
    }
    if cells < 2 {
        return 1.0;
    }
    1.0 - ChiSquared::new((cells - 1) as f64).unwrap().cdf(stat)
}

/// Solves the square system `m x = rhs` by Gaussian elimination with
/// partial pivoting; `None` if singular.
pub fn solve_linear(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let k = rhs.len();
    for col in 0..k {
        let piv = (col..k).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-10 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..k {
            let f = m[r][col] / m[col][col];
            for c in col..k {
                m[r][c] -= f * m[col][c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; k];
    for r in (0..k).rev() {
        let s: f64 = (r + 1..k).map(|c| m[r][c] * x[c]).sum();
        x[r] = (rhs[r] - s) / m[r][r];
    }
    Some(x)
}

fn subsets(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for i in start..n {
        cur.push(i);
        subsets(n, k, i + 1, cur, out);
        cur.pop();
    }
}

/// `max objᵀy s.t. G y ≤ h` by vertex enumeration; the region must be
/// pointed and the optimum finite. Returns the optimum and a maximizer.
pub fn lp_max_by_vertices(g: &[Vec<f64>], h: &[f64], obj: &[f64]) -> Option<(f64, Vec<f64>)> {
    let dim = obj.len();
    let mut all = Vec::new();
    subsets(g.len(), dim, 0, &mut Vec::new(), &mut all);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for s in all {
        let m: Vec<Vec<f64>> = s.iter().map(|&i| g[i].clone()).collect();
        let rhs: Vec<f64> = s.iter().map(|&i| h[i]).collect();
        let Some(y) = solve_linear(m, rhs) else { continue };
        let feasible = g
            .iter()
            .zip(h)
            .all(|(row, &hi)| row.iter().zip(&y).map(|(a, v)| a * v).sum::<f64>() <= hi + 1e-9);
        if feasible {
            let val: f64 = obj.iter().zip(&y).map(|(a, v)| a * v).sum();
            if best.as_ref().is_none_or(|(b, _)| val > *b) {
                best = Some((val, y));
            }
        }
    }
    best
}

/// `OPT` of `max bᵀy s.t. Ay ≤ c, y ≥ 0` and a maximizer.
pub fn primal_opt(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Option<(f64, Vec<f64>)> {
    let m = b.len();
    let mut g: Vec<Vec<f64>> = a.to_vec();
    let mut h = c.to_vec();
    for j in 0..m {
        let mut row = vec![0.0; m];
        row[j] = -1.0;
        g.push(row);
        h.push(0.0);
    }
    lp_max_by_vertices(&g, &h, b)
}

/// Optimum of the dual `min cᵀx s.t. Aᵀx ≥ b, x ≥ 0` and a minimizer.
pub fn dual_opt(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Option<(f64, Vec<f64>)> {
    let (n, m) = (c.len(), b.len());
    let mut g = Vec::new();
    let mut h = Vec::new();
    for j in 0..m {
        g.push((0..n).map(|i| -a[i][j]).collect());
        h.push(-b[j]);
    }
    for i in 0..n {
        let mut row = vec![0.0; n];
        row[i] = -1.0;
        g.push(row);
        h.push(0.0);
    }
    let neg: Vec<f64> = c.iter().map(|v| -v).collect();
    lp_max_by_vertices(&g, &h, &neg).map(|(v, x)| (-v, x))
}
