mod common;

use proptest::prelude::*;
use rand::Rng;
use zsg_core::game::PayoffMatrix;
use zsg_core::lp::{
    binary_search_opt, build_game_matrix, decide_threshold, embed_feasible_point, StandardLp, Verdict,
};
use zsg_core::solver::SolverConfig;
use zsg_core::Error;

use common::{dual_opt, primal_opt, rng};

fn lp(rows: &[Vec<f64>], b: &[f64], c: &[f64], r_bound: f64, dual: f64) -> StandardLp {
    StandardLp::new(PayoffMatrix::from_rows(rows).unwrap(), b.to_vec(), c.to_vec(), r_bound, dual).unwrap()
}

#[test]
fn oracle_solves_the_box_lp() {
    let a = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    let (opt, y) = primal_opt(&a, &[1.0, 1.0], &[0.3, 0.4]).unwrap();
    assert!((opt - 0.7).abs() < 1e-12);
    assert!((y[0] - 0.3).abs() < 1e-12 && (y[1] - 0.4).abs() < 1e-12);
    let (dual, x) = dual_opt(&a, &[1.0, 1.0], &[0.3, 0.4]).unwrap();
    assert!((dual - 0.7).abs() < 1e-12);
    assert!((x.iter().sum::<f64>() - 2.0).abs() < 1e-12);
}

#[test]
fn zero_optimum_probe() {
    let p = lp(&[vec![1.0]], &[1.0], &[0.0], 1.0, 1.0);
    let report = binary_search_opt(&p, 0.2, 0.1, &SolverConfig::fixed(0.2, 0.1, 3)).unwrap();
    let s = &report.solution;
    assert!(s.opt_estimate.abs() <= 0.2, "{}", s.opt_estimate);
    assert!(s.max_violation <= 0.2);
    assert_eq!(report.rounds.len(), 4);
}

#[test]
fn negative_optimum_below_the_search_range_is_reported() {
    // max -y₁ s.t. y₁ ≥ 0.95: OPT = -0.95, below -R + ε.
    let p = lp(&[vec![-1.0]], &[-1.0], &[-0.95], 1.0, 1.0);
    match binary_search_opt(&p, 0.2, 0.1, &SolverConfig::fixed(0.2, 0.1, 3)) {
        Err(Error::DegenerateLp(bound)) => assert!((bound + 0.8).abs() < 1e-12),
        Ok(r) => assert!(r.solution.opt_estimate <= -0.95 + 0.2, "{:?}", r.solution),
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn feasibility_is_monotone_in_the_threshold() {
    let box_lp = lp(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[1.0, 1.0], &[0.3, 0.4], 1.0, 2.0);
    let eps = 0.2;
    let cfg = SolverConfig::fixed(eps, 0.1, 17);
    let high = decide_threshold(&box_lp, 0.65, eps, 0.1, &cfg).unwrap();
    assert_eq!(high.verdict, Verdict::OptAtLeastAlphaMinusEps);
    for alpha in [0.2, 0.0, -0.5, -1.0] {
        let d = decide_threshold(&box_lp, alpha, eps, 0.1, &cfg).unwrap();
        assert_eq!(d.verdict, Verdict::OptAtLeastAlphaMinusEps, "alpha {alpha}");
    }
    let d = decide_threshold(&box_lp, 1.0, eps, 0.1, &cfg).unwrap();
    assert_eq!(d.verdict, Verdict::OptBelowAlpha);
}

/// A random LP whose primal optimum has ℓ₁-norm at most 1 (first row is
/// `Σy ≤ c₀ ≤ 1`) and `y = 0` is feasible. Returns `None` if the dual
/// optimum is too large to solve quickly.
fn random_lp(rng: &mut impl Rng) -> Option<(StandardLp, f64)> {
    let n = rng.gen_range(1..=3);
    let m = rng.gen_range(1..=3);
    let mut a = vec![vec![1.0; m]];
    let mut c = vec![rng.gen_range(0.3..1.0)];
    for _ in 0..n {
        a.push((0..m).map(|_| rng.gen_range(-1.0..=1.0)).collect());
        c.push(rng.gen_range(0.0..1.0));
    }
    let b: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let (opt, _) = primal_opt(&a, &b, &c)?;
    let (dual, x) = dual_opt(&a, &b, &c)?;
    assert!((opt - dual).abs() < 1e-9, "strong duality {opt} vs {dual}");
    let r: f64 = x.iter().sum();
    if r > 1.5 {
        return None;
    }
    Some((lp(&a, &b, &c, 1.0, r.max(0.1)), opt))
}

#[test]
fn random_lps_match_vertex_enumeration() {
    let mut rng = rng(20);
    let eps = 0.2;
    let mut solved = 0;
    while solved < 3 {
        let Some((p, opt)) = random_lp(&mut rng) else { continue };
        let report = binary_search_opt(&p, eps, 0.1, &SolverConfig::fixed(eps, 0.1, rng.gen())).unwrap();
        let s = &report.solution;
        assert!((s.opt_estimate - opt).abs() <= eps, "estimate {} vs OPT {opt}", s.opt_estimate);
        assert!(s.max_violation <= eps, "violation {}", s.max_violation);
        assert!(s.y_hat.iter().all(|&v| v >= 0.0));
        assert!(s.y_hat.iter().sum::<f64>() <= 2.0 * p.primal_bound() + 1e-12);
        solved += 1;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn embedded_feasible_points_have_nonpositive_payoff(
        seed in any::<u64>(),
        n in 1usize..=4,
        m in 1usize..=4,
        r_bound in 0.5f64..4.0,
    ) {
        let mut rng = rng(seed);
        let a: Vec<Vec<f64>> = (0..n).map(|_| (0..m).map(|_| rng.gen_range(-1.0..=1.0)).collect()).collect();
        let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0)).collect();
        let total: f64 = raw.iter().sum::<f64>().max(1e-9);
        let mass = rng.gen_range(0.0..=r_bound);
        let y: Vec<f64> = raw.iter().map(|v| v * mass / total).collect();
        let c: Vec<f64> = a.iter().map(|row| {
            let ay: f64 = row.iter().zip(&y).map(|(a, v)| a * v).sum();
            ay + rng.gen_range(0.0..=1.0) * (r_bound - ay)
        }).collect();
        let b: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let by: f64 = b.iter().zip(&y).map(|(a, v)| a * v).sum();
        let alpha = (by - rng.gen_range(0.0..0.5)).max(-r_bound);
        let p = lp(&a, &b, &c, r_bound, 1.0);
        let game = build_game_matrix(&p, alpha).unwrap();
        let point = embed_feasible_point(&p, &y).unwrap();
        for row in game.matrix.materialize() {
            prop_assert!(row.iter().all(|v| v.abs() <= 1.0));
            let v: f64 = row.iter().zip(&point).map(|(a, q)| a * q).sum();
            prop_assert!(v <= 1e-12);
        }
    }
}
