use std::fs;
use std::path::Path;
use std::time::Instant;

use log::{info, warn};
use rand::seq::index;
use rand::Rng;
use serde::Serialize;
use zsg_core::game::io::parse_matrix;
use zsg_core::gibbs::{gibbs_exact, rejection_gibbs, two_regime_gibbs, u_max_scan, ScoreOracle};
use zsg_core::lp::{binary_search_opt, parse_lp, LpRound};
use zsg_core::rng::{stream, Stream};
use zsg_core::solver::{
    anytime_bound, iterations_needed, lp_cost_projection, quantum_cost_model, Solver,
};
use zsg_core::tree::{SparseWeights, WeightTree};
use zsg_core::{Backend, QueryCounts, Schedule, SolverConfig};

use crate::report::{emit, write_jsonl, BenchDocument, BenchEntry, CostDocument, GameDocument, LpDocument};
use crate::{BackendArg, CliError, Command, ScheduleArg, SolveArgs};

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::SolveGame { input, solve, exact_value } => solve_game(&input, &solve, exact_value),
        Command::SolveLp { input, solve } => solve_lp(&input, &solve),
        Command::GibbsBench { input, samples, seed, support, mass, output } => {
            let doc = gibbs_bench(&read(&input)?, samples, seed, support, mass)?;
            emit(&doc, output.output.as_deref())
        }
        Command::CostModel { input, rows, cols, row_sparsity, col_sparsity, epsilon, delta, output } => {
            let (mut n, mut m, mut s, mut d, mut lp_projection) = (0, 0, 0, 0, None);
            if let Some(path) = input {
                let text = read(&path)?;
                if text.trim_start().starts_with('{') {
                    let lp = parse_lp(&text)?;
                    let a = lp.constraints();
                    (n, m, s, d) = (a.rows(), a.cols(), a.row_sparsity(), a.col_sparsity());
                    lp_projection = Some(lp_cost_projection(
                        n,
                        m,
                        s.max(d),
                        lp.primal_bound(),
                        lp.dual_bound(),
                        epsilon,
                    )?);
                } else {
                    let a = parse_matrix(&text)?;
                    (n, m, s, d) = (a.rows(), a.cols(), a.row_sparsity(), a.col_sparsity());
                }
            }
            let n = rows.unwrap_or(n);
            let m = cols.unwrap_or(m);
            let s = row_sparsity.unwrap_or(if s == 0 { m } else { s });
            let d = col_sparsity.unwrap_or(if d == 0 { n } else { d });
            let report = quantum_cost_model(n, m, s, d, epsilon, delta)?;
            emit(&CostDocument { command: "cost-model", report, lp_projection }, output.output.as_deref())
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn schedule_name(s: ScheduleArg) -> &'static str {
    match s {
        ScheduleArg::Anytime => "anytime",
        ScheduleArg::Fixed => "fixed",
    }
}

fn base_config(args: &SolveArgs) -> SolverConfig {
    let mut cfg = match args.schedule {
        ScheduleArg::Fixed => SolverConfig::fixed(args.epsilon, args.delta, args.seed),
        ScheduleArg::Anytime => SolverConfig {
            schedule: Schedule::Anytime,
            ..SolverConfig::fixed(args.epsilon, args.delta, args.seed)
        },
    };
    cfg.backend = args.backend.into();
    cfg.max_iterations = args.max_iterations;
    cfg
}

fn solve_game(input: &Path, args: &SolveArgs, exact_value: bool) -> Result<(), CliError> {
    let mut matrix = parse_matrix(&read(input)?)?;
    let backend: Backend = args.backend.into();
    if backend.needs_sparse() && !matrix.is_sparse() {
        info!("converting dense input to sparse storage for the {} backend", backend.name());
        matrix = matrix.to_sparse();
    }
    let (n, m) = (matrix.rows(), matrix.cols());
    let mut cfg = base_config(args);
    cfg.exact_value = exact_value;
    cfg.validate()?;
    if args.trace.is_some() {
        let target = match cfg.schedule {
            Schedule::FixedAccuracy { epsilon } => {
                let t = iterations_needed(epsilon, cfg.delta, n, m)?;
                cfg.max_iterations.map_or(t, |c| t.min(c))
            }
            Schedule::Anytime => cfg.max_iterations.unwrap_or(1),
        };
        cfg.gap_check_period = args.trace_every.unwrap_or((target / 100).max(1));
    }

    let start = Instant::now();
    let mut solver = Solver::new(&matrix, cfg.clone())?;
    solver.run()?;
    let r = solver.result()?;
    let elapsed = start.elapsed().as_secs_f64();
    info!("solved {n}x{m} game in {} iterations, {elapsed:.3}s", r.iterations);

    let (epsilon, certified, bound) = match cfg.schedule {
        Schedule::FixedAccuracy { epsilon } => (Some(epsilon), r.duality_gap <= epsilon, epsilon),
        Schedule::Anytime => {
            let b = anytime_bound(r.iterations, n, m, cfg.delta);
            (None, r.duality_gap <= b, b)
        }
    };
    if let Some(path) = &args.trace {
        write_jsonl(&r.trace, path)?;
    }
    let doc = GameDocument {
        command: "solve-game",
        rows: n,
        cols: m,
        seed: cfg.seed,
        schedule: schedule_name(args.schedule),
        epsilon,
        delta: cfg.delta,
        backend: backend.name(),
        iterations: r.iterations,
        alice: r.alice.probs().to_vec(),
        bob: r.bob.probs().to_vec(),
        value_estimate: r.value_estimate,
        duality_gap: r.duality_gap,
        lower_bound: r.lower_bound,
        upper_bound: r.upper_bound,
        certified,
        queries: r.ledger,
        total_queries: r.ledger.total(),
        query_breakdown: r.breakdown,
        mean_proposals: r.mean_proposals,
        wall_time_seconds: args.wall_time.then_some(elapsed),
    };
    emit(&doc, args.output.output.as_deref())?;
    if certified {
        Ok(())
    } else {
        Err(CliError::Solver(format!(
            "duality gap {} exceeds the guaranteed {bound}",
            r.duality_gap
        )))
    }
}

#[derive(Serialize)]
struct RoundRecord<'a> {
    round: usize,
    #[serde(flatten)]
    inner: &'a LpRound,
}

fn solve_lp(input: &Path, args: &SolveArgs) -> Result<(), CliError> {
    let lp = parse_lp(&read(input)?)?;
    if args.schedule != ScheduleArg::Fixed {
        return Err(CliError::Input("solve-lp requires --schedule fixed".into()));
    }
    let cfg = base_config(args);
    cfg.validate()?;
    let start = Instant::now();
    let report = binary_search_opt(&lp, args.epsilon, args.delta, &cfg)?;
    let elapsed = start.elapsed().as_secs_f64();
    info!("binary search finished in {elapsed:.3}s");
    if report.solution.max_violation > args.epsilon {
        warn!("constraint violation {} exceeds epsilon", report.solution.max_violation);
    }
    if let Some(path) = &args.trace {
        let records: Vec<_> = report
            .rounds
            .iter()
            .enumerate()
            .map(|(k, r)| RoundRecord { round: k + 1, inner: r })
            .collect();
        write_jsonl(&records, path)?;
    }
    let s = report.solution;
    let doc = LpDocument {
        command: "solve-lp",
        n: lp.num_constraints(),
        m: lp.num_variables(),
        primal_bound: lp.primal_bound(),
        r: lp.dual_bound(),
        seed: args.seed,
        epsilon: args.epsilon,
        delta: args.delta,
        backend: Backend::from(args.backend).name(),
        game_accuracy: report.game_accuracy,
        round_delta: report.round_delta,
        opt_estimate: s.opt_estimate,
        interval: [report.lower, report.upper],
        y_hat: s.y_hat,
        objective: s.objective,
        max_violation: s.max_violation,
        h_deviation: s.h_deviation,
        rounds: report.rounds,
        queries: report.total_queries,
        total_queries: report.total_queries.total(),
        wall_time_seconds: args.wall_time.then_some(elapsed),
    };
    emit(&doc, args.output.output.as_deref())
}

fn gibbs_bench(
    text: &str,
    samples: u64,
    seed: u64,
    support: Option<usize>,
    mass: f64,
) -> Result<BenchDocument, CliError> {
    let matrix = parse_matrix(text)?;
    let (n, m) = (matrix.rows(), matrix.cols());
    let k = support.unwrap_or(n.min(4));
    if k == 0 || k > n {
        return Err(CliError::Input(format!("support size {k} must lie in [1, {n}]")));
    }
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(CliError::Input(format!("mass {mass} must be positive")));
    }
    if samples == 0 {
        return Err(CliError::Input("--samples must be positive".into()));
    }

    let mut rng = stream(seed, Stream::Aux);
    let mut rows = index::sample(&mut rng, n, k).into_vec();
    rows.sort_unstable();
    let raw: Vec<f64> = rows.iter().map(|_| rng.gen_range(0.1..1.0)).collect();
    let sum: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| mass * w / sum).collect();
    let mut x = SparseWeights::new(n);
    for (&i, &w) in rows.iter().zip(&weights) {
        x.add(i, w)?;
    }

    let exact = gibbs_exact(&ScoreOracle::bob(&matrix.clone()).all_scores(&x)?)?;
    let sparse = if matrix.is_sparse() { matrix.clone() } else { matrix.to_sparse() };
    let mut entries = Vec::new();

    for (name, backend) in [("exact", BackendArg::Dense), ("rejection", BackendArg::Rejection), ("two-regime", BackendArg::TwoRegime)] {
        let a = if backend == BackendArg::TwoRegime { &sparse } else { &matrix };
        let oracle = ScoreOracle::bob(a);
        let mut rng = stream(seed, Stream::Bob);
        let before = a.queries();
        let mut counts = vec![0u64; m];
        let mut proposals = 0u64;
        match backend {
            BackendArg::Dense => {
                let tree = WeightTree::from_weights(&gibbs_exact(&oracle.all_scores(&x)?)?)?;
                for _ in 0..samples {
                    counts[tree.sample(&mut rng)?] += 1;
                }
            }
            BackendArg::Rejection => {
                let u_max = u_max_scan(&x, &oracle)?;
                for _ in 0..samples {
                    let s = rejection_gibbs(&x, &oracle, u_max, &mut rng)?;
                    counts[s.index] += 1;
                    proposals += s.proposals_used;
                }
            }
            _ => {
                let u_max = u_max_scan(&x, &oracle)?;
                let beta = x.total().max(1.0);
                for _ in 0..samples {
                    let s = two_regime_gibbs(&x, &oracle, beta, u_max, &mut rng)?;
                    counts[s.index] += 1;
                    proposals += s.proposals_used;
                }
            }
        }
        let queries: QueryCounts = a.queries().since(&before);
        let tv = 0.5
            * counts
                .iter()
                .zip(&exact)
                .map(|(&c, p)| (c as f64 / samples as f64 - p).abs())
                .sum::<f64>();
        info!("{name}: tv={tv:.4}");
        entries.push(BenchEntry {
            backend: name,
            tv_distance: tv,
            mean_proposals: (backend != BackendArg::Dense).then(|| proposals as f64 / samples as f64),
            queries_per_sample: queries.total() as f64 / samples as f64,
            queries_per_score: x.support_len() as u64,
            queries,
        });
    }

    Ok(BenchDocument {
        command: "gibbs-bench",
        rows: n,
        cols: m,
        seed,
        samples,
        support: rows,
        weights,
        backends: entries,
    })
}
