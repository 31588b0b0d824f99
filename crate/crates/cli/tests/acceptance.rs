//! Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero if any
//! criterion fails.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::process::ExitCode;

use crowdpac::analysis::{
    boosted_error, hoeffding_majority_bound, majority_error_exact, ruin_probability, simulate_boosted_error,
    simulate_ruin, WalkSpec,
};
use crowdpac::compare_label::noisy_quicksort;
use crowdpac::filter::FilterConfig;
use crowdpac::{compare_and_label, filter, sample_instances, Classifier, CrowdConfig, CrowdOracle, Halfspace, ProblemConfig};
use crowdpac_cli::experiment::{run_trials, Trial};
use crowdpac_cli::report::csv_string;
use crowdpac_cli::{run_experiment, AlgorithmChoice, ExperimentConfig, SummaryRow};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    lines: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            passed: true,
            lines: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: String) {
        self.passed &= ok;
        self.lines.push(format!("{} {what}", if ok { "ok  " } else { "FAIL" }));
    }
}

fn base_config(seeds: u64, algorithm: AlgorithmChoice) -> ExperimentConfig {
    ExperimentConfig {
        seeds: (0..seeds).collect(),
        algorithm,
        holdout_size: 20_000,
        ..Default::default()
    }
}

fn end_to_end(trials: &mut Vec<Trial>) -> Outcome {
    let mut out = Outcome::new();
    let mut cfg = base_config(50, AlgorithmChoice::Boost);
    cfg.record_wall_clock = true;
    let runs = run_trials(&cfg, &[0.04], 1).expect("valid config");
    let good = runs.iter().filter(|t| t.report.holdout_error <= 0.04).count();
    let slowest = runs.iter().map(|t| t.report.wall_clock_ms).max().unwrap_or(0);
    out.check(good >= 45, format!("holdout error <= 0.04 in {good}/50 seeds (need 45)"));
    out.check(slowest <= 120_000, format!("slowest seed {slowest} ms (limit 120000)"));
    trials.extend(runs);
    out
}

fn mean_of(summary: &[SummaryRow], algorithm: &str, eps: f64, f: fn(&SummaryRow) -> f64) -> f64 {
    summary
        .iter()
        .find(|s| s.algorithm == algorithm && s.epsilon == eps)
        .map(f)
        .expect("sweep cell present")
}

fn overhead_separation(trials: &mut Vec<Trial>) -> Outcome {
    let mut out = Outcome::new();
    let eps = [0.1, 0.05, 0.025];
    let cfg = base_config(30, AlgorithmChoice::Both);
    let runs = run_trials(&cfg, &eps, 4).expect("valid config");
    let rows: Vec<_> = runs.iter().map(|t| t.row.clone()).collect();
    let summary = crowdpac_cli::experiment::summarize(&rows);

    let natural: Vec<f64> = eps.iter().map(|&e| mean_of(&summary, "natural", e, |s| s.mean_lambda_c)).collect();
    let boost: Vec<f64> = eps.iter().map(|&e| mean_of(&summary, "boost", e, |s| s.mean_lambda_c)).collect();
    out.check(
        natural.windows(2).all(|w| w[1] > w[0]),
        format!("natural mean lambda_C strictly increasing: {natural:.1?}"),
    );

    let m_eps: Vec<f64> = eps.iter().map(|&e| cfg.pipeline_config(e).problem.m_eps() as f64).collect();
    let log2m: Vec<f64> = m_eps.iter().map(|m| m.ln().powi(2)).collect();
    let c = natural
        .iter()
        .zip(&log2m)
        .map(|(l, g)| (l / g).ln())
        .sum::<f64>()
        / natural.len() as f64;
    let c = c.exp();
    let ratios: Vec<f64> = natural.iter().zip(&log2m).map(|(l, g)| l / (c * g)).collect();
    out.check(
        ratios.iter().all(|r| (1.0 / 3.0..=3.0).contains(r)),
        format!("natural lambda_C within 3x of c*ln^2(m_eps), c = {c:.3}, ratios {ratios:.3?}"),
    );

    let spread = boost.iter().cloned().fold(f64::MIN, f64::max) / boost.iter().cloned().fold(f64::MAX, f64::min);
    out.check(spread <= 2.5, format!("boost mean lambda_C {boost:.1?}, max/min {spread:.3} (limit 2.5)"));

    for algorithm in ["natural", "boost"] {
        let l = mean_of(&summary, algorithm, 0.025, |s| s.mean_lambda_l);
        out.check(l <= 0.1, format!("{algorithm} mean lambda_L at eps=0.025 is {l:.4} (limit 0.1)"));
    }
    trials.extend(runs);
    out
}

fn all_labels_correct() -> Outcome {
    let mut out = Outcome::new();
    let (m, delta, trials) = (200, 0.05, 400u64);
    let correct = (0..trials)
        .filter(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let truth = Halfspace::random_unit(2, &mut rng);
            let sample = sample_instances(&ProblemConfig::default(), m, &mut rng);
            let mut o = CrowdOracle::new(truth.clone(), CrowdConfig::iid(0.3, 0.3)).unwrap();
            let labeled = compare_and_label(&sample, delta, &mut o, &mut rng).unwrap();
            labeled.instances.iter().zip(&labeled.labels).all(|(x, y)| truth.predict(x) == *y)
        })
        .count();
    let rate = correct as f64 / trials as f64;
    out.check(rate >= 0.92, format!("all labels correct in {correct}/{trials} trials = {rate:.4} (need 0.92)"));
    out
}

fn quicksort_bound() -> Outcome {
    let mut out = Outcome::new();
    let truth = Halfspace::new(vec![1.0, 0.0]).unwrap();
    for m in [100usize, 1000] {
        let mut rng = ChaCha8Rng::seed_from_u64(7 + m as u64);
        let mut o = CrowdOracle::new(truth.clone(), CrowdConfig::iid(0.5, 0.5)).unwrap();
        let items = sample_instances(&ProblemConfig::default(), m, &mut rng);
        let limit = 4.0 * m as f64 * (m as f64).ln();
        let within = (0..1000)
            .filter(|_| noisy_quicksort(&items, 1, &mut o, &mut rng).unwrap().tests as f64 <= limit)
            .count();
        let need = (1.0 - 1.0 / m as f64) * 1000.0;
        out.check(within as f64 >= need, format!("m={m}: tests <= 4 m ln m in {within}/1000 trials (need {need})"));
    }
    out
}

fn rotated(theta: f64) -> Halfspace {
    Halfspace::new(vec![theta.cos(), theta.sin()]).unwrap()
}

fn routing() -> Outcome {
    let mut out = Outcome::new();
    let eps: f64 = 0.04;
    let beta = 0.35;
    let both_correct = (0.5 + beta) * (0.5 + beta);
    let truth = rotated(0.0);
    let h = rotated(0.2 * PI);
    let cfg = FilterConfig::for_epsilon(eps);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let set = sample_instances(&ProblemConfig::default(), 400, &mut rng);
    let is_mistake: Vec<bool> = set.iter().map(|x| h.predict(x) != truth.predict(x)).collect();
    let (mut mh, mut mt, mut ch, mut ct) = (0u64, 0u64, 0u64, 0u64);
    for _ in 0..2000 {
        let mut o = CrowdOracle::new(truth.clone(), CrowdConfig::iid(0.35, beta)).unwrap();
        let result = filter(&set, &h, &cfg, &mut o, &mut rng).unwrap();
        let hits: HashSet<usize> = result.suspected_mistakes.into_iter().collect();
        for (i, &m) in is_mistake.iter().enumerate() {
            let hit = u64::from(hits.contains(&i));
            if m {
                (mh, mt) = (mh + hit, mt + 1);
            } else {
                (ch, ct) = (ch + hit, ct + 1);
            }
        }
    }
    let pm = mh as f64 / mt as f64;
    let pc = ch as f64 / ct as f64;
    out.lines.push(format!("     per-round both-correct probability {both_correct:.4}"));
    out.check(pm >= 0.5, format!("mistakes reach S_I with frequency {pm:.4} (need >= 0.5)"));
    out.check(pc <= eps.sqrt() + 0.02, format!("correct instances reach S_I with frequency {pc:.4} (limit 0.22)"));
    out
}

fn round_count() -> Outcome {
    let mut out = Outcome::new();
    let truth = rotated(0.0);
    let h = rotated(0.2 * PI);
    let bound = 3.0 * 5000f64.ln() / (8.0f64 / 7.0).ln();
    let cfg = FilterConfig::for_epsilon(0.04);
    let mut worst = 0;
    let within = (0..100u64)
        .filter(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let set = sample_instances(&ProblemConfig::default(), 5000, &mut rng);
            let mut o = CrowdOracle::new(truth.clone(), CrowdConfig::iid(0.35, 0.35)).unwrap();
            let rounds = filter(&set, &h, &cfg, &mut o, &mut rng).unwrap().rounds;
            worst = worst.max(rounds);
            rounds as f64 <= bound
        })
        .count();
    out.check(within >= 99, format!("rounds <= {bound:.1} in {within}/100 seeds (max {worst})"));
    out
}

fn analytic() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let limit = ruin_probability(&WalkSpec::new(0.7, 1, 60).unwrap());
    out.check((limit - 3.0 / 7.0).abs() <= 1e-9, format!("ruin(0.7, 1, 60) = {limit:.12} vs 3/7"));
    let grid = [(0.7, 1, 60), (0.7, 1, 1), (0.5, 1, 1), (0.6, 2, 5), (0.55, 3, 10), (0.4, 4, 2), (0.8, 2, 20)];
    let mut worst: f64 = 0.0;
    for (p, i, n) in grid {
        let spec = WalkSpec::new(p, i, n).unwrap();
        worst = worst.max((ruin_probability(&spec) - simulate_ruin(&spec, 100_000, &mut rng)).abs());
    }
    out.check(worst <= 0.01, format!("ruin closed form vs 1e5 walks on {} points, max gap {worst:.4}", grid.len()));
    let dominated = (1..=201usize).step_by(2).all(|k| {
        (1..=5).all(|m| {
            let margin = f64::from(m) / 10.0;
            hoeffding_majority_bound(k, margin) >= majority_error_exact(k, 0.5 + margin)
        })
    });
    out.check(dominated, "hoeffding bound >= exact majority error for odd k <= 201, margins 0.1..0.5".into());
    for p in [0.1, 0.2, 0.3] {
        let sim = simulate_boosted_error(p, 100_000, &mut rng);
        let exact = boosted_error(p);
        out.check((sim - exact).abs() <= 0.01, format!("p={p}: 3p^2-2p^3 = {exact:.4}, simulated {sim:.4}"));
    }
    out
}

fn determinism(trials: &[Trial]) -> Outcome {
    let mut out = Outcome::new();
    let cfg = base_config(8, AlgorithmChoice::Both);
    let first = csv_string(&run_experiment(&cfg, 1).unwrap());
    let second = csv_string(&run_experiment(&cfg, 1).unwrap());
    let parallel = csv_string(&run_experiment(&cfg, 4).unwrap());
    out.check(first == second && first == parallel, "repeated and parallel runs give byte-identical CSV".into());
    let reconciled = trials
        .iter()
        .filter(|t| t.report.ledger_reconciles() && t.row.phases_reconcile())
        .count();
    out.check(
        reconciled == trials.len(),
        format!("ledger totals match per-phase breakdowns in {reconciled}/{} runs", trials.len()),
    );
    out
}

fn main() -> ExitCode {
    let mut trials = Vec::new();
    let criteria: Vec<(&str, Outcome)> = vec![
        ("end-to-end error at eps=0.04", end_to_end(&mut trials)),
        ("overhead separation across eps sweep", overhead_separation(&mut trials)),
        ("compare-and-label all-correct rate", all_labels_correct()),
        ("quicksort test count bound", quicksort_bound()),
        ("filter routing probabilities", routing()),
        ("filter round count", round_count()),
        ("analytic oracles", analytic()),
    ];
    let mut results = criteria;
    let det = determinism(&trials);
    results.push(("determinism and accounting", det));

    let mut failed = 0;
    for (i, (name, outcome)) in results.iter().enumerate() {
        let status = if outcome.passed { "PASS" } else { "FAIL" };
        println!("criterion {} [PRIMARY] {status}: {name}", i + 1);
        for line in &outcome.lines {
            println!("    {line}");
        }
        failed += usize::from(!outcome.passed);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
