//! The three-phase boosted learner and the sort-everything baseline.
//!
//! Phase 1 learns `h₁` from a Compare-and-Label'd sample of size `m_√ε`.
//! Phase 2 filters a large sample for the mistakes of `h₁`, labels them
//! together with a fresh sample, and learns `h₂` from an equal-weight mixture
//! of mistakes and agreements. Phase 3 learns `h₃` on the region where `h₁`
//! and `h₂` disagree. The output is the pointwise majority of the three.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::compare_label::{compare_and_label, SortedLabeledSet};
use crate::crowd::{CrowdConfig, CrowdOracle};
use crate::error::{Error, Result};
use crate::filter::{filter, FilterConfig};
use crate::learner::{learn_consistent, LabeledSample, DEFAULT_MAX_PASSES};
use crate::model::{check_dims, draw_instance, sample_instances, Classifier, Halfspace, Instance, Label, ProblemConfig};
use crate::seeding::{stream_rng, Stream};

/// Confidence passed to every top-level Compare-and-Label call.
pub const PHASE_CONFIDENCE: f64 = 0.001;
/// `|S_C| = S_C_MULTIPLIER · m_√ε`.
pub const S_C_MULTIPLIER: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Boost,
    Natural,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Boost => "boost",
            Algorithm::Natural => "natural",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub problem: ProblemConfig,
    pub crowd: CrowdConfig,
    pub filter: FilterConfig,
    /// `c₂` in `|S₂| = c₂ · ceil(m_√ε / √ε)`.
    pub s2_multiplier: f64,
    /// `c_W` in `|W̄| = c_W · m_√ε`.
    pub w_bar_multiplier: f64,
    /// Rejection sampling gives up after `ceil(rejection_multiplier · m_√ε / ε)` draws.
    pub rejection_multiplier: f64,
    pub holdout_size: usize,
    pub master_seed: u64,
    /// When false, `wall_clock_ms` is reported as 0 so reports stay byte-identical.
    pub record_wall_clock: bool,
}

impl PipelineConfig {
    pub fn new(problem: ProblemConfig, crowd: CrowdConfig) -> Self {
        PipelineConfig {
            filter: FilterConfig::for_epsilon(problem.target_error),
            problem,
            crowd,
            s2_multiplier: 4.0,
            w_bar_multiplier: 2.0,
            rejection_multiplier: 10.0,
            holdout_size: 20_000,
            master_seed: 0,
            record_wall_clock: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.problem.validate()?;
        self.crowd.validate()?;
        self.filter.validate()?;
        for (name, v) in [
            ("s2_multiplier", self.s2_multiplier),
            ("w_bar_multiplier", self.w_bar_multiplier),
            ("rejection_multiplier", self.rejection_multiplier),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be a positive finite number, got {v}")));
            }
        }
        if self.holdout_size == 0 {
            return Err(Error::invalid("holdout_size", "must be positive"));
        }
        Ok(())
    }

    pub fn s2_size(&self) -> usize {
        let eps = self.problem.target_error;
        let base = (self.problem.m_sqrt_eps() as f64 / eps.sqrt()).ceil();
        ((self.s2_multiplier * base).ceil() as usize).max(1)
    }

    pub fn w_bar_size(&self) -> usize {
        ((self.w_bar_multiplier * self.problem.m_sqrt_eps() as f64).ceil() as usize).max(1)
    }

    pub fn rejection_budget(&self) -> usize {
        let m = self.problem.m_sqrt_eps() as f64;
        (self.rejection_multiplier * m / self.problem.target_error).ceil() as usize
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig::new(ProblemConfig::default(), CrowdConfig::default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RunFlag {
    /// The learner found no hypothesis consistent with a phase's labels.
    LearnerInconsistent { phase: u8 },
    /// Phase 2 found no mistakes of `h₁`; `h₂ := h₁`.
    NoMistakesFound,
    /// Phase 2 labeled every instance as a mistake; `W̄` drew mistakes only.
    NoAgreementsFound,
    /// Phase 3 could not sample the disagreement region; `h₃ := h₁`.
    NegligibleDisagreement,
}

impl fmt::Display for RunFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunFlag::LearnerInconsistent { phase } => write!(f, "phase{phase}_learner_inconsistent"),
            RunFlag::NoMistakesFound => f.write_str("no_mistakes_found"),
            RunFlag::NoAgreementsFound => f.write_str("no_agreements_found"),
            RunFlag::NegligibleDisagreement => f.write_str("negligible_disagreement"),
        }
    }
}

/// Cost of one Compare-and-Label call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompareLabelCost {
    pub size: usize,
    pub comparison_votes: usize,
    pub label_votes: usize,
    pub pairwise_tests: usize,
    pub probes: usize,
}

impl CompareLabelCost {
    fn of(set: &SortedLabeledSet) -> Self {
        CompareLabelCost {
            size: set.len(),
            comparison_votes: set.comparison_votes,
            label_votes: set.label_votes,
            pairwise_tests: set.pairwise_tests,
            probes: set.probes,
        }
    }

    pub fn label_queries(&self) -> u64 {
        (self.label_votes * self.probes) as u64
    }

    pub fn comparison_queries(&self) -> u64 {
        (self.comparison_votes * self.pairwise_tests) as u64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    pub phase: u8,
    pub hypothesis: Halfspace,
    pub labels_used: u64,
    pub comparisons_used: u64,
    /// Sizes of the named sets (`S1`, `S2`, `S_C`, `S_I`, `W_I`, `W_C`, `W`, `S3`)
    /// plus auxiliary counts such as `rejection_draws` and `filter_rounds`.
    pub sample_sizes: BTreeMap<String, usize>,
    pub flags: Vec<RunFlag>,
    /// Top-level Compare-and-Label calls made by this phase.
    pub compare_label_costs: Vec<CompareLabelCost>,
    /// Queries spent inside the filter, sub-sample sorting included.
    pub filter_labels: u64,
    pub filter_comparisons: u64,
}

impl PhaseReport {
    fn new(phase: u8, hypothesis: Halfspace) -> Self {
        PhaseReport {
            phase,
            hypothesis,
            labels_used: 0,
            comparisons_used: 0,
            sample_sizes: BTreeMap::new(),
            flags: Vec::new(),
            compare_label_costs: Vec::new(),
            filter_labels: 0,
            filter_comparisons: 0,
        }
    }

    fn record(&mut self, name: &str, size: usize) {
        self.sample_sizes.insert(name.to_owned(), size);
    }

    pub fn size(&self, name: &str) -> Option<usize> {
        self.sample_sizes.get(name).copied()
    }

    /// Label queries implied by the component breakdown.
    pub fn itemized_labels(&self) -> u64 {
        self.compare_label_costs.iter().map(CompareLabelCost::label_queries).sum::<u64>() + self.filter_labels
    }

    /// Comparison queries implied by the component breakdown.
    pub fn itemized_comparisons(&self) -> u64 {
        self.compare_label_costs.iter().map(CompareLabelCost::comparison_queries).sum::<u64>()
            + self.filter_comparisons
    }
}

/// Pointwise majority of three halfspaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorityVote {
    pub members: [Halfspace; 3],
}

impl Classifier for MajorityVote {
    fn predict(&self, x: &Instance) -> Label {
        let sum: i32 = self.members.iter().map(|h| i32::from(h.predict(x).value())).sum();
        Label::from_sign(f64::from(sum))
    }
}

pub fn majority_combine(h1: &Halfspace, h2: &Halfspace, h3: &Halfspace) -> Result<MajorityVote> {
    check_dims(h1.dim(), h2.dim())?;
    check_dims(h1.dim(), h3.dim())?;
    Ok(MajorityVote {
        members: [h1.clone(), h2.clone(), h3.clone()],
    })
}

fn labeled_sample(set: &SortedLabeledSet) -> Result<LabeledSample> {
    LabeledSample::new(set.instances.iter().cloned().zip(set.labels.iter().copied()).collect())
}

fn learn(sample: &LabeledSample, phase: u8, report_flags: &mut Vec<RunFlag>) -> Halfspace {
    let out = learn_consistent(sample, DEFAULT_MAX_PASSES);
    if !out.consistent {
        report_flags.push(RunFlag::LearnerInconsistent { phase });
    }
    out.halfspace
}

fn finish(report: &mut PhaseReport, oracle: &CrowdOracle, before: &crate::crowd::QueryLedger) {
    let spent = oracle.ledger().since(before);
    report.labels_used = spent.label_queries();
    report.comparisons_used = spent.comparison_queries();
}

/// Phase 1: `h₁` from `m_√ε` Compare-and-Label'd samples.
pub fn phase1<R: Rng + ?Sized>(cfg: &PipelineConfig, oracle: &mut CrowdOracle, rng: &mut R) -> Result<PhaseReport> {
    let before = oracle.ledger();
    let m = cfg.problem.m_sqrt_eps();
    let s1 = sample_instances(&cfg.problem, m, rng);
    let labeled = compare_and_label(&s1, PHASE_CONFIDENCE, oracle, rng)?;
    let mut flags = Vec::new();
    let h1 = learn(&labeled_sample(&labeled)?, 1, &mut flags);

    let mut report = PhaseReport::new(1, h1);
    report.flags = flags;
    report.record("S1", m);
    report.compare_label_costs.push(CompareLabelCost::of(&labeled));
    finish(&mut report, oracle, &before);
    Ok(report)
}

/// Which side of the mixture a draw came from, and its position there.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MixtureDraw {
    pub from_mistakes: bool,
    pub index: usize,
}

/// Draws `n` entries with replacement: a fair coin picks `W̄_I` or `W̄_C`,
/// then a uniform member of that side. An empty side is never picked.
pub fn draw_mixture<R: Rng + ?Sized>(mistakes: usize, agreements: usize, n: usize, rng: &mut R) -> Vec<MixtureDraw> {
    assert!(mistakes + agreements > 0, "draw_mixture needs a nonempty side");
    (0..n)
        .map(|_| {
            let from_mistakes = if mistakes == 0 {
                false
            } else if agreements == 0 {
                true
            } else {
                rng.random::<bool>()
            };
            let size = if from_mistakes { mistakes } else { agreements };
            MixtureDraw {
                from_mistakes,
                index: rng.random_range(0..size),
            }
        })
        .collect()
}

/// Phase 2: `h₂` from an equal-weight mixture of `h₁`'s mistakes and agreements.
pub fn phase2<R: Rng + ?Sized>(
    h1: &Halfspace,
    cfg: &PipelineConfig,
    oracle: &mut CrowdOracle,
    rng: &mut R,
) -> Result<PhaseReport> {
    let before = oracle.ledger();
    let m = cfg.problem.m_sqrt_eps();
    let mut report = PhaseReport::new(2, h1.clone());

    let s2 = sample_instances(&cfg.problem, cfg.s2_size(), rng);
    let filtered = filter(&s2, h1, &cfg.filter, oracle, rng)?;
    let after_filter = oracle.ledger().since(&before);
    report.filter_labels = after_filter.label_queries();
    report.filter_comparisons = after_filter.comparison_queries();
    report.record("S2", s2.len());
    report.record("S_I", filtered.suspected_mistakes.len());
    report.record("filter_rounds", filtered.rounds);

    let mut all = filtered.suspected_instances(&s2);
    let s_c = sample_instances(&cfg.problem, S_C_MULTIPLIER * m, rng);
    report.record("S_C", s_c.len());
    all.extend(s_c);

    let labeled = compare_and_label(&all, PHASE_CONFIDENCE, oracle, rng)?;
    report.compare_label_costs.push(CompareLabelCost::of(&labeled));
    let (w_i, w_c): (Vec<_>, Vec<_>) = labeled
        .instances
        .iter()
        .cloned()
        .zip(labeled.labels.iter().copied())
        .partition(|(x, y)| h1.predict_unchecked(x) != *y);
    report.record("W_I", w_i.len());
    report.record("W_C", w_c.len());

    if w_i.is_empty() {
        report.flags.push(RunFlag::NoMistakesFound);
        report.record("W", 0);
        finish(&mut report, oracle, &before);
        return Ok(report);
    }
    if w_c.is_empty() {
        report.flags.push(RunFlag::NoAgreementsFound);
    }

    let draws = draw_mixture(w_i.len(), w_c.len(), cfg.w_bar_size(), rng);
    let w_bar: Vec<(Instance, Label)> = draws
        .iter()
        .map(|d| if d.from_mistakes { w_i[d.index].clone() } else { w_c[d.index].clone() })
        .collect();
    report.record("W", w_bar.len());
    let mut flags = Vec::new();
    report.hypothesis = learn(&LabeledSample::new(w_bar)?, 2, &mut flags);
    report.flags.extend(flags);
    finish(&mut report, oracle, &before);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RejectionOutcome {
    pub accepted: Vec<Instance>,
    pub draws: usize,
}

/// Draws from the instance distribution until `wanted` instances with
/// `h₁(x) ≠ h₂(x)` are found or `max_draws` is exhausted.
pub fn sample_disagreement<R: Rng + ?Sized>(
    h1: &Halfspace,
    h2: &Halfspace,
    problem: &ProblemConfig,
    wanted: usize,
    max_draws: usize,
    rng: &mut R,
) -> RejectionOutcome {
    let mut accepted = Vec::with_capacity(wanted);
    let mut draws = 0;
    while accepted.len() < wanted && draws < max_draws {
        draws += 1;
        let x = draw_instance(problem, rng);
        if h1.predict_unchecked(&x) != h2.predict_unchecked(&x) {
            accepted.push(x);
        }
    }
    RejectionOutcome { accepted, draws }
}

/// Phase 3: `h₃` from `m_√ε` samples of the disagreement region of `h₁`, `h₂`.
pub fn phase3<R: Rng + ?Sized>(
    h1: &Halfspace,
    h2: &Halfspace,
    cfg: &PipelineConfig,
    oracle: &mut CrowdOracle,
    rng: &mut R,
) -> Result<PhaseReport> {
    let before = oracle.ledger();
    let m = cfg.problem.m_sqrt_eps();
    let mut report = PhaseReport::new(3, h1.clone());

    if h1.same_direction(h2) {
        report.flags.push(RunFlag::NegligibleDisagreement);
        report.record("S3", 0);
        report.record("rejection_draws", 0);
        return Ok(report);
    }
    let sampled = sample_disagreement(h1, h2, &cfg.problem, m, cfg.rejection_budget(), rng);
    report.record("rejection_draws", sampled.draws);
    report.record("S3", sampled.accepted.len());
    if sampled.accepted.len() < m {
        report.flags.push(RunFlag::NegligibleDisagreement);
        return Ok(report);
    }

    let labeled = compare_and_label(&sampled.accepted, PHASE_CONFIDENCE, oracle, rng)?;
    report.compare_label_costs.push(CompareLabelCost::of(&labeled));
    let mut flags = Vec::new();
    report.hypothesis = learn(&labeled_sample(&labeled)?, 3, &mut flags);
    report.flags = flags;
    finish(&mut report, oracle, &before);
    Ok(report)
}

/// `(Λ_L, Λ_C)`: query totals divided by `m_ε`.
pub fn overheads(total_labels: u64, total_comparisons: u64, problem: &ProblemConfig) -> (f64, f64) {
    let m_eps = problem.m_eps() as f64;
    (total_labels as f64 / m_eps, total_comparisons as f64 / m_eps)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub m_eps: usize,
    pub phases: Vec<PhaseReport>,
    /// Trial-level ledger totals.
    pub label_queries: u64,
    pub comparison_queries: u64,
    pub lambda_l: f64,
    pub lambda_c: f64,
    pub holdout_error: f64,
    pub final_classifier: MajorityVote,
    pub wall_clock_ms: u64,
}

impl RunReport {
    pub fn flags(&self) -> Vec<RunFlag> {
        self.phases.iter().flat_map(|p| p.flags.iter().copied()).collect()
    }

    /// Whether the per-phase counts sum to the trial totals and each phase
    /// matches its itemized breakdown.
    pub fn ledger_reconciles(&self) -> bool {
        let labels: u64 = self.phases.iter().map(|p| p.labels_used).sum();
        let comps: u64 = self.phases.iter().map(|p| p.comparisons_used).sum();
        labels == self.label_queries
            && comps == self.comparison_queries
            && self
                .phases
                .iter()
                .all(|p| p.itemized_labels() == p.labels_used && p.itemized_comparisons() == p.comparisons_used)
    }
}

/// Runs one trial of `algorithm` against the ground truth for `seed`.
pub fn run(algorithm: Algorithm, cfg: &PipelineConfig, seed: u64) -> Result<RunReport> {
    cfg.validate()?;
    let truth = Halfspace::random_unit(cfg.problem.dimension, &mut stream_rng(cfg.master_seed, seed, Stream::Truth));
    let mut rng = stream_rng(cfg.master_seed, seed, Stream::Run(algorithm));
    let mut report = run_against(algorithm, &truth, cfg, &mut rng)?;
    let holdout = sample_instances(
        &cfg.problem,
        cfg.holdout_size,
        &mut stream_rng(cfg.master_seed, seed, Stream::Holdout),
    );
    report.holdout_error = report.final_classifier.error_against(&truth, &holdout);
    report.seed = seed;
    Ok(report)
}

pub fn run_boost(cfg: &PipelineConfig, seed: u64) -> Result<RunReport> {
    run(Algorithm::Boost, cfg, seed)
}

pub fn run_natural(cfg: &PipelineConfig, seed: u64) -> Result<RunReport> {
    run(Algorithm::Natural, cfg, seed)
}

/// Runs `algorithm` against a caller-chosen ground truth. The holdout error
/// is left at 0 and the seed at 0; [`run`] fills both.
pub fn run_against<R: Rng + ?Sized>(
    algorithm: Algorithm,
    truth: &Halfspace,
    cfg: &PipelineConfig,
    rng: &mut R,
) -> Result<RunReport> {
    cfg.validate()?;
    check_dims(cfg.problem.dimension, truth.dim())?;
    let started = Instant::now();
    let mut oracle = CrowdOracle::new(truth.clone(), cfg.crowd)?;

    let (phases, final_classifier) = match algorithm {
        Algorithm::Boost => {
            let p1 = phase1(cfg, &mut oracle, rng)?;
            let p2 = phase2(&p1.hypothesis, cfg, &mut oracle, rng)?;
            let p3 = phase3(&p1.hypothesis, &p2.hypothesis, cfg, &mut oracle, rng)?;
            let vote = majority_combine(&p1.hypothesis, &p2.hypothesis, &p3.hypothesis)?;
            (vec![p1, p2, p3], vote)
        }
        Algorithm::Natural => {
            let p = natural_phase(cfg, &mut oracle, rng)?;
            let h = p.hypothesis.clone();
            (vec![p], majority_combine(&h, &h, &h)?)
        }
    };

    let ledger = oracle.ledger();
    let (lambda_l, lambda_c) = overheads(ledger.label_queries(), ledger.comparison_queries(), &cfg.problem);
    Ok(RunReport {
        algorithm,
        seed: 0,
        m_eps: cfg.problem.m_eps(),
        phases,
        label_queries: ledger.label_queries(),
        comparison_queries: ledger.comparison_queries(),
        lambda_l,
        lambda_c,
        holdout_error: 0.0,
        final_classifier,
        wall_clock_ms: if cfg.record_wall_clock {
            started.elapsed().as_millis() as u64
        } else {
            0
        },
    })
}

fn natural_phase<R: Rng + ?Sized>(cfg: &PipelineConfig, oracle: &mut CrowdOracle, rng: &mut R) -> Result<PhaseReport> {
    let before = oracle.ledger();
    let m = cfg.problem.m_eps();
    let sample = sample_instances(&cfg.problem, m, rng);
    let labeled = compare_and_label(&sample, PHASE_CONFIDENCE, oracle, rng)?;
    let mut flags = Vec::new();
    let h = learn(&labeled_sample(&labeled)?, 1, &mut flags);
    let mut report = PhaseReport::new(1, h);
    report.flags = flags;
    report.record("S", m);
    report.compare_label_costs.push(CompareLabelCost::of(&labeled));
    finish(&mut report, oracle, &before);
    Ok(report)
}
