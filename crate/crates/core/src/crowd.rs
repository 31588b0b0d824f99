//! Simulated crowd oracles with query accounting.
//!
//! Every worker response is a fresh independent draw; nothing is cached
//! between queries, including repeated queries on the same pair.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ComparisonTag, Halfspace, Instance, Label};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Adversary {
    AlwaysWrong,
    RandomFlip,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WorkerModel {
    /// Each response is correct independently with probability exactly
    /// `1/2 + α` (labels) or `1/2 + β` (comparisons).
    #[default]
    IidFlip,
    /// A pool where a `reliable_fraction` of workers answer correctly with
    /// probability `reliable_accuracy` and the rest follow `adversary`.
    Pool {
        reliable_fraction: f64,
        reliable_accuracy: f64,
        adversary: Adversary,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrowdConfig {
    /// Label-correctness margin `α`.
    pub alpha: f64,
    /// Comparison-correctness margin `β`.
    pub beta: f64,
    #[serde(default)]
    pub worker_model: WorkerModel,
}

impl Default for CrowdConfig {
    fn default() -> Self {
        CrowdConfig {
            alpha: 0.35,
            beta: 0.35,
            worker_model: WorkerModel::IidFlip,
        }
    }
}

impl CrowdConfig {
    pub fn iid(alpha: f64, beta: f64) -> Self {
        CrowdConfig {
            alpha,
            beta,
            worker_model: WorkerModel::IidFlip,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_margin("alpha", self.alpha)?;
        check_margin("beta", self.beta)?;
        if let WorkerModel::Pool {
            reliable_fraction: a,
            reliable_accuracy: p,
            ..
        } = self.worker_model
        {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::invalid("reliable_fraction", format!("must lie in (0, 1], got {a}")));
            }
            if !(p > 0.5 && p <= 1.0) {
                return Err(Error::invalid("reliable_accuracy", format!("must lie in (1/2, 1], got {p}")));
            }
            let floor = 0.5 + self.alpha.max(self.beta);
            if a * p < floor - 1e-12 {
                return Err(Error::invalid(
                    "worker_model",
                    format!("reliable_fraction * reliable_accuracy = {} is below 1/2 + max(alpha, beta) = {floor}", a * p),
                ));
            }
        }
        Ok(())
    }
}

fn check_margin(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v <= 0.5 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must lie in (0, 0.5], got {v}")))
    }
}

/// Monotone query counters `m_L` and `m_C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct QueryLedger {
    label_queries: u64,
    comparison_queries: u64,
}

impl QueryLedger {
    pub fn label_queries(&self) -> u64 {
        self.label_queries
    }

    pub fn comparison_queries(&self) -> u64 {
        self.comparison_queries
    }

    /// Counts spent since `earlier` was taken.
    pub fn since(&self, earlier: &QueryLedger) -> QueryLedger {
        QueryLedger {
            label_queries: self.label_queries - earlier.label_queries,
            comparison_queries: self.comparison_queries - earlier.comparison_queries,
        }
    }
}

/// The label oracle `O_L` and comparison oracle `O_C` for one trial.
#[derive(Debug, Clone)]
pub struct CrowdOracle {
    truth: Halfspace,
    config: CrowdConfig,
    ledger: QueryLedger,
}

impl CrowdOracle {
    pub fn new(truth: Halfspace, config: CrowdConfig) -> Result<Self> {
        config.validate()?;
        Ok(CrowdOracle {
            truth,
            config,
            ledger: QueryLedger::default(),
        })
    }

    pub fn truth(&self) -> &Halfspace {
        &self.truth
    }

    pub fn config(&self) -> &CrowdConfig {
        &self.config
    }

    pub fn ledger(&self) -> QueryLedger {
        self.ledger
    }

    pub fn query_label<R: Rng + ?Sized>(&mut self, x: &Instance, rng: &mut R) -> Label {
        self.ledger.label_queries += 1;
        let correct = self.truth.predict_unchecked(x);
        if self.worker_is_correct(self.config.alpha, rng) {
            correct
        } else {
            correct.flipped()
        }
    }

    pub fn query_comparison<R: Rng + ?Sized>(
        &mut self,
        x: &Instance,
        other: &Instance,
        rng: &mut R,
    ) -> ComparisonTag {
        self.ledger.comparison_queries += 1;
        let correct = self.truth.compare_unchecked(x, other);
        if self.worker_is_correct(self.config.beta, rng) {
            correct
        } else {
            correct.flipped()
        }
    }

    /// Majority of `votes` independent label queries; `votes` must be odd.
    pub fn majority_label<R: Rng + ?Sized>(
        &mut self,
        x: &Instance,
        votes: usize,
        rng: &mut R,
    ) -> Result<Label> {
        check_odd(votes)?;
        let sum: i64 = (0..votes)
            .map(|_| i64::from(self.query_label(x, rng).value()))
            .sum();
        Ok(Label::from_sign(sum as f64))
    }

    /// Majority of `votes` independent comparison queries; `votes` must be odd.
    pub fn majority_compare<R: Rng + ?Sized>(
        &mut self,
        x: &Instance,
        other: &Instance,
        votes: usize,
        rng: &mut R,
    ) -> Result<ComparisonTag> {
        check_odd(votes)?;
        let sum: i64 = (0..votes)
            .map(|_| i64::from(self.query_comparison(x, other, rng).value()))
            .sum();
        Ok(ComparisonTag::from_sign(sum as f64))
    }

    fn worker_is_correct<R: Rng + ?Sized>(&self, margin: f64, rng: &mut R) -> bool {
        match self.config.worker_model {
            WorkerModel::IidFlip => rng.random::<f64>() < 0.5 + margin,
            WorkerModel::Pool {
                reliable_fraction,
                reliable_accuracy,
                adversary,
            } => {
                if rng.random::<f64>() < reliable_fraction {
                    rng.random::<f64>() < reliable_accuracy
                } else {
                    match adversary {
                        Adversary::AlwaysWrong => false,
                        Adversary::RandomFlip => rng.random::<bool>(),
                    }
                }
            }
        }
    }
}

fn check_odd(votes: usize) -> Result<()> {
    if votes % 2 == 1 {
        Ok(())
    } else {
        Err(Error::invalid("votes", format!("majority vote needs an odd count, got {votes}")))
    }
}

fn next_odd_at_least(v: f64) -> usize {
    let n = (v.ceil() as usize).max(1);
    if n.is_multiple_of(2) {
        n + 1
    } else {
        n
    }
}

/// Hoeffding-sized vote counts `(k1, k2)` for sorting and labeling a set of
/// `m` instances so that everything is correct with probability `1 - δ`.
///
/// `k1` covers the worst-case `m^2` pairwise tests of quicksort and `k2`
/// covers the `floor(log2 m) + 1` binary-search probes; both are rounded up
/// to the next odd integer.
pub fn vote_sizes(m: usize, delta: f64, cfg: &CrowdConfig) -> (usize, usize) {
    let m = m.max(1) as f64;
    let k1 = (2.0 * m * m / delta).ln() / (2.0 * cfg.beta * cfg.beta);
    let probes = m.log2().floor() + 1.0;
    let k2 = (2.0 * probes / delta).ln() / (2.0 * cfg.alpha * cfg.alpha);
    (next_odd_at_least(k1), next_odd_at_least(k2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::majority_error_exact;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(alpha: f64, beta: f64) -> (CrowdOracle, Instance, Instance) {
        let truth = Halfspace::new(vec![1.0, 0.0]).unwrap();
        let oracle = CrowdOracle::new(truth, CrowdConfig::iid(alpha, beta)).unwrap();
        let x = Instance::new(vec![0.6, 0.8]).unwrap();
        let y = Instance::new(vec![-0.6, 0.8]).unwrap();
        (oracle, x, y)
    }

    #[test]
    fn noiseless_oracles_are_exact() {
        let (mut o, x, y) = setup(0.5, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            assert_eq!(o.query_label(&x, &mut rng), Label::Positive);
            assert_eq!(o.query_comparison(&y, &x, &mut rng), ComparisonTag::Below);
        }
        assert_eq!(o.ledger().label_queries(), 1000);
        assert_eq!(o.ledger().comparison_queries(), 1000);
    }

    fn empirical_label_accuracy(alpha: f64, n: usize) -> f64 {
        let (mut o, x, _) = setup(alpha, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let right = (0..n).filter(|_| o.query_label(&x, &mut rng) == Label::Positive).count();
        right as f64 / n as f64
    }

    #[test]
    fn label_noise_matches_margin() {
        // 3 sigma of Bernoulli(0.8) over 1e5 draws is 0.0038.
        let acc = empirical_label_accuracy(0.3, 100_000);
        assert!((acc - 0.8).abs() <= 0.004, "accuracy {acc}");
    }

    #[test]
    fn comparison_noise_matches_margin() {
        let (mut o, x, y) = setup(0.5, 0.35);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let right = (0..n)
            .filter(|_| o.query_comparison(&x, &y, &mut rng) == ComparisonTag::AtLeast)
            .count();
        let acc = right as f64 / n as f64;
        assert!((acc - 0.85).abs() <= 0.004, "accuracy {acc}");
        assert_eq!(o.ledger().comparison_queries(), n as u64);
        assert_eq!(o.ledger().label_queries(), 0);
    }

    #[test]
    fn majority_charges_k_queries_and_rejects_even() {
        let (mut o, x, y) = setup(0.3, 0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        o.majority_label(&x, 7, &mut rng).unwrap();
        o.majority_compare(&x, &y, 5, &mut rng).unwrap();
        o.majority_label(&x, 1, &mut rng).unwrap();
        assert_eq!(o.ledger().label_queries(), 8);
        assert_eq!(o.ledger().comparison_queries(), 5);
        assert!(o.majority_label(&x, 4, &mut rng).is_err());
        assert!(o.majority_compare(&x, &y, 0, &mut rng).is_err());
        assert_eq!(o.ledger().label_queries(), 8);
    }

    #[test]
    fn majority_error_matches_binomial_tail() {
        // q = 0.9 per vote, k = 5: exact tail 0.00856.
        let exact = majority_error_exact(5, 0.9);
        let (mut o, x, y) = setup(0.4, 0.4);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let trials = 200_000;
        let wrong_l = (0..trials)
            .filter(|_| o.majority_label(&x, 5, &mut rng).unwrap() != Label::Positive)
            .count() as f64
            / trials as f64;
        let wrong_c = (0..trials)
            .filter(|_| o.majority_compare(&x, &y, 5, &mut rng).unwrap() != ComparisonTag::AtLeast)
            .count() as f64
            / trials as f64;
        let se = (exact * (1.0 - exact) / trials as f64).sqrt();
        assert!((wrong_l - exact).abs() <= 3.0 * se, "{wrong_l} vs {exact}");
        assert!((wrong_c - exact).abs() <= 3.0 * se, "{wrong_c} vs {exact}");
    }

    #[test]
    fn majority_error_within_three_se_on_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for &k in &[1usize, 3, 7, 11] {
            for &alpha in &[0.1, 0.25] {
                let (mut o, x, _) = setup(alpha, 0.5);
                let exact = majority_error_exact(k, 0.5 + alpha);
                let trials = 10_000;
                let wrong = (0..trials)
                    .filter(|_| o.majority_label(&x, k, &mut rng).unwrap() != Label::Positive)
                    .count() as f64
                    / trials as f64;
                let se = (exact * (1.0 - exact) / trials as f64).sqrt();
                assert!((wrong - exact).abs() <= 3.0 * se, "k={k} alpha={alpha}: {wrong} vs {exact}");
            }
        }
    }

    #[test]
    fn vote_size_example() {
        // ln(2e4 / 0.01) / (2 * 0.35^2) = 59.2 -> 60 -> 61
        let (k1, _) = vote_sizes(100, 0.01, &CrowdConfig::iid(0.35, 0.35));
        assert_eq!(k1, 61);
    }

    #[test]
    fn vote_sizes_monotone() {
        let margins = [0.1, 0.2, 0.3, 0.4, 0.5];
        for w in margins.windows(2) {
            let lo = vote_sizes(300, 0.01, &CrowdConfig::iid(w[0], w[0]));
            let hi = vote_sizes(300, 0.01, &CrowdConfig::iid(w[1], w[1]));
            assert!(hi.0 < lo.0 && hi.1 < lo.1, "{lo:?} vs {hi:?}");
        }
        let cfg = CrowdConfig::iid(0.3, 0.3);
        let mut prev = vote_sizes(300, 0.5, &cfg);
        for &delta in &[0.1, 0.01, 0.001, 1e-6] {
            let cur = vote_sizes(300, delta, &cfg);
            assert!(cur.0 >= prev.0 && cur.1 >= prev.1);
            assert!(cur.0 % 2 == 1 && cur.1 % 2 == 1);
            prev = cur;
        }
    }

    #[test]
    fn pool_validation() {
        let pool = |a: f64, p: f64| CrowdConfig {
            alpha: 0.3,
            beta: 0.3,
            worker_model: WorkerModel::Pool {
                reliable_fraction: a,
                reliable_accuracy: p,
                adversary: Adversary::AlwaysWrong,
            },
        };
        assert!(pool(0.8, 1.0).validate().is_ok());
        assert!(pool(0.7, 1.0).validate().is_err());
        assert!(pool(1.0, 0.5).validate().is_err());
        assert!(CrowdConfig::iid(0.6, 0.3).validate().is_err());
        assert!(CrowdConfig::iid(0.3, 0.0).validate().is_err());
    }

    #[test]
    fn pool_with_adversaries_meets_margin() {
        let truth = Halfspace::new(vec![0.0, 1.0]).unwrap();
        // a * p = 0.9 * 0.9444.. = 0.85 = 1/2 + alpha
        let cfg = CrowdConfig {
            alpha: 0.35,
            beta: 0.35,
            worker_model: WorkerModel::Pool {
                reliable_fraction: 0.9,
                reliable_accuracy: 0.85 / 0.9,
                adversary: Adversary::AlwaysWrong,
            },
        };
        let mut o = CrowdOracle::new(truth, cfg).unwrap();
        let x = Instance::new(vec![0.2, 0.5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 100_000;
        let right = (0..n).filter(|_| o.query_label(&x, &mut rng) == Label::Positive).count();
        let acc = right as f64 / n as f64;
        let sigma = (0.85f64 * 0.15 / n as f64).sqrt();
        assert!(acc >= 0.85 - 3.0 * sigma, "accuracy {acc}");
    }
}
