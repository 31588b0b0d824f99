//! Filter: find the instances a hypothesis `h` most likely misclassifies.
//!
//! Each round sorts and labels a small random sub-sample `S_p`, takes its
//! rightmost negative `x⁻` and leftmost positive `x⁺` as support instances,
//! and tests every other remaining instance against them with running
//! comparison majorities:
//!
//! * both majorities place `x` strictly between the supports: `Inside`, the
//!   instance stays for the next round;
//! * a majority places `x` on the side `h` predicts: `AgreeH`, confirmed;
//! * neither happens within `N` rounds: `Mistake`, routed to `S_I`.
//!
//! Once the remainder fits in one sub-sample it is labeled directly.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::compare_label::{compare_and_label, SortedLabeledSet};
use crate::crowd::CrowdOracle;
use crate::error::{Error, Result};
use crate::model::{check_open_unit, ComparisonTag, Halfspace, Instance, Label};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    /// `b = ceil(b_constant · log2 |S|)`.
    pub b_constant: f64,
    /// Walk length `N` (odd).
    pub walk_length: usize,
    /// Per-round confidence `δ'` for the sub-sample; defaults to
    /// `0.001 / ceil(log2 |S|)` when unset.
    pub per_round_confidence: Option<f64>,
    /// Stop once this many suspected mistakes have been collected.
    pub early_stop_target: Option<usize>,
}

pub const DEFAULT_B_CONSTANT: f64 = 10.0;

impl FilterConfig {
    /// Defaults for target error `ε`: `N` = next odd `>= ceil(4·log2(1/ε))`.
    pub fn for_epsilon(epsilon: f64) -> Self {
        FilterConfig {
            b_constant: DEFAULT_B_CONSTANT,
            walk_length: default_walk_length(epsilon),
            per_round_confidence: None,
            early_stop_target: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b_constant > 0.0 && self.b_constant.is_finite()) {
            return Err(Error::invalid("b_constant", "must be a positive finite number"));
        }
        if self.walk_length.is_multiple_of(2) {
            return Err(Error::invalid("walk_length", format!("must be odd, got {}", self.walk_length)));
        }
        if let Some(d) = self.per_round_confidence {
            check_open_unit("per_round_confidence", d)?;
        }
        Ok(())
    }

    pub fn subsample_size(&self, set_size: usize) -> usize {
        let log = (set_size.max(1) as f64).log2();
        ((self.b_constant * log).ceil() as usize).max(1)
    }

    pub fn round_confidence(&self, set_size: usize) -> f64 {
        self.per_round_confidence.unwrap_or_else(|| {
            let rounds = (set_size.max(2) as f64).log2().ceil();
            0.001 / rounds
        })
    }
}

pub fn default_walk_length(epsilon: f64) -> usize {
    let n = ((4.0 * (1.0 / epsilon).log2()).ceil() as usize).max(1);
    if n.is_multiple_of(2) {
        n + 1
    } else {
        n
    }
}

/// The support instances of one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportPair {
    /// Rightmost instance labeled `-1`.
    pub x_minus: Option<Instance>,
    /// Leftmost instance labeled `+1`.
    pub x_plus: Option<Instance>,
}

pub fn pick_support(labeled: &SortedLabeledSet) -> Result<SupportPair> {
    if labeled.is_empty() {
        return Err(Error::EmptyInput("labeled sub-sample"));
    }
    let t = labeled.threshold_index;
    Ok(SupportPair {
        x_minus: (t > 1).then(|| labeled.instances[t - 2].clone()),
        x_plus: (t <= labeled.len()).then(|| labeled.instances[t - 1].clone()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Inside,
    AgreeH,
    Mistake,
}

/// Runs the comparison walk for one instance against the supports.
pub fn interval_test<R: Rng + ?Sized>(
    x: &Instance,
    support: &SupportPair,
    h_label: Label,
    walk_length: usize,
    oracle: &mut CrowdOracle,
    rng: &mut R,
) -> Result<Verdict> {
    if support.x_minus.is_none() && support.x_plus.is_none() {
        return Err(Error::invalid("support", "at least one support instance is required"));
    }
    let mut sum_minus = 0i64;
    let mut sum_plus = 0i64;
    for t in 1..=walk_length {
        if let Some(xm) = &support.x_minus {
            sum_minus += i64::from(oracle.query_comparison(x, xm, rng).value());
        }
        if let Some(xp) = &support.x_plus {
            sum_plus += i64::from(oracle.query_comparison(x, xp, rng).value());
        }
        if t % 2 == 0 {
            continue;
        }
        let maj_minus = support
            .x_minus
            .as_ref()
            .map(|_| ComparisonTag::from_sign(sum_minus as f64));
        let maj_plus = support
            .x_plus
            .as_ref()
            .map(|_| ComparisonTag::from_sign(sum_plus as f64));

        let right_of_minus = maj_minus.is_none_or(|m| m == ComparisonTag::AtLeast);
        let left_of_plus = maj_plus.is_none_or(|m| m == ComparisonTag::Below);
        if right_of_minus && left_of_plus {
            return Ok(Verdict::Inside);
        }
        let agrees_negative = h_label == Label::Negative && maj_minus == Some(ComparisonTag::Below);
        let agrees_positive = h_label == Label::Positive && maj_plus == Some(ComparisonTag::AtLeast);
        if agrees_negative || agrees_positive {
            return Ok(Verdict::AgreeH);
        }
    }
    Ok(Verdict::Mistake)
}

/// Accounting for one outer round.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RoundTally {
    pub remaining_before: usize,
    /// Instances labeled by Compare-and-Label this round.
    pub subsampled: usize,
    pub inside: usize,
    pub agree: usize,
    pub mistake: usize,
    /// True for the final round that labels the whole remainder directly.
    pub direct: bool,
    pub label_queries: u64,
    /// Comparisons spent sorting the sub-sample.
    pub subsample_comparisons: u64,
    /// Comparisons spent on interval tests.
    pub interval_comparisons: u64,
}

/// Partition of the input positions produced by [`filter`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FilterOutcome {
    /// Positions routed to `S_I`.
    pub suspected_mistakes: Vec<usize>,
    /// Positions routed to `S'`.
    pub confirmed_agreements: Vec<usize>,
    /// Positions consumed by sub-samples (labeled, but in neither set).
    pub subsampled: Vec<usize>,
    /// Positions still unresolved when an early stop fired.
    pub unresolved: Vec<usize>,
    pub rounds: usize,
    pub tallies: Vec<RoundTally>,
}

impl FilterOutcome {
    pub fn suspected_instances(&self, input: &[Instance]) -> Vec<Instance> {
        self.suspected_mistakes.iter().map(|&i| input[i].clone()).collect()
    }

    pub fn confirmed_instances(&self, input: &[Instance]) -> Vec<Instance> {
        self.confirmed_agreements.iter().map(|&i| input[i].clone()).collect()
    }
}

/// Routes every instance of `set` into suspected mistakes of `h`, confirmed
/// agreements, or labeled sub-samples.
pub fn filter<R: Rng + ?Sized>(
    set: &[Instance],
    h: &Halfspace,
    cfg: &FilterConfig,
    oracle: &mut CrowdOracle,
    rng: &mut R,
) -> Result<FilterOutcome> {
    if set.is_empty() {
        return Err(Error::EmptyInput("filter input"));
    }
    cfg.validate()?;
    let b = cfg.subsample_size(set.len());
    let delta = cfg.round_confidence(set.len());

    let mut out = FilterOutcome::default();
    let mut remaining: Vec<usize> = (0..set.len()).collect();

    while !remaining.is_empty() {
        if cfg
            .early_stop_target
            .is_some_and(|target| out.suspected_mistakes.len() >= target)
        {
            out.unresolved = std::mem::take(&mut remaining);
            break;
        }
        out.rounds += 1;
        let before = oracle.ledger();
        let mut tally = RoundTally {
            remaining_before: remaining.len(),
            ..Default::default()
        };

        if remaining.len() <= b {
            let members: Vec<Instance> = remaining.iter().map(|&i| set[i].clone()).collect();
            let labeled = compare_and_label(&members, delta, oracle, rng)?;
            for (slot, label) in labeled.order.iter().zip(&labeled.labels) {
                let pos = remaining[*slot];
                if h.predict_unchecked(&set[pos]) != *label {
                    out.suspected_mistakes.push(pos);
                    tally.mistake += 1;
                } else {
                    out.confirmed_agreements.push(pos);
                    tally.agree += 1;
                }
            }
            tally.direct = true;
            tally.subsampled = remaining.len();
            remaining.clear();
            let spent = oracle.ledger().since(&before);
            tally.label_queries = spent.label_queries();
            tally.subsample_comparisons = spent.comparison_queries();
            out.tallies.push(tally);
            break;
        }

        let picked = index::sample(rng, remaining.len(), b).into_vec();
        let mut in_subsample = vec![false; remaining.len()];
        for &slot in &picked {
            in_subsample[slot] = true;
        }
        let members: Vec<Instance> = picked.iter().map(|&slot| set[remaining[slot]].clone()).collect();
        let labeled = compare_and_label(&members, delta, oracle, rng)?;
        let support = pick_support(&labeled)?;
        let after_subsample = oracle.ledger();
        tally.subsampled = b;

        let mut kept = Vec::new();
        for (slot, &pos) in remaining.iter().enumerate() {
            if in_subsample[slot] {
                out.subsampled.push(pos);
                continue;
            }
            let x = &set[pos];
            match interval_test(x, &support, h.predict_unchecked(x), cfg.walk_length, oracle, rng)? {
                Verdict::Inside => {
                    tally.inside += 1;
                    kept.push(pos);
                }
                Verdict::AgreeH => {
                    tally.agree += 1;
                    out.confirmed_agreements.push(pos);
                }
                Verdict::Mistake => {
                    tally.mistake += 1;
                    out.suspected_mistakes.push(pos);
                }
            }
        }
        remaining = kept;

        let sub = after_subsample.since(&before);
        tally.label_queries = sub.label_queries();
        tally.subsample_comparisons = sub.comparison_queries();
        tally.interval_comparisons = oracle.ledger().since(&after_subsample).comparison_queries();
        out.tallies.push(tally);
    }

    Ok(out)
}
