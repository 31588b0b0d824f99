//! Compare-and-Label: sort a sample with majority-vote comparisons, then find
//! the label threshold by binary search with majority-vote labels.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::crowd::{vote_sizes, CrowdOracle};
use crate::error::{Error, Result};
use crate::model::{check_open_unit, ComparisonTag, Instance, Label};

/// Result of sorting and labeling a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SortedLabeledSet {
    /// Instances in ascending inferred `w*`-projection.
    pub instances: Vec<Instance>,
    /// `order[j]` is the input position of `instances[j]`.
    pub order: Vec<usize>,
    /// 1-based index of the leftmost `+1`; `len + 1` when everything is `-1`.
    pub threshold_index: usize,
    pub labels: Vec<Label>,
    pub comparison_votes: usize,
    pub label_votes: usize,
    pub pairwise_tests: usize,
    pub probes: usize,
}

impl SortedLabeledSet {
    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Labels implied by a threshold: `-1` before it, `+1` from it on.
    pub fn labels_for_threshold(len: usize, threshold_index: usize) -> Vec<Label> {
        (1..=len)
            .map(|pos| {
                if pos < threshold_index {
                    Label::Negative
                } else {
                    Label::Positive
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortOutcome {
    /// Input positions in sorted order.
    pub order: Vec<usize>,
    /// Number of pairwise majority tests performed.
    pub tests: usize,
}

/// Randomized quicksort where every pairwise test is a `votes`-way majority
/// of comparison queries. Pivots are drawn uniformly from each sub-range.
pub fn noisy_quicksort<R: Rng + ?Sized>(
    items: &[Instance],
    votes: usize,
    oracle: &mut CrowdOracle,
    rng: &mut R,
) -> Result<SortOutcome> {
    let mut order: Vec<usize> = (0..items.len()).collect();
    let mut tests = 0usize;
    let mut stack = vec![(0usize, order.len())];
    let mut left = Vec::new();
    let mut right = Vec::new();

    while let Some((lo, hi)) = stack.pop() {
        if hi - lo < 2 {
            continue;
        }
        let pivot_slot = rng.random_range(lo..hi);
        let pivot = order[pivot_slot];
        left.clear();
        right.clear();
        for (slot, &idx) in order.iter().enumerate().take(hi).skip(lo) {
            if slot == pivot_slot {
                continue;
            }
            tests += 1;
            match oracle.majority_compare(&items[idx], &items[pivot], votes, rng)? {
                ComparisonTag::Below => left.push(idx),
                ComparisonTag::AtLeast => right.push(idx),
            }
        }
        let split = lo + left.len();
        order[lo..split].copy_from_slice(&left);
        order[split] = pivot;
        order[split + 1..hi].copy_from_slice(&right);
        stack.push((split + 1, hi));
        stack.push((lo, split));
    }

    Ok(SortOutcome { order, tests })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThresholdOutcome {
    /// 1-based index of the leftmost positive, or `len + 1`.
    pub threshold_index: usize,
    pub probes: usize,
}

/// Leftmost-positive binary search over an already sorted sequence. Each
/// probe is a `votes`-way majority label; at most `floor(log2 m) + 1` probes.
pub fn threshold_search<R: Rng + ?Sized>(
    sorted: &[Instance],
    votes: usize,
    oracle: &mut CrowdOracle,
    rng: &mut R,
) -> Result<ThresholdOutcome> {
    // Everything before `lo` probed negative, everything from `hi` on positive.
    let mut lo = 1usize;
    let mut hi = sorted.len() + 1;
    let mut probes = 0usize;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        probes += 1;
        match oracle.majority_label(&sorted[mid - 1], votes, rng)? {
            Label::Positive => hi = mid,
            Label::Negative => lo = mid + 1,
        }
    }
    Ok(ThresholdOutcome {
        threshold_index: lo,
        probes,
    })
}

/// Sorts and labels `sample` so that, with probability at least `1 - δ`,
/// every emitted label equals the ground truth.
pub fn compare_and_label<R: Rng + ?Sized>(
    sample: &[Instance],
    delta: f64,
    oracle: &mut CrowdOracle,
    rng: &mut R,
) -> Result<SortedLabeledSet> {
    if sample.is_empty() {
        return Err(Error::EmptyInput("compare_and_label sample"));
    }
    check_open_unit("delta", delta)?;
    let (k1, k2) = vote_sizes(sample.len(), delta, oracle.config());
    let sorted = noisy_quicksort(sample, k1, oracle, rng)?;
    let instances: Vec<Instance> = sorted.order.iter().map(|&i| sample[i].clone()).collect();
    let threshold = threshold_search(&instances, k2, oracle, rng)?;
    let labels = SortedLabeledSet::labels_for_threshold(instances.len(), threshold.threshold_index);
    Ok(SortedLabeledSet {
        instances,
        order: sorted.order,
        threshold_index: threshold.threshold_index,
        labels,
        comparison_votes: k1,
        label_votes: k2,
        pairwise_tests: sorted.tests,
        probes: threshold.probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crowd::CrowdConfig;
    use crate::model::{sample_instances, Halfspace, ProblemConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn oracle(alpha: f64, beta: f64) -> CrowdOracle {
        CrowdOracle::new(Halfspace::new(vec![1.0, 0.0]).unwrap(), CrowdConfig::iid(alpha, beta)).unwrap()
    }

    fn line(xs: &[f64]) -> Vec<Instance> {
        xs.iter().map(|&v| Instance::new(vec![v, 0.3]).unwrap()).collect()
    }

    fn is_permutation(order: &[usize], n: usize) -> bool {
        let mut seen = vec![false; n];
        order.len() == n && order.iter().all(|&i| i < n && !std::mem::replace(&mut seen[i], true))
    }

    #[test]
    fn noiseless_sort_orders_projections() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut o = oracle(0.5, 0.5);
        let items = sample_instances(&ProblemConfig::default(), 300, &mut rng);
        let out = noisy_quicksort(&items, 1, &mut o, &mut rng).unwrap();
        assert!(is_permutation(&out.order, items.len()));
        let proj: Vec<f64> = out.order.iter().map(|&i| items[i].coords()[0]).collect();
        assert!(proj.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(o.ledger().comparison_queries(), out.tests as u64);
    }

    #[test]
    fn three_element_expected_tests() {
        // Middle pivot: 2 tests; extreme pivot: 3. Mean 8/3.
        let items = line(&[0.1, -0.4, 0.9]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut o = oracle(0.5, 0.5);
        let trials = 60_000;
        let total: usize = (0..trials)
            .map(|_| noisy_quicksort(&items, 1, &mut o, &mut rng).unwrap().tests)
            .sum();
        let mean = total as f64 / trials as f64;
        // Standard error of a {2,3} variable with p=2/3 is 0.0019 here.
        assert!((mean - 8.0 / 3.0).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn singleton_and_empty_need_no_tests() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut o = oracle(0.3, 0.3);
        assert_eq!(noisy_quicksort(&line(&[0.2]), 5, &mut o, &mut rng).unwrap().tests, 0);
        assert_eq!(noisy_quicksort(&[], 5, &mut o, &mut rng).unwrap().order, Vec::<usize>::new());
        assert_eq!(o.ledger().comparison_queries(), 0);
    }

    #[test]
    fn threshold_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut o = oracle(0.5, 0.5);
        let t = threshold_search(&line(&[-0.5, -0.2, 0.1, 0.7]), 3, &mut o, &mut rng).unwrap();
        assert_eq!(t.threshold_index, 3);
        let t = threshold_search(&line(&[-0.5, -0.2, -0.1]), 3, &mut o, &mut rng).unwrap();
        assert_eq!(t.threshold_index, 4);
        let t = threshold_search(&line(&[0.5, 0.6]), 3, &mut o, &mut rng).unwrap();
        assert_eq!(t.threshold_index, 1);

        for cut in 0..=8 {
            let xs: Vec<f64> = (0..8).map(|i| if i < cut { -1.0 + 0.01 * i as f64 } else { 0.5 }).collect();
            let before = o.ledger();
            let t = threshold_search(&line(&xs), 5, &mut o, &mut rng).unwrap();
            assert_eq!(t.threshold_index, cut + 1);
            assert!(t.probes <= 4);
            assert_eq!(o.ledger().since(&before).label_queries(), 5 * t.probes as u64);
        }
    }

    #[test]
    fn noiseless_compare_and_label_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let truth = Halfspace::random_unit(3, &mut rng);
        let mut o = CrowdOracle::new(truth.clone(), CrowdConfig::iid(0.5, 0.5)).unwrap();
        let cfg = ProblemConfig { dimension: 3, ..Default::default() };
        let sample = sample_instances(&cfg, 150, &mut rng);
        let out = compare_and_label(&sample, 0.01, &mut o, &mut rng).unwrap();
        assert!(is_permutation(&out.order, sample.len()));
        for (x, y) in out.instances.iter().zip(&out.labels) {
            assert_eq!(truth.predict_unchecked(x), *y);
        }
        let ledger = o.ledger();
        assert_eq!(ledger.comparison_queries(), (out.comparison_votes * out.pairwise_tests) as u64);
        assert_eq!(ledger.label_queries(), (out.label_votes * out.probes) as u64);
    }

    #[test]
    fn singleton_costs_only_label_votes() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut o = oracle(0.3, 0.3);
        let out = compare_and_label(&line(&[0.4]), 0.05, &mut o, &mut rng).unwrap();
        assert_eq!(o.ledger().comparison_queries(), 0);
        assert_eq!(o.ledger().label_queries(), out.label_votes as u64);
        assert_eq!(out.probes, 1);
        assert!(compare_and_label(&[], 0.05, &mut o, &mut rng).is_err());
        assert!(compare_and_label(&line(&[0.4]), 1.5, &mut o, &mut rng).is_err());
    }

    #[test]
    fn labels_follow_threshold_under_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut o = oracle(0.1, 0.1);
        let sample = sample_instances(&ProblemConfig::default(), 40, &mut rng);
        for _ in 0..5 {
            let out = compare_and_label(&sample, 0.5, &mut o, &mut rng).unwrap();
            assert!(is_permutation(&out.order, sample.len()));
            assert_eq!(out.labels, SortedLabeledSet::labels_for_threshold(out.len(), out.threshold_index));
        }
    }
}
