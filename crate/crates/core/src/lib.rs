//! Crowdsourced realizable PAC learning of homogeneous halfspaces.
//!
//! The crate simulates a crowd that answers two kinds of noisy queries:
//! labels (`sign(w*·x)`) and pairwise comparisons (`sign(w*·(x - x'))`).
//! On top of those oracles it provides:
//!
//! * [`compare_label`]: sort a sample with majority-vote comparisons, then
//!   binary-search the label threshold with majority-vote labels.
//! * [`filter`]: find the instances a weak hypothesis gets wrong, using two
//!   support instances and running-majority comparison walks.
//! * [`boost`]: the three-phase boosted learner, the sort-everything
//!   baseline, and the label/comparison overhead bookkeeping.
//! * [`analysis`]: closed-form oracles (gambler's ruin, exact binomial
//!   majority error, Hoeffding bound) used by tests and the `verify` command.
//!
//! Every random choice flows through a caller-supplied [`rand::Rng`], so a
//! run is reproducible from its seed.

pub mod analysis;
pub mod boost;
pub mod compare_label;
pub mod crowd;
pub mod error;
pub mod filter;
pub mod learner;
pub mod model;
pub mod seeding;

pub use boost::{
    majority_combine, overheads, run_boost, run_natural, Algorithm, MajorityVote, PhaseReport,
    PipelineConfig, RunFlag, RunReport,
};
pub use compare_label::{compare_and_label, SortedLabeledSet};
pub use crowd::{Adversary, CrowdConfig, CrowdOracle, QueryLedger, WorkerModel};
pub use error::{Error, Result};
pub use filter::{filter, FilterConfig, FilterOutcome, Verdict};
pub use learner::{learn_consistent, LabeledSample, LearnOutcome};
pub use model::{
    classify, sample_instances, sample_size, true_compare, Classifier, ComparisonTag,
    Distribution, Halfspace, Instance, Label, ProblemConfig,
};
