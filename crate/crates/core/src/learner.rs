//! Consistent learner for homogeneous halfspaces (cyclic perceptron).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_dims, dot, Halfspace, Instance, Label};

/// Pass cap giving at most `10^4 · m` perceptron updates.
pub const DEFAULT_MAX_PASSES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pairs: Vec<(Instance, Label)>,
}

impl LabeledSample {
    pub fn new(pairs: Vec<(Instance, Label)>) -> Result<Self> {
        let Some((first, _)) = pairs.first() else {
            return Err(Error::EmptyInput("labeled sample"));
        };
        let dim = first.dim();
        for (x, _) in &pairs {
            check_dims(dim, x.dim())?;
        }
        Ok(LabeledSample { pairs })
    }

    pub fn pairs(&self) -> &[(Instance, Label)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.pairs[0].0.dim()
    }

    /// Same sample with a constant `1` coordinate appended to every instance.
    pub fn lifted_with_bias(&self) -> LabeledSample {
        LabeledSample {
            pairs: self.pairs.iter().map(|(x, y)| (x.lift_with_bias(), *y)).collect(),
        }
    }

    pub fn training_errors(&self, h: &Halfspace) -> usize {
        self.pairs
            .iter()
            .filter(|(x, y)| h.predict_unchecked(x) != *y)
            .count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnOutcome {
    pub halfspace: Halfspace,
    pub training_errors: usize,
    /// False when no consistent separator was found within the pass cap.
    pub consistent: bool,
    pub passes: usize,
    pub updates: usize,
}

/// Runs perceptron passes in input order until a pass makes no mistake.
/// A point on the current boundary counts as a mistake, so a clean pass
/// leaves every point at a strictly positive margin.
///
/// On inseparable input the pass-end iterate with the fewest training errors
/// is returned and `consistent` is false.
pub fn learn_consistent(sample: &LabeledSample, max_passes: usize) -> LearnOutcome {
    let dim = sample.dim();
    let mut w = vec![0.0; dim];
    let mut best: Option<(usize, Vec<f64>)> = None;
    let mut updates = 0usize;
    let mut passes = 0usize;

    while passes < max_passes.max(1) {
        passes += 1;
        let mut mistakes = 0usize;
        for (x, y) in &sample.pairs {
            let s = f64::from(y.value());
            if s * dot(&w, x.coords()) <= 0.0 {
                mistakes += 1;
                updates += 1;
                for (wi, xi) in w.iter_mut().zip(x.coords()) {
                    *wi += s * xi;
                }
            }
        }
        if mistakes == 0 {
            best = Some((0, w.clone()));
            break;
        }
        let errors = count_errors(&w, sample);
        if best.as_ref().is_none_or(|(e, _)| errors < *e) {
            best = Some((errors, w.clone()));
        }
        if errors == 0 {
            break;
        }
    }

    let (_, weights) = best.expect("at least one pass runs");
    let halfspace = Halfspace::new(weights).unwrap_or_else(|_| fallback(dim));
    let training_errors = sample.training_errors(&halfspace);
    LearnOutcome {
        consistent: training_errors == 0,
        halfspace,
        training_errors,
        passes,
        updates,
    }
}

fn count_errors(w: &[f64], sample: &LabeledSample) -> usize {
    sample
        .pairs
        .iter()
        .filter(|(x, y)| Label::from_sign(dot(w, x.coords())) != *y)
        .count()
}

fn fallback(dim: usize) -> Halfspace {
    let mut w = vec![0.0; dim];
    w[0] = 1.0;
    Halfspace::new(w).expect("unit vector is a valid halfspace")
}
