//! Instances, halfspaces and the noiseless labeling/comparison semantics.
//!
//! `sign(0)` is `+1` throughout: a point on the decision boundary is labeled
//! positive, and two points with equal projection compare as `+1`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    coords: Vec<f64>,
}

impl Instance {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyInput("instance coordinates"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("coords", "all coordinates must be finite"));
        }
        Ok(Instance { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Appends a constant `1` coordinate so a biased separator `sign(w·x + b)`
    /// becomes a homogeneous one in `d + 1` dimensions.
    pub fn lift_with_bias(&self) -> Instance {
        let mut coords = self.coords.clone();
        coords.push(1.0);
        Instance { coords }
    }

    pub fn scaled(&self, factor: f64) -> Instance {
        Instance {
            coords: self.coords.iter().map(|c| c * factor).collect(),
        }
    }
}

/// A homogeneous halfspace `x -> sign(w·x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    weights: Vec<f64>,
}

impl Halfspace {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyInput("halfspace weights"));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("weights", "all weights must be finite"));
        }
        if weights.iter().all(|&w| w == 0.0) {
            return Err(Error::invalid("weights", "at least one weight must be nonzero"));
        }
        Ok(Halfspace { weights })
    }

    /// Draws a direction uniformly from the unit sphere in `R^d`.
    pub fn random_unit<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        Halfspace {
            weights: unit_gaussian_direction(dim, rng),
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn margin(&self, x: &Instance) -> f64 {
        dot(&self.weights, &x.coords)
    }

    /// Unchecked prediction; callers guarantee matching dimensions.
    pub(crate) fn predict_unchecked(&self, x: &Instance) -> Label {
        debug_assert_eq!(self.dim(), x.dim());
        Label::from_sign(self.margin(x))
    }

    pub(crate) fn compare_unchecked(&self, x: &Instance, other: &Instance) -> ComparisonTag {
        debug_assert_eq!(x.dim(), other.dim());
        let diff: f64 = self
            .weights
            .iter()
            .zip(x.coords.iter().zip(&other.coords))
            .map(|(w, (a, b))| w * (a - b))
            .sum();
        ComparisonTag::from_sign(diff)
    }

    /// True when both halfspaces point in the same direction, i.e. they
    /// classify every instance identically.
    pub fn same_direction(&self, other: &Halfspace) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        let cross = dot(&self.weights, &other.weights);
        let n1 = dot(&self.weights, &self.weights).sqrt();
        let n2 = dot(&other.weights, &other.weights).sqrt();
        cross > 0.0 && (cross - n1 * n2).abs() <= 1e-12 * n1 * n2
    }

    pub fn scaled(&self, factor: f64) -> Result<Halfspace> {
        Halfspace::new(self.weights.iter().map(|w| w * factor).collect())
    }
}

/// Anything that maps an instance to a label.
pub trait Classifier {
    fn predict(&self, x: &Instance) -> Label;

    /// Fraction of `points` on which this classifier disagrees with `truth`.
    fn error_against(&self, truth: &Halfspace, points: &[Instance]) -> f64 {
        if points.is_empty() {
            return 0.0;
        }
        let wrong = points
            .iter()
            .filter(|x| self.predict(x) != truth.predict_unchecked(x))
            .count();
        wrong as f64 / points.len() as f64
    }
}

impl Classifier for Halfspace {
    fn predict(&self, x: &Instance) -> Label {
        self.predict_unchecked(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn from_sign(v: f64) -> Self {
        if v >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn value(self) -> i8 {
        match self {
            Label::Negative => -1,
            Label::Positive => 1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::Negative => Label::Positive,
            Label::Positive => Label::Negative,
        }
    }
}

/// Outcome of comparing `x` against `x'`: `AtLeast` means `x` is at least as
/// positive as `x'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ComparisonTag {
    Below,
    AtLeast,
}

impl ComparisonTag {
    pub fn from_sign(v: f64) -> Self {
        if v >= 0.0 {
            ComparisonTag::AtLeast
        } else {
            ComparisonTag::Below
        }
    }

    pub fn value(self) -> i8 {
        match self {
            ComparisonTag::Below => -1,
            ComparisonTag::AtLeast => 1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            ComparisonTag::Below => ComparisonTag::AtLeast,
            ComparisonTag::AtLeast => ComparisonTag::Below,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Distribution {
    #[default]
    UnitSphereUniform,
    StandardGaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub dimension: usize,
    /// Target error `ε`.
    pub target_error: f64,
    /// Reference confidence `δ` used for `m_ε`.
    pub confidence: f64,
    /// Hidden constant of the VC sample-size bound.
    pub vc_constant: f64,
    pub distribution: Distribution,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        ProblemConfig {
            dimension: 2,
            target_error: 0.04,
            confidence: 0.001,
            vc_constant: 2.0,
            distribution: Distribution::UnitSphereUniform,
        }
    }
}

impl ProblemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::invalid("dimension", "must be positive"));
        }
        check_open_unit("target_error", self.target_error)?;
        check_open_unit("confidence", self.confidence)?;
        if !(self.vc_constant > 0.0 && self.vc_constant.is_finite()) {
            return Err(Error::invalid("vc_constant", "must be a positive finite number"));
        }
        Ok(())
    }

    /// `m_ε` at the reference confidence.
    pub fn m_eps(&self) -> usize {
        sample_size_unchecked(self.target_error, self.confidence, self.dimension, self.vc_constant)
    }

    /// `m_√ε` at the reference confidence.
    pub fn m_sqrt_eps(&self) -> usize {
        sample_size_unchecked(
            self.target_error.sqrt(),
            self.confidence,
            self.dimension,
            self.vc_constant,
        )
    }
}

pub(crate) fn check_open_unit(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must lie in (0, 1), got {v}")))
    }
}

pub fn classify(h: &Halfspace, x: &Instance) -> Result<Label> {
    check_dims(h.dim(), x.dim())?;
    Ok(h.predict_unchecked(x))
}

/// Noiseless comparison tag `sign(w*·(x - x'))`.
pub fn true_compare(truth: &Halfspace, x: &Instance, other: &Instance) -> Result<ComparisonTag> {
    check_dims(truth.dim(), x.dim())?;
    check_dims(truth.dim(), other.dim())?;
    Ok(truth.compare_unchecked(x, other))
}

pub(crate) fn check_dims(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}

/// Draws `n` i.i.d. instances from the configured marginal.
pub fn sample_instances<R: Rng + ?Sized>(cfg: &ProblemConfig, n: usize, rng: &mut R) -> Vec<Instance> {
    (0..n).map(|_| draw_instance(cfg, rng)).collect()
}

pub(crate) fn draw_instance<R: Rng + ?Sized>(cfg: &ProblemConfig, rng: &mut R) -> Instance {
    let coords = match cfg.distribution {
        Distribution::UnitSphereUniform => unit_gaussian_direction(cfg.dimension, rng),
        Distribution::StandardGaussian => (0..cfg.dimension)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect(),
    };
    Instance { coords }
}

fn unit_gaussian_direction<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|c| c / norm).collect();
        }
    }
}

/// VC sample size `ceil((C/ε)·(d·ln(1/ε) + ln(1/δ)))`, at least 1.
pub fn sample_size(epsilon: f64, delta: f64, dim: usize, vc_constant: f64) -> Result<usize> {
    check_open_unit("epsilon", epsilon)?;
    check_open_unit("delta", delta)?;
    if dim == 0 {
        return Err(Error::invalid("dimension", "must be positive"));
    }
    if !(vc_constant > 0.0 && vc_constant.is_finite()) {
        return Err(Error::invalid("vc_constant", "must be a positive finite number"));
    }
    Ok(sample_size_unchecked(epsilon, delta, dim, vc_constant))
}

fn sample_size_unchecked(epsilon: f64, delta: f64, dim: usize, vc_constant: f64) -> usize {
    let raw = (vc_constant / epsilon) * (dim as f64 * (1.0 / epsilon).ln() + (1.0 / delta).ln());
    (raw.ceil() as usize).max(1)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
