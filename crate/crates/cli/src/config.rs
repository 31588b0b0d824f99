//! Experiment configuration files (TOML).

use std::fs;
use std::path::Path;

use crowdpac::boost::PipelineConfig;
use crowdpac::filter::{default_walk_length, FilterConfig, DEFAULT_B_CONSTANT};
use crowdpac::{CrowdConfig, Distribution, ProblemConfig, WorkerModel};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const MIN_HOLDOUT: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmChoice {
    Boost,
    Natural,
    #[default]
    Both,
}

impl AlgorithmChoice {
    pub fn algorithms(self) -> Vec<crowdpac::Algorithm> {
        use crowdpac::Algorithm::*;
        match self {
            AlgorithmChoice::Boost => vec![Boost],
            AlgorithmChoice::Natural => vec![Natural],
            AlgorithmChoice::Both => vec![Boost, Natural],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemSection {
    pub dimension: usize,
    pub target_error: f64,
    pub confidence: f64,
    pub distribution: Distribution,
}

impl Default for ProblemSection {
    fn default() -> Self {
        let p = ProblemConfig::default();
        ProblemSection {
            dimension: p.dimension,
            target_error: p.target_error,
            confidence: p.confidence,
            distribution: p.distribution,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrowdSection {
    pub alpha: f64,
    pub beta: f64,
    pub worker_model: WorkerModel,
}

impl Default for CrowdSection {
    fn default() -> Self {
        let c = CrowdConfig::default();
        CrowdSection {
            alpha: c.alpha,
            beta: c.beta,
            worker_model: c.worker_model,
        }
    }
}

/// Filter settings; unset fields are derived from the target error.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub walk_length: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_round_confidence: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub early_stop_target: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Constants {
    /// `C` in the sample-size bound.
    pub vc_constant: f64,
    /// `c₂` for `|S₂|`.
    pub s2_multiplier: f64,
    /// `c_W` for `|W̄|`.
    pub w_bar_multiplier: f64,
    /// `c_b` for the filter sub-sample size.
    pub b_constant: f64,
    /// Multiplier of the phase-3 rejection budget.
    pub rejection_multiplier: f64,
}

impl Default for Constants {
    fn default() -> Self {
        let p = PipelineConfig::default();
        Constants {
            vc_constant: p.problem.vc_constant,
            s2_multiplier: p.s2_multiplier,
            w_bar_multiplier: p.w_bar_multiplier,
            b_constant: DEFAULT_B_CONSTANT,
            rejection_multiplier: p.rejection_multiplier,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seeds: Vec<u64>,
    pub master_seed: u64,
    pub holdout_size: usize,
    pub algorithm: AlgorithmChoice,
    /// Off by default so repeated runs produce byte-identical reports.
    pub record_wall_clock: bool,
    pub problem: ProblemSection,
    pub crowd: CrowdSection,
    pub filter: FilterSection,
    pub constants: Constants,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seeds: (0..10).collect(),
            master_seed: 0,
            holdout_size: 20_000,
            algorithm: AlgorithmChoice::Both,
            record_wall_clock: false,
            problem: ProblemSection::default(),
            crowd: CrowdSection::default(),
            filter: FilterSection::default(),
            constants: Constants::default(),
        }
    }
}

fn prefixed(section: &str, err: crowdpac::Error) -> CliError {
    match err {
        crowdpac::Error::InvalidParameter { name, reason } => CliError::Invalid {
            field: format!("{section}.{name}"),
            reason,
        },
        other => CliError::Invalid {
            field: section.to_owned(),
            reason: other.to_string(),
        },
    }
}

fn invalid(field: &str, reason: impl Into<String>) -> CliError {
    CliError::Invalid {
        field: field.to_owned(),
        reason: reason.into(),
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("experiment config serializes to TOML")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.seeds.is_empty() {
            return Err(invalid("seeds", "must list at least one seed"));
        }
        if self.holdout_size < MIN_HOLDOUT {
            return Err(invalid("holdout_size", format!("must be at least {MIN_HOLDOUT}, got {}", self.holdout_size)));
        }
        self.problem_config().validate().map_err(|e| match e {
            crowdpac::Error::InvalidParameter { name: "vc_constant", reason } => invalid("constants.vc_constant", reason),
            other => prefixed("problem", other),
        })?;
        self.crowd_config().validate().map_err(|e| prefixed("crowd", e))?;
        let c = &self.constants;
        for (name, v) in [
            ("constants.s2_multiplier", c.s2_multiplier),
            ("constants.w_bar_multiplier", c.w_bar_multiplier),
            ("constants.b_constant", c.b_constant),
            ("constants.rejection_multiplier", c.rejection_multiplier),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be a positive finite number, got {v}")));
            }
        }
        self.filter_config(self.problem.target_error)
            .validate()
            .map_err(|e| prefixed("filter", e))?;
        Ok(())
    }

    pub fn problem_config(&self) -> ProblemConfig {
        ProblemConfig {
            dimension: self.problem.dimension,
            target_error: self.problem.target_error,
            confidence: self.problem.confidence,
            vc_constant: self.constants.vc_constant,
            distribution: self.problem.distribution,
        }
    }

    pub fn crowd_config(&self) -> CrowdConfig {
        CrowdConfig {
            alpha: self.crowd.alpha,
            beta: self.crowd.beta,
            worker_model: self.crowd.worker_model,
        }
    }

    pub fn filter_config(&self, epsilon: f64) -> FilterConfig {
        FilterConfig {
            b_constant: self.constants.b_constant,
            walk_length: self.filter.walk_length.unwrap_or_else(|| default_walk_length(epsilon)),
            per_round_confidence: self.filter.per_round_confidence,
            early_stop_target: self.filter.early_stop_target,
        }
    }

    /// Pipeline settings with the target error replaced by `epsilon`.
    pub fn pipeline_config(&self, epsilon: f64) -> PipelineConfig {
        let mut problem = self.problem_config();
        problem.target_error = epsilon;
        let mut p = PipelineConfig::new(problem, self.crowd_config());
        p.filter = self.filter_config(epsilon);
        p.s2_multiplier = self.constants.s2_multiplier;
        p.w_bar_multiplier = self.constants.w_bar_multiplier;
        p.rejection_multiplier = self.constants.rejection_multiplier;
        p.holdout_size = self.holdout_size;
        p.master_seed = self.master_seed;
        p.record_wall_clock = self.record_wall_clock;
        p
    }
}
