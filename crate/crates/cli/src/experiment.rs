//! Seeded batch execution.

use crowdpac::{boost, Algorithm, RunReport};
use rayon::prelude::*;
use rayon::ThreadPoolBuilder;

use crate::config::ExperimentConfig;
use crate::report::{ReportRow, SummaryRow};
use crate::CliError;

/// One finished trial with its row.
#[derive(Debug, Clone)]
pub struct Trial {
    pub report: RunReport,
    pub row: ReportRow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<ReportRow>,
    pub summary: Vec<SummaryRow>,
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, CliError> {
    ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Invalid {
            field: "jobs".into(),
            reason: e.to_string(),
        })
}

/// Runs every `(epsilon, algorithm, seed)` cell, ordered that way.
pub fn run_trials(cfg: &ExperimentConfig, epsilons: &[f64], jobs: usize) -> Result<Vec<Trial>, CliError> {
    cfg.validate()?;
    let mut tasks = Vec::new();
    for &eps in epsilons {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(CliError::Invalid {
                field: "epsilons".into(),
                reason: format!("each value must lie in (0, 1), got {eps}"),
            });
        }
        let pipeline = cfg.pipeline_config(eps);
        for algorithm in cfg.algorithm.algorithms() {
            for &seed in &cfg.seeds {
                tasks.push((pipeline.clone(), algorithm, seed));
            }
        }
    }
    let run = |(pipeline, algorithm, seed): &(crowdpac::PipelineConfig, Algorithm, u64)| {
        let report = boost::run(*algorithm, pipeline, *seed).map_err(|e| CliError::Invalid {
            field: "config".into(),
            reason: e.to_string(),
        })?;
        let row = ReportRow::from_report(&report, pipeline);
        Ok(Trial { report, row })
    };
    if jobs <= 1 {
        tasks.iter().map(run).collect()
    } else {
        pool(jobs)?.install(|| tasks.par_iter().map(run).collect())
    }
}

/// One row per `(algorithm, seed)` at the configured target error.
pub fn run_experiment(cfg: &ExperimentConfig, jobs: usize) -> Result<Vec<ReportRow>, CliError> {
    Ok(run_trials(cfg, &[cfg.problem.target_error], jobs)?
        .into_iter()
        .map(|t| t.row)
        .collect())
}

/// Detail rows over the cross product of `epsilons` and the configured
/// algorithms and seeds, plus one summary per `(epsilon, algorithm)` cell.
pub fn sweep(cfg: &ExperimentConfig, epsilons: &[f64], jobs: usize) -> Result<SweepReport, CliError> {
    if epsilons.is_empty() {
        return Err(CliError::Invalid {
            field: "epsilons".into(),
            reason: "must list at least one value".into(),
        });
    }
    let rows: Vec<ReportRow> = run_trials(cfg, epsilons, jobs)?.into_iter().map(|t| t.row).collect();
    Ok(SweepReport {
        summary: summarize(&rows),
        rows,
    })
}

/// Groups rows by `(epsilon, algorithm)` in first-appearance order.
pub fn summarize(rows: &[ReportRow]) -> Vec<SummaryRow> {
    let mut cells: Vec<((u64, String), Vec<&ReportRow>)> = Vec::new();
    for row in rows {
        let key = (row.epsilon.to_bits(), row.algorithm.clone());
        match cells.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(row),
            None => cells.push((key, vec![row])),
        }
    }
    cells.iter().map(|(_, members)| SummaryRow::from_rows(members)).collect()
}
