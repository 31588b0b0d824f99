//! Report rows, summary rows and their CSV/JSON encodings.

use std::io::Write;

use crowdpac::{PipelineConfig, RunReport};
use serde::Serialize;

use crate::CliError;

pub const HEADER: [&str; 21] = [
    "algorithm",
    "seed",
    "d",
    "epsilon",
    "delta",
    "alpha",
    "beta",
    "m_eps",
    "m_L",
    "m_C",
    "lambda_L",
    "lambda_C",
    "holdout_error",
    "p1_labels",
    "p1_comps",
    "p2_labels",
    "p2_comps",
    "p3_labels",
    "p3_comps",
    "flags",
    "wall_clock_ms",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub algorithm: String,
    pub seed: u64,
    pub d: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub m_eps: usize,
    #[serde(rename = "m_L")]
    pub m_l: u64,
    #[serde(rename = "m_C")]
    pub m_c: u64,
    #[serde(rename = "lambda_L")]
    pub lambda_l: f64,
    #[serde(rename = "lambda_C")]
    pub lambda_c: f64,
    pub holdout_error: f64,
    pub p1_labels: u64,
    pub p1_comps: u64,
    pub p2_labels: u64,
    pub p2_comps: u64,
    pub p3_labels: u64,
    pub p3_comps: u64,
    pub flags: String,
    pub wall_clock_ms: u64,
}

impl ReportRow {
    pub fn from_report(report: &RunReport, cfg: &PipelineConfig) -> Self {
        let phase = |i: usize| {
            report
                .phases
                .get(i)
                .map_or((0, 0), |p| (p.labels_used, p.comparisons_used))
        };
        let (p1_labels, p1_comps) = phase(0);
        let (p2_labels, p2_comps) = phase(1);
        let (p3_labels, p3_comps) = phase(2);
        let flags: Vec<String> = report.flags().iter().map(ToString::to_string).collect();
        ReportRow {
            algorithm: report.algorithm.to_string(),
            seed: report.seed,
            d: cfg.problem.dimension,
            epsilon: cfg.problem.target_error,
            delta: cfg.problem.confidence,
            alpha: cfg.crowd.alpha,
            beta: cfg.crowd.beta,
            m_eps: report.m_eps,
            m_l: report.label_queries,
            m_c: report.comparison_queries,
            lambda_l: report.lambda_l,
            lambda_c: report.lambda_c,
            holdout_error: report.holdout_error,
            p1_labels,
            p1_comps,
            p2_labels,
            p2_comps,
            p3_labels,
            p3_comps,
            flags: flags.join(";"),
            wall_clock_ms: report.wall_clock_ms,
        }
    }

    /// True when the phase columns add up to the totals.
    pub fn phases_reconcile(&self) -> bool {
        self.p1_labels + self.p2_labels + self.p3_labels == self.m_l
            && self.p1_comps + self.p2_comps + self.p3_comps == self.m_c
    }

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.algorithm.clone(),
            self.seed.to_string(),
            self.d.to_string(),
            sig9(self.epsilon),
            sig9(self.delta),
            sig9(self.alpha),
            sig9(self.beta),
            self.m_eps.to_string(),
            self.m_l.to_string(),
            self.m_c.to_string(),
            sig9(self.lambda_l),
            sig9(self.lambda_c),
            sig9(self.holdout_error),
            self.p1_labels.to_string(),
            self.p1_comps.to_string(),
            self.p2_labels.to_string(),
            self.p2_comps.to_string(),
            self.p3_labels.to_string(),
            self.p3_comps.to_string(),
            self.flags.clone(),
            self.wall_clock_ms.to_string(),
        ]
    }
}

/// Formats `x` with 9 significant digits, like C's `%.9g`.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_owned()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Mean and standard deviation of one metric over the seeds of a sweep cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub algorithm: String,
    pub epsilon: f64,
    pub seeds: usize,
    #[serde(rename = "mean_lambda_L")]
    pub mean_lambda_l: f64,
    #[serde(rename = "std_lambda_L")]
    pub std_lambda_l: f64,
    #[serde(rename = "mean_lambda_C")]
    pub mean_lambda_c: f64,
    #[serde(rename = "std_lambda_C")]
    pub std_lambda_c: f64,
    pub mean_holdout_error: f64,
    pub std_holdout_error: f64,
}

pub const SUMMARY_HEADER: [&str; 9] = [
    "algorithm",
    "epsilon",
    "seeds",
    "mean_lambda_L",
    "std_lambda_L",
    "mean_lambda_C",
    "std_lambda_C",
    "mean_holdout_error",
    "std_holdout_error",
];

/// Arithmetic mean and sample standard deviation (0 for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl SummaryRow {
    /// Summarizes `rows`, which must share an algorithm and epsilon.
    pub fn from_rows(rows: &[&ReportRow]) -> Self {
        let col = |f: fn(&ReportRow) -> f64| rows.iter().map(|r| f(r)).collect::<Vec<_>>();
        let (mean_lambda_l, std_lambda_l) = mean_std(&col(|r| r.lambda_l));
        let (mean_lambda_c, std_lambda_c) = mean_std(&col(|r| r.lambda_c));
        let (mean_holdout_error, std_holdout_error) = mean_std(&col(|r| r.holdout_error));
        SummaryRow {
            algorithm: rows[0].algorithm.clone(),
            epsilon: rows[0].epsilon,
            seeds: rows.len(),
            mean_lambda_l,
            std_lambda_l,
            mean_lambda_c,
            std_lambda_c,
            mean_holdout_error,
            std_holdout_error,
        }
    }

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.algorithm.clone(),
            sig9(self.epsilon),
            self.seeds.to_string(),
            sig9(self.mean_lambda_l),
            sig9(self.std_lambda_l),
            sig9(self.mean_lambda_c),
            sig9(self.std_lambda_c),
            sig9(self.mean_holdout_error),
            sig9(self.std_holdout_error),
        ]
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Write(e.to_string())
}

pub fn write_csv<W: Write>(out: W, rows: &[ReportRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.csv_record()).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::Write(e.to_string()))
}

pub fn write_summary_csv<W: Write>(out: W, rows: &[SummaryRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.csv_record()).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::Write(e.to_string()))
}

pub fn write_json<W: Write, T: Serialize>(mut out: W, rows: &[T]) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut out, rows).map_err(|e| CliError::Write(e.to_string()))?;
    writeln!(out).map_err(|e| CliError::Write(e.to_string()))
}

pub fn csv_string(rows: &[ReportRow]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("CSV output is UTF-8")
}
