use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::config::ExperimentConfig;
use super::fit::{fit_order, FittedOrder};
use super::regret::{aggregate, Aggregate};
use super::runner::ExperimentResult;

pub const TRACE_HEADER: &str = "t,cum_dueling_mean,cum_dueling_std,cum_functional_mean";
pub const TRACE_FILE: &str = "trace.csv";
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedReport {
    pub index: usize,
    pub seed: u64,
    pub slope: Option<f64>,
    pub stderr: Option<f64>,
    pub final_dueling: f64,
    pub final_functional: f64,
    pub total_corruption_budget: f64,
    pub flips: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureReport {
    pub index: usize,
    pub seed: u64,
    pub error: String,
}

/// Summary written next to the trace CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub algorithm: String,
    /// Order fitted on the seed-averaged dueling regret.
    pub slope: Option<f64>,
    pub stderr: Option<f64>,
    pub fit: Option<FittedOrder>,
    /// Why the aggregate fit is missing, when it is.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_error: Option<String>,
    pub seeds: Vec<SeedReport>,
    /// Mean over successful seeds of `Σ_t |c_t|`.
    pub total_corruption_budget: f64,
    pub failures: Vec<FailureReport>,
}

/// Aggregate the successful seeds and fit their orders.
pub fn summarize(result: &ExperimentResult) -> (Option<Aggregate>, Report) {
    let cfg = &result.config;
    let fraction = cfg.fit_fraction;
    let mut seeds = Vec::new();
    let mut failures = Vec::new();
    for run in &result.runs {
        match &run.outcome {
            Ok(trace) => {
                let fit = fit_order(&trace.rounds, &trace.cum_dueling, fraction).ok();
                seeds.push(SeedReport {
                    index: run.index,
                    seed: run.seed,
                    slope: fit.map(|f| f.slope),
                    stderr: fit.map(|f| f.stderr),
                    final_dueling: trace.final_dueling(),
                    final_functional: trace.cum_functional.last().copied().unwrap_or(0.0),
                    total_corruption_budget: trace.budget.total_budget(),
                    flips: trace.budget.flips(),
                });
            }
            Err(e) => failures.push(FailureReport {
                index: run.index,
                seed: run.seed,
                error: e.clone(),
            }),
        }
    }
    let agg = aggregate(&result.traces());
    let (fit, fit_error) = match &agg {
        Ok(a) => match fit_order(&a.rounds, &a.dueling_mean, fraction) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        },
        Err(e) => (None, Some(e.to_string())),
    };
    let budget = if seeds.is_empty() {
        0.0
    } else {
        seeds.iter().map(|s| s.total_corruption_budget).sum::<f64>() / seeds.len() as f64
    };
    let report = Report {
        config: cfg.clone(),
        algorithm: cfg.algorithm.kind().to_string(),
        slope: fit.map(|f| f.slope),
        stderr: fit.map(|f| f.stderr),
        fit,
        fit_error,
        seeds,
        total_corruption_budget: budget,
        failures,
    };
    (agg.ok(), report)
}

pub fn format_trace_csv(agg: &Aggregate) -> String {
    let mut out = String::with_capacity(agg.rounds.len() * 80);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for i in 0..agg.rounds.len() {
        writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e}",
            agg.rounds[i], agg.dueling_mean[i], agg.dueling_std[i], agg.functional_mean[i]
        )
        .expect("writing to a String cannot fail");
    }
    out
}

/// Columns of a trace CSV.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TraceTable {
    pub rounds: Vec<u64>,
    pub dueling_mean: Vec<f64>,
    pub dueling_std: Vec<f64>,
    pub functional_mean: Vec<f64>,
}

pub fn read_trace_csv(path: &Path) -> Result<TraceTable> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Fit(format!("{}: {e}", path.display())))?;
    let headers = reader.headers().map_err(|e| Error::Fit(e.to_string()))?.clone();
    let header: Vec<&str> = headers.iter().collect();
    if header.join(",") != TRACE_HEADER {
        return Err(Error::Fit(format!("unexpected trace header `{}`", header.join(","))));
    }
    let mut table = TraceTable::default();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Fit(format!("row {}: {e}", i + 1)))?;
        let bad = |col: usize| Error::Fit(format!("row {}, column {}: not a number", i + 1, col + 1));
        table.rounds.push(record[0].parse().map_err(|_| bad(0))?);
        let num = |col: usize| record[col].parse::<f64>().map_err(|_| bad(col));
        table.dueling_mean.push(num(1)?);
        table.dueling_std.push(num(2)?);
        table.functional_mean.push(num(3)?);
    }
    Ok(table)
}

/// Paths written by [`export_results`].
#[derive(Debug, Clone)]
pub struct ExportPaths {
    pub trace: Option<PathBuf>,
    pub report: PathBuf,
}

/// Write `trace.csv` (when at least one seed succeeded) and `report.json`
/// into `dir`.
pub fn export_results(result: &ExperimentResult, dir: &Path) -> Result<(Report, ExportPaths)> {
    std::fs::create_dir_all(dir)?;
    let (agg, report) = summarize(result);
    let trace = match agg {
        Some(a) => {
            let path = dir.join(TRACE_FILE);
            std::fs::write(&path, format_trace_csv(&a))?;
            Some(path)
        }
        None => None,
    };
    let report_path = dir.join(REPORT_FILE);
    std::fs::write(&report_path, serde_json::to_string_pretty(&report)?)?;
    Ok((
        report,
        ExportPaths {
            trace,
            report: report_path,
        },
    ))
}
