//! Experiment orchestration: estimator scheduling over the `(n, r)` grid,
//! verdicts against theory bands, and report emission.

pub mod config;
pub mod estimators;
pub mod report;
pub mod stats;

pub use config::{ConfigFile, EstimatorKind, ExperimentConfig, OffspringSpec, StepKind, StepSpec};
pub use estimators::{direct_grid, estimate_direct, estimate_factorized, Method, TailEstimate};
pub use report::{
    csv_string, dat_files, json_string, write_outputs, OutputFormat, ReportRow, Verdict,
};
pub use stats::{binomial_sigma, normal_quantile, wilson_ci};

use crate::error::Result;
use crate::exec::Exec;

/// A completed experiment: one row per `(n, r, method)` plus per-check
/// summary lines.
#[derive(Debug)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub summaries: Vec<String>,
    /// True when no row failed (advisory rows do not fail an experiment).
    pub all_pass: bool,
}

fn exec_for(cfg: &ExperimentConfig) -> Exec {
    let _ = cfg;
    Exec::default()
}

/// Runs the full `(n, r)` grid with the configured estimator(s). Direct
/// cells share fields across the whole `r` grid (common random numbers);
/// factorized cells run independently per `r`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let run = || -> Result<Vec<ReportRow>> {
        let exec = exec_for(cfg);
        let mut rows = Vec::new();
        for &n in &cfg.n_list {
            if matches!(cfg.estimator, EstimatorKind::Direct | EstimatorKind::Both) {
                for est in direct_grid(cfg, n, &cfg.r_list, exec)? {
                    let verdict = report::verdict_for(&est);
                    rows.push(ReportRow {
                        estimate: est,
                        verdict,
                    });
                }
            }
            if matches!(
                cfg.estimator,
                EstimatorKind::Factorized | EstimatorKind::Both
            ) {
                for &r in &cfg.r_list {
                    let est = estimate_factorized(cfg, n, r, exec)?;
                    let verdict = report::verdict_for(&est);
                    rows.push(ReportRow {
                        estimate: est,
                        verdict,
                    });
                }
            }
        }
        Ok(rows)
    };

    #[cfg(feature = "parallel")]
    let rows = match cfg.workers {
        Some(w) if w >= 1 => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| crate::error::Error::Config(format!("thread pool: {e}")))?
            .install(run),
        _ => run(),
    }?;
    #[cfg(not(feature = "parallel"))]
    let rows = run()?;

    let mut summaries = Vec::new();
    let mut all_pass = true;
    for method in [Method::Direct, Method::Factorized] {
        let subset: Vec<&ReportRow> = rows
            .iter()
            .filter(|r| r.estimate.method == method)
            .collect();
        if subset.is_empty() {
            continue;
        }
        let pass = subset.iter().filter(|r| r.verdict == Verdict::Pass).count();
        let fail = subset.iter().filter(|r| r.verdict == Verdict::Fail).count();
        let advisory = subset
            .iter()
            .filter(|r| r.verdict == Verdict::Advisory)
            .count();
        all_pass &= fail == 0;
        let overall = if fail > 0 { "FAIL" } else { "PASS" };
        summaries.push(format!(
            "{} {} (d={}) via {}: {} pass / {} fail / {} advisory over {} rows",
            overall,
            cfg.law.regime(),
            cfg.d,
            method,
            pass,
            fail,
            advisory,
            subset.len()
        ));
    }
    Ok(ExperimentReport {
        rows,
        summaries,
        all_pass,
    })
}
