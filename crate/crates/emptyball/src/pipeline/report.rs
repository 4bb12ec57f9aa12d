//! Report rows, verdicts, and CSV/JSON/plot-data emission.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::offspring::Regime;

use super::estimators::TailEstimate;

/// Row-level check outcome. `Advisory` marks rows whose theory comparison
/// is not rigorous (d = 2 corridors) or whose estimate carries excess
/// capped runs; advisory rows never fail an experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Advisory,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Pass => write!(f, "PASS"),
            Verdict::Fail => write!(f, "FAIL"),
            Verdict::Advisory => write!(f, "ADVISORY"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportRow {
    #[serde(flatten)]
    pub estimate: TailEstimate,
    pub verdict: Verdict,
}

/// Absolute tolerance floor of the theory comparisons; finite-n bias has no
/// known rate, so comparisons allow `max(3 sigma, floor)`.
pub const ABS_TOLERANCE: f64 = 0.03;
/// The heavy-tailed regime converges in the slower `b_n` scale and gets a
/// wider floor.
pub const ABS_TOLERANCE_STABLE: f64 = 0.05;

/// Judges one estimate against its theory band.
pub fn verdict_for(est: &TailEstimate) -> Verdict {
    if est.capped_fraction() > 0.01 {
        return Verdict::Advisory;
    }
    if est.regime == Regime::CriticalFiniteVar && est.d == 2 {
        // Only a non-rigorous corridor exists.
        return Verdict::Advisory;
    }
    let floor = match est.regime {
        Regime::CriticalStable => ABS_TOLERANCE_STABLE,
        _ => ABS_TOLERANCE,
    };
    let tol = (3.0 * est.sigma()).max(floor);
    let ok = match est.band.exact {
        Some(exact) => (est.p_hat - exact).abs() <= tol,
        None => est.p_hat >= est.band.lo - tol && est.p_hat <= est.band.hi + tol,
    };
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

pub const CSV_HEADER: &str =
    "regime,d,n,r,a_n,method,M,p_hat,ci_lo,ci_hi,band_lo,band_hi,band_exact,trunc_eps,capped,seed,verdict";

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.9e}")).unwrap_or_default()
}

pub fn csv_row(row: &ReportRow) -> String {
    let e = &row.estimate;
    format!(
        "{},{},{},{},{:.9e},{},{},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{},{:.3e},{},{},{}",
        e.regime,
        e.d,
        e.n,
        e.r,
        e.a_n,
        e.method,
        e.m_effective,
        e.p_hat,
        e.ci_lo,
        e.ci_hi,
        e.band.lo,
        e.band.hi,
        fmt_opt(e.band.exact),
        e.trunc_eps,
        e.capped_count,
        e.seed,
        row.verdict,
    )
}

pub fn csv_string(rows: &[ReportRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&csv_row(row));
        out.push('\n');
    }
    out
}

pub fn json_string(rows: &[ReportRow]) -> Result<String> {
    serde_json::to_string_pretty(rows)
        .map_err(|e| crate::error::Error::Config(format!("json serialization: {e}")))
}

/// Per-(n, method) plot data: `r p_hat ci_lo ci_hi band_lo band_hi band_exact`,
/// with the d = 2 advisory corridor substituted for the vacuous [0, 1] band.
pub fn dat_files(rows: &[ReportRow]) -> Vec<(String, String)> {
    let mut keys: Vec<(u64, String)> = rows
        .iter()
        .map(|r| (r.estimate.n, r.estimate.method.to_string()))
        .collect();
    keys.sort();
    keys.dedup();
    let mut files = Vec::new();
    for (n, method) in keys {
        let mut body = String::from("# r p_hat ci_lo ci_hi band_lo band_hi band_exact\n");
        for row in rows {
            let e = &row.estimate;
            if e.n != n || e.method.to_string() != method {
                continue;
            }
            let (blo, bhi) = e.band.advisory.unwrap_or((e.band.lo, e.band.hi));
            body.push_str(&format!(
                "{} {:.9e} {:.9e} {:.9e} {:.9e} {:.9e} {}\n",
                e.r,
                e.p_hat,
                e.ci_lo,
                e.ci_hi,
                blo,
                bhi,
                e.band
                    .exact
                    .map(|v| format!("{v:.9e}"))
                    .unwrap_or_else(|| "nan".into()),
            ));
        }
        files.push((format!("{method}_n{n}.dat"), body));
    }
    files
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}


/// Writes `<base>.csv` or `<base>.json` plus one `.dat` file per
/// `(n, method)` cell; returns the written paths.
pub fn write_outputs(
    rows: &[ReportRow],
    base: &Path,
    format: OutputFormat,
) -> Result<Vec<PathBuf>> {
    if let Some(dir) = base.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut written = Vec::new();
    let main = match format {
        OutputFormat::Csv => {
            let p = base.with_extension("csv");
            std::fs::write(&p, csv_string(rows))?;
            p
        }
        OutputFormat::Json => {
            let p = base.with_extension("json");
            std::fs::write(&p, json_string(rows)?)?;
            p
        }
    };
    written.push(main);
    let stem = base
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".into());
    for (suffix, body) in dat_files(rows) {
        let p = base.with_file_name(format!("{stem}_{suffix}"));
        std::fs::write(&p, body)?;
        written.push(p);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limits::TheoryBand;
    use crate::offspring::Regime;
    use crate::pipeline::estimators::{Method, TailEstimate};

    fn estimate(
        regime: Regime,
        d: u32,
        p_hat: f64,
        exact: Option<f64>,
        capped: u64,
    ) -> TailEstimate {
        TailEstimate {
            regime,
            d,
            n: 100,
            r: 1.0,
            a_n: 1.0,
            method: Method::Direct,
            p_hat,
            ci_lo: p_hat - 0.01,
            ci_hi: p_hat + 0.01,
            m_effective: 2000,
            capped_count: capped,
            trunc_eps: 1e-3,
            band: TheoryBand {
                regime,
                d,
                r: 1.0,
                lo: exact.unwrap_or(0.1),
                hi: exact.unwrap_or(0.4),
                exact,
                advisory: None,
                description: String::new(),
            },
            seed: 1,
            hit_integral: None,
            hit_integral_sigma: None,
        }
    }

    #[test]
    fn verdicts() {
        let crit = Regime::CriticalFiniteVar;
        // Within the absolute floor of an exact limit.
        let e = estimate(crit, 1, 0.12, Some(0.135), 0);
        assert_eq!(verdict_for(&e), Verdict::Pass);
        // Too far out.
        let e = estimate(crit, 1, 0.30, Some(0.135), 0);
        assert_eq!(verdict_for(&e), Verdict::Fail);
        // Inside a band.
        let e = estimate(crit, 3, 0.25, None, 0);
        assert_eq!(verdict_for(&e), Verdict::Pass);
        // d = 2 is advisory no matter what.
        let e = estimate(crit, 2, 0.9, None, 0);
        assert_eq!(verdict_for(&e), Verdict::Advisory);
        // Excess capped runs demote to advisory.
        let e = estimate(crit, 1, 0.135, Some(0.135), 100);
        assert_eq!(verdict_for(&e), Verdict::Advisory);
        // The stable regime floor is wider.
        let e = estimate(Regime::CriticalStable, 1, 0.245, Some(0.202), 0);
        assert_eq!(verdict_for(&e), Verdict::Pass);
        let e = estimate(crit, 1, 0.245, Some(0.202), 0);
        assert_eq!(verdict_for(&e), Verdict::Fail);
    }
}
