//! Structured study reports: JSON documents plus per-parameter CSV tables.
//!
//! Reports are reproducible: everything except the wall-time field is a pure
//! function of (scenario document, seed, configuration), and serialization
//! order is fixed by the struct layout.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

/// Parameters a study ran with; recorded verbatim in the report.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ParameterTable {
    pub rho: f64,
    pub tau: f64,
    pub t_end: f64,
    pub grid: [usize; 3],
    pub s_values: Vec<f64>,
    pub seed: u64,
    pub lin_tol: f64,
}

/// One row of the per-parameter data table. Column meaning is study-specific
/// (documented per study); the CSV layout is fixed.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StudyRow {
    pub s: f64,
    pub error: f64,
    pub bound: f64,
    pub ratio: f64,
    pub residual: f64,
}

/// A named scalar measurement compared against a configured threshold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub op: String,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    pub fn le(name: &str, value: f64, threshold: f64) -> Check {
        Check {
            name: name.to_string(),
            value,
            op: "<=".to_string(),
            threshold,
            passed: value <= threshold,
        }
    }

    pub fn ge(name: &str, value: f64, threshold: f64) -> Check {
        Check {
            name: name.to_string(),
            value,
            op: ">=".to_string(),
            threshold,
            passed: value >= threshold,
        }
    }

    /// Informational entry that never fails the study.
    pub fn info(name: &str, value: f64) -> Check {
        Check {
            name: name.to_string(),
            value,
            op: "recorded".to_string(),
            threshold: 0.0,
            passed: true,
        }
    }
}

/// Least-squares slope of log(error) against log(parameter) with a 95%
/// confidence interval.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FittedRate {
    pub slope: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Complete record of one harness experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyReport {
    pub study_kind: String,
    pub scenario_digest: String,
    pub parameters: ParameterTable,
    pub rows: Vec<StudyRow>,
    pub checks: Vec<Check>,
    pub fitted_rate: Option<FittedRate>,
    pub passed: bool,
    pub wall_time_seconds: f64,
}

impl StudyReport {
    /// Overall verdict: every non-informational check passed.
    pub fn evaluate(&mut self) {
        self.passed = self.checks.iter().all(|c| c.passed);
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn rows_csv(&self) -> String {
        let mut out = String::from("s,error,bound,ratio,residual\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.s, r.error, r.bound, r.ratio, r.residual
            ));
        }
        out
    }

    pub fn write_files(&self, out_dir: &std::path::Path) -> Result<()> {
        std::fs::create_dir_all(out_dir)?;
        std::fs::write(out_dir.join("report.json"), self.to_json()?)?;
        std::fs::write(out_dir.join(format!("{}.csv", self.study_kind)), self.rows_csv())?;
        Ok(())
    }
}

/// SHA-256 hex digest of a serializable description; identifies the scenario
/// a report came from.
pub fn digest_of<T: Serialize>(value: &T) -> String {
    let text = serde_json::to_string(value).expect("scenario descriptions serialize");
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let out = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in out {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}

/// Ordinary least squares on (log x, log y) with a two-sided 95% interval.
/// Needs at least three points for the interval; returns None below two.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Option<FittedRate> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|&(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = logs.len();
    if n < 2 {
        return None;
    }
    let xbar = logs.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let ybar = logs.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let sxx: f64 = logs.iter().map(|p| (p.0 - xbar).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - xbar) * (p.1 - ybar)).sum();
    let slope = sxy / sxx;
    if n == 2 {
        return Some(FittedRate {
            slope,
            ci_low: slope,
            ci_high: slope,
        });
    }
    let intercept = ybar - slope * xbar;
    let rss: f64 = logs
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    let se = (rss / (n as f64 - 2.0) / sxx).sqrt();
    let half = t_quantile_975(n - 2) * se;
    Some(FittedRate {
        slope,
        ci_low: slope - half,
        ci_high: slope + half,
    })
}

/// Two-sided 97.5% Student t quantile.
fn t_quantile_975(df: usize) -> f64 {
    const TABLE: [f64; 30] = [
        12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179,
        2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
        2.060, 2.056, 2.052, 2.048, 2.045, 2.042,
    ];
    if df == 0 {
        f64::INFINITY
    } else if df <= TABLE.len() {
        TABLE[df - 1]
    } else {
        1.96
    }
}
