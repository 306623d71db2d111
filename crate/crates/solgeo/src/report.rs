//! Test reports emitted by the experiment harness.

use crate::geometry::SolParams;
use serde::{Deserialize, Serialize};

/// One named statistic checked against its threshold. `pass` is always
/// `statistic <= threshold`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestReport {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub n: u64,
    pub seed: u64,
    pub pass: bool,
}

impl TestReport {
    pub fn new(name: impl Into<String>, statistic: f64, threshold: f64, n: u64, seed: u64) -> Self {
        TestReport {
            name: name.into(),
            statistic,
            threshold,
            n,
            seed,
            pass: statistic <= threshold,
        }
    }
}

/// Shared run parameters embedded in every experiment report. Runtime
/// details like the worker count are deliberately not part of this:
/// reports must be byte-identical across worker counts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMeta {
    pub dt: f64,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "N")]
    pub n: u64,
    pub seed: u64,
}

/// The full outcome of one experiment command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub version: String,
    pub params: SolParams,
    pub run: RunMeta,
    pub reports: Vec<TestReport>,
    pub all_pass: bool,
}

impl ExperimentReport {
    pub fn new(
        name: impl Into<String>,
        params: SolParams,
        run: RunMeta,
        reports: Vec<TestReport>,
    ) -> Self {
        let all_pass = reports.iter().all(|r| r.pass);
        ExperimentReport {
            name: name.into(),
            version: crate::VERSION.to_string(),
            params,
            run,
            reports,
            all_pass,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_iff_under_threshold() {
        assert!(TestReport::new("x", 0.05, 0.06, 10, 1).pass);
        assert!(!TestReport::new("x", 0.07, 0.06, 10, 1).pass);
        // boundary counts as a pass
        assert!(TestReport::new("x", 0.06, 0.06, 10, 1).pass);
    }
}
