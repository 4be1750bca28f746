//! Seeded experiments that exercise each result about fractional integrals of BV
//! functions and collect the outcomes into one report.
//!
//! Every row runs on its own random stream derived from the suite seed, so rows are
//! independent of scheduling. A row that errors or panics is recorded as `fail` with the
//! message as evidence.

mod checks;
mod rows;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use checks::{
    preservation_check, preservation_check_with, uvp_count_check, uvp_count_check_with, CheckSettings, CheckVerdict,
    PreservationOutcome, SideCounts, UvpCountOutcome,
};

use crate::error::{Error, Result};
use crate::variation::{DetectOptions, Thresholds};

pub const THEOREM_IDS: [&str; 11] = [
    "T2.2-jordan",
    "L2.5-normalization",
    "T2.6-preservation",
    "T2.6-monotone-image",
    "T2.7-bound",
    "T2.7-linearity",
    "semigroup",
    "T-final-uvp-count",
    "T-final-alpha-ge-1",
    "E2.9-example",
    "dim-1-claims",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

pub type Evidence = BTreeMap<String, serde_json::Value>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremRun {
    pub theorem_id: String,
    /// SHA-256 of the row id and the canonical JSON of the suite config.
    pub config_digest: String,
    pub verdict: Verdict,
    pub evidence: Evidence,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub runs: Vec<TheoremRun>,
    pub seed: u64,
    pub tool_version: String,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.runs.iter().all(|r| r.verdict == Verdict::Pass)
    }

    pub fn run(&self, theorem_id: &str) -> Option<&TheoremRun> {
        self.runs.iter().find(|r| r.theorem_id == theorem_id)
    }

    /// Plain-text table of ids and verdicts.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for r in &self.runs {
            let v = match r.verdict {
                Verdict::Pass => "pass",
                Verdict::Fail => "FAIL",
                Verdict::Inconclusive => "inconclusive",
            };
            s.push_str(&format!("{:<22} {v}\n", r.theorem_id));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub alphas: Vec<f64>,
    pub thresholds: Thresholds,
    /// Cells of the grid fractional-integral images are computed on.
    pub image_n: usize,
    pub detect_levels: usize,
    pub detect_n_per_level: usize,
    pub candidate_cells: usize,
    pub bound_samples: usize,
    pub monotone_samples: usize,
    /// Finest box-counting level for the images.
    pub dim_j_max: u32,
    pub calibration_n: usize,
    pub calibration_j_max: u32,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            alphas: vec![0.25, 0.5, 0.75, 1.0, 1.5],
            thresholds: Thresholds::default(),
            image_n: 1 << 14,
            detect_levels: 6,
            detect_n_per_level: 8192,
            candidate_cells: 16,
            bound_samples: 100,
            monotone_samples: 50,
            dim_j_max: 12,
            calibration_n: 1 << 18,
            calibration_j_max: 11,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() {
            return Err(Error::Config("the alpha list is empty".into()));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::Config(format!("alpha must be positive and finite, got {a}")));
        }
        self.thresholds.validate()?;
        if self.detect_levels < 2 || self.detect_n_per_level == 0 || self.candidate_cells == 0 {
            return Err(Error::Config("detector needs levels >= 2, n_per_level >= 1 and candidate_cells >= 1".into()));
        }
        if self.bound_samples == 0 || self.monotone_samples == 0 {
            return Err(Error::Config("sample counts must be positive".into()));
        }
        for (name, n, j) in [("image_n", self.image_n, self.dim_j_max), ("calibration_n", self.calibration_n, self.calibration_j_max)] {
            if j < 5 || j > 30 {
                return Err(Error::Config(format!("box-counting level {j} for {name} must lie in 5..=30")));
            }
            if !n.is_power_of_two() || n < 1usize << (j + 2) {
                return Err(Error::Config(format!("{name} = {n} must be a power of two >= 2^{}", j + 2)));
            }
        }
        Ok(())
    }

    pub(crate) fn check_settings(&self) -> CheckSettings {
        CheckSettings {
            detect: DetectOptions {
                stride: 1,
                levels: self.detect_levels,
                n_per_level: self.detect_n_per_level,
                base_delta: None,
                thresholds: self.thresholds,
            },
            candidate_cells: self.candidate_cells,
            image_n: self.image_n,
        }
    }

    fn digest(&self, theorem_id: &str) -> String {
        let mut h = Sha256::new();
        h.update(theorem_id.as_bytes());
        h.update(b"\n");
        h.update(serde_json::to_string(self).expect("config serializes").as_bytes());
        hex::encode(h.finalize())
    }
}

/// Result of one row before it is stamped with its id and digest.
pub(crate) type RowResult = Result<(Verdict, Evidence)>;

/// Run every row of the suite. Rows execute concurrently; the report lists them in the
/// order of [`THEOREM_IDS`].
pub fn run_suite(config: &SuiteConfig) -> Result<VerificationReport> {
    config.validate()?;
    let runs: Vec<TheoremRun> = THEOREM_IDS
        .par_iter()
        .enumerate()
        .map(|(idx, &id)| {
            let outcome = catch_unwind(AssertUnwindSafe(|| rows::run_row(id, idx as u64, config)));
            let (verdict, evidence) = match outcome {
                Ok(Ok(v)) => v,
                Ok(Err(e)) => (Verdict::Fail, evidence_error("error", e.to_string())),
                Err(panic) => {
                    let msg = panic
                        .downcast_ref::<&str>()
                        .map(|s| s.to_string())
                        .or_else(|| panic.downcast_ref::<String>().cloned())
                        .unwrap_or_else(|| "worker panicked".into());
                    (Verdict::Fail, evidence_error("panic", msg))
                }
            };
            TheoremRun { theorem_id: id.to_string(), config_digest: config.digest(id), verdict, evidence }
        })
        .collect();
    Ok(VerificationReport { runs, seed: config.seed, tool_version: env!("CARGO_PKG_VERSION").to_string() })
}

fn evidence_error(key: &str, msg: String) -> Evidence {
    let mut e = Evidence::new();
    e.insert(key.into(), msg.into());
    e
}

/// Pass if every case passes, fail on any failure, inconclusive otherwise.
pub(crate) fn combine(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
    let mut out = Verdict::Pass;
    for v in verdicts {
        match v {
            Verdict::Fail => return Verdict::Fail,
            Verdict::Inconclusive => out = Verdict::Inconclusive,
            Verdict::Pass => {}
        }
    }
    out
}
