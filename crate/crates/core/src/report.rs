//! Report types emitted by the experiment runner. Serialization uses struct
//! field order throughout, so parsing and re-serializing a report is
//! byte-stable.

use serde::{Deserialize, Serialize};

use crate::group::CapReport;
use crate::stats::Histogram;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }

    pub fn from_bool(pass: bool) -> Verdict {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub experiment: String,
    pub generator: String,
    pub estimator_method: String,
    pub seed: u64,
    pub replications: usize,
    pub alpha: f64,
    /// Exact evaluated-value ties observed across all replications; the
    /// continuous theory assumes there are none.
    pub tie_count: usize,
}

/// Histogram plus goodness-of-fit summary of one uniformity experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformityReport {
    pub sample_size: usize,
    pub histogram: Histogram,
    pub max_density_deviation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ks_d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ks_p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi2_stat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi2_df: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi2_p: Option<f64>,
    pub verdict: Verdict,
    pub metadata: ReportMetadata,
}

/// Exact orbit-law report of the oracle experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitReport {
    pub rows: usize,
    pub cols: usize,
    pub anchor: (usize, usize),
    pub base_entries: Vec<f64>,
    /// Exact probabilities as `num/den` strings, rank 1 first.
    pub pmf: Vec<String>,
    pub pmf_float: Vec<f64>,
    pub uniform: bool,
    pub chi2_stat: f64,
    pub chi2_df: usize,
    pub chi2_p: f64,
    pub verdict: Verdict,
    pub metadata: ReportMetadata,
}

/// Pushforward validation report of the validate-nu experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PushforwardValidationReport {
    pub group: String,
    pub anchor: String,
    pub caps: Vec<CapReport>,
    pub verdict: Verdict,
    pub metadata: ReportMetadata,
}

/// The report produced by one experiment run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Report {
    Uniformity(UniformityReport),
    Orbit(OrbitReport),
    Pushforward(PushforwardValidationReport),
}

impl Report {
    pub fn verdict(&self) -> Verdict {
        match self {
            Report::Uniformity(r) => r.verdict,
            Report::Orbit(r) => r.verdict,
            Report::Pushforward(r) => r.verdict,
        }
    }

    pub fn as_uniformity(&self) -> Option<&UniformityReport> {
        match self {
            Report::Uniformity(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_orbit(&self) -> Option<&OrbitReport> {
        match self {
            Report::Orbit(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_pushforward(&self) -> Option<&PushforwardValidationReport> {
        match self {
            Report::Pushforward(r) => Some(r),
            _ => None,
        }
    }
}
