//! Versioned JSON documents written by the command-line driver.

use serde::{Deserialize, Serialize};

use crate::dual::DualEval;
use crate::evolve::EvolvedSolution;
use crate::methods::LaduSummary;

pub const REPORT_FORMAT_VERSION: u32 = 1;

/// Output of `solve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveMetrics {
    pub format_version: u32,
    pub method: String,
    /// Gbit/s
    pub throughput: f64,
    /// Wall time of the solve phase alone (s).
    pub solve_seconds: f64,
    /// Wall time including snapshot and multiplier loading (s).
    pub end_to_end_seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual_value: Option<f64>,
    pub feasible: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladu: Option<LaduSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution_file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolved: Option<EvolvedSolution>,
}

/// Output of `subgrad`: the dual evaluation plus the throughput recovered
/// from the same multipliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubgradReport {
    pub format_version: u32,
    pub evaluation: DualEval,
    /// Gbit/s
    pub recovered_throughput: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    /// Relative to the manifest's directory.
    pub file: String,
    pub seed: u64,
    /// s after T0
    pub epoch: f64,
    pub satellites: usize,
    pub links: usize,
    pub flows: usize,
    /// Hex SHA-256 of the snapshot file.
    pub sha256: String,
}

/// Index of an exported snapshot dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub format_version: u32,
    /// Master seed the per-snapshot seeds and epochs were drawn from.
    pub seed: u64,
    pub count: usize,
    pub snapshots: Vec<ManifestEntry>,
}
