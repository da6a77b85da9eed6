//! One summarized (dataset, version, N) result.

use serde::{Deserialize, Serialize};

use crate::classifier::ClassifierKind;
use crate::sim::{ExperimentVersion, VersionKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub dataset: String,
    /// Version label, e.g. `distributed+hrr`.
    pub version: String,
    pub kind: VersionKind,
    pub compression: bool,
    pub classifier: ClassifierKind,
    pub agents: usize,
    pub dim: usize,
    pub lambda: f64,
    pub kappa: u32,
    pub seeds: usize,
    pub master_seed: u64,
    pub per_seed_accuracy: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub per_agent_accuracy: Vec<f64>,
    /// `f64` values in one producer's message (`L * D` raw, `D` compressed).
    pub payload_values_per_producer: usize,
    /// Bytes sent over all links, summed over folds and seeds.
    pub payload_bytes: usize,
    /// Only recorded on request; it would break byte-identical reruns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
    pub config_hash: String,
}

impl ResultRecord {
    pub fn experiment_version(&self) -> ExperimentVersion {
        ExperimentVersion {
            kind: self.kind,
            compression: self.compression,
            classifier: self.classifier,
        }
    }

    /// Report ordering: dataset, then version, then N.
    pub fn sort_key(&self) -> (&str, VersionKind, bool, ClassifierKind, usize) {
        (
            &self.dataset,
            self.kind,
            self.compression,
            self.classifier,
            self.agents,
        )
    }
}
