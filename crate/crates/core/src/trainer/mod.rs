//! Training loads, SGD, the error-free descent phase, and double-label auditing.

mod audit;
mod gdt;
mod loads;
mod sgd;

pub use audit::{detect_double_labels, DuplicatePair};
pub use gdt::{gdt_train, GdtConfig};
pub use loads::assign_loads;
pub use sgd::{sgd_train, SgdConfig, SgdOutcome};

use crate::ann::{Ann, Scratch};
use crate::error::AnnIndex;
use serde::{Deserialize, Serialize};

/// One training example as seen by one ANN.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// Dataset id of the source datum.
    pub id: usize,
    pub features: Vec<f64>,
    /// Output node the ANN should select.
    pub target: usize,
}

/// Training data of one ANN: its home-group data followed by expat data.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingLoad {
    pub ann_index: AnnIndex,
    pub samples: Vec<Sample>,
    pub home_count: usize,
    pub expat_count: usize,
}

impl TrainingLoad {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Ids of samples `ann` does not classify as their target.
    pub fn misclassified(&self, ann: &Ann) -> Vec<usize> {
        let mut scratch = Scratch::new(ann);
        self.samples
            .iter()
            .filter(|s| ann.classify(&s.features, &mut scratch).0 != s.target)
            .map(|s| s.id)
            .collect()
    }
}

/// Per-ANN training summary.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GdtReport {
    pub epochs_sgd: usize,
    /// Misclassified load samples when SGD stopped.
    pub errors_after_sgd: usize,
    pub rounds_gdt: usize,
    pub final_train_errors: usize,
    /// Seconds; excluded from serialized reports so they stay reproducible.
    #[serde(skip)]
    pub wall_time: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    #[serde(default)]
    pub sgd: SgdConfig,
    #[serde(default)]
    pub gdt: GdtConfig,
}
