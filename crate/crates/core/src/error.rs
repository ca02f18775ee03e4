use crate::labels::Label;
use thiserror::Error;

/// Position of one ANN in the class/group/feature lattice, 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct AnnIndex {
    pub class: usize,
    pub group: usize,
    pub feature: usize,
}

impl std::fmt::Display for AnnIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.class + 1, self.group + 1, self.feature + 1)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PnwError {
    #[error("label {label} is assigned to both class {first} and class {second}")]
    PartitionOverlap { label: Label, first: usize, second: usize },

    #[error("label {label} is not assigned to any class")]
    PartitionIncomplete { label: Label },

    #[error("{classes} classes cannot partition {labels} labels")]
    TooManyClasses { classes: usize, labels: usize },

    #[error("{0} must be positive")]
    ZeroDimension(&'static str),

    #[error("label {label} is outside 1..={max}")]
    LabelOutOfRange { label: Label, max: u32 },

    #[error("invalid architecture: {0}")]
    InvalidArchitecture(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("target node {target} out of range for output width {width}")]
    BadTarget { target: usize, width: usize },

    #[error("class {class} receives no training data")]
    EmptyClass { class: usize },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("{}: contradictory duplicates, id pairs {ids:?}", scope(.ann))]
    DoubleLabelDetected { ann: Option<AnnIndex>, ids: Vec<(usize, usize)> },

    #[error("{}: ids {residual:?} still misclassified after {rounds} rounds", scope(.ann))]
    RoundLimitExceeded { ann: Option<AnnIndex>, rounds: usize, residual: Vec<usize> },

    #[error("all ANNs are error-free but the model misclassifies {} training data; first trace:\n{trace}", .ids.len())]
    FullTrainCheckFailed { ids: Vec<usize>, trace: String },
}

fn scope(ann: &Option<AnnIndex>) -> String {
    match ann {
        Some(idx) => format!("ANN {idx}"),
        None => "dataset".into(),
    }
}

pub type Result<T, E = PnwError> = std::result::Result<T, E>;
