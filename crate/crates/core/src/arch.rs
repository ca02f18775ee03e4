//! PNW shape: classes x groups x features, plus the per-ANN layer sizes.

use crate::error::{AnnIndex, PnwError, Result};
use crate::features::FeatureSpec;
use crate::labels::{ClassPartition, Label, LabelSpace};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PnwArchitecture {
    pub n_labels: u32,
    pub n_classes: usize,
    pub n_groups: usize,
    pub n_features: usize,
    pub partition: ClassPartition,
    pub hidden_nodes: usize,
    pub feature_specs: Vec<FeatureSpec>,
    pub seed: u64,
}

impl PnwArchitecture {
    /// Convenience constructor deriving `n_classes` and `n_features` from
    /// the partition and the feature list.
    pub fn new(
        n_labels: u32,
        partition: ClassPartition,
        n_groups: usize,
        hidden_nodes: usize,
        feature_specs: Vec<FeatureSpec>,
        seed: u64,
    ) -> Self {
        Self {
            n_labels,
            n_classes: partition.n_classes(),
            n_groups,
            n_features: feature_specs.len(),
            partition,
            hidden_nodes,
            feature_specs,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("n_c", self.n_classes),
            ("n_g", self.n_groups),
            ("n_f", self.n_features),
            ("hidden_nodes", self.hidden_nodes),
        ] {
            if v == 0 {
                return Err(PnwError::ZeroDimension(name));
            }
        }
        if self.feature_specs.iter().any(|s| s.output_dims == 0) {
            return Err(PnwError::ZeroDimension("input_dims"));
        }
        LabelSpace::new(self.n_labels, false)?;
        if self.n_classes != self.partition.n_classes() {
            if self.n_classes > self.n_labels as usize {
                return Err(PnwError::TooManyClasses { classes: self.n_classes, labels: self.n_labels as usize });
            }
            return Err(PnwError::InvalidArchitecture(format!(
                "n_c = {} but the partition has {} classes",
                self.n_classes,
                self.partition.n_classes()
            )));
        }
        if self.n_features != self.feature_specs.len() {
            return Err(PnwError::InvalidArchitecture(format!(
                "n_f = {} but {} feature specs are given",
                self.n_features,
                self.feature_specs.len()
            )));
        }
        self.partition.validate(self.n_labels)
    }

    pub fn label_space(&self) -> LabelSpace {
        LabelSpace::new(self.n_labels, self.n_classes >= 2).expect("validated architecture")
    }

    pub fn expat_id(&self) -> Label {
        Label(self.n_labels + 1)
    }

    /// N_T = n_c * n_g * n_f.
    pub fn total_anns(&self) -> usize {
        self.n_classes * self.n_groups * self.n_features
    }

    pub fn input_dims(&self, feature: usize) -> usize {
        self.feature_specs[feature].output_dims
    }

    /// Output-node labels for ANNs of `class`.
    pub fn output_labels(&self, class: usize) -> Vec<Label> {
        self.partition.output_labels(class, &self.label_space())
    }

    /// |L_i|, plus one for the expat node when n_c >= 2.
    pub fn output_width(&self, class: usize) -> usize {
        self.partition.class_labels(class).len() + usize::from(self.n_classes >= 2)
    }

    /// Flat position of an ANN: class-major, then group, then feature.
    pub fn flat_index(&self, idx: AnnIndex) -> usize {
        (idx.class * self.n_groups + idx.group) * self.n_features + idx.feature
    }

    pub fn ann_indices(&self) -> impl Iterator<Item = AnnIndex> + '_ {
        (0..self.n_classes).flat_map(move |class| {
            (0..self.n_groups)
                .flat_map(move |group| (0..self.n_features).map(move |feature| AnnIndex { class, group, feature }))
        })
    }

    /// Trainable parameters across all N_T ANNs.
    pub fn total_params(&self) -> usize {
        self.ann_indices()
            .map(|i| param_count(self.input_dims(i.feature), self.hidden_nodes, self.output_width(i.class)))
            .sum()
    }
}

/// Returns `arch` unchanged if it satisfies every structural invariant.
pub fn validate_architecture(arch: PnwArchitecture) -> Result<PnwArchitecture> {
    arch.validate()?;
    Ok(arch)
}

/// Weights and biases of a one-hidden-layer network.
pub fn param_count(input: usize, hidden: usize, output: usize) -> usize {
    input * hidden + hidden + hidden * output + output
}
