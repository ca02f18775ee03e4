//! Parallel neural web (PNW) classifier.
//!
//! A PNW is a three-level hierarchy of small single-hidden-layer networks:
//! `n_c` classes, each with `n_g` groups, each with `n_f` featured ANNs.
//! Classes own disjoint label subsets and share one auxiliary "expat"
//! label. An input is classified by a majority vote inside each group, a
//! winner-takes-all over the groups of each class, and a final
//! winner-takes-all over the non-expat class verdicts.
//!
//! Every ANN is trained on its own training load by SGD followed by an
//! error-free descent phase that drives its training errors to zero.

pub mod ann;
pub mod arch;
pub mod dataset;
pub mod ensemble;
pub mod error;
pub mod features;
pub mod labels;
pub mod rng;
pub mod trainer;
pub mod verdict;

pub use ann::Ann;
pub use arch::{param_count, validate_architecture, PnwArchitecture};
pub use dataset::{Dataset, Image, ImageShape};
pub use ensemble::{
    class_wta, evaluate, group_vote, model_output, predict_model, train_model, AnnTrainReport, Evaluation, PnwModel,
    TrainReport, VerdictTrace,
};
pub use error::{AnnIndex, PnwError, Result};
pub use features::{apply_feature, cyclic_channel_specs, Channel, FeatureKind, FeatureSpec};
pub use labels::{ClassPartition, Label, LabelSpace};
pub use rng::SeededRng;
pub use trainer::{detect_double_labels, DuplicatePair, GdtConfig, GdtReport, SgdConfig, TrainConfig, TrainingLoad};
pub use verdict::{AnnVerdict, ClassVerdict, GroupVerdict, ModelVerdict, Verdict};
