//! Run configuration, read from TOML.
//!
//! ```toml
//! seed = 7
//! output_dir = "runs/mnist"
//! exclude_ids = [12, 40]          # optional
//!
//! [dataset]
//! format = "idx"                  # idx | raw | npy
//! images = "train-images-idx3-ubyte.gz"
//! labels = "train-labels-idx1-ubyte.gz"
//! label_base = 0                  # label value that maps to 1
//! limit = 2000                    # optional
//!
//! [architecture]
//! n_labels = 10
//! n_groups = 1
//! hidden_nodes = 40
//! classes = [[1, 2, 3, 4, 5, 6, 7, 8, 9, 10]]   # or class_sizes = [5, 5]
//! features = [{ kind = "identity_vector" }]
//!
//! [trainer.sgd]
//! rate = 0.1
//!
//! [trainer.gdt]
//! max_rounds = 10000
//! ```
//!
//! Relative paths are resolved against the config file's directory.
//! A feature's `output_dims` may be omitted when the image shape is known,
//! either from the dataset or from `architecture.image_shape`.

use crate::ingest::DatasetSource;
use pnw_core::{ClassPartition, FeatureKind, FeatureSpec, ImageShape, Label, PnwArchitecture, PnwError, TrainConfig};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exclude_ids: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<DatasetSource>,
    pub architecture: ArchitectureConfig,
    #[serde(default)]
    pub trainer: TrainConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchitectureConfig {
    pub n_labels: u32,
    /// Optional cross-check against `classes` / `class_sizes`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_classes: Option<usize>,
    pub n_groups: usize,
    /// Optional cross-check against `features`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_features: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classes: Option<Vec<Vec<u32>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_sizes: Option<Vec<u32>>,
    pub hidden_nodes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_shape: Option<ImageShape>,
    pub features: Vec<FeatureEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureEntry {
    #[serde(flatten)]
    pub kind: FeatureKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dims: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: Box<toml::de::Error> },
    #[error("config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Architecture(#[from] PnwError),
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        let mut cfg = Self::parse(&text).map_err(|source| ConfigError::Parse { path: path.into(), source: Box::new(source) })?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(ds) = self.dataset.as_mut() {
            fix(&mut ds.images);
            fix(&mut ds.labels);
        }
        if let Some(out) = self.output_dir.as_mut() {
            fix(out);
        }
    }

    /// Builds and validates the architecture. `shape` (the dataset's image
    /// shape) takes precedence over `architecture.image_shape`.
    pub fn architecture(&self, shape: Option<ImageShape>) -> Result<PnwArchitecture, ConfigError> {
        let a = &self.architecture;
        let partition = match (&a.classes, &a.class_sizes) {
            (Some(c), None) => ClassPartition::new(c.iter().map(|l| l.iter().copied().map(Label).collect()).collect()),
            (None, Some(sizes)) => ClassPartition::contiguous(sizes),
            (None, None) => ClassPartition::single(a.n_labels),
            (Some(_), Some(_)) => return Err(ConfigError::Invalid("give either classes or class_sizes, not both".into())),
        };
        let shape = shape.or(a.image_shape);
        let specs = a
            .features
            .iter()
            .enumerate()
            .map(|(k, f)| match (f.output_dims, shape) {
                (Some(dims), Some(shape)) => {
                    let spec = FeatureSpec::for_shape(f.kind, shape)?;
                    if spec.output_dims != dims {
                        return Err(ConfigError::Architecture(PnwError::ShapeMismatch(format!(
                            "feature {} ({:?}) yields {} values on {shape} images, config says {dims}",
                            k + 1,
                            f.kind,
                            spec.output_dims
                        ))));
                    }
                    Ok(spec)
                }
                (Some(dims), None) => Ok(FeatureSpec { kind: f.kind, output_dims: dims }),
                (None, Some(shape)) => Ok(FeatureSpec::for_shape(f.kind, shape)?),
                (None, None) => Err(ConfigError::Invalid(format!(
                    "feature {} needs output_dims or a known image shape",
                    k + 1
                ))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut arch = PnwArchitecture::new(a.n_labels, partition, a.n_groups, a.hidden_nodes, specs, self.seed);
        if let Some(n) = a.n_classes {
            arch.n_classes = n;
        }
        if let Some(n) = a.n_features {
            arch.n_features = n;
        }
        Ok(pnw_core::validate_architecture(arch)?)
    }
}
