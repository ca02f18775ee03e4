//! Labeled image datasets.
//!
//! Pixels are kept as raw 8-bit intensities so duplicate auditing can work
//! on the original bytes; [`Image::value`] normalizes to `[0, 1]` by
//! dividing by 255.

use crate::error::{PnwError, Result};
use crate::labels::Label;
use serde::{Deserialize, Serialize};

/// Tensor layout of one image. Storage is row-major: rows, then columns,
/// then channels for color; depth slices outermost for volumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ImageShape {
    Gray { height: usize, width: usize },
    /// Interleaved RGB, `height x width x 3`.
    Color { height: usize, width: usize },
    Volume { depth: usize, height: usize, width: usize },
}

impl ImageShape {
    pub fn len(&self) -> usize {
        match *self {
            ImageShape::Gray { height, width } => height * width,
            ImageShape::Color { height, width } => height * width * 3,
            ImageShape::Volume { depth, height, width } => depth * height * width,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl std::fmt::Display for ImageShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            ImageShape::Gray { height, width } => write!(f, "{height}x{width} gray"),
            ImageShape::Color { height, width } => write!(f, "{height}x{width}x3 color"),
            ImageShape::Volume { depth, height, width } => write!(f, "{depth}x{height}x{width} volume"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Image {
    shape: ImageShape,
    pixels: Vec<u8>,
}

impl Image {
    pub fn new(shape: ImageShape, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != shape.len() {
            return Err(PnwError::ShapeMismatch(format!(
                "{shape} image needs {} pixels, got {}",
                shape.len(),
                pixels.len()
            )));
        }
        Ok(Self { shape, pixels })
    }

    pub fn shape(&self) -> ImageShape {
        self.shape
    }

    /// Raw bytes, pre-normalization.
    pub fn bytes(&self) -> &[u8] {
        &self.pixels
    }

    /// Normalized intensity of storage element `i`.
    #[inline]
    pub fn value(&self, i: usize) -> f64 {
        f64::from(self.pixels[i]) / 255.0
    }

    pub fn to_normalized(&self) -> Vec<f64> {
        (0..self.pixels.len()).map(|i| self.value(i)).collect()
    }
}

/// Images with 1-based ground-truth labels and stable integer ids.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    images: Vec<Image>,
    labels: Vec<Label>,
    ids: Vec<usize>,
    n_labels: u32,
}

impl Dataset {
    /// Ids are assigned by position, `0..len`.
    pub fn new(images: Vec<Image>, labels: Vec<Label>, n_labels: u32) -> Result<Self> {
        let ids = (0..images.len()).collect();
        Self::with_ids(images, labels, ids, n_labels)
    }

    pub fn with_ids(images: Vec<Image>, labels: Vec<Label>, ids: Vec<usize>, n_labels: u32) -> Result<Self> {
        if images.len() != labels.len() || images.len() != ids.len() {
            return Err(PnwError::InvalidDataset(format!(
                "{} images, {} labels, {} ids",
                images.len(),
                labels.len(),
                ids.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|l| !(1..=n_labels).contains(&l.0)) {
            return Err(PnwError::LabelOutOfRange { label: bad, max: n_labels });
        }
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(PnwError::InvalidDataset("duplicate ids".into()));
        }
        Ok(Self { images, labels, ids, n_labels })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn n_labels(&self) -> u32 {
        self.n_labels
    }

    pub fn images(&self) -> &[Image] {
        &self.images
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn get(&self, index: usize) -> (usize, &Image, Label) {
        (self.ids[index], &self.images[index], self.labels[index])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Image, Label)> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }

    /// Keeps the first `n` data.
    pub fn truncate(&mut self, n: usize) {
        self.images.truncate(n);
        self.labels.truncate(n);
        self.ids.truncate(n);
    }

    /// Drops every datum whose id is in `ids`, keeping the survivors' ids.
    pub fn without_ids(&self, ids: &[usize]) -> Self {
        let drop: std::collections::HashSet<usize> = ids.iter().copied().collect();
        let keep: Vec<usize> = (0..self.len()).filter(|&i| !drop.contains(&self.ids[i])).collect();
        Self {
            images: keep.iter().map(|&i| self.images[i].clone()).collect(),
            labels: keep.iter().map(|&i| self.labels[i]).collect(),
            ids: keep.iter().map(|&i| self.ids[i]).collect(),
            n_labels: self.n_labels,
        }
    }
}
