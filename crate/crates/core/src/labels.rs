//! Label ids, the label space with its expat label, and the class partition.

use crate::error::{PnwError, Result};
use serde::{Deserialize, Serialize};

/// A 1-based label id. Ground-truth labels are `1..=n_labels`; the expat
/// label, when present, is `n_labels + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(pub u32);

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSpace {
    n_labels: u32,
    has_expat: bool,
}

impl LabelSpace {
    pub fn new(n_labels: u32, has_expat: bool) -> Result<Self> {
        if n_labels < 2 {
            return Err(PnwError::InvalidArchitecture(format!(
                "need at least 2 ground-truth labels, got {n_labels}"
            )));
        }
        Ok(Self { n_labels, has_expat })
    }

    pub fn n_labels(&self) -> u32 {
        self.n_labels
    }

    pub fn has_expat(&self) -> bool {
        self.has_expat
    }

    pub fn expat(&self) -> Option<Label> {
        self.has_expat.then_some(Label(self.n_labels + 1))
    }

    /// The expat id `n_labels + 1`, whether or not this space uses it.
    pub fn expat_id(&self) -> Label {
        Label(self.n_labels + 1)
    }

    pub fn is_ground_truth(&self, label: Label) -> bool {
        (1..=self.n_labels).contains(&label.0)
    }
}

/// Disjoint per-class subsets of the ground-truth labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassPartition {
    classes: Vec<Vec<Label>>,
}

impl ClassPartition {
    /// Builds a partition from per-class label lists. Each list is sorted;
    /// coverage and disjointness are checked by [`ClassPartition::validate`].
    pub fn new(classes: Vec<Vec<Label>>) -> Self {
        let classes = classes
            .into_iter()
            .map(|mut c| {
                c.sort_unstable();
                c
            })
            .collect();
        Self { classes }
    }

    /// Single class owning `1..=n_labels`.
    pub fn single(n_labels: u32) -> Self {
        Self::new(vec![(1..=n_labels).map(Label).collect()])
    }

    /// Contiguous split: class sizes in order, labels assigned from 1 upward.
    pub fn contiguous(sizes: &[u32]) -> Self {
        let mut next = 1;
        let classes = sizes
            .iter()
            .map(|&n| {
                let c = (next..next + n).map(Label).collect();
                next += n;
                c
            })
            .collect();
        Self::new(classes)
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[Vec<Label>] {
        &self.classes
    }

    pub fn class_labels(&self, class: usize) -> &[Label] {
        &self.classes[class]
    }

    /// Class owning `label`, if any.
    pub fn class_of(&self, label: Label) -> Option<usize> {
        self.classes.iter().position(|c| c.binary_search(&label).is_ok())
    }

    /// Checks that the classes exactly partition `1..=n_labels`.
    pub fn validate(&self, n_labels: u32) -> Result<()> {
        let n_c = self.classes.len();
        if n_c == 0 {
            return Err(PnwError::ZeroDimension("n_c"));
        }
        if n_c > n_labels as usize {
            return Err(PnwError::TooManyClasses { classes: n_c, labels: n_labels as usize });
        }
        let mut owner: Vec<Option<usize>> = vec![None; n_labels as usize];
        for (ci, class) in self.classes.iter().enumerate() {
            if class.is_empty() {
                return Err(PnwError::InvalidArchitecture(format!("class {} has no labels", ci + 1)));
            }
            for &label in class {
                if !(1..=n_labels).contains(&label.0) {
                    return Err(PnwError::LabelOutOfRange { label, max: n_labels });
                }
                let slot = &mut owner[(label.0 - 1) as usize];
                match *slot {
                    Some(first) => {
                        return Err(PnwError::PartitionOverlap { label, first: first + 1, second: ci + 1 })
                    }
                    None => *slot = Some(ci),
                }
            }
        }
        if let Some(missing) = owner.iter().position(Option::is_none) {
            return Err(PnwError::PartitionIncomplete { label: Label(missing as u32 + 1) });
        }
        Ok(())
    }

    /// Output-node label map for ANNs of `class`: the class labels in
    /// ascending order, then the expat label when there are two or more classes.
    pub fn output_labels(&self, class: usize, space: &LabelSpace) -> Vec<Label> {
        let mut labels = self.classes[class].clone();
        if let Some(expat) = space.expat() {
            labels.push(expat);
        }
        labels
    }
}
