use crate::labels::Label;
use serde::{Deserialize, Serialize};

/// What one ANN says about an input: its nearest label and the squared
/// distance of its output to that label's one-hot vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnVerdict {
    pub label: Label,
    pub loss: f64,
}

/// Verdict of a group, a class, or the whole model: the winning label, its
/// vote count, and its loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub label: Label,
    pub votes: usize,
    pub loss: f64,
}

pub type GroupVerdict = Verdict;
pub type ClassVerdict = Verdict;
pub type ModelVerdict = Verdict;

impl std::fmt::Display for AnnVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "label={} loss={:.6e}", self.label, self.loss)
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "label={} votes={} loss={:.6e}", self.label, self.votes, self.loss)
    }
}
