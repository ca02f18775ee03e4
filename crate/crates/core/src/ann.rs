//! Single-hidden-layer network and its nearest-one-hot classification rule.
//!
//! `y = logistic(W2 * tanh(W1 * x + b1) + b2)`. The loss of a sample is the
//! squared Euclidean distance from `y` to the target's one-hot vector, and
//! the predicted node is the one whose one-hot vector is nearest to `y`.
//!
//! Parameter layout (also the checkpoint layout): `w1` is `hidden x input`
//! row-major, then `b1`, then `w2` as `output x hidden` row-major, then `b2`.

use crate::error::{PnwError, Result};
use crate::labels::Label;
use crate::rng::SeededRng;
use crate::verdict::AnnVerdict;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ann {
    input: usize,
    hidden: usize,
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: Vec<f64>,
    label_map: Vec<Label>,
}

/// Gradient of the sample loss, laid out like [`Ann`]'s parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnGradient {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl AnnGradient {
    pub fn zeros_like(ann: &Ann) -> Self {
        Self {
            w1: vec![0.0; ann.w1.len()],
            b1: vec![0.0; ann.b1.len()],
            w2: vec![0.0; ann.w2.len()],
            b2: vec![0.0; ann.b2.len()],
        }
    }

    pub fn clear(&mut self) {
        for v in [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2] {
            v.fill(0.0);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.w1.iter().chain(&self.b1).chain(&self.w2).chain(&self.b2).copied()
    }
}

#[inline]
fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Dot product with four independent accumulators, summed in a fixed order.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Squared distance from `y` to the one-hot vector of `node`.
#[inline]
pub fn one_hot_distance(y: &[f64], node: usize) -> f64 {
    y.iter()
        .enumerate()
        .map(|(s, &v)| {
            let d = if s == node { v - 1.0 } else { v };
            d * d
        })
        .sum()
}

/// Objective differentiated by [`Ann::accumulate_objective_gradient`].
///
/// `CrossEntropy` is the per-node logistic cross-entropy
/// `-sum(e ln y + (1 - e) ln(1 - y))`. Its output-layer delta is `y - e`,
/// which does not vanish when an output saturates on the wrong side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    SquaredError,
    CrossEntropy,
}

/// Logistic cross-entropy of `y` against the one-hot vector of `node`.
pub fn cross_entropy(y: &[f64], node: usize) -> f64 {
    y.iter()
        .enumerate()
        .map(|(s, &v)| if s == node { -v.ln() } else { -(1.0 - v).ln() })
        .sum()
}

/// Nearest one-hot node and its distance; ties go to the lowest index.
pub fn nearest_node(y: &[f64]) -> (usize, f64) {
    let mut best = (0, one_hot_distance(y, 0));
    for t in 1..y.len() {
        let d = one_hot_distance(y, t);
        if d < best.1 {
            best = (t, d);
        }
    }
    best
}

/// Reusable activation buffers for one network shape.
#[derive(Debug, Clone)]
pub struct Scratch {
    hidden: Vec<f64>,
    output: Vec<f64>,
    delta_out: Vec<f64>,
    delta_hidden: Vec<f64>,
}

impl Scratch {
    pub fn new(ann: &Ann) -> Self {
        Self {
            hidden: vec![0.0; ann.hidden],
            output: vec![0.0; ann.output()],
            delta_out: vec![0.0; ann.output()],
            delta_hidden: vec![0.0; ann.hidden],
        }
    }

    pub fn output(&self) -> &[f64] {
        &self.output
    }
}

impl Ann {
    /// All-zero network.
    pub fn zeros(input: usize, hidden: usize, label_map: Vec<Label>) -> Result<Self> {
        if input == 0 {
            return Err(PnwError::ZeroDimension("input_dims"));
        }
        if hidden == 0 {
            return Err(PnwError::ZeroDimension("hidden_nodes"));
        }
        if label_map.is_empty() {
            return Err(PnwError::ZeroDimension("output width"));
        }
        let mut sorted = label_map.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(PnwError::InvalidArchitecture(format!("label map {label_map:?} repeats a label")));
        }
        let output = label_map.len();
        Ok(Self {
            input,
            hidden,
            w1: vec![0.0; hidden * input],
            b1: vec![0.0; hidden],
            w2: vec![0.0; output * hidden],
            b2: vec![0.0; output],
            label_map,
        })
    }

    /// Every parameter uniform in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`.
    pub fn random(input: usize, hidden: usize, label_map: Vec<Label>, rng: &mut SeededRng) -> Result<Self> {
        let mut ann = Self::zeros(input, hidden, label_map)?;
        let r1 = 1.0 / (input as f64).sqrt();
        let r2 = 1.0 / (hidden as f64).sqrt();
        for w in ann.w1.iter_mut().chain(ann.b1.iter_mut()) {
            *w = rng.uniform(-r1, r1);
        }
        for w in ann.w2.iter_mut().chain(ann.b2.iter_mut()) {
            *w = rng.uniform(-r2, r2);
        }
        Ok(ann)
    }

    /// Builds a network from explicit parameters in the documented layout.
    pub fn from_parts(
        input: usize,
        hidden: usize,
        w1: Vec<f64>,
        b1: Vec<f64>,
        w2: Vec<f64>,
        b2: Vec<f64>,
        label_map: Vec<Label>,
    ) -> Result<Self> {
        let mut ann = Self::zeros(input, hidden, label_map)?;
        let output = ann.output();
        if w1.len() != hidden * input || b1.len() != hidden || w2.len() != output * hidden || b2.len() != output {
            return Err(PnwError::ShapeMismatch(format!(
                "parameter lengths ({}, {}, {}, {}) do not fit {input}x{hidden}x{output}",
                w1.len(),
                b1.len(),
                w2.len(),
                b2.len()
            )));
        }
        ann.w1 = w1;
        ann.b1 = b1;
        ann.w2 = w2;
        ann.b2 = b2;
        Ok(ann)
    }

    pub fn input(&self) -> usize {
        self.input
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn output(&self) -> usize {
        self.label_map.len()
    }

    pub fn label_map(&self) -> &[Label] {
        &self.label_map
    }

    pub fn w1(&self) -> &[f64] {
        &self.w1
    }
    pub fn b1(&self) -> &[f64] {
        &self.b1
    }
    pub fn w2(&self) -> &[f64] {
        &self.w2
    }
    pub fn b2(&self) -> &[f64] {
        &self.b2
    }

    pub fn param_count(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    /// Parameters in layout order.
    pub fn params(&self) -> impl Iterator<Item = f64> + '_ {
        self.w1.iter().chain(&self.b1).chain(&self.w2).chain(&self.b2).copied()
    }

    /// Mutable access to the `i`-th parameter in layout order.
    pub fn param_mut(&mut self, mut i: usize) -> &mut f64 {
        for v in [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2] {
            if i < v.len() {
                return &mut v[i];
            }
            i -= v.len();
        }
        panic!("parameter index out of range")
    }

    /// Output node of `label`, if this network emits it.
    pub fn node_of(&self, label: Label) -> Option<usize> {
        self.label_map.iter().position(|&l| l == label)
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input {
            return Err(PnwError::ShapeMismatch(format!("ANN takes {} inputs, got {}", self.input, x.len())));
        }
        Ok(())
    }

    fn check_target(&self, target: usize) -> Result<()> {
        if target >= self.output() {
            return Err(PnwError::BadTarget { target, width: self.output() });
        }
        Ok(())
    }

    /// Forward pass into `scratch`; input length is not checked.
    pub fn forward_with(&self, x: &[f64], scratch: &mut Scratch) {
        for (h, out) in scratch.hidden.iter_mut().enumerate() {
            let row = &self.w1[h * self.input..(h + 1) * self.input];
            *out = (dot(row, x) + self.b1[h]).tanh();
        }
        for (t, out) in scratch.output.iter_mut().enumerate() {
            let row = &self.w2[t * self.hidden..(t + 1) * self.hidden];
            *out = logistic(dot(row, &scratch.hidden) + self.b2[t]);
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut scratch = Scratch::new(self);
        self.forward_with(x, &mut scratch);
        Ok(scratch.output)
    }

    /// Nearest node and its distance.
    pub fn classify(&self, x: &[f64], scratch: &mut Scratch) -> (usize, f64) {
        self.forward_with(x, scratch);
        nearest_node(&scratch.output)
    }

    pub fn predict(&self, x: &[f64]) -> Result<AnnVerdict> {
        self.check_input(x)?;
        let mut scratch = Scratch::new(self);
        let (node, loss) = self.classify(x, &mut scratch);
        Ok(AnnVerdict { label: self.label_map[node], loss })
    }

    pub fn sample_loss(&self, x: &[f64], target: usize) -> Result<f64> {
        self.check_input(x)?;
        self.check_target(target)?;
        let y = self.forward(x)?;
        Ok(one_hot_distance(&y, target))
    }

    pub fn gradient(&self, x: &[f64], target: usize) -> Result<AnnGradient> {
        self.check_input(x)?;
        self.check_target(target)?;
        let mut grad = AnnGradient::zeros_like(self);
        let mut scratch = Scratch::new(self);
        self.accumulate_gradient(x, target, 1.0, &mut grad, &mut scratch);
        Ok(grad)
    }

    /// Adds `scale * d(loss)/d(params)` to `grad`; returns the sample loss.
    /// Shapes are not checked.
    pub fn accumulate_gradient(
        &self,
        x: &[f64],
        target: usize,
        scale: f64,
        grad: &mut AnnGradient,
        scratch: &mut Scratch,
    ) -> f64 {
        self.accumulate_objective_gradient(x, target, scale, Objective::SquaredError, grad, scratch)
    }

    /// Like [`Ann::accumulate_gradient`] but for the chosen objective. The
    /// returned value is always the squared-error sample loss.
    pub fn accumulate_objective_gradient(
        &self,
        x: &[f64],
        target: usize,
        scale: f64,
        objective: Objective,
        grad: &mut AnnGradient,
        scratch: &mut Scratch,
    ) -> f64 {
        self.forward_with(x, scratch);
        let y = &scratch.output;
        let loss = one_hot_distance(y, target);
        for (t, d) in scratch.delta_out.iter_mut().enumerate() {
            let e = if t == target { 1.0 } else { 0.0 };
            *d = match objective {
                Objective::SquaredError => scale * 2.0 * (y[t] - e) * y[t] * (1.0 - y[t]),
                Objective::CrossEntropy => scale * (y[t] - e),
            };
        }
        scratch.delta_hidden.fill(0.0);
        for (t, &d) in scratch.delta_out.iter().enumerate() {
            grad.b2[t] += d;
            let row = &self.w2[t * self.hidden..(t + 1) * self.hidden];
            let grow = &mut grad.w2[t * self.hidden..(t + 1) * self.hidden];
            for ((g, &h), (dh, &w)) in grow
                .iter_mut()
                .zip(&scratch.hidden)
                .zip(scratch.delta_hidden.iter_mut().zip(row))
            {
                *g += d * h;
                *dh += d * w;
            }
        }
        for (h, dh) in scratch.delta_hidden.iter_mut().enumerate() {
            let a = scratch.hidden[h];
            *dh *= 1.0 - a * a;
            let d = *dh;
            grad.b1[h] += d;
            if d != 0.0 {
                let grow = &mut grad.w1[h * self.input..(h + 1) * self.input];
                for (g, &xi) in grow.iter_mut().zip(x) {
                    *g += d * xi;
                }
            }
        }
        loss
    }

    /// `params -= rate * grad`.
    pub fn step(&mut self, grad: &AnnGradient, rate: f64) {
        for (p, g) in [
            (&mut self.w1, &grad.w1),
            (&mut self.b1, &grad.b1),
            (&mut self.w2, &grad.w2),
            (&mut self.b2, &grad.b2),
        ] {
            for (w, &d) in p.iter_mut().zip(g) {
                *w -= rate * d;
            }
        }
    }
}
