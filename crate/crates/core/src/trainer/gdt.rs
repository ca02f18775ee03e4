//! Error-free descent phase.
//!
//! Contract: on success every load sample is classified as its target;
//! otherwise a typed error says why not.
//!
//! Mechanism. A sample is classified correctly whenever its loss is below
//! 0.5 (a loss under 0.5 forces the target output to be the largest), so
//! every sample starts with loss threshold `tau = 0.5`. Each round runs
//! `passes` passes of weighted mini-batch descent over the active set
//! (samples that are misclassified or whose loss is at least their
//! threshold) and then re-evaluates the whole load. Steps are Adam updates
//! on the logistic cross-entropy by default: under the squared loss a
//! sample whose target output has saturated near 0 has almost no gradient
//! and can stay misclassified indefinitely.
//!
//! When the error count has not improved for `patience` rounds, every
//! misclassified sample has its weight multiplied by `boost` (up to
//! `max_weight`), and every correct sample within a factor `tighten` of its
//! threshold has the threshold multiplied by `tighten` (down to
//! `min_threshold`), which keeps it active until it sits deeper inside its
//! cell. `tighten = 1` turns that off, which is the default: on small
//! random loads tightening slowed convergence. Weights and thresholds relax
//! back toward their starting values once a sample is correct with loss
//! below its threshold.

use super::{GdtReport, TrainingLoad};
use crate::ann::{one_hot_distance, Ann, AnnGradient, Objective, Scratch};
use crate::error::{PnwError, Result};
use crate::rng::SeededRng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Loss below which a sample is certainly nearest to its target one-hot.
pub const BOUNDARY_LOSS: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GdtConfig {
    pub max_rounds: usize,
    /// Adam step size.
    pub rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub batch_size: usize,
    /// Descent passes over the active set per round.
    pub passes: usize,
    pub patience: usize,
    pub tighten: f64,
    pub min_threshold: f64,
    pub boost: f64,
    pub max_weight: f64,
    /// What the descent steps minimize. Success is always judged by the
    /// nearest one-hot rule.
    pub objective: Objective,
}

impl Default for GdtConfig {
    fn default() -> Self {
        Self {
            max_rounds: 10_000,
            rate: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            batch_size: 32,
            passes: 4,
            patience: 1,
            tighten: 1.0,
            min_threshold: 0.05,
            boost: 1.5,
            max_weight: 10.0,
            objective: Objective::CrossEntropy,
        }
    }
}

struct Adam {
    m: AnnGradient,
    v: AnnGradient,
    update: AnnGradient,
    t: i32,
}

impl Adam {
    fn new(ann: &Ann) -> Self {
        Self { m: AnnGradient::zeros_like(ann), v: AnnGradient::zeros_like(ann), update: AnnGradient::zeros_like(ann), t: 0 }
    }

    fn step(&mut self, ann: &mut Ann, grad: &AnnGradient, cfg: &GdtConfig) {
        self.t += 1;
        let c1 = 1.0 - cfg.beta1.powi(self.t);
        let c2 = 1.0 - cfg.beta2.powi(self.t);
        let parts = [
            (&mut self.m.w1, &mut self.v.w1, &mut self.update.w1, &grad.w1),
            (&mut self.m.b1, &mut self.v.b1, &mut self.update.b1, &grad.b1),
            (&mut self.m.w2, &mut self.v.w2, &mut self.update.w2, &grad.w2),
            (&mut self.m.b2, &mut self.v.b2, &mut self.update.b2, &grad.b2),
        ];
        for (m, v, u, g) in parts {
            for i in 0..g.len() {
                m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
                v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
                u[i] = (m[i] / c1) / ((v[i] / c2).sqrt() + 1e-8);
            }
        }
        ann.step(&self.update, cfg.rate);
    }
}

/// Pairs of sample ids whose feature vectors are bit-identical but whose targets differ.
pub fn contradictions(load: &TrainingLoad) -> Vec<(usize, usize)> {
    let mut first: HashMap<Vec<u64>, (usize, usize)> = HashMap::new();
    let mut pairs = Vec::new();
    for s in &load.samples {
        let key: Vec<u64> = s.features.iter().map(|v| v.to_bits()).collect();
        match first.get(&key) {
            Some(&(id, target)) if target != s.target => pairs.push((id.min(s.id), id.max(s.id))),
            Some(_) => {}
            None => {
                first.insert(key, (s.id, s.target));
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Drives `ann` to zero misclassified samples on `load`.
pub fn gdt_train(ann: &mut Ann, load: &TrainingLoad, cfg: &GdtConfig, rng: &mut SeededRng) -> Result<GdtReport> {
    let started = std::time::Instant::now();
    let conflicts = contradictions(load);
    if !conflicts.is_empty() {
        return Err(PnwError::DoubleLabelDetected { ann: Some(load.ann_index), ids: conflicts });
    }
    let n = load.len();
    let mut scratch = Scratch::new(ann);
    let mut losses = vec![0.0; n];
    let mut correct = vec![false; n];
    let evaluate = |ann: &Ann, scratch: &mut Scratch, losses: &mut [f64], correct: &mut [bool]| -> usize {
        let mut errors = 0;
        for (i, s) in load.samples.iter().enumerate() {
            let (node, _) = ann.classify(&s.features, scratch);
            losses[i] = one_hot_distance(scratch.output(), s.target);
            correct[i] = node == s.target;
            errors += usize::from(!correct[i]);
        }
        errors
    };

    let mut errors = evaluate(ann, &mut scratch, &mut losses, &mut correct);
    let mut report = GdtReport { final_train_errors: errors, ..GdtReport::default() };
    if errors == 0 {
        report.wall_time = started.elapsed().as_secs_f64();
        return Ok(report);
    }

    let mut threshold = vec![BOUNDARY_LOSS; n];
    let mut weight = vec![1.0; n];
    let mut grad = AnnGradient::zeros_like(ann);
    let mut adam = Adam::new(ann);
    let mut best = errors;
    let mut stall = 0;
    let batch = cfg.batch_size.max(1);
    let mut active: Vec<usize> = Vec::with_capacity(n);

    for round in 1..=cfg.max_rounds {
        active.clear();
        active.extend((0..n).filter(|&i| !correct[i] || losses[i] >= threshold[i]));
        for _ in 0..cfg.passes.max(1) {
            rng.shuffle(&mut active);
            for chunk in active.chunks(batch) {
                grad.clear();
                let scale = 1.0 / chunk.len() as f64;
                for &i in chunk {
                    let s = &load.samples[i];
                    ann.accumulate_objective_gradient(&s.features, s.target, scale * weight[i], cfg.objective, &mut grad, &mut scratch);
                }
                adam.step(ann, &grad, cfg);
            }
        }
        errors = evaluate(ann, &mut scratch, &mut losses, &mut correct);
        report.rounds_gdt = round;
        report.final_train_errors = errors;
        if errors == 0 {
            report.wall_time = started.elapsed().as_secs_f64();
            return Ok(report);
        }
        if errors < best {
            best = errors;
            stall = 0;
        } else {
            stall += 1;
        }
        for i in 0..n {
            if correct[i] && losses[i] < threshold[i] {
                weight[i] = (weight[i] / cfg.boost).max(1.0);
                threshold[i] = (threshold[i] / cfg.tighten).min(BOUNDARY_LOSS);
            }
        }
        if stall >= cfg.patience {
            stall = 0;
            for i in 0..n {
                if !correct[i] {
                    weight[i] = (weight[i] * cfg.boost).min(cfg.max_weight);
                }
                if correct[i] && losses[i] >= threshold[i] * cfg.tighten {
                    threshold[i] = (threshold[i] * cfg.tighten).max(cfg.min_threshold);
                }
            }
        }
    }
    let residual = (0..n).filter(|&i| !correct[i]).map(|i| load.samples[i].id).collect();
    Err(PnwError::RoundLimitExceeded { ann: Some(load.ann_index), rounds: cfg.max_rounds, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::AnnIndex;
    use crate::labels::Label;
    use crate::trainer::Sample;

    fn load(samples: Vec<Sample>) -> TrainingLoad {
        let n = samples.len();
        TrainingLoad { ann_index: AnnIndex { class: 0, group: 0, feature: 0 }, samples, home_count: n, expat_count: 0 }
    }

    #[test]
    fn already_perfect_returns_immediately() {
        let ann0 = Ann::from_parts(1, 1, vec![0.0], vec![0.0], vec![0.0, 0.0], vec![5.0, -5.0], vec![Label(1), Label(2)])
            .unwrap();
        let l = load(vec![Sample { id: 3, features: vec![0.4], target: 0 }]);
        let mut ann = ann0.clone();
        let r = gdt_train(&mut ann, &l, &GdtConfig::default(), &mut SeededRng::new(0)).unwrap();
        assert_eq!((r.rounds_gdt, r.final_train_errors), (0, 0));
        assert_eq!(ann, ann0);
    }

    #[test]
    fn contradiction_is_detected() {
        let mut ann = Ann::zeros(2, 2, vec![Label(1), Label(2)]).unwrap();
        let l = load(vec![
            Sample { id: 4, features: vec![0.1, 0.2], target: 0 },
            Sample { id: 9, features: vec![0.3, 0.2], target: 1 },
            Sample { id: 7, features: vec![0.1, 0.2], target: 1 },
        ]);
        let err = gdt_train(&mut ann, &l, &GdtConfig::default(), &mut SeededRng::new(0)).unwrap_err();
        assert_eq!(err, PnwError::DoubleLabelDetected { ann: Some(l.ann_index), ids: vec![(4, 7)] });
    }

    #[test]
    fn round_limit_reports_residual_ids() {
        let mut ann = Ann::zeros(1, 1, vec![Label(1), Label(2)]).unwrap();
        let l = load(vec![Sample { id: 12, features: vec![0.5], target: 1 }]);
        let cfg = GdtConfig { max_rounds: 1, rate: 0.0, passes: 1, ..GdtConfig::default() };
        match gdt_train(&mut ann, &l, &cfg, &mut SeededRng::new(0)) {
            Err(PnwError::RoundLimitExceeded { rounds: 1, residual, .. }) => assert_eq!(residual, vec![12]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fits_random_labels() {
        // 120 random points with random labels: no structure, pure memorization.
        let mut rng = SeededRng::new(21);
        let samples: Vec<Sample> = (0..120)
            .map(|i| Sample { id: i, features: (0..6).map(|_| rng.next_f64()).collect(), target: rng.below(3) })
            .collect();
        let l = load(samples);
        let mut ann = Ann::random(6, 30, vec![Label(1), Label(2), Label(3)], &mut rng).unwrap();
        let report = gdt_train(&mut ann, &l, &GdtConfig::default(), &mut rng).unwrap();
        assert_eq!(report.final_train_errors, 0);
        assert!(l.misclassified(&ann).is_empty());
    }
}
