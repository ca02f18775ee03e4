use super::TrainingLoad;
use crate::ann::{Ann, AnnGradient, Scratch};
use crate::rng::SeededRng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SgdConfig {
    pub batch_size: usize,
    pub rate: f64,
    pub momentum: f64,
    pub max_epochs: usize,
}

impl Default for SgdConfig {
    fn default() -> Self {
        Self { batch_size: 32, rate: 0.1, momentum: 0.0, max_epochs: 200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SgdOutcome {
    pub epochs: usize,
    pub errors: usize,
}

/// Mini-batch SGD on the mean sample loss. The sample order is reshuffled
/// from `rng` every epoch. Stops after `max_epochs` or at the first epoch
/// boundary with no misclassified sample.
pub fn sgd_train(ann: &mut Ann, load: &TrainingLoad, cfg: &SgdConfig, rng: &mut SeededRng) -> SgdOutcome {
    let mut errors = load.misclassified(ann).len();
    if load.is_empty() || errors == 0 {
        return SgdOutcome { epochs: 0, errors };
    }
    let batch = cfg.batch_size.max(1);
    let mut grad = AnnGradient::zeros_like(ann);
    let mut velocity = (cfg.momentum != 0.0).then(|| AnnGradient::zeros_like(ann));
    let mut scratch = Scratch::new(ann);
    let mut order: Vec<usize> = (0..load.len()).collect();
    let mut epochs = 0;
    while epochs < cfg.max_epochs && errors > 0 {
        rng.shuffle(&mut order);
        for chunk in order.chunks(batch) {
            grad.clear();
            let scale = 1.0 / chunk.len() as f64;
            for &i in chunk {
                let s = &load.samples[i];
                ann.accumulate_gradient(&s.features, s.target, scale, &mut grad, &mut scratch);
            }
            match velocity.as_mut() {
                Some(v) => {
                    for (vs, gs) in [(&mut v.w1, &grad.w1), (&mut v.b1, &grad.b1), (&mut v.w2, &grad.w2), (&mut v.b2, &grad.b2)] {
                        for (a, &g) in vs.iter_mut().zip(gs) {
                            *a = cfg.momentum * *a + g;
                        }
                    }
                    ann.step(v, cfg.rate);
                }
                None => ann.step(&grad, cfg.rate),
            }
        }
        epochs += 1;
        errors = load.misclassified(ann).len();
    }
    SgdOutcome { epochs, errors }
}
