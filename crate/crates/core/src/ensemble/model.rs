use super::voting::{class_wta, group_vote, model_output};
use crate::ann::Ann;
use crate::arch::PnwArchitecture;
use crate::dataset::{Dataset, Image};
use crate::error::{AnnIndex, PnwError, Result};
use crate::rng::{streams, SeededRng};
use crate::trainer::{assign_loads, detect_double_labels, gdt_train, sgd_train, GdtReport, TrainConfig};
use crate::verdict::{AnnVerdict, ClassVerdict, GroupVerdict, ModelVerdict};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// A PNW: N_T ANNs stored in flat (class, group, feature) order.
#[derive(Debug, Clone, PartialEq)]
pub struct PnwModel {
    arch: PnwArchitecture,
    anns: Vec<Ann>,
}

/// The full verdict chain for one input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictTrace {
    pub anns: Vec<(AnnIndex, AnnVerdict)>,
    /// `(class, group)` 0-based, in flat order.
    pub groups: Vec<((usize, usize), GroupVerdict)>,
    pub classes: Vec<ClassVerdict>,
    pub model: ModelVerdict,
}

impl std::fmt::Display for VerdictTrace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (idx, v) in &self.anns {
            writeln!(f, "ann {idx}: {v}")?;
        }
        for ((c, g), v) in &self.groups {
            writeln!(f, "group ({}, {}): {v}", c + 1, g + 1)?;
        }
        for (c, v) in self.classes.iter().enumerate() {
            writeln!(f, "class {}: {v}", c + 1)?;
        }
        write!(f, "model: {}", self.model)
    }
}

/// Accuracy and confusion counts over a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub total: usize,
    pub correct: usize,
    /// `correct / total`; NaN for an empty dataset.
    pub accuracy: f64,
    /// Rows: true label 1..=n_l. Columns: predicted label 1..=n_l, then expat.
    pub confusion: Vec<Vec<usize>>,
    pub expat_emissions: usize,
    /// Ids of misclassified data, ascending.
    pub misclassified: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnTrainReport {
    pub index: AnnIndex,
    pub home_count: usize,
    pub expat_count: usize,
    #[serde(flatten)]
    pub report: GdtReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub anns: Vec<AnnTrainReport>,
    /// Model training accuracy with the post-SGD weights.
    pub sgd_accuracy: f64,
    /// Model training accuracy after the error-free phase.
    pub gdt_accuracy: f64,
    pub evaluation: Evaluation,
}

impl PnwModel {
    pub fn new(arch: PnwArchitecture, anns: Vec<Ann>) -> Result<Self> {
        arch.validate()?;
        if anns.len() != arch.total_anns() {
            return Err(PnwError::InvalidArchitecture(format!(
                "{} ANNs for an architecture of {}",
                anns.len(),
                arch.total_anns()
            )));
        }
        for idx in arch.ann_indices() {
            let ann = &anns[arch.flat_index(idx)];
            if ann.label_map() != arch.output_labels(idx.class).as_slice()
                || ann.input() != arch.input_dims(idx.feature)
                || ann.hidden() != arch.hidden_nodes
            {
                return Err(PnwError::InvalidArchitecture(format!("ANN {idx} does not match the architecture")));
            }
        }
        Ok(Self { arch, anns })
    }

    /// Freshly initialized ANNs; ANN `n` (flat order) draws from stream `INIT + n`.
    pub fn initialized(arch: PnwArchitecture) -> Result<Self> {
        arch.validate()?;
        let anns = arch
            .ann_indices()
            .map(|idx| {
                let mut rng = SeededRng::derive(arch.seed, streams::INIT + arch.flat_index(idx) as u64);
                Ann::random(arch.input_dims(idx.feature), arch.hidden_nodes, arch.output_labels(idx.class), &mut rng)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(arch, anns)
    }

    pub fn arch(&self) -> &PnwArchitecture {
        &self.arch
    }

    pub fn anns(&self) -> &[Ann] {
        &self.anns
    }

    pub fn ann(&self, idx: AnnIndex) -> &Ann {
        &self.anns[self.arch.flat_index(idx)]
    }

    /// Tie-break generator for the datum with id `id`.
    pub fn tie_rng(&self, id: usize) -> SeededRng {
        SeededRng::derive(self.arch.seed, streams::TIES.wrapping_add(id as u64))
    }

    /// Runs the whole evaluation pathway. Ties consume `rng` in this order:
    /// groups in flat (class, group) order, then classes, then the model.
    pub fn predict_with(&self, image: &Image, rng: &mut SeededRng) -> Result<VerdictTrace> {
        let arch = &self.arch;
        let features = arch
            .feature_specs
            .iter()
            .map(|spec| spec.apply(image))
            .collect::<Result<Vec<_>>>()?;
        let mut anns = Vec::with_capacity(arch.total_anns());
        for idx in arch.ann_indices() {
            anns.push((idx, self.ann(idx).predict(&features[idx.feature])?));
        }
        let mut groups = Vec::with_capacity(arch.n_classes * arch.n_groups);
        for (g, chunk) in anns.chunks(arch.n_features).enumerate() {
            let verdicts: Vec<AnnVerdict> = chunk.iter().map(|(_, v)| *v).collect();
            groups.push(((g / arch.n_groups, g % arch.n_groups), group_vote(&verdicts, rng)));
        }
        let classes: Vec<ClassVerdict> = groups
            .chunks(arch.n_groups)
            .map(|chunk| {
                let verdicts: Vec<GroupVerdict> = chunk.iter().map(|(_, v)| *v).collect();
                class_wta(&verdicts, rng)
            })
            .collect();
        let model = model_output(&classes, arch.expat_id(), rng);
        Ok(VerdictTrace { anns, groups, classes, model })
    }

    /// Prediction for the datum with id `id`, using its own tie-break stream.
    pub fn predict_model(&self, image: &Image, id: usize) -> Result<VerdictTrace> {
        self.predict_with(image, &mut self.tie_rng(id))
    }

    pub fn evaluate(&self, ds: &Dataset) -> Result<Evaluation> {
        evaluate(self, ds)
    }
}

pub fn predict_model(model: &PnwModel, image: &Image, id: usize) -> Result<VerdictTrace> {
    model.predict_model(image, id)
}

/// Model accuracy on `ds`; an expat answer is always wrong.
pub fn evaluate(model: &PnwModel, ds: &Dataset) -> Result<Evaluation> {
    let n_l = model.arch.n_labels as usize;
    let mut confusion = vec![vec![0usize; n_l + 1]; n_l];
    let mut correct = 0;
    let mut expat_emissions = 0;
    let mut misclassified = Vec::new();
    for (id, image, truth) in ds.iter() {
        if truth.0 as usize > n_l {
            return Err(PnwError::LabelOutOfRange { label: truth, max: n_l as u32 });
        }
        let got = model.predict_model(image, id)?.model.label;
        if got == model.arch.expat_id() {
            expat_emissions += 1;
        }
        confusion[truth.0 as usize - 1][got.0 as usize - 1] += 1;
        if got == truth {
            correct += 1;
        } else {
            misclassified.push(id);
        }
    }
    misclassified.sort_unstable();
    let total = ds.len();
    let accuracy = if total == 0 { f64::NAN } else { correct as f64 / total as f64 };
    Ok(Evaluation { total, correct, accuracy, confusion, expat_emissions, misclassified })
}

struct TrainedAnn {
    after_sgd: Ann,
    trained: Ann,
    report: AnnTrainReport,
}

/// Trains every ANN on its load (SGD, then the error-free phase), assembles
/// the model, and checks that it classifies every training datum.
///
/// Up to `jobs` ANNs train concurrently. Each ANN has its own derived
/// generators, so the result does not depend on `jobs`.
pub fn train_model(ds: &Dataset, arch: &PnwArchitecture, cfg: &TrainConfig, jobs: usize) -> Result<(PnwModel, TrainReport)> {
    arch.validate()?;
    let pairs = detect_double_labels(ds);
    if !pairs.is_empty() {
        return Err(PnwError::DoubleLabelDetected { ann: None, ids: pairs.iter().map(|p| (p.id_a, p.id_b)).collect() });
    }
    let loads = assign_loads(ds, arch, &mut SeededRng::derive(arch.seed, streams::LOADS))?;
    let initial = PnwModel::initialized(arch.clone())?;

    let train_one = |n: usize| -> Result<TrainedAnn> {
        let load = &loads[n];
        let mut ann = initial.anns[n].clone();
        let started = std::time::Instant::now();
        let sgd = sgd_train(&mut ann, load, &cfg.sgd, &mut SeededRng::derive(arch.seed, streams::SGD + n as u64));
        let after_sgd = ann.clone();
        let mut report = gdt_train(&mut ann, load, &cfg.gdt, &mut SeededRng::derive(arch.seed, streams::GDT + n as u64))?;
        report.epochs_sgd = sgd.epochs;
        report.errors_after_sgd = sgd.errors;
        report.wall_time = started.elapsed().as_secs_f64();
        Ok(TrainedAnn {
            after_sgd,
            trained: ann,
            report: AnnTrainReport {
                index: load.ann_index,
                home_count: load.home_count,
                expat_count: load.expat_count,
                report,
            },
        })
    };

    let results: Vec<Result<TrainedAnn>> = if jobs <= 1 {
        (0..loads.len()).map(train_one).collect()
    } else {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| PnwError::InvalidArchitecture(format!("thread pool: {e}")))?;
        pool.install(|| (0..loads.len()).into_par_iter().map(train_one).collect())
    };
    let trained = results.into_iter().collect::<Result<Vec<_>>>()?;

    let mut after_sgd = Vec::with_capacity(trained.len());
    let mut anns = Vec::with_capacity(trained.len());
    let mut reports = Vec::with_capacity(trained.len());
    for t in trained {
        after_sgd.push(t.after_sgd);
        anns.push(t.trained);
        reports.push(t.report);
    }
    let sgd_accuracy = PnwModel::new(arch.clone(), after_sgd)?.evaluate(ds)?.accuracy;
    let model = PnwModel::new(arch.clone(), anns)?;
    let evaluation = model.evaluate(ds)?;
    if !evaluation.misclassified.is_empty() {
        let first = evaluation.misclassified[0];
        let pos = ds.ids().iter().position(|&id| id == first).expect("id from this dataset");
        let (_, image, label) = ds.get(pos);
        let mut trace = format!("datum {first} (label {label}):\n");
        let _ = write!(trace, "{}", model.predict_model(image, first)?);
        return Err(PnwError::FullTrainCheckFailed { ids: evaluation.misclassified, trace });
    }
    let report = TrainReport { anns: reports, sgd_accuracy, gdt_accuracy: evaluation.accuracy, evaluation };
    Ok((model, report))
}
