//! Training reports: `report.json`, `summary.txt` and `timing.json`.
//!
//! `report.json` and the copy stored in the checkpoint hold only values that
//! are reproducible from the config and seed. Wall times live in the
//! separate `timing.json`.

use pnw_core::TrainReport;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// Label value in the input files that was mapped to label 1.
    pub label_base: u32,
    /// Data used for training, after exclusions.
    pub data: usize,
    pub excluded_ids: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training: Option<TrainReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub jobs: usize,
    pub total_seconds: f64,
    /// Seconds per ANN in flat order.
    pub ann_seconds: Vec<f64>,
}

impl RunReport {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "data: {} (excluded {})", self.data, self.excluded_ids.len());
        let _ = writeln!(s, "label shift: file label {} -> 1", self.label_base);
        let Some(t) = &self.training else {
            return s;
        };
        let _ = writeln!(s, "training accuracy after SGD: {:.6}", t.sgd_accuracy);
        let _ = writeln!(s, "training accuracy after GDT: {:.6}", t.gdt_accuracy);
        let _ = writeln!(s, "expat emissions: {}", t.evaluation.expat_emissions);
        let _ = writeln!(s, "ann            home  expat  sgd_epochs  sgd_errors  gdt_rounds  errors");
        for a in &t.anns {
            let r = &a.report;
            let _ = writeln!(
                s,
                "{:<13} {:>5} {:>6} {:>11} {:>11} {:>11} {:>7}",
                a.index.to_string(),
                a.home_count,
                a.expat_count,
                r.epochs_sgd,
                r.errors_after_sgd,
                r.rounds_gdt,
                r.final_train_errors
            );
        }
        s
    }
}
