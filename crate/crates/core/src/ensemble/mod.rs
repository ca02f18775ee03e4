//! The assembled PNW and its evaluation pathway.

mod model;
mod voting;

pub use model::{evaluate, predict_model, train_model, AnnTrainReport, Evaluation, PnwModel, TrainReport, VerdictTrace};
pub use voting::{class_wta, group_vote, model_output};
