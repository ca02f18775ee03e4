//! Dataset ingestion, run configuration, checkpoints and the `pnw` commands.

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod ingest;
pub mod report;

pub use checkpoint::{Checkpoint, CheckpointError};
pub use commands::{run, Cli, CliError, Command};
pub use config::{ConfigError, RunConfig};
pub use ingest::{ingest, DatasetSource, IngestError};
pub use report::RunReport;
