use crate::checkpoint::{Checkpoint, CheckpointError};
use crate::config::{ConfigError, RunConfig};
use crate::ingest::{ingest, IngestError};
use crate::report::{RunReport, Timing};
use clap::{Parser, Subcommand};
use pnw_core::{detect_double_labels, train_model, Dataset, DuplicatePair, PnwError};
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const CHECKPOINT_FILE: &str = "checkpoint.pnw";
pub const REPORT_FILE: &str = "report.json";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const TIMING_FILE: &str = "timing.json";
pub const AUDIT_FILE: &str = "duplicates.csv";

/// Train, audit and evaluate parallel neural web classifiers.
#[derive(Debug, Parser)]
#[command(name = "pnw", version)]
pub struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// ANNs trained concurrently.
    #[arg(long, global = true, env = "PNW_NUM_JOBS", default_value_t = 1)]
    pub jobs: usize,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Print the full verdict chain of every datum (eval).
    #[arg(long, global = true)]
    pub trace: bool,
    /// Extra dataset ids to leave out: one per line, or a CSV written by `audit`.
    #[arg(long = "exclude-ids", global = true)]
    pub exclude_ids: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List byte-identical images with different labels.
    Audit,
    /// Train a model and write checkpoint and reports to the output directory.
    Train,
    /// Evaluate a checkpoint on the configured dataset.
    Eval {
        /// Defaults to the output directory's checkpoint.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Print checkpoint metadata.
    Inspect {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0} double-labeled pair(s) found")]
    AuditFindings(usize),
    #[error("{0}")]
    Eval(PnwError),
    #[error("training failed: {0}")]
    Training(PnwError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::AuditFindings(_) => 2,
            CliError::Training(_) => 3,
            _ => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(io_err(path))
}

/// Reads ids from a plain list (whitespace or comma separated) or from an
/// audit CSV, in which case both ids of every pair are taken.
pub fn read_exclude_ids(path: &Path) -> Result<Vec<usize>> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let bad = |tok: &str| CliError::Usage(format!("{}: '{tok}' is not a dataset id", path.display()));
    let mut ids = Vec::new();
    let mut lines = text.lines().peekable();
    if lines.peek().is_some_and(|l| l.trim_start().starts_with("id_a")) {
        for line in lines.skip(1).filter(|l| !l.trim().is_empty()) {
            for tok in line.split(',').take(2) {
                ids.push(tok.trim().parse().map_err(|_| bad(tok))?);
            }
        }
    } else {
        for tok in text.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
            ids.push(tok.parse().map_err(|_| bad(tok))?);
        }
    }
    Ok(ids)
}

struct Session {
    config: RunConfig,
    excluded: Vec<usize>,
}

impl Session {
    fn open(cli: &Cli) -> Result<Self> {
        let path = cli.config.as_deref().ok_or_else(|| CliError::Usage("--config is required".into()))?;
        let mut config = RunConfig::load(path)?;
        Self::with_config(cli, &mut config)?;
        let excluded = Self::exclusions(cli, &config)?;
        Ok(Self { config, excluded })
    }

    fn with_config(cli: &Cli, config: &mut RunConfig) -> Result<()> {
        if let Some(seed) = cli.seed {
            config.seed = seed;
        }
        Ok(())
    }

    fn exclusions(cli: &Cli, config: &RunConfig) -> Result<Vec<usize>> {
        let mut ids = config.exclude_ids.clone();
        if let Some(p) = &cli.exclude_ids {
            ids.extend(read_exclude_ids(p)?);
        }
        ids.sort_unstable();
        ids.dedup();
        Ok(ids)
    }

    /// The configured dataset before exclusions.
    fn full_dataset(&self) -> Result<Dataset> {
        let source = self
            .config
            .dataset
            .as_ref()
            .ok_or_else(|| CliError::Usage("the config has no [dataset] section".into()))?;
        Ok(ingest(source, self.config.architecture.n_labels)?)
    }

    fn output_dir(&self) -> Result<&Path> {
        self.config
            .output_dir
            .as_deref()
            .ok_or_else(|| CliError::Usage("the config has no output_dir".into()))
    }

    fn label_base(&self) -> u32 {
        self.config.dataset.as_ref().map_or(0, |d| d.label_base)
    }
}

/// Runs one command, writing human-readable output to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Audit => cmd_audit(cli, out),
        Command::Train => cmd_train(cli, out),
        Command::Eval { checkpoint } => cmd_eval(cli, checkpoint.as_deref(), out),
        Command::Inspect { checkpoint } => cmd_inspect(cli, checkpoint.as_deref(), out),
    }
}

fn audit_csv(pairs: &[DuplicatePair]) -> String {
    let mut s = String::from("id_a,id_b,label_a,label_b\n");
    for p in pairs {
        s.push_str(&format!("{},{},{},{}\n", p.id_a, p.id_b, p.label_a, p.label_b));
    }
    s
}

fn echo(out: &mut dyn Write, text: &str) {
    let _ = out.write_all(text.as_bytes());
}

pub fn cmd_audit(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let s = Session::open(cli)?;
    let ds = s.full_dataset()?;
    let all = detect_double_labels(&ds);
    let open: Vec<DuplicatePair> = all
        .iter()
        .filter(|p| s.excluded.binary_search(&p.id_a).is_err() && s.excluded.binary_search(&p.id_b).is_err())
        .cloned()
        .collect();
    let csv = audit_csv(&open);
    echo(out, &csv);
    if let Some(dir) = &s.config.output_dir {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        write_file(&dir.join(AUDIT_FILE), csv.as_bytes())?;
    }
    if open.is_empty() {
        if !all.is_empty() {
            echo(out, &format!("note: {} pair(s) covered by the exclusion list\n", all.len()));
        }
        Ok(())
    } else {
        Err(CliError::AuditFindings(open.len()))
    }
}

pub fn cmd_train(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let s = Session::open(cli)?;
    let dir = s.output_dir()?.to_path_buf();
    let ds = s.full_dataset()?.without_ids(&s.excluded);
    let arch = s.config.architecture(ds.images().first().map(|i| i.shape()))?;
    let pairs = detect_double_labels(&ds);
    if !pairs.is_empty() {
        echo(
            out,
            &format!(
                "refusing to train: {} double-labeled pair(s) remain; run `pnw audit` and exclude them with --exclude-ids\n",
                pairs.len()
            ),
        );
        return Err(CliError::AuditFindings(pairs.len()));
    }
    let jobs = cli.jobs.max(1);
    let started = std::time::Instant::now();
    let (model, training) = train_model(&ds, &arch, &s.config.trainer, jobs).map_err(CliError::Training)?;
    let timing = Timing {
        jobs,
        total_seconds: started.elapsed().as_secs_f64(),
        ann_seconds: training.anns.iter().map(|a| a.report.wall_time).collect(),
    };
    let report = RunReport {
        label_base: s.label_base(),
        data: ds.len(),
        excluded_ids: s.excluded.clone(),
        training: Some(training),
    };
    let checkpoint = Checkpoint { config: s.config.clone(), model, report };

    std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    write_file(&dir.join(CHECKPOINT_FILE), &checkpoint.to_bytes())?;
    let json = serde_json::to_string_pretty(&checkpoint.report).expect("report serializes");
    write_file(&dir.join(REPORT_FILE), json.as_bytes())?;
    let summary = checkpoint.report.summary();
    write_file(&dir.join(SUMMARY_FILE), summary.as_bytes())?;
    let timing = serde_json::to_string_pretty(&timing).expect("timing serializes");
    write_file(&dir.join(TIMING_FILE), timing.as_bytes())?;
    echo(out, &summary);
    echo(out, &format!("wrote {}\n", dir.join(CHECKPOINT_FILE).display()));
    Ok(())
}

fn checkpoint_path(cli: &Cli, given: Option<&Path>) -> Result<PathBuf> {
    if let Some(p) = given {
        return Ok(p.to_path_buf());
    }
    let s = Session::open(cli)?;
    Ok(s.output_dir()?.join(CHECKPOINT_FILE))
}

pub fn cmd_eval(cli: &Cli, checkpoint: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    let ck = Checkpoint::load(&checkpoint_path(cli, checkpoint)?)?;
    // The dataset comes from --config when given, else from the checkpoint's config.
    let s = if cli.config.is_some() {
        Session::open(cli)?
    } else {
        let mut config = ck.config.clone();
        Session::with_config(cli, &mut config)?;
        let excluded = Session::exclusions(cli, &config)?;
        Session { config, excluded }
    };
    let source = s
        .config
        .dataset
        .as_ref()
        .ok_or_else(|| CliError::Usage("no dataset to evaluate on".into()))?;
    let ds = ingest(source, ck.model.arch().n_labels)?.without_ids(&s.excluded);
    let eval = ck.model.evaluate(&ds).map_err(CliError::Eval)?;
    let mut text = format!("data: {}\naccuracy: {:.6}\ncorrect: {}\nexpat emissions: {}\n", eval.total, eval.accuracy, eval.correct, eval.expat_emissions);
    let n_l = ck.model.arch().n_labels;
    text.push_str("confusion (rows: true label, columns: predicted label, last column expat)\n");
    text.push_str(&format!("{:>6}", ""));
    for l in 1..=n_l {
        text.push_str(&format!(" {l:>6}"));
    }
    text.push_str(&format!(" {:>6}\n", "expat"));
    for (l, row) in eval.confusion.iter().enumerate() {
        text.push_str(&format!("{:>6}", l + 1));
        for c in row {
            text.push_str(&format!(" {c:>6}"));
        }
        text.push('\n');
    }
    echo(out, &text);
    if cli.trace {
        for (id, image, label) in ds.iter() {
            let trace = ck.model.predict_model(image, id).map_err(CliError::Eval)?;
            echo(out, &format!("datum {id} (label {label}):\n{trace}\n"));
        }
    }
    Ok(())
}

pub fn cmd_inspect(cli: &Cli, checkpoint: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    let ck = Checkpoint::load(&checkpoint_path(cli, checkpoint)?)?;
    let arch = ck.model.arch();
    let mut text = format!(
        "format version: {}\nseed: {}\nlabels: {} (expat {})\nclasses x groups x features: {} x {} x {}\nhidden nodes: {}\nparameters: {}\n",
        crate::checkpoint::VERSION,
        arch.seed,
        arch.n_labels,
        arch.expat_id(),
        arch.n_classes,
        arch.n_groups,
        arch.n_features,
        arch.hidden_nodes,
        arch.total_params()
    );
    for (c, labels) in arch.partition.classes().iter().enumerate() {
        let labels: Vec<String> = labels.iter().map(|l| l.to_string()).collect();
        text.push_str(&format!("class {}: labels [{}], output width {}\n", c + 1, labels.join(", "), arch.output_width(c)));
    }
    for (k, spec) in arch.feature_specs.iter().enumerate() {
        text.push_str(&format!("feature {}: {:?}, {} inputs\n", k + 1, spec.kind, spec.output_dims));
    }
    if let Some(source) = &ck.config.dataset {
        text.push_str(&format!("dataset: {}\n", source.images.display()));
    }
    echo(out, &text);
    echo(out, &ck.report.summary());
    Ok(())
}
