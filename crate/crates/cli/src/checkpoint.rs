//! Versioned binary checkpoint.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic        8 bytes  "PNWCKPT\0"
//! version      u32
//! config       u64 length + UTF-8 JSON (the run config as given)
//! architecture u64 length + UTF-8 JSON
//! n_anns       u32
//! per ANN, in flat (class, group, feature) order:
//!     input, hidden, output   u32 each
//!     w1   hidden*input f64, row-major (row = hidden node)
//!     b1   hidden f64
//!     w2   output*hidden f64, row-major (row = output node)
//!     b2   output f64
//!     label_map  output u32 (1-based labels; the expat label last)
//! report       u64 length + UTF-8 JSON
//! ```

use crate::config::RunConfig;
use crate::report::RunReport;
use pnw_core::{Ann, Label, PnwArchitecture, PnwError, PnwModel};
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const MAGIC: &[u8; 8] = b"PNWCKPT\0";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config: RunConfig,
    pub model: PnwModel,
    pub report: RunReport,
}

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("checkpoint parse error at byte {offset}: {msg}")]
    Parse { offset: usize, msg: String },
    #[error("checkpoint version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error(transparent)]
    Core(#[from] PnwError),
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        put_json(&mut out, &self.config);
        put_json(&mut out, self.model.arch());
        out.extend_from_slice(&(self.model.anns().len() as u32).to_le_bytes());
        for ann in self.model.anns() {
            for n in [ann.input(), ann.hidden(), ann.output()] {
                out.extend_from_slice(&(n as u32).to_le_bytes());
            }
            for x in ann.w1().iter().chain(ann.b1()).chain(ann.w2()).chain(ann.b2()) {
                out.extend_from_slice(&x.to_le_bytes());
            }
            for l in ann.label_map() {
                out.extend_from_slice(&l.0.to_le_bytes());
            }
        }
        put_json(&mut out, &self.report);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CheckpointError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8, "magic")? != MAGIC {
            return Err(CheckpointError::Parse { offset: 0, msg: "not a checkpoint (bad magic)".into() });
        }
        let version = r.u32("version")?;
        if version != VERSION {
            return Err(CheckpointError::VersionMismatch { found: version, expected: VERSION });
        }
        let config: RunConfig = r.json("config")?;
        let arch: PnwArchitecture = r.json("architecture")?;
        let n = r.u32("ANN count")? as usize;
        let mut anns = Vec::with_capacity(n.min(1 << 16));
        for _ in 0..n {
            let start = r.pos;
            let input = r.u32("input width")? as usize;
            let hidden = r.u32("hidden width")? as usize;
            let output = r.u32("output width")? as usize;
            let w1 = r.f64s(hidden * input, "w1")?;
            let b1 = r.f64s(hidden, "b1")?;
            let w2 = r.f64s(output * hidden, "w2")?;
            let b2 = r.f64s(output, "b2")?;
            let label_map = (0..output).map(|_| r.u32("label map").map(Label)).collect::<Result<Vec<_>, _>>()?;
            let ann = Ann::from_parts(input, hidden, w1, b1, w2, b2, label_map)
                .map_err(|e| CheckpointError::Parse { offset: start, msg: e.to_string() })?;
            anns.push(ann);
        }
        let report: RunReport = r.json("report")?;
        if r.pos != bytes.len() {
            return Err(CheckpointError::Parse { offset: r.pos, msg: "trailing bytes".into() });
        }
        Ok(Self { config, model: PnwModel::new(arch, anns)?, report })
    }

    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        std::fs::write(path, self.to_bytes()).map_err(|source| CheckpointError::Io { path: path.into(), source })
    }

    pub fn load(path: &Path) -> Result<Self, CheckpointError> {
        let bytes = std::fs::read(path).map_err(|source| CheckpointError::Io { path: path.into(), source })?;
        Self::from_bytes(&bytes)
    }
}

fn put_json<T: serde::Serialize>(out: &mut Vec<u8>, value: &T) {
    let json = serde_json::to_vec(value).expect("checkpoint sections serialize");
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], CheckpointError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| CheckpointError::Parse {
            offset: self.bytes.len(),
            msg: format!("truncated while reading {what}"),
        })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize, what: &str) -> Result<Vec<f64>, CheckpointError> {
        let raw = self.take(n.saturating_mul(8), what)?;
        Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }

    fn json<T: serde::de::DeserializeOwned>(&mut self, what: &str) -> Result<T, CheckpointError> {
        let len = u64::from_le_bytes(self.take(8, what)?.try_into().unwrap());
        let start = self.pos;
        let raw = self.take(usize::try_from(len).unwrap_or(usize::MAX), what)?;
        serde_json::from_slice(raw).map_err(|e| CheckpointError::Parse { offset: start, msg: format!("{what}: {e}") })
    }
}
