//! Dataset ingestion.
//!
//! Supported inputs, each optionally gzip-compressed (`.gz` suffix):
//!
//! * `idx`: the classic big-endian IDX pair. Image magic `0x0000080N` (u8
//!   elements, N dims, first dim = count), label magic `0x00000801`.
//! * `raw`: little-endian header `u32 ndims`, `ndims x u32 dims` (first =
//!   count), `u8 element type` (0 = u8), then packed pixels; labels in a
//!   CSV file `id,label` whose ids run 0, 1, 2, ... in row order.
//! * `npy`: a NumPy `.npy` array of dtype `|u1`, C order, first axis =
//!   count; labels in the same CSV format.
//!
//! Per-image dims `(H, W)` are gray, `(H, W, 3)` color unless the layout
//! says otherwise, and `(D, H, W)` a volume. Pixels are normalized to
//! `[0, 1]` by dividing by 255. Dataset ids are positions in file order.

use flate2::read::GzDecoder;
use pnw_core::{Dataset, Image, ImageShape, Label};
use serde::{Deserialize, Serialize};
use std::io::Read;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Idx,
    Raw,
    Npy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    Gray,
    Color,
    Volume,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: parse error at byte {offset}: {msg}")]
    Parse { path: PathBuf, offset: usize, msg: String },
    #[error("{path}: label {label} of datum {index} is outside the {base}-based range of {n_labels} labels")]
    LabelRange { path: PathBuf, index: usize, label: i64, base: u32, n_labels: u32 },
    #[error("{images} images but {labels} labels")]
    CountMismatch { images: usize, labels: usize },
    #[error(transparent)]
    Core(#[from] pnw_core::PnwError),
}

pub type Result<T> = std::result::Result<T, IngestError>;

/// Where and how to read a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSource {
    pub format: Format,
    pub images: PathBuf,
    pub labels: PathBuf,
    /// Smallest label value in the label file; labels are shifted so it becomes 1.
    #[serde(default)]
    pub label_base: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<Layout>,
    /// Keep only the first `limit` data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<usize>,
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    let io = |source| IngestError::Io { path: path.to_path_buf(), source };
    let bytes = std::fs::read(path).map_err(io)?;
    if path.extension().is_some_and(|e| e == "gz") {
        let mut out = Vec::new();
        GzDecoder::new(bytes.as_slice()).read_to_end(&mut out).map_err(io)?;
        Ok(out)
    } else {
        Ok(bytes)
    }
}

/// Bounds-checked cursor that reports byte offsets.
struct Cursor<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(path: &'a Path, bytes: &'a [u8]) -> Self {
        Self { path, bytes, pos: 0 }
    }

    fn err(&self, offset: usize, msg: impl Into<String>) -> IngestError {
        IngestError::Parse { path: self.path.to_path_buf(), offset, msg: msg.into() }
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(self.err(self.bytes.len(), format!("truncated {what}: need {n} bytes at {}", self.pos)));
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32_be(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_be_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u32_le(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u16_le(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn rest(&self) -> &'a [u8] {
        &self.bytes[self.pos..]
    }
}

/// Per-image shape from dims (count excluded).
fn image_shape(dims: &[usize], layout: Option<Layout>, cur: &Cursor) -> Result<ImageShape> {
    let shape = match (dims, layout) {
        (&[h, w], None | Some(Layout::Gray)) => ImageShape::Gray { height: h, width: w },
        (&[h, w, 3], None | Some(Layout::Color)) => ImageShape::Color { height: h, width: w },
        (&[d, h, w], None | Some(Layout::Volume)) => ImageShape::Volume { depth: d, height: h, width: w },
        _ => return Err(cur.err(0, format!("image dims {dims:?} do not fit layout {layout:?}"))),
    };
    if shape.is_empty() {
        return Err(cur.err(0, "zero-sized image"));
    }
    Ok(shape)
}

fn split_images(pixels: &[u8], count: usize, shape: ImageShape, cur: &Cursor, data_start: usize) -> Result<Vec<Image>> {
    let per = shape.len();
    let need = count.checked_mul(per).ok_or_else(|| cur.err(0, "image count overflows"))?;
    if pixels.len() < need {
        return Err(cur.err(
            data_start + pixels.len(),
            format!("truncated pixel data: {count} images need {need} bytes, found {}", pixels.len()),
        ));
    }
    if pixels.len() > need {
        return Err(cur.err(data_start + need, "trailing bytes after pixel data"));
    }
    Ok(pixels.chunks_exact(per).map(|px| Image::new(shape, px.to_vec()).expect("length checked")).collect())
}

pub fn read_idx_images(path: &Path, layout: Option<Layout>) -> Result<Vec<Image>> {
    let bytes = read_file(path)?;
    let mut cur = Cursor::new(path, &bytes);
    let magic = cur.u32_be("magic")?;
    if magic >> 8 != 0x08 || !(3..=4).contains(&(magic & 0xff)) {
        return Err(cur.err(0, format!("bad IDX image magic {magic:#010x}")));
    }
    let ndims = (magic & 0xff) as usize;
    let mut dims = Vec::with_capacity(ndims);
    for _ in 0..ndims {
        dims.push(cur.u32_be("dimension")? as usize);
    }
    let shape = image_shape(&dims[1..], layout, &cur)?;
    let start = cur.pos;
    split_images(cur.rest(), dims[0], shape, &cur, start)
}

pub fn read_idx_labels(path: &Path) -> Result<Vec<u8>> {
    let bytes = read_file(path)?;
    let mut cur = Cursor::new(path, &bytes);
    let magic = cur.u32_be("magic")?;
    if magic != 0x0000_0801 {
        return Err(cur.err(0, format!("bad IDX label magic {magic:#010x}")));
    }
    let count = cur.u32_be("count")? as usize;
    let labels = cur.take(count, "labels")?.to_vec();
    if !cur.rest().is_empty() {
        return Err(cur.err(cur.pos, "trailing bytes after labels"));
    }
    Ok(labels)
}

pub fn read_raw_images(path: &Path, layout: Option<Layout>) -> Result<Vec<Image>> {
    let bytes = read_file(path)?;
    let mut cur = Cursor::new(path, &bytes);
    let ndims = cur.u32_le("dims count")? as usize;
    if !(3..=4).contains(&ndims) {
        return Err(cur.err(0, format!("expected 3 or 4 dims, got {ndims}")));
    }
    let mut dims = Vec::with_capacity(ndims);
    for _ in 0..ndims {
        dims.push(cur.u32_le("dimension")? as usize);
    }
    let type_at = cur.pos;
    let elem = cur.take(1, "element type")?[0];
    if elem != 0 {
        return Err(cur.err(type_at, format!("unsupported element type {elem}; only 0 (u8) is supported")));
    }
    let shape = image_shape(&dims[1..], layout, &cur)?;
    let start = cur.pos;
    split_images(cur.rest(), dims[0], shape, &cur, start)
}

pub fn read_npy_images(path: &Path, layout: Option<Layout>) -> Result<Vec<Image>> {
    let bytes = read_file(path)?;
    let mut cur = Cursor::new(path, &bytes);
    if cur.take(6, "magic")? != b"\x93NUMPY" {
        return Err(cur.err(0, "bad NPY magic"));
    }
    let major = cur.take(2, "version")?[0];
    let header_len = match major {
        1 => cur.u16_le("header length")? as usize,
        2 | 3 => cur.u32_le("header length")? as usize,
        v => return Err(cur.err(6, format!("unsupported NPY version {v}"))),
    };
    let header_at = cur.pos;
    let header = std::str::from_utf8(cur.take(header_len, "header")?)
        .map_err(|_| cur.err(header_at, "header is not UTF-8"))?
        .to_string();
    let field = |key: &str| -> Option<&str> {
        let at = header.find(&format!("'{key}'"))?;
        let rest = &header[at + key.len() + 2..];
        Some(rest[rest.find(':')? + 1..].trim_start())
    };
    let descr = field("descr").ok_or_else(|| cur.err(header_at, "header lacks 'descr'"))?;
    if !(descr.starts_with("'|u1'") || descr.starts_with("'u1'") || descr.starts_with("'<u1'")) {
        return Err(cur.err(header_at, format!("unsupported dtype {}", descr.split(',').next().unwrap_or(descr))));
    }
    if field("fortran_order").is_some_and(|v| v.starts_with("True")) {
        return Err(cur.err(header_at, "Fortran-ordered arrays are not supported"));
    }
    let shape_src = field("shape").ok_or_else(|| cur.err(header_at, "header lacks 'shape'"))?;
    let close = shape_src.find(')').ok_or_else(|| cur.err(header_at, "unterminated shape"))?;
    let dims = shape_src[1..close]
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().map_err(|_| cur.err(header_at, format!("bad shape entry {s:?}"))))
        .collect::<Result<Vec<_>>>()?;
    if !(3..=4).contains(&dims.len()) {
        return Err(cur.err(header_at, format!("expected a 3- or 4-axis array, got shape {dims:?}")));
    }
    let shape = image_shape(&dims[1..], layout, &cur)?;
    let start = cur.pos;
    split_images(cur.rest(), dims[0], shape, &cur, start)
}

/// `id,label` rows; a header line is allowed. Ids must run 0, 1, 2, ...
pub fn read_csv_labels(path: &Path) -> Result<Vec<i64>> {
    let bytes = read_file(path)?;
    let text = String::from_utf8(bytes).map_err(|e| IngestError::Parse {
        path: path.to_path_buf(),
        offset: e.utf8_error().valid_up_to(),
        msg: "not UTF-8".into(),
    })?;
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut labels = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| IngestError::Parse {
            path: path.to_path_buf(),
            offset: e.position().map_or(0, |p| p.byte() as usize),
            msg: e.to_string(),
        })?;
        let offset = rec.position().map_or(0, |p| p.byte() as usize);
        let parse_err = |msg: String| IngestError::Parse { path: path.to_path_buf(), offset, msg };
        if row == 0 && rec.get(0).is_some_and(|f| f.parse::<i64>().is_err()) {
            continue;
        }
        if rec.len() != 2 {
            return Err(parse_err(format!("expected 2 fields, got {}", rec.len())));
        }
        let id: usize = rec[0].parse().map_err(|_| parse_err(format!("bad id {:?}", &rec[0])))?;
        let label: i64 = rec[1].parse().map_err(|_| parse_err(format!("bad label {:?}", &rec[1])))?;
        if id != labels.len() {
            return Err(parse_err(format!("expected id {}, got {id}", labels.len())));
        }
        labels.push(label);
    }
    Ok(labels)
}

/// Reads `source` into a dataset with labels `1..=n_labels`.
pub fn ingest(source: &DatasetSource, n_labels: u32) -> Result<Dataset> {
    let (images, raw_labels, label_path) = match source.format {
        Format::Idx => {
            let images = read_idx_images(&source.images, source.layout)?;
            let labels = read_idx_labels(&source.labels)?.into_iter().map(i64::from).collect();
            (images, labels, &source.labels)
        }
        Format::Raw => (read_raw_images(&source.images, source.layout)?, read_csv_labels(&source.labels)?, &source.labels),
        Format::Npy => (read_npy_images(&source.images, source.layout)?, read_csv_labels(&source.labels)?, &source.labels),
    };
    if images.len() != raw_labels.len() {
        return Err(IngestError::CountMismatch { images: images.len(), labels: raw_labels.len() });
    }
    let base = i64::from(source.label_base);
    let labels = raw_labels
        .iter()
        .enumerate()
        .map(|(index, &l)| {
            let shifted = l - base + 1;
            if (1..=i64::from(n_labels)).contains(&shifted) {
                Ok(Label(shifted as u32))
            } else {
                Err(IngestError::LabelRange {
                    path: label_path.clone(),
                    index,
                    label: l,
                    base: source.label_base,
                    n_labels,
                })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut ds = Dataset::new(images, labels, n_labels)?;
    if let Some(limit) = source.limit {
        ds.truncate(limit);
    }
    Ok(ds)
}
