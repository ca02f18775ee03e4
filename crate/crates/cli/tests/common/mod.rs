#![allow(dead_code)]

use pnw_core::SeededRng;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// Writes an IDX image file (u8, 3 dims) and an IDX label file.
pub fn write_idx(dir: &Path, name: &str, height: usize, width: usize, images: &[Vec<u8>], labels: &[u8]) -> (PathBuf, PathBuf) {
    let mut img = Vec::new();
    img.extend_from_slice(&0x0803u32.to_be_bytes());
    for d in [images.len(), height, width] {
        img.extend_from_slice(&(d as u32).to_be_bytes());
    }
    for px in images {
        assert_eq!(px.len(), height * width);
        img.extend_from_slice(px);
    }
    let mut lab = Vec::new();
    lab.extend_from_slice(&0x0801u32.to_be_bytes());
    lab.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    lab.extend_from_slice(labels);
    let ip = dir.join(format!("{name}-images.idx"));
    let lp = dir.join(format!("{name}-labels.idx"));
    std::fs::File::create(&ip).unwrap().write_all(&img).unwrap();
    std::fs::File::create(&lp).unwrap().write_all(&lab).unwrap();
    (ip, lp)
}

/// `n` random 6x6 gray images with 0-based labels cycling through `n_labels`.
pub fn random_images(n: usize, n_labels: u8, seed: u64) -> (Vec<Vec<u8>>, Vec<u8>) {
    let mut rng = SeededRng::new(seed);
    let images = (0..n).map(|_| (0..36).map(|_| rng.below(256) as u8).collect()).collect();
    let labels = (0..n).map(|i| (i % n_labels as usize) as u8).collect();
    (images, labels)
}

/// A two-class, one-group config over the given IDX pair. With balanced
/// labels every datum is an expat sample of the other class, so the model
/// is fully trained once its ANNs are.
pub fn small_config(images: &Path, labels: &Path, out: &Path, extra: &str) -> String {
    format!(
        r#"seed = 11
output_dir = "{out}"
{extra}

[dataset]
format = "idx"
images = "{images}"
labels = "{labels}"

[architecture]
n_labels = 4
n_groups = 1
hidden_nodes = 12
classes = [[1, 2], [3, 4]]
features = [{{ kind = "identity_vector" }}, {{ kind = "gray_binary", threshold = 0.5 }}]

[trainer.sgd]
max_epochs = 40
"#,
        out = out.display(),
        images = images.display(),
        labels = labels.display(),
    )
}

pub fn pnw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pnw")).args(args).env_remove("PNW_NUM_JOBS").output().unwrap()
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}
