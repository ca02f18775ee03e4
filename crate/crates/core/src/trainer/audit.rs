use crate::dataset::Dataset;
use crate::labels::Label;
use serde::{Deserialize, Serialize};
use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};

/// Two byte-identical images carrying different labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DuplicatePair {
    pub id_a: usize,
    pub id_b: usize,
    pub label_a: Label,
    pub label_b: Label,
}

fn content_hash(bytes: &[u8], shape: &impl Hash) -> u64 {
    let mut h = DefaultHasher::new();
    shape.hash(&mut h);
    bytes.hash(&mut h);
    h.finish()
}

/// Every unordered pair of byte-identical images with differing labels,
/// sorted by `(id_a, id_b)` with `id_a < id_b`.
///
/// Images are bucketed by a content hash of their raw bytes and shape;
/// candidates within a bucket are confirmed by full byte comparison.
pub fn detect_double_labels(ds: &Dataset) -> Vec<DuplicatePair> {
    let mut buckets: HashMap<u64, Vec<usize>> = HashMap::new();
    for (i, img) in ds.images().iter().enumerate() {
        buckets.entry(content_hash(img.bytes(), &img.shape())).or_default().push(i);
    }
    let mut pairs = Vec::new();
    for members in buckets.values().filter(|m| m.len() > 1) {
        for (n, &a) in members.iter().enumerate() {
            for &b in &members[n + 1..] {
                let (_, img_a, label_a) = ds.get(a);
                let (_, img_b, label_b) = ds.get(b);
                if label_a != label_b && img_a == img_b {
                    let (id_a, id_b) = (ds.ids()[a], ds.ids()[b]);
                    pairs.push(if id_a < id_b {
                        DuplicatePair { id_a, id_b, label_a, label_b }
                    } else {
                        DuplicatePair { id_a: id_b, id_b: id_a, label_a: label_b, label_b: label_a }
                    });
                }
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Image, ImageShape};
    use crate::rng::SeededRng;

    fn img(rng: &mut SeededRng) -> Image {
        Image::new(ImageShape::Gray { height: 4, width: 4 }, (0..16).map(|_| rng.below(256) as u8).collect()).unwrap()
    }

    #[test]
    fn clean_set_has_no_pairs() {
        let mut rng = SeededRng::new(1);
        let images: Vec<Image> = (0..50).map(|_| img(&mut rng)).collect();
        let labels = (0..50).map(|i| Label(1 + i % 3)).collect();
        let ds = Dataset::new(images, labels, 3).unwrap();
        assert!(detect_double_labels(&ds).is_empty());
    }

    #[test]
    fn triple_copy_reports_each_contradictory_pair() {
        let mut rng = SeededRng::new(2);
        let a = img(&mut rng);
        let other = img(&mut rng);
        let ds = Dataset::new(
            vec![a.clone(), other, a.clone(), a],
            vec![Label(1), Label(1), Label(2), Label(1)],
            2,
        )
        .unwrap();
        let pairs = detect_double_labels(&ds);
        assert_eq!(
            pairs,
            vec![
                DuplicatePair { id_a: 0, id_b: 2, label_a: Label(1), label_b: Label(2) },
                DuplicatePair { id_a: 2, id_b: 3, label_a: Label(2), label_b: Label(1) },
            ]
        );
        assert_eq!(detect_double_labels(&ds), pairs);
    }

    #[test]
    fn same_bytes_different_shape_is_not_a_duplicate() {
        let a = Image::new(ImageShape::Gray { height: 2, width: 3 }, vec![1; 6]).unwrap();
        let b = Image::new(ImageShape::Gray { height: 3, width: 2 }, vec![1; 6]).unwrap();
        let ds = Dataset::new(vec![a, b], vec![Label(1), Label(2)], 2).unwrap();
        assert!(detect_double_labels(&ds).is_empty());
    }
}
