//! Feature transforms: each ANN of a group sees the input image through one
//! deterministic transform producing a flat vector.
//!
//! Vectorization order is row-major throughout: rows, then columns; depth
//! slices outermost for volumes. Stacked channels are laid out channel-major
//! (all R, then all G, then all B).
//!
//! Other transforms (edge maps, SVD, Fourier or Hough transforms) fit the
//! same [`FeatureSpec`] contract but are not provided.

use crate::dataset::{Image, ImageShape};
use crate::error::{PnwError, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    R,
    G,
    B,
}

impl Channel {
    pub fn offset(self) -> usize {
        match self {
            Channel::R => 0,
            Channel::G => 1,
            Channel::B => 2,
        }
    }

    pub fn from_index(k: usize) -> Self {
        match k % 3 {
            0 => Channel::R,
            1 => Channel::G,
            _ => Channel::B,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureKind {
    /// The image as stored, flattened. Gray or color.
    IdentityVector,
    /// Gray image: 2x2 average pooling, then a 1-pixel border removed.
    DownsampleTrim,
    /// One color channel, optionally pooled and trimmed like `DownsampleTrim`.
    ChannelSelect {
        channel: Channel,
        #[serde(default)]
        downsample: bool,
    },
    /// All three color channels stacked, each optionally pooled and trimmed.
    ChannelStack {
        #[serde(default)]
        downsample: bool,
    },
    /// Gray image thresholded to {0, 1}: 1 where intensity >= threshold.
    GrayBinary { threshold: f64 },
    /// A 3D volume, flattened.
    #[serde(rename = "volume_3d")]
    Volume3D,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    #[serde(flatten)]
    pub kind: FeatureKind,
    pub output_dims: usize,
}

impl FeatureSpec {
    /// Spec whose `output_dims` is computed for images of `shape`.
    pub fn for_shape(kind: FeatureKind, shape: ImageShape) -> Result<Self> {
        Ok(Self { kind, output_dims: output_len(kind, shape)? })
    }

    pub fn apply(&self, image: &Image) -> Result<Vec<f64>> {
        apply_feature(self, image)
    }
}

fn mismatch(kind: FeatureKind, shape: ImageShape) -> PnwError {
    PnwError::ShapeMismatch(format!("feature {kind:?} cannot take a {shape} image"))
}

fn pooled_trimmed(kind: FeatureKind, height: usize, width: usize, shape: ImageShape) -> Result<(usize, usize)> {
    if !height.is_multiple_of(2) || !width.is_multiple_of(2) || height < 6 || width < 6 {
        return Err(mismatch(kind, shape));
    }
    Ok((height / 2 - 2, width / 2 - 2))
}

/// Analytic output length of `kind` on images of `shape`.
pub fn output_len(kind: FeatureKind, shape: ImageShape) -> Result<usize> {
    use FeatureKind::*;
    match (kind, shape) {
        (IdentityVector, ImageShape::Gray { .. } | ImageShape::Color { .. }) => Ok(shape.len()),
        (DownsampleTrim, ImageShape::Gray { height, width }) => {
            let (h, w) = pooled_trimmed(kind, height, width, shape)?;
            Ok(h * w)
        }
        (ChannelSelect { downsample, .. }, ImageShape::Color { height, width })
        | (ChannelStack { downsample }, ImageShape::Color { height, width }) => {
            let per_channel = if downsample {
                let (h, w) = pooled_trimmed(kind, height, width, shape)?;
                h * w
            } else {
                height * width
            };
            Ok(if matches!(kind, ChannelStack { .. }) { 3 * per_channel } else { per_channel })
        }
        (GrayBinary { threshold }, ImageShape::Gray { .. }) if (0.0..=1.0).contains(&threshold) => Ok(shape.len()),
        (Volume3D, ImageShape::Volume { .. }) => Ok(shape.len()),
        _ => Err(mismatch(kind, shape)),
    }
}

/// 2x2 average pooling of one plane then removal of the outer 1-pixel frame.
/// `plane(r, c)` reads the normalized source pixel.
fn pool_trim_into(out: &mut Vec<f64>, height: usize, width: usize, plane: impl Fn(usize, usize) -> f64) {
    let (ph, pw) = (height / 2, width / 2);
    for r in 1..ph - 1 {
        for c in 1..pw - 1 {
            let (sr, sc) = (2 * r, 2 * c);
            let sum = plane(sr, sc) + plane(sr, sc + 1) + plane(sr + 1, sc) + plane(sr + 1, sc + 1);
            out.push(sum / 4.0);
        }
    }
}

fn channel_into(out: &mut Vec<f64>, image: &Image, height: usize, width: usize, channel: Channel, downsample: bool) {
    let at = |r: usize, c: usize| image.value((r * width + c) * 3 + channel.offset());
    if downsample {
        pool_trim_into(out, height, width, at);
    } else {
        for r in 0..height {
            for c in 0..width {
                out.push(at(r, c));
            }
        }
    }
}

/// Transforms `image` under `spec`. The result always has `spec.output_dims` elements.
pub fn apply_feature(spec: &FeatureSpec, image: &Image) -> Result<Vec<f64>> {
    let shape = image.shape();
    let expected = output_len(spec.kind, shape)?;
    if expected != spec.output_dims {
        return Err(PnwError::ShapeMismatch(format!(
            "feature {:?} on a {shape} image yields {expected} values, spec says {}",
            spec.kind, spec.output_dims
        )));
    }
    let mut out = Vec::with_capacity(expected);
    match (spec.kind, shape) {
        (FeatureKind::IdentityVector, _) | (FeatureKind::Volume3D, _) => out.extend((0..shape.len()).map(|i| image.value(i))),
        (FeatureKind::DownsampleTrim, ImageShape::Gray { height, width }) => {
            pool_trim_into(&mut out, height, width, |r, c| image.value(r * width + c))
        }
        (FeatureKind::ChannelSelect { channel, downsample }, ImageShape::Color { height, width }) => {
            channel_into(&mut out, image, height, width, channel, downsample)
        }
        (FeatureKind::ChannelStack { downsample }, ImageShape::Color { height, width }) => {
            for ch in [Channel::R, Channel::G, Channel::B] {
                channel_into(&mut out, image, height, width, ch, downsample);
            }
        }
        (FeatureKind::GrayBinary { threshold }, _) => {
            out.extend((0..shape.len()).map(|i| if image.value(i) >= threshold { 1.0 } else { 0.0 }))
        }
        _ => unreachable!("output_len accepted an unsupported pair"),
    }
    debug_assert_eq!(out.len(), expected);
    Ok(out)
}

/// `n_f` channel-select specs cycling R, G, B.
pub fn cyclic_channel_specs(n_f: usize, shape: ImageShape, downsample: bool) -> Result<Vec<FeatureSpec>> {
    (0..n_f)
        .map(|k| FeatureSpec::for_shape(FeatureKind::ChannelSelect { channel: Channel::from_index(k), downsample }, shape))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gray(h: usize, w: usize) -> Image {
        Image::new(ImageShape::Gray { height: h, width: w }, (0..h * w).map(|i| (i % 256) as u8).collect()).unwrap()
    }

    #[test]
    fn identity_on_28x28_is_784() {
        let spec = FeatureSpec::for_shape(FeatureKind::IdentityVector, ImageShape::Gray { height: 28, width: 28 }).unwrap();
        assert_eq!(spec.output_dims, 784);
        assert_eq!(spec.apply(&gray(28, 28)).unwrap().len(), 784);
    }

    #[test]
    fn downsample_trim_64_is_900() {
        let spec = FeatureSpec::for_shape(FeatureKind::DownsampleTrim, ImageShape::Gray { height: 64, width: 64 }).unwrap();
        assert_eq!(spec.output_dims, 900);
        assert_eq!(spec.apply(&gray(64, 64)).unwrap().len(), 900);
    }

    #[test]
    fn downsample_trim_closed_form() {
        for s in [8usize, 16, 32, 64] {
            let n = output_len(FeatureKind::DownsampleTrim, ImageShape::Gray { height: s, width: s }).unwrap();
            assert_eq!(n, (s / 2 - 2) * (s / 2 - 2));
        }
    }

    #[test]
    fn downsample_trim_values() {
        // 8x8 image with pixel = 4*row + col, pooled 4x4 then trimmed to the inner 2x2.
        let px: Vec<u8> = (0..64).map(|i| (4 * (i / 8) + i % 8) as u8).collect();
        let img = Image::new(ImageShape::Gray { height: 8, width: 8 }, px).unwrap();
        let spec = FeatureSpec::for_shape(FeatureKind::DownsampleTrim, img.shape()).unwrap();
        let got = spec.apply(&img).unwrap();
        // Pooled cell (r, c) covers rows 2r..2r+2, cols 2c..2c+2: mean = 4*(2r+0.5) + (2c+0.5).
        let want: Vec<f64> = [(1, 1), (1, 2), (2, 1), (2, 2)]
            .iter()
            .map(|&(r, c)| {
                let cells = [(2 * r, 2 * c), (2 * r, 2 * c + 1), (2 * r + 1, 2 * c), (2 * r + 1, 2 * c + 1)];
                cells.iter().map(|&(a, b)| f64::from((4 * a + b) as u8) / 255.0).sum::<f64>() / 4.0
            })
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn volume_is_21952() {
        let shape = ImageShape::Volume { depth: 28, height: 28, width: 28 };
        let img = Image::new(shape, vec![7; shape.len()]).unwrap();
        let spec = FeatureSpec::for_shape(FeatureKind::Volume3D, shape).unwrap();
        assert_eq!(spec.apply(&img).unwrap().len(), 21_952);
    }

    #[test]
    fn channel_stack_30x30_is_2700_and_64x64_downsampled_is_2700() {
        let small = ImageShape::Color { height: 30, width: 30 };
        assert_eq!(output_len(FeatureKind::ChannelStack { downsample: false }, small).unwrap(), 2_700);
        let big = ImageShape::Color { height: 64, width: 64 };
        assert_eq!(output_len(FeatureKind::ChannelStack { downsample: true }, big).unwrap(), 2_700);
        assert_eq!(output_len(FeatureKind::ChannelSelect { channel: Channel::G, downsample: true }, big).unwrap(), 900);
    }

    #[test]
    fn channel_select_picks_the_channel() {
        let shape = ImageShape::Color { height: 1, width: 2 };
        let img = Image::new(shape, vec![255, 0, 51, 0, 255, 102]).unwrap();
        let b = FeatureSpec::for_shape(FeatureKind::ChannelSelect { channel: Channel::B, downsample: false }, shape).unwrap();
        assert_eq!(b.apply(&img).unwrap(), vec![0.2, 0.4]);
        let stack = FeatureSpec::for_shape(FeatureKind::ChannelStack { downsample: false }, shape).unwrap();
        assert_eq!(stack.apply(&img).unwrap(), vec![1.0, 0.0, 0.0, 1.0, 0.2, 0.4]);
    }

    #[test]
    fn binary_threshold() {
        let img = Image::new(ImageShape::Gray { height: 1, width: 3 }, vec![0, 127, 200]).unwrap();
        let spec = FeatureSpec::for_shape(FeatureKind::GrayBinary { threshold: 0.5 }, img.shape()).unwrap();
        assert_eq!(spec.apply(&img).unwrap(), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn shape_mismatches() {
        let g = ImageShape::Gray { height: 28, width: 28 };
        assert!(output_len(FeatureKind::ChannelSelect { channel: Channel::R, downsample: false }, g).is_err());
        assert!(output_len(FeatureKind::Volume3D, g).is_err());
        assert!(output_len(FeatureKind::DownsampleTrim, ImageShape::Gray { height: 27, width: 28 }).is_err());
        assert!(output_len(FeatureKind::GrayBinary { threshold: 1.5 }, g).is_err());
        let spec = FeatureSpec { kind: FeatureKind::IdentityVector, output_dims: 900 };
        assert!(matches!(spec.apply(&gray(28, 28)), Err(PnwError::ShapeMismatch(_))));
    }

    #[test]
    fn cyclic_specs() {
        let shape = ImageShape::Color { height: 28, width: 28 };
        let channels = |n| -> Vec<Channel> {
            cyclic_channel_specs(n, shape, false)
                .unwrap()
                .into_iter()
                .map(|s| match s.kind {
                    FeatureKind::ChannelSelect { channel, .. } => channel,
                    other => panic!("{other:?}"),
                })
                .collect()
        };
        assert_eq!(channels(1), vec![Channel::R]);
        assert_eq!(channels(4), vec![Channel::R, Channel::G, Channel::B, Channel::R]);
        let eighteen = channels(18);
        assert_eq!(eighteen.len(), 18);
        for cycle in eighteen.chunks(3) {
            assert_eq!(cycle, &[Channel::R, Channel::G, Channel::B]);
        }
    }

    fn kind_and_shape() -> impl Strategy<Value = (FeatureKind, ImageShape)> {
        let even = (3usize..12).prop_map(|h| 2 * h);
        prop_oneof![
            (1usize..20, 1usize..20).prop_map(|(h, w)| (FeatureKind::IdentityVector, ImageShape::Gray { height: h, width: w })),
            (1usize..20, 1usize..20).prop_map(|(h, w)| (FeatureKind::IdentityVector, ImageShape::Color { height: h, width: w })),
            (even.clone(), even.clone()).prop_map(|(h, w)| (FeatureKind::DownsampleTrim, ImageShape::Gray { height: h, width: w })),
            (even.clone(), even.clone(), 0usize..3, any::<bool>()).prop_map(|(h, w, c, d)| (
                FeatureKind::ChannelSelect { channel: Channel::from_index(c), downsample: d },
                ImageShape::Color { height: h, width: w }
            )),
            (even.clone(), even, any::<bool>())
                .prop_map(|(h, w, d)| (FeatureKind::ChannelStack { downsample: d }, ImageShape::Color { height: h, width: w })),
            (1usize..20, 1usize..20, 0.0f64..=1.0)
                .prop_map(|(h, w, t)| (FeatureKind::GrayBinary { threshold: t }, ImageShape::Gray { height: h, width: w })),
            (1usize..8, 1usize..8, 1usize..8)
                .prop_map(|(d, h, w)| (FeatureKind::Volume3D, ImageShape::Volume { depth: d, height: h, width: w })),
        ]
    }

    proptest! {
        #[test]
        fn output_length_and_range((kind, shape) in kind_and_shape(), seed in any::<u64>()) {
            let mut rng = crate::rng::SeededRng::new(seed);
            let px = (0..shape.len()).map(|_| rng.below(256) as u8).collect();
            let img = Image::new(shape, px).unwrap();
            let spec = FeatureSpec::for_shape(kind, shape).unwrap();
            let a = spec.apply(&img).unwrap();
            let b = spec.apply(&img).unwrap();
            prop_assert_eq!(a.len(), spec.output_dims);
            prop_assert!(a.iter().all(|v| (0.0..=1.0).contains(v)));
            prop_assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
            if let FeatureKind::GrayBinary { .. } = kind {
                prop_assert!(a.iter().all(|&v| v == 0.0 || v == 1.0));
            }
        }
    }
}
