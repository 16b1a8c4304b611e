//! Embedding sequences: the boundary between an image encoder and the
//! numeric core.

mod downsample;
mod format;
mod manifest;

use std::fmt;

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use downsample::{downsample_indices, round_half_even};
pub use format::{
    decode_sequence, encode_sequence, read_sequence, write_sequence, EMBEDDING_MAGIC,
    EMBEDDING_VERSION, HEADER_LEN,
};
pub use manifest::{read_manifest, write_manifest, DatasetManifest, ManifestEntry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Real,
    Generated,
    #[default]
    Unknown,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Real => "real",
            Label::Generated => "generated",
            Label::Unknown => "unknown",
        })
    }
}

impl std::str::FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real" => Ok(Label::Real),
            "generated" => Ok(Label::Generated),
            "unknown" => Ok(Label::Unknown),
            other => Err(Error::InvalidArgument(format!("unknown label {other:?}"))),
        }
    }
}

/// Per-video matrix of `T` frame embeddings in `R^d`, stored as `f32`.
///
/// Immutable once built; every entry is finite, `T >= 1`, `d >= 1`, `fps > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSequence {
    video_id: String,
    frames: Array2<f32>,
    fps: f64,
    label: Label,
    generator: Option<String>,
}

impl EmbeddingSequence {
    pub fn new(video_id: impl Into<String>, frames: Array2<f32>, fps: f64) -> Result<Self> {
        let (t, d) = frames.dim();
        if t == 0 || d == 0 {
            return Err(Error::InvalidShape(format!(
                "sequence must have at least one frame and one dimension, got {t}x{d}"
            )));
        }
        if !(fps.is_finite() && fps > 0.0) {
            return Err(Error::InvalidArgument(format!("fps must be positive, got {fps}")));
        }
        if let Some(((row, col), _)) = frames.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite {
                location: format!("frame {row}, coordinate {col}"),
            });
        }
        Ok(Self {
            video_id: video_id.into(),
            frames: frames.as_standard_layout().into_owned(),
            fps,
            label: Label::Unknown,
            generator: None,
        })
    }

    pub fn with_label(mut self, label: Label) -> Self {
        self.label = label;
        self
    }

    pub fn with_generator(mut self, generator: Option<String>) -> Self {
        self.generator = generator;
        self
    }

    pub fn with_video_id(mut self, video_id: impl Into<String>) -> Self {
        self.video_id = video_id.into();
        self
    }

    pub fn video_id(&self) -> &str {
        &self.video_id
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn generator(&self) -> Option<&str> {
        self.generator.as_deref()
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn num_frames(&self) -> usize {
        self.frames.nrows()
    }

    pub fn dim(&self) -> usize {
        self.frames.ncols()
    }

    pub fn frames(&self) -> ArrayView2<'_, f32> {
        self.frames.view()
    }

    pub fn frame(&self, t: usize) -> ArrayView1<'_, f32> {
        self.frames.row(t)
    }

    /// Frames widened to the computation scalar.
    pub fn frames_as<T: Scalar>(&self) -> Array2<T> {
        self.frames.mapv(T::from_f32_exact)
    }

    /// New sequence made of the given frames in the given order.
    pub fn select_frames(&self, indices: &[usize], fps: f64) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.num_frames()) {
            return Err(Error::InvalidArgument(format!(
                "frame index {bad} out of range for {} frames",
                self.num_frames()
            )));
        }
        let frames = self.frames.select(Axis(0), indices);
        Ok(Self::new(self.video_id.clone(), frames, fps)?
            .with_label(self.label)
            .with_generator(self.generator.clone()))
    }

    /// Resamples to `target_fps` with [`downsample_indices`], then keeps at
    /// most `max_frames` leading frames.
    pub fn standardize(&self, target_fps: Option<f64>, max_frames: Option<usize>) -> Result<Self> {
        let (mut indices, fps) = match target_fps {
            Some(target) => (downsample_indices(self.num_frames(), self.fps, target)?, target),
            None => ((0..self.num_frames()).collect(), self.fps),
        };
        if let Some(max) = max_frames {
            if max == 0 {
                return Err(Error::InvalidArgument("max_frames must be at least 1".into()));
            }
            indices.truncate(max);
        }
        if indices.len() == self.num_frames() && fps == self.fps {
            return Ok(self.clone());
        }
        self.select_frames(&indices, fps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn rejects_empty_and_nonfinite() {
        assert!(matches!(
            EmbeddingSequence::new("v", Array2::zeros((0, 4)), 8.0),
            Err(Error::InvalidShape(_))
        ));
        assert!(matches!(
            EmbeddingSequence::new("v", Array2::zeros((2, 0)), 8.0),
            Err(Error::InvalidShape(_))
        ));
        assert!(matches!(
            EmbeddingSequence::new("v", array![[1.0, f32::NAN]], 8.0),
            Err(Error::NonFinite { .. })
        ));
        assert!(matches!(
            EmbeddingSequence::new("v", array![[1.0]], 0.0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn standardize_downsamples_and_truncates() {
        let frames = Array2::from_shape_fn((48, 2), |(t, j)| (t * 2 + j) as f32);
        let seq = EmbeddingSequence::new("v", frames, 24.0)
            .unwrap()
            .with_label(Label::Real);
        let out = seq.standardize(Some(8.0), Some(10)).unwrap();
        assert_eq!(out.num_frames(), 10);
        assert_eq!(out.fps(), 8.0);
        assert_eq!(out.frame(1)[0], 6.0);
        assert_eq!(out.label(), Label::Real);
        assert!(seq.standardize(Some(30.0), None).is_err());
    }
}
