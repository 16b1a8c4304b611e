//! Zero-shot scoring of video embedding sequences against real-video
//! statistics.
//!
//! Frames are whitened with a PCA transform fitted on real frames and scored
//! under a standard normal (spatial branch); unit-normalized inter-frame
//! differences are whitened and scored the same way (temporal branch). Both
//! branch scores are turned into rank percentiles against a calibration set
//! of real videos and fused into one realness score.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! at the crate root fix it to `f64`.

pub mod calibration;
pub mod embedseq;
pub mod error;
pub mod eval;
pub mod likelihood;
pub mod linalg;
pub mod scalar;
pub mod scoring;
pub mod seed;
pub mod stattests;
pub mod whitening;

pub use calibration::{calibrate, load_profile, save_profile, CalibrationConfig, CalibrationProfile, TemporalFit};
pub use embedseq::{
    downsample_indices, read_manifest, read_sequence, write_manifest, write_sequence, DatasetManifest,
    EmbeddingSequence, Label, ManifestEntry,
};
pub use error::{Error, Result};
pub use likelihood::{aggregate, log_likelihood, Aggregation, TemporalOptions};
pub use scalar::Scalar;
pub use scoring::{percentile, score_batch, score_video, Fusion, ScoreRecord};
pub use whitening::{EigenFloor, FitOptions, WhiteningModel};

pub type WhiteningModelF64 = WhiteningModel<f64>;
pub type WhiteningModelF32 = WhiteningModel<f32>;
pub type CalibrationProfileF64 = CalibrationProfile<f64>;
pub type CalibrationProfileF32 = CalibrationProfile<f32>;
pub type ScoreRecordF64 = ScoreRecord<f64>;
