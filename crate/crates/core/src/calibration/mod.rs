//! Calibration against a corpus of real videos.
//!
//! The spatial model is fitted on one uniformly drawn frame per video, the
//! temporal model on the normalized transitions of every video (or one drawn
//! transition per video), and each video is then scored with both models to
//! form the reference distributions used for percentiles.

mod io;

use ndarray::{Array2, Axis};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedseq::{DatasetManifest, EmbeddingSequence, Label};
use crate::error::{Error, Result};
use crate::likelihood::{aggregate, row_log_likelihoods, transitions, Aggregation, TemporalOptions, Transitions};
use crate::scalar::Scalar;
use crate::seed::{self, tag};
use crate::whitening::{EigenFloor, FitOptions, WhiteningModel};

pub use io::{decode_profile, encode_profile, load_profile, save_profile, PROFILE_MAGIC, PROFILE_VERSION};

/// Which transitions feed the temporal whitening fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TemporalFit {
    #[default]
    AllTransitions,
    /// One randomly drawn retained transition per video.
    SingleTransition,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationConfig {
    pub temporal: TemporalOptions,
    pub spatial_agg: Aggregation,
    pub temporal_agg: Aggregation,
    pub floor: EigenFloor,
    pub temporal_fit: TemporalFit,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            temporal: TemporalOptions::default(),
            spatial_agg: Aggregation::Max,
            temporal_agg: Aggregation::Min,
            floor: EigenFloor::default(),
            temporal_fit: TemporalFit::AllTransitions,
        }
    }
}

/// Everything the detector needs at inference time.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationProfile<T> {
    pub(crate) spatial_model: WhiteningModel<T>,
    pub(crate) temporal_model: WhiteningModel<T>,
    pub(crate) spatial_scores: Vec<T>,
    pub(crate) temporal_scores: Vec<T>,
    pub(crate) config: CalibrationConfig,
    pub(crate) rng_seed: u64,
}

impl<T: Scalar> CalibrationProfile<T> {
    /// Assembles a profile from parts, sorting both score lists.
    pub fn from_parts(
        spatial_model: WhiteningModel<T>,
        temporal_model: WhiteningModel<T>,
        mut spatial_scores: Vec<T>,
        mut temporal_scores: Vec<T>,
        config: CalibrationConfig,
        rng_seed: u64,
    ) -> Result<Self> {
        if spatial_model.dim() != temporal_model.dim() {
            return Err(Error::DimensionMismatch {
                expected: spatial_model.dim(),
                found: temporal_model.dim(),
            });
        }
        if spatial_scores.is_empty() {
            return Err(Error::Calibration("profile has no spatial calibration scores".into()));
        }
        if temporal_scores.len() > spatial_scores.len() {
            return Err(Error::Calibration(format!(
                "{} temporal scores exceed {} calibration videos",
                temporal_scores.len(),
                spatial_scores.len()
            )));
        }
        if spatial_scores.iter().chain(&temporal_scores).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                location: "calibration scores".into(),
            });
        }
        spatial_scores.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        temporal_scores.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        Ok(Self {
            spatial_model,
            temporal_model,
            spatial_scores,
            temporal_scores,
            config,
            rng_seed,
        })
    }

    pub fn dim(&self) -> usize {
        self.spatial_model.dim()
    }

    pub fn spatial_model(&self) -> &WhiteningModel<T> {
        &self.spatial_model
    }

    pub fn temporal_model(&self) -> &WhiteningModel<T> {
        &self.temporal_model
    }

    /// Sorted ascending; one entry per calibration video.
    pub fn spatial_scores(&self) -> &[T] {
        &self.spatial_scores
    }

    /// Sorted ascending; videos without any nonzero transition are absent.
    pub fn temporal_scores(&self) -> &[T] {
        &self.temporal_scores
    }

    pub fn n_videos(&self) -> usize {
        self.spatial_scores.len()
    }

    pub fn n_temporal(&self) -> usize {
        self.temporal_scores.len()
    }

    pub fn config(&self) -> &CalibrationConfig {
        &self.config
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    /// Same profile at another precision. Rounding is monotone, so the score
    /// lists stay sorted.
    pub fn cast<U: Scalar>(&self) -> CalibrationProfile<U> {
        let conv = |v: &T| U::lit(v.to_f64_lossless());
        CalibrationProfile {
            spatial_model: self.spatial_model.cast(),
            temporal_model: self.temporal_model.cast(),
            spatial_scores: self.spatial_scores.iter().map(conv).collect(),
            temporal_scores: self.temporal_scores.iter().map(conv).collect(),
            config: self.config,
            rng_seed: self.rng_seed,
        }
    }
}

/// Branch scores of one video under a pair of models.
pub(crate) struct VideoScores<T> {
    pub spatial: T,
    pub temporal: Option<T>,
}

pub(crate) fn video_scores<T: Scalar>(
    frames: &Array2<T>,
    transitions: &Transitions<T>,
    spatial_model: &WhiteningModel<T>,
    temporal_model: &WhiteningModel<T>,
    config: &CalibrationConfig,
) -> Result<VideoScores<T>> {
    let spatial_ll = row_log_likelihoods(spatial_model.whiten_rows(frames.view())?.view());
    let spatial = aggregate(&spatial_ll, config.spatial_agg)?;
    let temporal = if transitions.vectors.nrows() == 0 {
        None
    } else {
        let ll = row_log_likelihoods(temporal_model.whiten_rows(transitions.vectors.view())?.view());
        Some(aggregate(&ll, config.temporal_agg)?)
    };
    Ok(VideoScores { spatial, temporal })
}

const SCORE_CHUNK: usize = 64;

/// [`video_scores`] for several videos at once: rows of all videos are
/// centered into one buffer per branch so each model needs a single matrix
/// product. Results are identical to scoring the videos one by one.
fn stacked_scores<T: Scalar>(
    videos: &[(Array2<T>, Transitions<T>)],
    spatial_model: &WhiteningModel<T>,
    temporal_model: &WhiteningModel<T>,
    config: &CalibrationConfig,
) -> Result<Vec<VideoScores<T>>> {
    let stack = |model: &WhiteningModel<T>, parts: Vec<&Array2<T>>| -> Result<Vec<T>> {
        let rows: usize = parts.iter().map(|p| p.nrows()).sum();
        if rows == 0 {
            return Ok(Vec::new());
        }
        let mut buf = Array2::<T>::zeros((rows, model.dim()));
        let mut r = 0;
        for p in parts {
            for src in p.rows() {
                for ((dst, &x), &m) in buf.row_mut(r).iter_mut().zip(src).zip(model.mean()) {
                    *dst = x - m;
                }
                r += 1;
            }
        }
        Ok(row_log_likelihoods(model.whiten_centered_rows(buf.view())?.view()))
    };
    let sp = stack(spatial_model, videos.iter().map(|(f, _)| f).collect())?;
    let tp = stack(temporal_model, videos.iter().map(|(_, t)| &t.vectors).collect())?;
    let (mut fr, mut tr) = (0, 0);
    videos
        .iter()
        .map(|(frames, trans)| {
            let (nf, nt) = (frames.nrows(), trans.vectors.nrows());
            let spatial = aggregate(&sp[fr..fr + nf], config.spatial_agg)?;
            let temporal = if nt > 0 {
                Some(aggregate(&tp[tr..tr + nt], config.temporal_agg)?)
            } else {
                None
            };
            fr += nf;
            tr += nt;
            Ok(VideoScores { spatial, temporal })
        })
        .collect()
}

/// Transitions of a video, or an empty set when it is too short to have any.
pub(crate) fn transitions_or_empty<T: Scalar>(
    seq: &EmbeddingSequence,
    options: &TemporalOptions,
) -> Result<Transitions<T>> {
    if options.transition_count(seq.num_frames()).is_none() {
        return Ok(Transitions {
            vectors: Array2::zeros((0, seq.dim())),
            retained: Vec::new(),
            discarded_count: 0,
        });
    }
    transitions(seq, options)
}

/// Builds a profile from real videos. Deterministic for a fixed seed and
/// input order regardless of the rayon pool size.
pub fn calibrate<T: Scalar>(
    videos: &[EmbeddingSequence],
    config: &CalibrationConfig,
    rng_seed: u64,
) -> Result<CalibrationProfile<T>> {
    config.temporal.validate()?;
    if videos.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "calibration needs at least 2 videos, got {}",
            videos.len()
        )));
    }
    if let Some(v) = videos.iter().find(|v| v.label() != Label::Real) {
        return Err(Error::Calibration(format!(
            "video {:?} is labeled {}; calibration accepts only real videos",
            v.video_id(),
            v.label()
        )));
    }
    let dim = videos[0].dim();
    if let Some(v) = videos.iter().find(|v| v.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: v.dim(),
        });
    }

    let per_video: Vec<(Array2<T>, Transitions<T>)> = videos
        .par_iter()
        .map(|v| Ok((v.frames_as::<T>(), transitions_or_empty::<T>(v, &config.temporal)?)))
        .collect::<Result<_>>()?;

    let mut spatial_samples = Array2::<T>::zeros((videos.len(), dim));
    for (i, ((frames, _), mut row)) in per_video.iter().zip(spatial_samples.rows_mut()).enumerate() {
        let mut rng = seed::rng(rng_seed, &[tag::SPATIAL_FRAME, i as u64]);
        let t = rng.random_range(0..frames.nrows());
        row.assign(&frames.row(t));
    }

    let temporal_rows: Vec<_> = match config.temporal_fit {
        TemporalFit::AllTransitions => per_video
            .iter()
            .flat_map(|(_, tr)| tr.vectors.axis_iter(Axis(0)))
            .collect(),
        TemporalFit::SingleTransition => per_video
            .iter()
            .enumerate()
            .filter(|(_, (_, tr))| tr.vectors.nrows() > 0)
            .map(|(i, (_, tr))| {
                let mut rng = seed::rng(rng_seed, &[tag::TEMPORAL_PICK, i as u64]);
                tr.vectors.row(rng.random_range(0..tr.vectors.nrows()))
            })
            .collect(),
    };
    if temporal_rows.len() < 2 {
        return Err(Error::Calibration(format!(
            "corpus yields {} nonzero transitions; the temporal model needs at least 2",
            temporal_rows.len()
        )));
    }
    let temporal_samples = ndarray::stack(Axis(0), &temporal_rows).expect("rows share a dimension");
    drop(temporal_rows);

    let fit = FitOptions {
        floor: config.floor,
        parallel: false,
    };
    let spatial_model = WhiteningModel::fit(spatial_samples.view(), &fit)?;
    let temporal_model = WhiteningModel::fit(temporal_samples.view(), &fit)?;
    log::debug!(
        "calibration: {} videos, {} spatial samples, {} temporal samples",
        videos.len(),
        spatial_samples.nrows(),
        temporal_samples.nrows()
    );

    let scores: Vec<VideoScores<T>> = per_video
        .par_chunks(SCORE_CHUNK)
        .map(|chunk| stacked_scores(chunk, &spatial_model, &temporal_model, config))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let spatial_scores = scores.iter().map(|s| s.spatial).collect();
    let temporal_scores = scores.iter().filter_map(|s| s.temporal).collect();

    CalibrationProfile::from_parts(
        spatial_model,
        temporal_model,
        spatial_scores,
        temporal_scores,
        *config,
        rng_seed,
    )
}

/// Loads every manifest entry, standardizes frame rate and length, and
/// calibrates. Labels are checked before any file is opened.
pub fn calibrate_manifest<T: Scalar>(
    manifest: &DatasetManifest,
    config: &CalibrationConfig,
    rng_seed: u64,
    target_fps: Option<f64>,
    max_frames: Option<usize>,
) -> Result<CalibrationProfile<T>> {
    if manifest.is_empty() {
        return Err(Error::InsufficientData("calibration manifest is empty".into()));
    }
    if let Some(e) = manifest.entries.iter().find(|e| e.label != Label::Real) {
        return Err(Error::Calibration(format!(
            "manifest entry {:?} is labeled {}; calibration accepts only real videos",
            e.video_id, e.label
        )));
    }
    let videos: Vec<EmbeddingSequence> = manifest
        .entries
        .par_iter()
        .map(|e| manifest.load(e)?.standardize(target_fps, max_frames))
        .collect::<Result<_>>()?;
    calibrate(&videos, config, rng_seed)
}
