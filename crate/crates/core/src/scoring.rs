//! Inference: branch scores, rank percentiles and the fused realness score.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::{transitions_or_empty, video_scores, CalibrationProfile};
use crate::embedseq::{DatasetManifest, EmbeddingSequence, Label};
use crate::error::{Error, Result};
use crate::likelihood::{aggregate, row_log_likelihoods, Transitions};
use crate::scalar::Scalar;

/// How the two branch percentiles are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Fusion {
    #[default]
    Mean,
    Product,
}

impl Fusion {
    pub fn combine(self, spatial: f64, temporal: f64) -> f64 {
        match self {
            Fusion::Mean => 0.5 * (spatial + temporal),
            Fusion::Product => spatial * temporal,
        }
    }
}

impl fmt::Display for Fusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Fusion::Mean => "mean",
            Fusion::Product => "product",
        })
    }
}

impl FromStr for Fusion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Fusion::Mean),
            "product" => Ok(Fusion::Product),
            other => Err(Error::InvalidArgument(format!("unknown fusion {other:?}"))),
        }
    }
}

/// Scores of one video. `s_video` is a realness score: higher means closer
/// to the real calibration videos.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRecord<T> {
    pub video_id: String,
    pub label: Label,
    pub generator: Option<String>,
    pub s_spatial: T,
    pub s_temporal: Option<T>,
    pub perc_spatial: f64,
    pub perc_temporal: Option<f64>,
    pub s_video: f64,
    /// No transition survived, so `s_video == perc_spatial`.
    pub fallback_spatial_only: bool,
    pub fusion: Fusion,
}

/// Fraction of calibration scores `<= s`. `sorted` must be ascending.
pub fn percentile<T: PartialOrd>(sorted: &[T], s: T) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::InsufficientData("empty calibration score list".into()));
    }
    let count = sorted.partition_point(|v| *v <= s);
    Ok(count as f64 / sorted.len() as f64)
}

fn check_dim<T: Scalar>(seq: &EmbeddingSequence, profile: &CalibrationProfile<T>) -> Result<()> {
    if seq.dim() != profile.dim() {
        return Err(Error::DimensionMismatch {
            expected: profile.dim(),
            found: seq.dim(),
        });
    }
    Ok(())
}

fn make_record<T: Scalar>(
    seq: &EmbeddingSequence,
    profile: &CalibrationProfile<T>,
    fusion: Fusion,
    s_spatial: T,
    s_temporal: Option<T>,
) -> Result<ScoreRecord<T>> {
    let perc_spatial = percentile(profile.spatial_scores(), s_spatial)?;
    let perc_temporal = match s_temporal {
        Some(s) => Some(percentile(profile.temporal_scores(), s).map_err(|_| {
            Error::Calibration(
                "video has transitions but the profile holds no temporal calibration scores".into(),
            )
        })?),
        None => None,
    };
    let s_video = match perc_temporal {
        Some(pt) => fusion.combine(perc_spatial, pt),
        None => perc_spatial,
    };
    Ok(ScoreRecord {
        video_id: seq.video_id().to_owned(),
        label: seq.label(),
        generator: seq.generator().map(str::to_owned),
        s_spatial,
        s_temporal,
        perc_spatial,
        perc_temporal,
        s_video,
        fallback_spatial_only: perc_temporal.is_none(),
        fusion,
    })
}

pub fn score_video<T: Scalar>(
    seq: &EmbeddingSequence,
    profile: &CalibrationProfile<T>,
    fusion: Fusion,
) -> Result<ScoreRecord<T>> {
    check_dim(seq, profile)?;
    let frames = seq.frames_as::<T>();
    let tr = transitions_or_empty::<T>(seq, &profile.config().temporal)?;
    let scores = video_scores(
        &frames,
        &tr,
        profile.spatial_model(),
        profile.temporal_model(),
        profile.config(),
    )?;
    make_record(seq, profile, fusion, scores.spatial, scores.temporal)
}

const CHUNK_VIDEOS: usize = 64;

/// Scores many in-memory sequences. Videos are whitened in stacked chunks so
/// the matrix products run on tall operands; output order matches input.
pub fn score_sequences<T: Scalar>(
    seqs: &[EmbeddingSequence],
    profile: &CalibrationProfile<T>,
    fusion: Fusion,
) -> Vec<Result<ScoreRecord<T>>> {
    seqs.par_chunks(CHUNK_VIDEOS)
        .flat_map_iter(|chunk| score_chunk(chunk, profile, fusion))
        .collect()
}

fn score_chunk<T: Scalar>(
    chunk: &[EmbeddingSequence],
    profile: &CalibrationProfile<T>,
    fusion: Fusion,
) -> Vec<Result<ScoreRecord<T>>> {
    let d = profile.dim();
    let config = profile.config();
    let prepared: Vec<Result<Transitions<T>>> = chunk
        .iter()
        .map(|seq| {
            check_dim(seq, profile)?;
            transitions_or_empty::<T>(seq, &config.temporal)
        })
        .collect();

    let ok: Vec<usize> = (0..chunk.len()).filter(|&i| prepared[i].is_ok()).collect();
    let frame_rows: usize = ok.iter().map(|&i| chunk[i].num_frames()).sum();
    let trans_rows: usize = ok
        .iter()
        .map(|&i| prepared[i].as_ref().map(|t| t.vectors.nrows()).unwrap_or(0))
        .sum();

    // Rows are centered while stacking, which is the same arithmetic as
    // `whiten_rows` without a second full-size buffer.
    let (sp_mean, tp_mean) = (profile.spatial_model().mean(), profile.temporal_model().mean());
    let mut frames = Array2::<T>::zeros((frame_rows, d));
    let mut trans = Array2::<T>::zeros((trans_rows, d));
    let (mut fr, mut tr_row) = (0, 0);
    for &i in &ok {
        for src in chunk[i].frames().rows() {
            for ((dst, &x), &m) in frames.row_mut(fr).iter_mut().zip(src).zip(sp_mean) {
                *dst = T::from_f32_exact(x) - m;
            }
            fr += 1;
        }
        for src in prepared[i].as_ref().expect("filtered").vectors.rows() {
            for ((dst, &x), &m) in trans.row_mut(tr_row).iter_mut().zip(src).zip(tp_mean) {
                *dst = x - m;
            }
            tr_row += 1;
        }
    }

    let whitened = (|| -> Result<(Vec<T>, Vec<T>)> {
        let sp = row_log_likelihoods(profile.spatial_model().whiten_centered_rows(frames.view())?.view());
        let tp = if trans_rows > 0 {
            row_log_likelihoods(profile.temporal_model().whiten_centered_rows(trans.view())?.view())
        } else {
            Vec::new()
        };
        Ok((sp, tp))
    })();
    let (spatial_ll, temporal_ll) = match whitened {
        Ok(v) => v,
        Err(e) => {
            let msg = e.to_string();
            return chunk
                .iter()
                .map(|_| Err(Error::Calibration(msg.clone())))
                .collect();
        }
    };

    let (mut fr, mut tr_row) = (0, 0);
    chunk
        .iter()
        .zip(prepared)
        .map(|(seq, prep)| {
            let tr = prep?;
            let t = seq.num_frames();
            let n_tr = tr.vectors.nrows();
            let spatial = aggregate(&spatial_ll[fr..fr + t], config.spatial_agg)?;
            let temporal = if n_tr > 0 {
                Some(aggregate(&temporal_ll[tr_row..tr_row + n_tr], config.temporal_agg)?)
            } else {
                None
            };
            fr += t;
            tr_row += n_tr;
            make_record(seq, profile, fusion, spatial, temporal)
        })
        .collect()
}

/// A manifest entry that could not be scored.
#[derive(Debug)]
pub struct EntryError {
    pub video_id: String,
    pub error: Error,
}

/// Scores every manifest entry on a pool of `jobs` workers. Failures are
/// reported per entry; output order follows the manifest.
pub fn score_batch<T: Scalar>(
    manifest: &DatasetManifest,
    profile: &CalibrationProfile<T>,
    fusion: Fusion,
    jobs: usize,
    target_fps: Option<f64>,
    max_frames: Option<usize>,
) -> Result<Vec<std::result::Result<ScoreRecord<T>, EntryError>>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(|| {
        let loaded: Vec<Result<EmbeddingSequence>> = manifest
            .entries
            .par_iter()
            .map(|e| manifest.load(e)?.standardize(target_fps, max_frames))
            .collect();
        let good: Vec<EmbeddingSequence> = loaded.iter().filter_map(|r| r.as_ref().ok().cloned()).collect();
        let mut scored = score_sequences(&good, profile, fusion).into_iter();
        manifest
            .entries
            .iter()
            .zip(loaded)
            .map(|(entry, load)| {
                let res = match load {
                    Ok(_) => scored.next().expect("one result per loaded sequence"),
                    Err(e) => Err(e),
                };
                res.map_err(|error| EntryError {
                    video_id: entry.video_id.clone(),
                    error,
                })
            })
            .collect()
    }))
}

fn opt_num<T: fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub const SCORE_CSV_HEADER: [&str; 9] = [
    "video_id",
    "label",
    "generator",
    "s_spatial",
    "s_temporal",
    "perc_spatial",
    "perc_temporal",
    "s_video",
    "fallback",
];

/// Writes records as CSV. Numbers use the shortest round-trip decimal form;
/// absent values are empty fields.
pub fn write_scores_csv<T: Scalar>(records: &[ScoreRecord<T>], writer: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SCORE_CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.video_id.clone(),
            r.label.to_string(),
            r.generator.clone().unwrap_or_default(),
            r.s_spatial.to_string(),
            opt_num(r.s_temporal),
            r.perc_spatial.to_string(),
            opt_num(r.perc_temporal),
            r.s_video.to_string(),
            r.fallback_spatial_only.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<scores>", e))?;
    Ok(())
}

/// One row of a score CSV, as needed for evaluation.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ScoreRow {
    pub video_id: String,
    pub label: Label,
    pub generator: Option<String>,
    pub s_spatial: f64,
    pub s_temporal: Option<f64>,
    pub perc_spatial: f64,
    pub perc_temporal: Option<f64>,
    pub s_video: f64,
    pub fallback: bool,
}

pub fn read_scores_csv(path: impl AsRef<Path>) -> Result<Vec<ScoreRow>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}
