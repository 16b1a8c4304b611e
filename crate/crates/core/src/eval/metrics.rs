//! AUC and average precision with "generated" as the positive class.

use std::cmp::Ordering;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::embedseq::Label;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::scoring::{ScoreRecord, ScoreRow};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledScore {
    pub video_id: String,
    /// Higher means more likely generated.
    pub detection_score: f64,
    pub label: Label,
    pub generator: Option<String>,
}

/// Which score a [`LabeledScore`] is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Unified,
    Spatial,
    /// Falls back to the spatial percentile when a video has no transitions.
    Temporal,
}

pub fn labeled_from_records<T: Scalar>(records: &[ScoreRecord<T>], branch: Branch) -> Vec<LabeledScore> {
    records
        .iter()
        .map(|r| {
            let realness = match branch {
                Branch::Unified => r.s_video,
                Branch::Spatial => r.perc_spatial,
                Branch::Temporal => r.perc_temporal.unwrap_or(r.perc_spatial),
            };
            LabeledScore {
                video_id: r.video_id.clone(),
                detection_score: 1.0 - realness,
                label: r.label,
                generator: r.generator.clone(),
            }
        })
        .collect()
}

pub fn labeled_from_rows(rows: &[ScoreRow]) -> Vec<LabeledScore> {
    rows.iter()
        .map(|r| LabeledScore {
            video_id: r.video_id.clone(),
            detection_score: 1.0 - r.s_video,
            label: r.label,
            generator: r.generator.clone(),
        })
        .collect()
}

fn class_counts(scores: &[LabeledScore]) -> Result<(usize, usize)> {
    let mut pos = 0;
    let mut neg = 0;
    for s in scores {
        match s.label {
            Label::Generated => pos += 1,
            Label::Real => neg += 1,
            Label::Unknown => {
                return Err(Error::InvalidArgument(format!(
                    "video {} has no label; metrics need real or generated",
                    s.video_id
                )))
            }
        }
        if !s.detection_score.is_finite() {
            return Err(Error::NonFinite {
                location: format!("detection score of {}", s.video_id),
            });
        }
    }
    Ok((pos, neg))
}

/// Area under the ROC curve: P(generated > real) + ½P(tie), via midranks.
pub fn auc(scores: &[LabeledScore]) -> Result<f64> {
    let (pos, neg) = class_counts(scores)?;
    if pos == 0 || neg == 0 {
        return Err(Error::InsufficientData("auc needs both real and generated videos".into()));
    }
    let mut order: Vec<&LabeledScore> = scores.iter().collect();
    order.sort_by(|a, b| a.detection_score.total_cmp(&b.detection_score));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && order[j].detection_score == order[i].detection_score {
            j += 1;
        }
        // Ranks i+1..=j share their mean.
        let midrank = (i + 1 + j) as f64 / 2.0;
        let positives = order[i..j].iter().filter(|s| s.label == Label::Generated).count();
        rank_sum += midrank * positives as f64;
        i = j;
    }
    let (p, n) = (pos as f64, neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

fn ap_order(a: &LabeledScore, b: &LabeledScore) -> Ordering {
    b.detection_score
        .total_cmp(&a.detection_score)
        .then_with(|| a.video_id.cmp(&b.video_id))
}

/// Step-wise average precision. Ties are ordered by `video_id` ascending.
pub fn average_precision(scores: &[LabeledScore]) -> Result<f64> {
    let (pos, _) = class_counts(scores)?;
    if pos == 0 {
        return Err(Error::InsufficientData("average precision needs a generated video".into()));
    }
    let mut order: Vec<&LabeledScore> = scores.iter().collect();
    order.sort_by(|a, b| ap_order(a, b));
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (rank, s) in order.iter().enumerate() {
        if s.label == Label::Generated {
            hits += 1;
            sum += hits as f64 / (rank + 1) as f64;
        }
    }
    Ok(sum / pos as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub benchmark: String,
    pub generator: Option<String>,
    pub n_real: usize,
    pub n_generated: usize,
    pub auc: f64,
    pub ap: f64,
}

pub fn evaluate(scores: &[LabeledScore], benchmark: &str, generator: Option<&str>) -> Result<EvalResult> {
    let (n_generated, n_real) = class_counts(scores)?;
    Ok(EvalResult {
        benchmark: benchmark.to_owned(),
        generator: generator.map(str::to_owned),
        n_real,
        n_generated,
        auc: auc(scores)?,
        ap: average_precision(scores)?,
    })
}

pub const AVERAGE_ROW: &str = "average";

/// One row per result plus a trailing unweighted average row.
pub fn write_eval_csv(results: &[EvalResult], writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["benchmark", "generator", "n_real", "n_generated", "auc", "ap"])?;
    for r in results {
        w.write_record([
            r.benchmark.clone(),
            r.generator.clone().unwrap_or_default(),
            r.n_real.to_string(),
            r.n_generated.to_string(),
            r.auc.to_string(),
            r.ap.to_string(),
        ])?;
    }
    if !results.is_empty() {
        let k = results.len() as f64;
        let benchmark = if results.iter().all(|r| r.benchmark == results[0].benchmark) {
            results[0].benchmark.clone()
        } else {
            AVERAGE_ROW.to_owned()
        };
        w.write_record([
            benchmark,
            AVERAGE_ROW.to_owned(),
            results.iter().map(|r| r.n_real).sum::<usize>().to_string(),
            results.iter().map(|r| r.n_generated).sum::<usize>().to_string(),
            (results.iter().map(|r| r.auc).sum::<f64>() / k).to_string(),
            (results.iter().map(|r| r.ap).sum::<f64>() / k).to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<eval>", e))?;
    Ok(())
}

/// Long format: one `benchmark,generator,metric,value` row per number.
pub fn write_eval_long_csv(results: &[EvalResult], writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["benchmark", "generator", "metric", "value"])?;
    for r in results {
        let g = r.generator.clone().unwrap_or_default();
        for (metric, value) in [("auc", r.auc), ("ap", r.ap)] {
            w.write_record([r.benchmark.as_str(), g.as_str(), metric, &value.to_string()])?;
        }
    }
    w.flush().map_err(|e| Error::io("<eval>", e))?;
    Ok(())
}
