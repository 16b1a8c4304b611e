//! Correlation helpers and configuration sweeps over a fixed corpus.

use rayon::prelude::*;

use crate::calibration::{calibrate, CalibrationConfig};
use crate::embedseq::EmbeddingSequence;
use crate::error::{Error, Result};
use crate::likelihood::Aggregation;
use crate::scoring::{score_sequences, Fusion, ScoreRecord};

use super::metrics::{evaluate, labeled_from_records, Branch, EvalResult};

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData("correlation needs at least 2 points".into()));
    }
    Ok(())
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("correlation of a constant series".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Ranks starting at 1, ties sharing their mean rank.
pub fn midranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && x[idx[j]] == x[idx[i]] {
            j += 1;
        }
        let r = (i + 1 + j) as f64 / 2.0;
        for &k in &idx[i..j] {
            ranks[k] = r;
        }
        i = j;
    }
    ranks
}

pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    pearson(&midranks(x), &midranks(y))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Setting {
    pub name: String,
    pub config: CalibrationConfig,
    pub fusion: Fusion,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub setting: Setting,
    pub records: Vec<ScoreRecord<f64>>,
    pub unified: EvalResult,
    pub spatial: EvalResult,
    pub temporal: EvalResult,
}

impl SweepResult {
    pub fn s_video(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.s_video).collect()
    }
}

/// Calibrates on `calibration` and scores `test` under one setting.
pub fn run_setting(
    calibration: &[EmbeddingSequence],
    test: &[EmbeddingSequence],
    setting: &Setting,
    seed: u64,
) -> Result<SweepResult> {
    let profile = calibrate::<f64>(calibration, &setting.config, seed)?;
    let records = score_sequences(test, &profile, setting.fusion)
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let eval = |branch| evaluate(&labeled_from_records(&records, branch), &setting.name, None);
    Ok(SweepResult {
        unified: eval(Branch::Unified)?,
        spatial: eval(Branch::Spatial)?,
        temporal: eval(Branch::Temporal)?,
        setting: setting.clone(),
        records,
    })
}

pub fn sweep(
    calibration: &[EmbeddingSequence],
    test: &[EmbeddingSequence],
    settings: &[Setting],
    seed: u64,
) -> Result<Vec<SweepResult>> {
    settings
        .par_iter()
        .map(|s| run_setting(calibration, test, s, seed))
        .collect()
}

pub fn derivative_order_settings(base: &CalibrationConfig, fusion: Fusion, orders: &[usize]) -> Vec<Setting> {
    orders
        .iter()
        .map(|&order| {
            let mut config = *base;
            config.temporal.derivative_order = order;
            Setting {
                name: format!("order_{order}"),
                config,
                fusion,
            }
        })
        .collect()
}

pub fn step_settings(base: &CalibrationConfig, fusion: Fusion, steps: &[usize]) -> Vec<Setting> {
    steps
        .iter()
        .map(|&step| {
            let mut config = *base;
            config.temporal.step = step;
            Setting {
                name: format!("step_{step}"),
                config,
                fusion,
            }
        })
        .collect()
}

/// Every (spatial, temporal) aggregation pair.
pub fn aggregation_settings(base: &CalibrationConfig, fusion: Fusion) -> Vec<Setting> {
    let ops = [Aggregation::Min, Aggregation::Mean, Aggregation::Max];
    ops.iter()
        .flat_map(|&sp| {
            ops.iter().map(move |&tp| {
                let mut config = *base;
                config.spatial_agg = sp;
                config.temporal_agg = tp;
                Setting {
                    name: format!("spatial_{sp}_temporal_{tp}"),
                    config,
                    fusion,
                }
            })
        })
        .collect()
}

pub fn fusion_settings(base: &CalibrationConfig) -> Vec<Setting> {
    [Fusion::Mean, Fusion::Product]
        .into_iter()
        .map(|fusion| Setting {
            name: format!("fusion_{fusion}"),
            config: *base,
            fusion,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn correlation_values() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!((pearson(&x, &[2.0, 4.0, 6.0, 8.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&x, &[4.0, 3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
        assert!((spearman(&x, &[1.0, 10.0, 100.0, 1000.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!(pearson(&x, &[1.0; 4]).is_err());
        assert!(pearson(&x, &[1.0; 3]).is_err());
    }

    #[test]
    fn midrank_ties() {
        assert_eq!(midranks(&[3.0, 1.0, 3.0, 2.0]), [3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn setting_builders() {
        let base = CalibrationConfig::default();
        assert_eq!(derivative_order_settings(&base, Fusion::Mean, &[1, 2, 3, 4]).len(), 4);
        assert_eq!(aggregation_settings(&base, Fusion::Mean).len(), 9);
        let f = fusion_settings(&base);
        assert_eq!(f[1].fusion, Fusion::Product);
        assert_eq!(step_settings(&base, Fusion::Mean, &[2])[0].config.temporal.step, 2);
    }
}
