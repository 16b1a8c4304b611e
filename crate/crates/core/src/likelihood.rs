//! Spatial and temporal log-likelihoods under an isotropic standard normal
//! in whitened coordinates: `ℓ(y) = −½ (d·ln 2π + ‖y‖²)`.

use std::fmt;
use std::str::FromStr;

use ndarray::{s, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::embedseq::EmbeddingSequence;
use crate::error::{Error, Result};
use crate::scalar::{ln_two_pi, Scalar};
use crate::whitening::WhiteningModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    Min,
    Max,
    Mean,
}

impl Aggregation {
    pub(crate) fn code(self) -> u8 {
        match self {
            Aggregation::Min => 0,
            Aggregation::Max => 1,
            Aggregation::Mean => 2,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Aggregation::Min),
            1 => Some(Aggregation::Max),
            2 => Some(Aggregation::Mean),
            _ => None,
        }
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregation::Min => "min",
            Aggregation::Max => "max",
            Aggregation::Mean => "mean",
        })
    }
}

impl FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(Aggregation::Min),
            "max" => Ok(Aggregation::Max),
            "mean" => Ok(Aggregation::Mean),
            other => Err(Error::InvalidArgument(format!("unknown aggregation {other:?}"))),
        }
    }
}

/// How transitions are formed from a frame sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemporalOptions {
    /// Number of finite-difference passes.
    pub derivative_order: usize,
    /// Frame stride: differences are taken on every `step`-th frame.
    pub step: usize,
    /// Transitions whose norm is at or below this are discarded as zero.
    pub norm_floor: f64,
}

impl Default for TemporalOptions {
    fn default() -> Self {
        Self {
            derivative_order: 1,
            step: 1,
            norm_floor: 1e-12,
        }
    }
}

impl TemporalOptions {
    pub fn validate(&self) -> Result<()> {
        if self.derivative_order == 0 {
            return Err(Error::InvalidArgument("derivative order must be at least 1".into()));
        }
        if self.step == 0 {
            return Err(Error::InvalidArgument("step must be at least 1".into()));
        }
        if !(self.norm_floor.is_finite() && self.norm_floor >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "norm floor must be nonnegative, got {}",
                self.norm_floor
            )));
        }
        Ok(())
    }

    /// Number of transitions a `num_frames`-frame sequence yields, or `None`
    /// if it is too short.
    pub fn transition_count(&self, num_frames: usize) -> Option<usize> {
        let strided = num_frames.div_ceil(self.step);
        strided.checked_sub(self.derivative_order).filter(|&c| c > 0)
    }
}

/// Per-frame spatial log-likelihoods.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameLikelihoods<T> {
    pub values: Vec<T>,
}

/// Per-transition temporal log-likelihoods over the retained transitions.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionLikelihoods<T> {
    pub values: Vec<T>,
    pub discarded_count: usize,
    pub derivative_order: usize,
}

/// Normalized transition vectors, one per row, plus the bookkeeping for
/// those dropped as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Transitions<T> {
    pub vectors: Array2<T>,
    /// Position of each retained row among all transitions.
    pub retained: Vec<usize>,
    pub discarded_count: usize,
}

#[inline]
pub(crate) fn log_likelihood_from_sq_norm<T: Scalar>(sq_norm: T, dim: usize) -> T {
    let d = T::from_usize(dim).expect("dimension fits the scalar type");
    -T::lit(0.5) * (d * ln_two_pi::<T>() + sq_norm)
}

pub fn log_likelihood<T: Scalar>(y: ArrayView1<'_, T>) -> Result<T> {
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            location: "whitened vector".into(),
        });
    }
    let sq = y.iter().fold(T::zero(), |acc, &v| acc + v * v);
    Ok(log_likelihood_from_sq_norm(sq, y.len()))
}

/// `ℓ` of every row of an already whitened matrix.
pub(crate) fn row_log_likelihoods<T: Scalar>(whitened: ArrayView2<'_, T>) -> Vec<T> {
    let d = whitened.ncols();
    whitened
        .axis_iter(Axis(0))
        .map(|row| log_likelihood_from_sq_norm(row.iter().fold(T::zero(), |acc, &v| acc + v * v), d))
        .collect()
}

pub fn spatial_scores<T: Scalar>(
    seq: &EmbeddingSequence,
    model: &WhiteningModel<T>,
) -> Result<FrameLikelihoods<T>> {
    let whitened = model.whiten_rows(seq.frames_as::<T>().view())?;
    Ok(FrameLikelihoods {
        values: row_log_likelihoods(whitened.view()),
    })
}

pub fn transitions<T: Scalar>(seq: &EmbeddingSequence, options: &TemporalOptions) -> Result<Transitions<T>> {
    transitions_from_frames(seq.frames_as::<T>().view(), options)
}

/// Finite differences of the given order on the `step`-strided frames,
/// with zero transitions dropped and the rest scaled to unit length.
pub fn transitions_from_frames<T: Scalar>(
    frames: ArrayView2<'_, T>,
    options: &TemporalOptions,
) -> Result<Transitions<T>> {
    options.validate()?;
    let t = frames.nrows();
    if options.transition_count(t).is_none() {
        return Err(Error::InsufficientData(format!(
            "{t} frames are too few for derivative order {} at step {}",
            options.derivative_order, options.step
        )));
    }
    let mut diff = frames.slice(s![..;options.step, ..]).to_owned();
    for _ in 0..options.derivative_order {
        let n = diff.nrows();
        diff = &diff.slice(s![1..n, ..]) - &diff.slice(s![0..n - 1, ..]);
    }

    let floor = T::lit(options.norm_floor);
    let mut retained = Vec::with_capacity(diff.nrows());
    let mut norms = Vec::with_capacity(diff.nrows());
    for (i, row) in diff.axis_iter(Axis(0)).enumerate() {
        if row.iter().all(|&v| v == T::zero()) {
            continue;
        }
        let norm = row.iter().fold(T::zero(), |acc, &v| acc + v * v).sqrt();
        if norm <= floor {
            continue;
        }
        retained.push(i);
        norms.push(norm);
    }
    let discarded_count = diff.nrows() - retained.len();
    let mut vectors = diff.select(Axis(0), &retained);
    for (mut row, &norm) in vectors.axis_iter_mut(Axis(0)).zip(&norms) {
        row.mapv_inplace(|v| v / norm);
    }
    Ok(Transitions {
        vectors,
        retained,
        discarded_count,
    })
}

/// Log-likelihoods of the whitened, normalized transitions. A sequence whose
/// transitions are all zero yields no values; callers fall back to the
/// spatial branch.
pub fn temporal_scores<T: Scalar>(
    seq: &EmbeddingSequence,
    model: &WhiteningModel<T>,
    options: &TemporalOptions,
) -> Result<TransitionLikelihoods<T>> {
    if seq.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: seq.dim(),
        });
    }
    let tr = transitions::<T>(seq, options)?;
    let values = if tr.vectors.nrows() == 0 {
        Vec::new()
    } else {
        row_log_likelihoods(model.whiten_rows(tr.vectors.view())?.view())
    };
    Ok(TransitionLikelihoods {
        values,
        discarded_count: tr.discarded_count,
        derivative_order: options.derivative_order,
    })
}

pub fn aggregate<T: Scalar>(values: &[T], op: Aggregation) -> Result<T> {
    let (&first, rest) = values
        .split_first()
        .ok_or_else(|| Error::InsufficientData("cannot aggregate an empty list".into()))?;
    Ok(match op {
        Aggregation::Min => rest.iter().fold(first, |a, &b| a.min(b)),
        Aggregation::Max => rest.iter().fold(first, |a, &b| a.max(b)),
        Aggregation::Mean => {
            let n = T::from_usize(values.len()).expect("length fits the scalar type");
            values.iter().copied().sum::<T>() / n
        }
    })
}
