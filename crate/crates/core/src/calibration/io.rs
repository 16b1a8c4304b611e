//! `STALLCAL` profile files.
//!
//! ```text
//! offset  size    field
//! 0       8       magic "STALLCAL"
//! 8       2       version (u16, = 1)
//! 10      2       reserved (u16, = 0)
//! 12      4       d (u32)
//! 16      4       n, calibration videos (u32)
//! 20      4       n_temp, videos with a temporal score (u32)
//! 24      72      config block:
//!                   derivative_order u32, step u32,
//!                   spatial_agg u8, temporal_agg u8, temporal_fit u8, floor_kind u8,
//!                   reserved u32,
//!                   floor_value f64, norm_floor f64, rng_seed u64,
//!                   spatial sample_count u64, temporal sample_count u64,
//!                   spatial applied floor f64, temporal applied floor f64
//! 96      ...     μ (d f64), W (d·d f64, row-major), eigenvalues (d f64),
//!                 μ_Δ, W_Δ, eigenvalues_Δ (same layout),
//!                 sorted spatial scores (n f64), sorted temporal scores (n_temp f64)
//! ```
//!
//! Little-endian throughout. Aggregation codes: 0 min, 1 max, 2 mean.
//! Temporal fit: 0 all transitions, 1 single transition. Floor kind:
//! 0 relative, 1 absolute.

use std::path::Path;

use ndarray::{Array1, Array2};

use super::{CalibrationConfig, CalibrationProfile, TemporalFit};
use crate::error::{Error, Result};
use crate::likelihood::{Aggregation, TemporalOptions};
use crate::scalar::Scalar;
use crate::whitening::{EigenFloor, WhiteningModel};

pub const PROFILE_MAGIC: &[u8; 8] = b"STALLCAL";
pub const PROFILE_VERSION: u16 = 1;
const FIXED_LEN: usize = 96;

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u16(&mut self, v: u16) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn values<'a, T: Scalar>(&mut self, vs: impl IntoIterator<Item = &'a T>) {
        for v in vs {
            self.f64(v.to_f64_lossless());
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(Error::Truncated {
                expected: end as u64,
                found: self.bytes.len() as u64,
            });
        }
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn values<T: Scalar>(&mut self, n: usize) -> Result<Vec<T>> {
        let raw = self.take(8 * n)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| T::lit(f64::from_le_bytes(c.try_into().unwrap())))
            .collect())
    }
}

fn fit_code(f: TemporalFit) -> u8 {
    match f {
        TemporalFit::AllTransitions => 0,
        TemporalFit::SingleTransition => 1,
    }
}

pub fn encode_profile<T: Scalar>(p: &CalibrationProfile<T>) -> Vec<u8> {
    let d = p.dim();
    let mut w = Writer(Vec::with_capacity(FIXED_LEN + 8 * (2 * d * d + 4 * d + p.n_videos() + p.n_temporal())));
    w.0.extend_from_slice(PROFILE_MAGIC);
    w.u16(PROFILE_VERSION);
    w.u16(0);
    w.u32(d as u32);
    w.u32(p.n_videos() as u32);
    w.u32(p.n_temporal() as u32);

    let c = &p.config;
    w.u32(c.temporal.derivative_order as u32);
    w.u32(c.temporal.step as u32);
    w.u8(c.spatial_agg.code());
    w.u8(c.temporal_agg.code());
    w.u8(fit_code(c.temporal_fit));
    let (kind, value) = match c.floor {
        EigenFloor::Relative(v) => (0, v),
        EigenFloor::Absolute(v) => (1, v),
    };
    w.u8(kind);
    w.u32(0);
    w.f64(value);
    w.f64(c.temporal.norm_floor);
    w.u64(p.rng_seed);
    w.u64(p.spatial_model.sample_count() as u64);
    w.u64(p.temporal_model.sample_count() as u64);
    w.f64(p.spatial_model.epsilon().to_f64_lossless());
    w.f64(p.temporal_model.epsilon().to_f64_lossless());
    debug_assert_eq!(w.0.len(), FIXED_LEN);

    for m in [&p.spatial_model, &p.temporal_model] {
        w.values(m.mean().iter());
        w.values(m.matrix().iter());
        w.values(m.eigenvalues().iter());
    }
    w.values(p.spatial_scores.iter());
    w.values(p.temporal_scores.iter());
    w.0
}

pub fn decode_profile<T: Scalar>(bytes: &[u8]) -> Result<CalibrationProfile<T>> {
    if bytes.len() < 8 || &bytes[..8] != PROFILE_MAGIC {
        return Err(Error::BadMagic {
            expected: String::from_utf8_lossy(PROFILE_MAGIC).into_owned(),
            found: String::from_utf8_lossy(&bytes[..bytes.len().min(8)]).into_owned(),
        });
    }
    let mut r = Reader { bytes, pos: 8 };
    let version = r.u16()?;
    if version != PROFILE_VERSION {
        return Err(Error::UnsupportedVersion {
            found: version,
            supported: PROFILE_VERSION,
        });
    }
    let _reserved = r.u16()?;
    let d = r.u32()? as usize;
    let n = r.u32()? as usize;
    let n_temp = r.u32()? as usize;

    let derivative_order = r.u32()? as usize;
    let step = r.u32()? as usize;
    let bad = |what: &str, code: u8| Error::InvalidArgument(format!("unknown {what} code {code} in profile"));
    let sa = r.u8()?;
    let spatial_agg = Aggregation::from_code(sa).ok_or_else(|| bad("aggregation", sa))?;
    let ta = r.u8()?;
    let temporal_agg = Aggregation::from_code(ta).ok_or_else(|| bad("aggregation", ta))?;
    let temporal_fit = match r.u8()? {
        0 => TemporalFit::AllTransitions,
        1 => TemporalFit::SingleTransition,
        other => return Err(bad("temporal fit", other)),
    };
    let floor_kind = r.u8()?;
    let _reserved = r.u32()?;
    let floor_value = r.f64()?;
    let floor = match floor_kind {
        0 => EigenFloor::Relative(floor_value),
        1 => EigenFloor::Absolute(floor_value),
        other => return Err(bad("floor kind", other)),
    };
    let norm_floor = r.f64()?;
    let rng_seed = r.u64()?;
    let spatial_count = r.u64()? as usize;
    let temporal_count = r.u64()? as usize;
    let spatial_eps = r.f64()?;
    let temporal_eps = r.f64()?;

    let expected = FIXED_LEN as u64 + 8 * (2 * (d * d + 2 * d) + n + n_temp) as u64;
    let found = bytes.len() as u64;
    if found < expected {
        return Err(Error::Truncated { expected, found });
    }
    if found > expected {
        return Err(Error::TrailingData {
            extra: found - expected,
        });
    }

    let mut model = |count: usize, eps: f64| -> Result<WhiteningModel<T>> {
        let mean = Array1::from(r.values::<T>(d)?);
        let matrix = Array2::from_shape_vec((d, d), r.values::<T>(d * d)?).expect("length matches");
        let eig = Array1::from(r.values::<T>(d)?);
        WhiteningModel::from_parts(mean, matrix, eig, count, T::lit(eps))
    };
    let spatial_model = model(spatial_count, spatial_eps)?;
    let temporal_model = model(temporal_count, temporal_eps)?;
    let spatial_scores = r.values::<T>(n)?;
    let temporal_scores = r.values::<T>(n_temp)?;
    if spatial_scores.windows(2).any(|w| w[0] > w[1]) || temporal_scores.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Calibration("stored score lists are not sorted".into()));
    }

    let config = CalibrationConfig {
        temporal: TemporalOptions {
            derivative_order,
            step,
            norm_floor,
        },
        spatial_agg,
        temporal_agg,
        floor,
        temporal_fit,
    };
    config.temporal.validate()?;
    CalibrationProfile::from_parts(
        spatial_model,
        temporal_model,
        spatial_scores,
        temporal_scores,
        config,
        rng_seed,
    )
}

pub fn save_profile<T: Scalar>(profile: &CalibrationProfile<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_profile(profile)).map_err(|e| Error::io(path, e))
}

pub fn load_profile<T: Scalar>(path: impl AsRef<Path>) -> Result<CalibrationProfile<T>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_profile(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedseq::{EmbeddingSequence, Label};
    use ndarray::Array2;

    fn profile() -> CalibrationProfile<f64> {
        let videos: Vec<_> = (0..6)
            .map(|i| {
                let frames = Array2::from_shape_fn((5, 3), |(t, j)| {
                    (((i * 31 + t * 17 + j * 7) % 13) as f32) * 0.3 - (t as f32) * 0.1 * (j as f32)
                });
                EmbeddingSequence::new(format!("v{i}"), frames, 8.0)
                    .unwrap()
                    .with_label(Label::Real)
            })
            .collect();
        let config = CalibrationConfig {
            spatial_agg: Aggregation::Mean,
            temporal_fit: TemporalFit::SingleTransition,
            ..Default::default()
        };
        super::super::calibrate(&videos, &config, 99).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let p = profile();
        let bytes = encode_profile(&p);
        let back: CalibrationProfile<f64> = decode_profile(&bytes).unwrap();
        assert_eq!(back, p);
        assert_eq!(encode_profile(&back), bytes);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.cal");
        save_profile(&p, &path).unwrap();
        assert_eq!(load_profile::<f64>(&path).unwrap(), p);
    }

    #[test]
    fn format_errors() {
        let bytes = encode_profile(&profile());

        let mut magic = bytes.clone();
        magic[..8].copy_from_slice(b"STALLEMB");
        assert!(matches!(decode_profile::<f64>(&magic), Err(Error::BadMagic { .. })));

        let mut v2 = bytes.clone();
        v2[8..10].copy_from_slice(&2u16.to_le_bytes());
        assert!(matches!(
            decode_profile::<f64>(&v2),
            Err(Error::UnsupportedVersion { found: 2, supported: 1 })
        ));

        assert!(matches!(
            decode_profile::<f64>(&bytes[..bytes.len() - 8]),
            Err(Error::Truncated { .. })
        ));
        assert!(matches!(decode_profile::<f64>(&bytes[..40]), Err(Error::Truncated { .. })));
    }
}
