//! Synthetic embedding corpora with controllable spatial and temporal
//! artifacts.
//!
//! A real video is a per-video anchor drawn from a fixed anisotropic
//! Gaussian plus AR(1) frame noise. Motion energy is lowest along
//! coordinate 0 and grows with the coordinate index; each video also gets a
//! random overall motion scale and a random tilt of its motion profile. The
//! fake process can shift the anchor along coordinate 0 (spatial artifact),
//! rescale the motion, or add extra innovation along coordinate 0 (temporal
//! direction bias).

use std::path::Path;

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::embedseq::{write_manifest, write_sequence, DatasetManifest, EmbeddingSequence, Label, ManifestEntry};
use crate::error::{Error, Result};
use crate::seed::{self, tag};

pub const AR_COEFF: f64 = 0.8;
pub const MOTION_SCALE: f64 = 0.15;
pub const MOTION_SCALE_SPREAD: f64 = 0.5;
pub const MOTION_TILT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthProcess {
    /// Anchor shift along coordinate 0, in units of that coordinate's std.
    pub anchor_shift: f64,
    pub transition_scale: f64,
    /// Std of the extra per-step innovation along coordinate 0, relative to
    /// the motion profile.
    pub direction_bias: f64,
}

impl Default for SynthProcess {
    fn default() -> Self {
        Self {
            anchor_shift: 0.0,
            transition_scale: 1.0,
            direction_bias: 0.0,
        }
    }
}

impl SynthProcess {
    pub fn real() -> Self {
        Self::default()
    }
}

struct Profile {
    mean: Array1<f64>,
    anchor_std: Array1<f64>,
    motion: Array1<f64>,
    ramp: Array1<f64>,
}

impl Profile {
    fn new(d: usize) -> Self {
        let df = d as f64;
        let k = |f: &dyn Fn(f64) -> f64| Array1::from_iter((0..d).map(|k| f(k as f64)));
        let norm = 1.0 - (-3.0f64).exp();
        Self {
            mean: k(&|k| ((k as usize % 7) as f64 - 3.0) * 0.1),
            anchor_std: k(&|k| 0.5 + 2.5 * (-3.0 * k / df).exp()),
            motion: k(&|k| 0.25 + 1.75 * (1.0 - (-3.0 * k / df).exp()) / norm),
            ramp: k(&|k| 1.0 - 2.0 * k / (df - 1.0)),
        }
    }
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn one_video<R: Rng>(rng: &mut R, p: &Profile, frames: usize, process: &SynthProcess) -> Array2<f32> {
    let d = p.mean.len();
    let mut anchor = &p.mean + &p.anchor_std.mapv(|s| s * normal(rng));
    anchor[0] += process.anchor_shift * p.anchor_std[0];
    let scale = MOTION_SCALE * (MOTION_SCALE_SPREAD * normal(rng)).exp() * process.transition_scale;
    let tilt = MOTION_TILT * normal(rng);
    let m = Array1::from_iter(p.motion.iter().zip(&p.ramp).map(|(&mk, &rk)| mk * (tilt * rk).exp()));

    let innovation = |rng: &mut R| {
        let mut xi = m.mapv(|mk| mk * normal(rng));
        xi[0] += process.direction_bias * normal(rng);
        xi
    };
    let keep = (1.0 - AR_COEFF * AR_COEFF).sqrt();
    let mut out = Array2::<f32>::zeros((frames, d));
    let mut e = innovation(rng) * scale;
    for t in 0..frames {
        if t > 0 {
            e = e * AR_COEFF + innovation(rng) * (keep * scale);
        }
        for (dst, (&a, &ek)) in out.row_mut(t).iter_mut().zip(anchor.iter().zip(&e)) {
            *dst = (a + ek) as f32;
        }
    }
    out
}

/// Generates `n` sequences. Video `i` draws from stream `(seed, stream, i)`,
/// so the output does not depend on thread count.
#[allow(clippy::too_many_arguments)]
pub fn synth_videos(
    n: usize,
    frames: usize,
    dim: usize,
    fps: f64,
    process: &SynthProcess,
    label: Label,
    id_prefix: &str,
    seed: u64,
    stream: u64,
) -> Result<Vec<EmbeddingSequence>> {
    if dim < 2 || frames < 2 {
        return Err(Error::InvalidShape(format!(
            "synthetic videos need d >= 2 and T >= 2, got d={dim}, T={frames}"
        )));
    }
    let profile = Profile::new(dim);
    let generator = (label == Label::Generated).then(|| "synthetic".to_owned());
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed::rng(seed, &[stream, i as u64]);
            let frames = one_video(&mut rng, &profile, frames, process);
            Ok(EmbeddingSequence::new(format!("{id_prefix}{i:05}"), frames, fps)?
                .with_label(label)
                .with_generator(generator.clone()))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub n_calibration: usize,
    pub n_test_real: usize,
    pub n_test_fake: usize,
    pub frames: usize,
    pub dim: usize,
    pub fps: f64,
    pub fake: SynthProcess,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_calibration: 2000,
            n_test_real: 500,
            n_test_fake: 500,
            frames: 16,
            dim: 64,
            fps: 8.0,
            fake: SynthProcess {
                anchor_shift: 5.0,
                transition_scale: 1.0,
                direction_bias: 1.5,
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub calibration: Vec<EmbeddingSequence>,
    /// Real videos first, then generated ones.
    pub test: Vec<EmbeddingSequence>,
}

pub fn synth_corpus(config: &SynthConfig, seed: u64) -> Result<SynthCorpus> {
    let c = config;
    let real = SynthProcess::real();
    let calibration = synth_videos(c.n_calibration, c.frames, c.dim, c.fps, &real, Label::Real, "cal_", seed, tag::SYNTH_CALIBRATION)?;
    let mut test = synth_videos(c.n_test_real, c.frames, c.dim, c.fps, &real, Label::Real, "real_", seed, tag::SYNTH_TEST_REAL)?;
    test.extend(synth_videos(
        c.n_test_fake,
        c.frames,
        c.dim,
        c.fps,
        &c.fake,
        Label::Generated,
        "fake_",
        seed,
        tag::SYNTH_TEST_FAKE,
    )?);
    Ok(SynthCorpus { calibration, test })
}

fn write_set(seqs: &[EmbeddingSequence], dir: &Path, sub: &str, source: &str) -> Result<DatasetManifest> {
    let folder = dir.join(sub);
    std::fs::create_dir_all(&folder).map_err(|e| Error::io(&folder, e))?;
    let entries = seqs
        .iter()
        .map(|s| {
            let rel = Path::new(sub).join(format!("{}.emb", s.video_id()));
            write_sequence(s, dir.join(&rel))?;
            Ok(ManifestEntry {
                path: rel,
                video_id: s.video_id().to_owned(),
                label: s.label(),
                generator: s.generator().map(str::to_owned),
                source: (s.label() == Label::Real).then(|| source.to_owned()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DatasetManifest::new(entries)?.with_base_dir(dir))
}

/// Writes the corpus as STALLEMB files plus `calibration.jsonl` and
/// `test.jsonl` under `dir`.
pub fn write_corpus(corpus: &SynthCorpus, dir: impl AsRef<Path>) -> Result<(DatasetManifest, DatasetManifest)> {
    let dir = dir.as_ref();
    let cal = write_set(&corpus.calibration, dir, "calibration", "synthetic_calibration")?;
    let test = write_set(&corpus.test, dir, "test", "synthetic_real")?;
    write_manifest(&cal, dir.join("calibration.jsonl"))?;
    write_manifest(&test, dir.join("test.jsonl"))?;
    Ok((cal, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_and_labels() {
        let cfg = SynthConfig {
            n_calibration: 3,
            n_test_real: 2,
            n_test_fake: 2,
            frames: 5,
            dim: 4,
            ..SynthConfig::default()
        };
        let c = synth_corpus(&cfg, 1).unwrap();
        assert_eq!(c.calibration.len(), 3);
        assert_eq!(c.test.len(), 4);
        assert_eq!(c.test[3].label(), Label::Generated);
        assert_eq!(c.test[3].generator(), Some("synthetic"));
        assert_eq!(c.test[0].num_frames(), 5);
        assert_eq!(c.test[0].dim(), 4);
        let again = synth_corpus(&cfg, 1).unwrap();
        assert_eq!(c.test, again.test);
        assert_ne!(c.test, synth_corpus(&cfg, 2).unwrap().test);
    }

    #[test]
    fn rejects_tiny_shapes() {
        assert!(synth_videos(1, 1, 4, 8.0, &SynthProcess::real(), Label::Real, "x", 0, 0).is_err());
        assert!(synth_videos(1, 4, 1, 8.0, &SynthProcess::real(), Label::Real, "x", 0, 0).is_err());
    }

    #[test]
    fn anchor_shift_moves_coordinate_zero() {
        let shifted = SynthProcess {
            anchor_shift: 5.0,
            ..SynthProcess::real()
        };
        let real = synth_videos(400, 2, 8, 8.0, &SynthProcess::real(), Label::Real, "r", 3, 0).unwrap();
        let fake = synth_videos(400, 2, 8, 8.0, &shifted, Label::Generated, "f", 3, 0).unwrap();
        let m = |v: &[EmbeddingSequence]| v.iter().map(|s| f64::from(s.frame(0)[0])).sum::<f64>() / v.len() as f64;
        // Same stream, so the difference is exactly the shift up to f32 rounding.
        assert!((m(&fake) - m(&real) - 15.0).abs() < 1e-3);
    }

    #[test]
    fn corpus_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SynthConfig {
            n_calibration: 2,
            n_test_real: 1,
            n_test_fake: 1,
            frames: 3,
            dim: 4,
            ..SynthConfig::default()
        };
        let c = synth_corpus(&cfg, 7).unwrap();
        let (cal, test) = write_corpus(&c, dir.path()).unwrap();
        let reread = crate::embedseq::read_manifest(dir.path().join("test.jsonl")).unwrap();
        assert_eq!(reread.entries, test.entries);
        assert_eq!(reread.load(&reread.entries[1]).unwrap(), c.test[1]);
        assert_eq!(cal.len(), 2);
    }
}
