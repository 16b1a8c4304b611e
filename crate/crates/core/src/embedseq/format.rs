//! `STALLEMB` embedding file format.
//!
//! ```text
//! offset  size  field
//! 0       8     magic "STALLEMB"
//! 8       2     version (u16, = 1)
//! 10      2     reserved (u16, = 0)
//! 12      4     T, number of frames (u32)
//! 16      4     d, embedding dimension (u32)
//! 20      8     fps (f64)
//! 28      4*T*d frame-major f32 values
//! ```
//!
//! Everything is little-endian.

use std::path::Path;

use ndarray::Array2;

use super::EmbeddingSequence;
use crate::error::{Error, Result};

pub const EMBEDDING_MAGIC: &[u8; 8] = b"STALLEMB";
pub const EMBEDDING_VERSION: u16 = 1;
pub const HEADER_LEN: usize = 28;

pub fn encode_sequence(seq: &EmbeddingSequence) -> Vec<u8> {
    let (t, d) = (seq.num_frames(), seq.dim());
    let mut buf = Vec::with_capacity(HEADER_LEN + 4 * t * d);
    buf.extend_from_slice(EMBEDDING_MAGIC);
    buf.extend_from_slice(&EMBEDDING_VERSION.to_le_bytes());
    buf.extend_from_slice(&0u16.to_le_bytes());
    buf.extend_from_slice(&(t as u32).to_le_bytes());
    buf.extend_from_slice(&(d as u32).to_le_bytes());
    buf.extend_from_slice(&seq.fps().to_le_bytes());
    for v in seq.frames().iter() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf
}

pub fn decode_sequence(bytes: &[u8], video_id: &str) -> Result<EmbeddingSequence> {
    if bytes.len() < 8 || &bytes[..8] != EMBEDDING_MAGIC {
        let found = &bytes[..bytes.len().min(8)];
        return Err(Error::BadMagic {
            expected: String::from_utf8_lossy(EMBEDDING_MAGIC).into_owned(),
            found: String::from_utf8_lossy(found).into_owned(),
        });
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Truncated {
            expected: HEADER_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    let version = u16::from_le_bytes([bytes[8], bytes[9]]);
    if version != EMBEDDING_VERSION {
        return Err(Error::UnsupportedVersion {
            found: version,
            supported: EMBEDDING_VERSION,
        });
    }
    let t = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let d = u32::from_le_bytes(bytes[16..20].try_into().unwrap()) as usize;
    let fps = f64::from_le_bytes(bytes[20..28].try_into().unwrap());
    if t == 0 || d == 0 {
        return Err(Error::InvalidShape(format!("header declares {t}x{d} frames")));
    }
    let expected = HEADER_LEN as u64 + 4 * t as u64 * d as u64;
    let found = bytes.len() as u64;
    if found < expected {
        return Err(Error::Truncated { expected, found });
    }
    if found > expected {
        return Err(Error::TrailingData {
            extra: found - expected,
        });
    }
    let values: Vec<f32> = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            location: format!("frame {}, coordinate {}", pos / d, pos % d),
        });
    }
    let frames = Array2::from_shape_vec((t, d), values).expect("length checked above");
    EmbeddingSequence::new(video_id, frames, fps)
}

/// Reads an embedding file. The video id defaults to the file stem and the
/// label to `unknown`; manifests supply both.
pub fn read_sequence(path: impl AsRef<Path>) -> Result<EmbeddingSequence> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    decode_sequence(&bytes, &id)
}

pub fn write_sequence(seq: &EmbeddingSequence, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_sequence(seq)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(t: usize, d: usize, fps: f64) -> EmbeddingSequence {
        let frames = Array2::from_shape_fn((t, d), |(i, j)| (i as f32) * 0.5 - (j as f32) * 0.25);
        EmbeddingSequence::new("clip", frames, fps).unwrap()
    }

    #[test]
    fn round_trip_through_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("clip.emb");
        let s = seq(16, 4, 29.97);
        write_sequence(&s, &path).unwrap();
        let back = read_sequence(&path).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.fps().to_bits(), 29.97f64.to_bits());
        assert_eq!(std::fs::metadata(&path).unwrap().len(), (HEADER_LEN + 16 * 4 * 4) as u64);
    }

    #[test]
    fn single_frame_is_valid() {
        let s = seq(1, 1024, 8.0);
        let back = decode_sequence(&encode_sequence(&s), "clip").unwrap();
        assert_eq!(back.num_frames(), 1);
        assert_eq!(back.dim(), 1024);
    }

    #[test]
    fn header_layout_is_little_endian() {
        let bytes = encode_sequence(&seq(2, 3, 8.0));
        assert_eq!(&bytes[..8], b"STALLEMB");
        assert_eq!(&bytes[8..10], &[1, 0]);
        assert_eq!(&bytes[10..12], &[0, 0]);
        assert_eq!(&bytes[12..16], &[2, 0, 0, 0]);
        assert_eq!(&bytes[16..20], &[3, 0, 0, 0]);
        assert_eq!(&bytes[20..28], &8.0f64.to_le_bytes());
    }

    #[test]
    fn distinct_errors() {
        let good = encode_sequence(&seq(4, 2, 8.0));

        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        assert!(matches!(decode_sequence(&bad_magic, "x"), Err(Error::BadMagic { .. })));

        let mut bad_version = good.clone();
        bad_version[8] = 2;
        assert!(matches!(
            decode_sequence(&bad_version, "x"),
            Err(Error::UnsupportedVersion { found: 2, .. })
        ));

        assert!(matches!(
            decode_sequence(&good[..good.len() - 1], "x"),
            Err(Error::Truncated { .. })
        ));
        assert!(matches!(decode_sequence(&good[..20], "x"), Err(Error::Truncated { .. })));

        let mut nan = good.clone();
        nan[HEADER_LEN + 4..HEADER_LEN + 8].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(matches!(decode_sequence(&nan, "x"), Err(Error::NonFinite { .. })));

        let mut long = good;
        long.push(0);
        assert!(matches!(decode_sequence(&long, "x"), Err(Error::TrailingData { extra: 1 })));
    }

    proptest! {
        #[test]
        fn encode_decode_is_identity(
            t in 1usize..8,
            d in 1usize..8,
            fps in 0.5f64..120.0,
            seed in any::<u64>(),
        ) {
            let mut state = seed;
            let frames = Array2::from_shape_fn((t, d), |_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 40) as f32 / (1u64 << 24) as f32 - 0.5) * 100.0
            });
            let s = EmbeddingSequence::new("p", frames, fps).unwrap();
            let back = decode_sequence(&encode_sequence(&s), "p").unwrap();
            prop_assert_eq!(back.fps().to_bits(), s.fps().to_bits());
            for (a, b) in back.frames().iter().zip(s.frames().iter()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
