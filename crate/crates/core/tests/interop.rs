//! Files as an external extractor would write them.

use std::io::Write;

use stall_core::calibration::{calibrate_manifest, CalibrationConfig};
use stall_core::embedseq::DatasetManifest;
use stall_core::{downsample_indices, read_manifest, read_sequence, score_batch, Error, Fusion, Label};

fn stallemb(t: u32, d: u32, fps: f64, value: impl Fn(u32, u32) -> f32) -> Vec<u8> {
    let mut b = Vec::new();
    b.extend_from_slice(b"STALLEMB");
    b.extend_from_slice(&1u16.to_le_bytes());
    b.extend_from_slice(&0u16.to_le_bytes());
    b.extend_from_slice(&t.to_le_bytes());
    b.extend_from_slice(&d.to_le_bytes());
    b.extend_from_slice(&fps.to_le_bytes());
    for i in 0..t {
        for j in 0..d {
            b.extend_from_slice(&value(i, j).to_le_bytes());
        }
    }
    b
}

fn noise(seed: u32, i: u32, j: u32) -> f32 {
    // Small deterministic hash in [-1, 1).
    let mut h = seed.wrapping_mul(0x9e37_79b9) ^ i.wrapping_mul(0x85eb_ca6b) ^ j.wrapping_mul(0xc2b2_ae35);
    h ^= h >> 15;
    h = h.wrapping_mul(0x2c1b_3c6d);
    h ^= h >> 12;
    (h as f32 / u32::MAX as f32) * 2.0 - 1.0
}

#[test]
fn clip_lengths_after_frame_selection() {
    // Two seconds at 24 fps down to 8 fps.
    let idx = downsample_indices(48, 24.0, 8.0).unwrap();
    assert_eq!(idx.len(), 16);
    assert_eq!(idx, (0..16).map(|j| 3 * j).collect::<Vec<_>>());
    // One second already at 8 fps.
    assert_eq!(downsample_indices(8, 8.0, 8.0).unwrap(), (0..8).collect::<Vec<_>>());
    assert!(downsample_indices(16, 6.0, 8.0).is_err());
}

#[test]
fn hand_written_file_parses() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("clip_a.emb");
    std::fs::write(&path, stallemb(16, 1024, 8.0, |i, j| noise(1, i, j))).unwrap();
    let seq = read_sequence(&path).unwrap();
    assert_eq!((seq.num_frames(), seq.dim(), seq.fps()), (16, 1024, 8.0));
    assert_eq!(seq.video_id(), "clip_a");
    assert_eq!(seq.frame(3)[7], noise(1, 3, 7));

    let mut bad = stallemb(2, 3, 8.0, |_, _| 0.0);
    bad.pop();
    std::fs::write(&path, &bad).unwrap();
    assert!(matches!(read_sequence(&path), Err(Error::Truncated { .. })));
}

#[test]
fn extractor_manifest_calibrates_and_scores() {
    let dir = tempfile::tempdir().unwrap();
    let d = 6;
    let mut manifest = std::fs::File::create(dir.path().join("videos.jsonl")).unwrap();
    for v in 0..30u32 {
        let real = v < 24;
        let name = format!("emb/v{v}.emb");
        std::fs::create_dir_all(dir.path().join("emb")).unwrap();
        // 24 fps source frames already encoded; the primary selects 8 fps.
        std::fs::write(
            dir.path().join(&name),
            stallemb(48, d, 24.0, |i, j| {
                // Fakes move off the drift direction.
                let shift = match (real, j) {
                    (false, 0) => 5.0,
                    (false, 1) => -5.0,
                    _ => 0.0,
                };
                noise(v, i, j) + shift + 0.1 * i as f32
            }),
        )
        .unwrap();
        // Extra keys carry extractor provenance and are ignored.
        writeln!(
            manifest,
            r#"{{"path":"{name}","video_id":"v{v}","label":"{}","generator":{},"source":"extractor","encoder":"vit","preprocess":{{"size":224}}}}"#,
            if real { "real" } else { "generated" },
            if real { "null".to_owned() } else { "\"gen_x\"".to_owned() }
        )
        .unwrap();
    }
    drop(manifest);

    let all = read_manifest(dir.path().join("videos.jsonl")).unwrap();
    assert_eq!(all.entries[25].generator.as_deref(), Some("gen_x"));
    let reals = DatasetManifest::new(all.entries[..20].to_vec()).unwrap().with_base_dir(dir.path());
    let profile =
        calibrate_manifest::<f64>(&reals, &CalibrationConfig::default(), 3, Some(8.0), Some(16)).unwrap();
    assert_eq!(profile.n_videos(), 20);

    let scored = score_batch(&all, &profile, Fusion::Mean, 2, Some(8.0), Some(16)).unwrap();
    assert_eq!(scored.len(), 30);
    for (r, e) in scored.iter().zip(&all.entries) {
        let r = r.as_ref().unwrap();
        assert_eq!(r.video_id, e.video_id);
        assert!((0.0..=1.0).contains(&r.s_video));
    }
    let fake = scored[29].as_ref().unwrap();
    assert_eq!(fake.label, Label::Generated);
    assert_eq!(fake.perc_spatial, 0.0);
}
