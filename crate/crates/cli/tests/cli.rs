use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn stall(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stall"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = stall(args);
    assert!(
        out.status.success(),
        "stall {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn synth(dir: &Path, dim: usize, jobs: &str) {
    ok(&[
        "synth",
        "--out",
        p(dir),
        "--n-calibration",
        "120",
        "--n-test-real",
        "40",
        "--n-test-fake",
        "40",
        "--dim",
        &dim.to_string(),
        "--jobs",
        jobs,
    ]);
}

/// Runs synth → calibrate → score → eval and returns the three artifacts.
fn pipeline(dir: &Path, jobs: &str) -> (Vec<u8>, Vec<u8>, Vec<u8>) {
    let corpus = dir.join("corpus");
    synth(&corpus, 16, jobs);
    let profile = dir.join("profile.bin");
    let scores = dir.join("scores.csv");
    let eval = dir.join("eval.csv");
    ok(&["calibrate", "--manifest", p(&corpus.join("calibration.jsonl")), "--out", p(&profile), "--jobs", jobs]);
    ok(&[
        "score",
        "--manifest",
        p(&corpus.join("test.jsonl")),
        "--profile",
        p(&profile),
        "--out",
        p(&scores),
        "--jobs",
        jobs,
    ]);
    ok(&[
        "eval",
        "--scores",
        p(&scores),
        "--manifest",
        p(&corpus.join("test.jsonl")),
        "--balanced",
        "--out",
        p(&eval),
        "--jobs",
        jobs,
    ]);
    (fs::read(profile).unwrap(), fs::read(scores).unwrap(), fs::read(eval).unwrap())
}

#[test]
fn pipeline_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let (profile, scores, eval) = pipeline(dir.path(), "2");
    assert!(profile.starts_with(b"STALLCAL"));
    let scores = String::from_utf8(scores).unwrap();
    assert_eq!(scores.lines().count(), 81);
    let eval = String::from_utf8(eval).unwrap();
    let lines: Vec<&str> = eval.lines().collect();
    assert_eq!(lines[0], "benchmark,generator,n_real,n_generated,auc,ap");
    let auc: f64 = lines[1].split(',').nth(4).unwrap().parse().unwrap();
    assert!((0.0..=1.0).contains(&auc));
}

#[test]
fn determinism_across_runs_and_jobs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    let one = pipeline(a.path(), "1");
    let eight = pipeline(b.path(), "8");
    let again = pipeline(c.path(), "1");
    assert!(one == eight, "outputs differ between 1 and 8 jobs");
    assert!(one == again, "outputs differ between reruns");
}

#[test]
fn dimension_mismatch_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let wide = dir.path().join("wide");
    let narrow = dir.path().join("narrow");
    synth(&wide, 16, "1");
    synth(&narrow, 8, "1");
    let profile = dir.path().join("profile.bin");
    ok(&["calibrate", "--manifest", p(&wide.join("calibration.jsonl")), "--out", p(&profile)]);
    let out = stall(&[
        "score",
        "--manifest",
        p(&narrow.join("test.jsonl")),
        "--profile",
        p(&profile),
        "--out",
        p(&dir.path().join("s.csv")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    let last: serde_json::Value = serde_json::from_str(stderr.lines().last().unwrap()).unwrap();
    assert_eq!(last["error"], "dimension_mismatch");
}

#[test]
fn usage_errors_are_json() {
    let out = stall(&["score", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    let line = String::from_utf8(out.stderr).unwrap();
    let v: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
    assert_eq!(v["error"], "usage");
}

#[test]
fn overrides_must_match_profile() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c");
    synth(&corpus, 8, "1");
    let profile = dir.path().join("profile.bin");
    ok(&["calibrate", "--manifest", p(&corpus.join("calibration.jsonl")), "--out", p(&profile)]);
    let out = stall(&[
        "score",
        "--manifest",
        p(&corpus.join("test.jsonl")),
        "--profile",
        p(&profile),
        "--out",
        p(&dir.path().join("s.csv")),
        "--derivative-order",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("\"config_conflict\""));
}

#[test]
fn calibrate_rejects_generated_videos() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c");
    synth(&corpus, 8, "1");
    let out = stall(&[
        "calibrate",
        "--manifest",
        p(&corpus.join("test.jsonl")),
        "--out",
        p(&dir.path().join("x.bin")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("\"calibration\""));
}

#[test]
fn perturb_and_stats_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c");
    synth(&corpus, 8, "1");
    let test = corpus.join("test.jsonl");
    let before = fs::read(&test).unwrap();

    let rev = dir.path().join("rev");
    ok(&["perturb", "--manifest", p(&test), "--out", p(&rev), "--kind", "reverse"]);
    let twice = dir.path().join("rev2");
    ok(&["perturb", "--manifest", p(&rev.join("manifest.jsonl")), "--out", p(&twice), "--kind", "reverse"]);
    assert_eq!(
        fs::read(twice.join("real_00000.emb")).unwrap(),
        fs::read(corpus.join("test/real_00000.emb")).unwrap()
    );

    let flash = corpus.join("test/fake_00000.emb");
    let ins = dir.path().join("ins");
    ok(&["perturb", "--manifest", p(&test), "--out", p(&ins), "--kind", "insert", "--vector", p(&flash)]);
    let bytes = fs::read(ins.join("real_00001.emb")).unwrap();
    assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 17);
    assert_eq!(before, fs::read(&test).unwrap());

    let stats = dir.path().join("stats");
    ok(&[
        "stats",
        "--manifest",
        p(&corpus.join("calibration.jsonl")),
        "--out",
        p(&stats),
        "--group-size",
        "100",
        "--groups",
        "5",
    ]);
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(stats.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["coordinates"], 8);
    assert_eq!(fs::read_to_string(stats.join("normality.csv")).unwrap().lines().count(), 9);
}
