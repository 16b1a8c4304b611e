use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use ndarray::{Array2, Axis};
use serde_json::json;

use stall_core::calibration::{calibrate_manifest, CalibrationConfig, TemporalFit};
use stall_core::eval::{
    balanced_pairs, evaluate, labeled_from_rows, perturb_sequence, synth_corpus, write_corpus, write_eval_csv,
    write_eval_long_csv, EvalResult, LabeledScore, Perturbation, SynthConfig, SynthProcess,
};
use stall_core::likelihood::transitions;
use stall_core::scoring::{read_scores_csv, write_scores_csv, ScoreRecord};
use stall_core::seed::{self, tag};
use stall_core::stattests::{batch_normality, pairwise_cosine_histogram};
use stall_core::{
    load_profile, read_manifest, read_sequence, save_profile, score_batch, write_manifest, write_sequence,
    CalibrationProfile, DatasetManifest, EigenFloor, EmbeddingSequence, Error, Label, ManifestEntry, Scalar,
    TemporalOptions,
};

use crate::args::*;

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(
        File::create(path).map_err(|e| Error::Io {
            path: path.to_owned(),
            source: e,
        })?,
    ))
}

fn summary(value: serde_json::Value) {
    println!("{value}");
}

pub fn synth(args: &SynthArgs, seed: u64) -> Result<()> {
    let config = SynthConfig {
        n_calibration: args.n_calibration,
        n_test_real: args.n_test_real,
        n_test_fake: args.n_test_fake,
        frames: args.frames,
        dim: args.dim,
        fps: args.fps,
        fake: SynthProcess {
            anchor_shift: args.anchor_shift,
            transition_scale: args.transition_scale,
            direction_bias: args.direction_bias,
        },
    };
    let corpus = synth_corpus(&config, seed)?;
    let (cal, test) = write_corpus(&corpus, &args.out)?;
    summary(json!({
        "command": "synth",
        "calibration_manifest": args.out.join("calibration.jsonl"),
        "test_manifest": args.out.join("test.jsonl"),
        "calibration_videos": cal.len(),
        "test_videos": test.len(),
    }));
    Ok(())
}

pub fn calibrate(args: &CalibrateArgs, seed: u64) -> Result<()> {
    let floor = match args.epsilon {
        Some(eps) => EigenFloor::Absolute(eps),
        None => EigenFloor::default(),
    };
    let config = CalibrationConfig {
        temporal: TemporalOptions {
            derivative_order: args.derivative_order,
            step: args.step,
            ..TemporalOptions::default()
        },
        spatial_agg: args.spatial_agg.into(),
        temporal_agg: args.temporal_agg.into(),
        floor,
        temporal_fit: if args.single_transition {
            TemporalFit::SingleTransition
        } else {
            TemporalFit::AllTransitions
        },
    };
    config.temporal.validate()?;
    let manifest = read_manifest(&args.manifest)?;
    let profile = calibrate_manifest::<f64>(
        &manifest,
        &config,
        seed,
        Some(args.load.target_fps),
        Some(args.load.max_frames),
    )?;
    save_profile(&profile, &args.out)?;
    summary(json!({
        "command": "calibrate",
        "profile": args.out,
        "dim": profile.dim(),
        "videos": profile.n_videos(),
        "temporal_videos": profile.n_temporal(),
    }));
    Ok(())
}

fn check_override<V: PartialEq + std::fmt::Display>(name: &str, given: Option<V>, profile: V) -> Result<()> {
    if let Some(v) = given {
        if v != profile {
            return Err(Error::ConfigConflict(format!(
                "--{name} {v} differs from the profile's {profile}; recalibrate to change it"
            ))
            .into());
        }
    }
    Ok(())
}

pub fn score(args: &ScoreArgs, jobs: usize) -> Result<()> {
    let profile = load_profile::<f64>(&args.profile)?;
    let c = profile.config();
    check_override("derivative-order", args.derivative_order, c.temporal.derivative_order)?;
    check_override("step", args.step, c.temporal.step)?;
    check_override("spatial-agg", args.spatial_agg.map(Into::into), c.spatial_agg)?;
    check_override("temporal-agg", args.temporal_agg.map(Into::into), c.temporal_agg)?;
    let fusion: stall_core::Fusion = args.fusion.into();
    if fusion == stall_core::Fusion::Product && profile.n_temporal() == 0 {
        return Err(Error::ConfigConflict(
            "product fusion needs a temporal branch, but the profile has no temporal calibration scores".into(),
        )
        .into());
    }
    let manifest = read_manifest(&args.manifest)?;
    match args.precision {
        Precision::F64 => score_with(&manifest, &profile, args, jobs),
        Precision::F32 => score_with(&manifest, &profile.cast::<f32>(), args, jobs),
    }
}

fn score_with<T: Scalar>(
    manifest: &DatasetManifest,
    profile: &CalibrationProfile<T>,
    args: &ScoreArgs,
    jobs: usize,
) -> Result<()> {
    let results = score_batch(
        manifest,
        profile,
        args.fusion.into(),
        jobs,
        Some(args.load.target_fps),
        Some(args.load.max_frames),
    )?;
    let mut records: Vec<ScoreRecord<T>> = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => {
                eprintln!(
                    "{}",
                    json!({"error": e.error.kind(), "video_id": e.video_id, "message": e.error.to_string()})
                );
                failures.push(e);
            }
        }
    }
    let mut out = create(&args.out)?;
    write_scores_csv(&records, &mut out)?;
    out.flush()?;
    if let Some(first) = failures.into_iter().next() {
        log::error!("failed to score {}", first.video_id);
        return Err(first.error.into());
    }
    summary(json!({"command": "score", "scores": args.out, "videos": records.len()}));
    Ok(())
}

fn split_result(
    rows: &[LabeledScore],
    benchmark: &str,
    generator: Option<&str>,
) -> stall_core::Result<EvalResult> {
    evaluate(rows, benchmark, generator)
}

pub fn eval(args: &EvalArgs, seed: u64) -> Result<()> {
    let scored = labeled_from_rows(&read_scores_csv(&args.scores)?);
    let by_id: HashMap<&str, &LabeledScore> = scored.iter().map(|s| (s.video_id.as_str(), s)).collect();

    let mut results = Vec::new();
    if args.balanced {
        let Some(path) = &args.manifest else {
            bail!(Error::InvalidArgument("--balanced needs --manifest for real-video sources".into()));
        };
        let manifest = read_manifest(path)?;
        for split in balanced_pairs(&manifest, args.per_generator, seed)? {
            let rows = split
                .reals
                .iter()
                .chain(&split.generated)
                .map(|&i| {
                    let id = &manifest.entries[i].video_id;
                    by_id
                        .get(id.as_str())
                        .map(|s| (*s).clone())
                        .ok_or_else(|| Error::InvalidArgument(format!("no score for video {id}")))
                })
                .collect::<stall_core::Result<Vec<_>>>()?;
            results.push(split_result(&rows, &args.benchmark, split.generator.as_deref())?);
        }
    } else {
        let reals: Vec<LabeledScore> = scored.iter().filter(|s| s.label == Label::Real).cloned().collect();
        let mut groups: BTreeMap<Option<&str>, Vec<LabeledScore>> = BTreeMap::new();
        for s in scored.iter().filter(|s| s.label == Label::Generated) {
            let key = if args.per_generator { s.generator.as_deref() } else { None };
            groups.entry(key).or_default().push(s.clone());
        }
        if groups.is_empty() {
            bail!(Error::InsufficientData("score file has no generated videos".into()));
        }
        for (generator, generated) in groups {
            let mut rows = reals.clone();
            rows.extend(generated);
            results.push(split_result(&rows, &args.benchmark, generator)?);
        }
    }

    let mut out = create(&args.out)?;
    write_eval_csv(&results, &mut out)?;
    out.flush()?;
    if let Some(long) = &args.long_out {
        let mut w = create(long)?;
        write_eval_long_csv(&results, &mut w)?;
        w.flush()?;
    }
    let mean_auc = results.iter().map(|r| r.auc).sum::<f64>() / results.len() as f64;
    summary(json!({"command": "eval", "eval": args.out, "splits": results.len(), "mean_auc": mean_auc}));
    Ok(())
}

fn load_all(manifest: &DatasetManifest, load: &LoadArgs) -> Result<Vec<EmbeddingSequence>> {
    use rayon::prelude::*;
    Ok(manifest
        .entries
        .par_iter()
        .map(|e| manifest.load(e)?.standardize(Some(load.target_fps), Some(load.max_frames)))
        .collect::<stall_core::Result<Vec<_>>>()?)
}

fn stack(rows: Vec<Array2<f64>>, dim: usize) -> Array2<f64> {
    let views: Vec<_> = rows.iter().map(|r| r.view()).collect();
    if views.is_empty() {
        return Array2::zeros((0, dim));
    }
    ndarray::concatenate(Axis(0), &views).expect("rows share a dimension")
}

pub fn stats(args: &StatsArgs, seed: u64) -> Result<()> {
    let manifest = read_manifest(&args.manifest)?;
    let videos = load_all(&manifest, &args.load)?;
    let Some(dim) = videos.first().map(EmbeddingSequence::dim) else {
        bail!(Error::InsufficientData("manifest is empty".into()));
    };
    if let Some(v) = videos.iter().find(|v| v.dim() != dim) {
        bail!(Error::DimensionMismatch {
            expected: dim,
            found: v.dim()
        });
    }
    let opts = TemporalOptions::default();
    let parts: Vec<Array2<f64>> = match args.population {
        Population::Frames => videos.iter().map(|v| v.frames_as::<f64>()).collect(),
        Population::Transitions => videos
            .iter()
            .filter(|v| opts.transition_count(v.num_frames()).is_some())
            .map(|v| transitions::<f64>(v, &opts).map(|t| t.vectors))
            .collect::<stall_core::Result<_>>()?,
        Population::RawTransitions => videos
            .iter()
            .map(|v| {
                let f = v.frames_as::<f64>();
                let n = f.nrows();
                let diff = &f.slice(ndarray::s![1.., ..]) - &f.slice(ndarray::s![..n - 1, ..]);
                let keep: Vec<usize> = (0..diff.nrows())
                    .filter(|&i| diff.row(i).iter().any(|&x| x != 0.0))
                    .collect();
                diff.select(Axis(0), &keep)
            })
            .collect(),
    };
    let population = stack(parts, dim);
    let report = batch_normality(population.view(), args.groups, args.group_size, seed)?;

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut w = create(&args.out.join("normality.csv"))?;
    report.write_csv(&mut w)?;
    w.flush()?;

    let limit = args.cosine_limit.min(population.nrows());
    let hist = pairwise_cosine_histogram(population.slice(ndarray::s![..limit, ..]), args.bins)?;
    let mut w = create(&args.out.join("cosine_histogram.csv"))?;
    writeln!(w, "bin_low,bin_high,count")?;
    for (edge, count) in hist.edges.windows(2).zip(&hist.counts) {
        writeln!(w, "{},{},{}", edge[0], edge[1], count)?;
    }
    w.flush()?;

    let mut value: serde_json::Value = serde_json::from_str(&report.summary_json()?)?;
    value["population"] = json!(format!("{:?}", args.population).to_lowercase());
    value["population_size"] = json!(population.nrows());
    value["cosine"] = json!({
        "vectors": limit,
        "mean": hist.mean,
        "std": hist.std,
        "inv_sqrt_dim": 1.0 / (dim as f64).sqrt(),
    });
    fs::write(args.out.join("summary.json"), serde_json::to_string_pretty(&value)? + "\n")
        .with_context(|| format!("writing {}", args.out.join("summary.json").display()))?;
    summary(json!({
        "command": "stats",
        "out": args.out,
        "frac_ad_pass": report.frac_ad_pass,
        "frac_dp_pass": report.frac_dp_pass,
    }));
    Ok(())
}

pub fn perturb(args: &PerturbArgs, seed: u64) -> Result<()> {
    let manifest = read_manifest(&args.manifest)?;
    let insert = match (args.kind, &args.vector) {
        (PerturbKind::Insert, Some(path)) => Some(read_sequence(path)?.frame(0).to_vec()),
        (PerturbKind::Insert, None) => bail!(Error::InvalidArgument("--kind insert needs --vector".into())),
        (_, Some(_)) => bail!(Error::ConfigConflict("--vector only applies to --kind insert".into())),
        _ => None,
    };
    let videos = load_all(&manifest, &args.load)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut entries = Vec::with_capacity(videos.len());
    for (i, (video, entry)) in videos.iter().zip(&manifest.entries).enumerate() {
        let kind = match args.kind {
            PerturbKind::Reverse => Perturbation::Reverse,
            PerturbKind::Shuffle => Perturbation::ShuffleConsecutive {
                seed: seed::derive(seed, &[tag::SHUFFLE, i as u64]),
            },
            PerturbKind::Insert => Perturbation::InsertVector {
                position: args.position.unwrap_or(video.num_frames() / 2),
                vector: insert.clone().expect("checked above"),
            },
        };
        let out = perturb_sequence(video, &kind)?;
        let rel = format!("{}.emb", entry.video_id);
        write_sequence(&out, args.out.join(&rel))?;
        entries.push(ManifestEntry {
            path: rel.into(),
            ..entry.clone()
        });
    }
    let out_manifest = DatasetManifest::new(entries)?;
    write_manifest(&out_manifest, args.out.join("manifest.jsonl"))?;
    summary(json!({"command": "perturb", "manifest": args.out.join("manifest.jsonl"), "videos": videos.len()}));
    Ok(())
}
