//! Balanced real/generated evaluation splits.

use std::collections::BTreeMap;

use rand::seq::index;

use crate::embedseq::{DatasetManifest, Label};
use crate::error::{Error, Result};
use crate::seed::{self, tag};

/// Indices into a manifest's entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalSplit {
    /// `None` when all generators are pooled.
    pub generator: Option<String>,
    pub reals: Vec<usize>,
    pub generated: Vec<usize>,
}

/// Splits `n` draws over `k` sources: every source gets `n / k`, and the
/// `n % k` remainders go to sources picked uniformly without replacement.
pub fn source_quotas(n: usize, k: usize, seed: u64, split: u64) -> Vec<usize> {
    let mut quotas = vec![n / k; k];
    let mut rng = seed::rng(seed, &[tag::BALANCED, split, 0]);
    for s in index::sample(&mut rng, k, n % k) {
        quotas[s] += 1;
    }
    quotas
}

/// For each generator (or for all generated videos pooled), draws as many
/// real videos as there are generated ones, equally from each real source.
pub fn balanced_pairs(manifest: &DatasetManifest, per_generator: bool, seed: u64) -> Result<Vec<EvalSplit>> {
    let mut sources: BTreeMap<Option<&str>, Vec<usize>> = BTreeMap::new();
    let mut generators: BTreeMap<Option<&str>, Vec<usize>> = BTreeMap::new();
    for (i, e) in manifest.entries.iter().enumerate() {
        match e.label {
            Label::Real => sources.entry(e.source.as_deref()).or_default().push(i),
            Label::Generated => {
                let key = if per_generator { e.generator.as_deref() } else { None };
                generators.entry(key).or_default().push(i);
            }
            Label::Unknown => {
                return Err(Error::InvalidArgument(format!(
                    "video {} has no label; balanced splits need real or generated",
                    e.video_id
                )))
            }
        }
    }
    if generators.is_empty() {
        return Err(Error::InsufficientData("manifest has no generated videos".into()));
    }
    if sources.is_empty() {
        return Err(Error::InsufficientData("manifest has no real videos".into()));
    }
    let pools: Vec<&Vec<usize>> = sources.values().collect();

    generators
        .into_iter()
        .enumerate()
        .map(|(split, (generator, generated))| {
            let n = generated.len();
            let quotas = source_quotas(n, pools.len(), seed, split as u64);
            let mut reals = Vec::with_capacity(n);
            for (s, (pool, &q)) in pools.iter().zip(&quotas).enumerate() {
                if pool.len() < q {
                    return Err(Error::InsufficientData(format!(
                        "real source {s} has {} videos, {q} needed for generator {}",
                        pool.len(),
                        generator.unwrap_or("<all>")
                    )));
                }
                let mut rng = seed::rng(seed, &[tag::BALANCED, split as u64, 1 + s as u64]);
                reals.extend(index::sample(&mut rng, pool.len(), q).into_iter().map(|k| pool[k]));
            }
            reals.sort_unstable();
            Ok(EvalSplit {
                generator: generator.map(str::to_owned),
                reals,
                generated,
            })
        })
        .collect()
}
