//! Normality tests and unit-sphere diagnostics.
//!
//! These run in `f64` regardless of the scalar type used for scoring: they
//! are offline diagnostics over moderate sample counts.

use std::f64::consts::SQRT_2;

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::seed::{self, tag};

/// Critical value for A² with mean and variance estimated from the sample.
pub const AD_THRESHOLD: f64 = 0.752;
pub const DP_ALPHA: f64 = 0.05;
pub const AD_MIN_SAMPLES: usize = 8;
pub const DP_MIN_SAMPLES: usize = 20;
/// Samples per DP test in [`sphere_projection_check`].
pub const SPHERE_GROUP_SIZE: usize = 50;

const CDF_CLAMP: f64 = 1e-15;

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn check_sample(sample: &[f64], min: usize, what: &str) -> Result<()> {
    if sample.len() < min {
        return Err(Error::InsufficientData(format!(
            "{what} needs at least {min} observations, got {}",
            sample.len()
        )));
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            location: format!("{what} sample"),
        });
    }
    Ok(())
}

/// Anderson–Darling A² against a normal with mean and standard deviation
/// (ddof 1) estimated from the sample.
pub fn anderson_darling(sample: &[f64]) -> Result<f64> {
    check_sample(sample, AD_MIN_SAMPLES, "anderson-darling")?;
    let n = sample.len();
    let mu = mean(sample);
    let var = sample.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (n - 1) as f64;
    if var <= 0.0 {
        return Err(Error::Degenerate("anderson-darling sample has zero variance".into()));
    }
    let sd = var.sqrt();
    let mut z: Vec<f64> = sample.iter().map(|x| (x - mu) / sd).collect();
    z.sort_by(f64::total_cmp);
    let cdf: Vec<f64> = z
        .iter()
        .map(|&v| normal_cdf(v).clamp(CDF_CLAMP, 1.0 - CDF_CLAMP))
        .collect();
    let nf = n as f64;
    let s: f64 = (0..n)
        .map(|i| (2 * i + 1) as f64 * (cdf[i].ln() + (1.0 - cdf[n - 1 - i]).ln()))
        .sum();
    Ok(-nf - s / nf)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DagostinoPearson {
    pub k2: f64,
    pub p: f64,
    /// Central-moment skewness m₃/m₂^{3/2}.
    pub g1: f64,
    /// Excess kurtosis m₄/m₂² − 3.
    pub g2: f64,
    pub z1: f64,
    pub z2: f64,
}

/// D'Agostino–Pearson omnibus test.
///
/// Z₁ is D'Agostino's (1970) Johnson-SU transform of the skewness:
///   Y = g₁·√((n+1)(n+3) / (6(n−2)))
///   β₂ = 3(n²+27n−70)(n+1)(n+3) / ((n−2)(n+5)(n+7)(n+9))
///   W² = √(2(β₂−1)) − 1,  δ = 1/√(½ln W²),  α = √(2/(W²−1))
///   Z₁ = δ·asinh(Y/α)
/// Z₂ is the Anscombe–Glynn (1983) transform of b₂ = g₂ + 3:
///   E = 3(n−1)/(n+1),  Var = 24n(n−2)(n−3) / ((n+1)²(n+3)(n+5))
///   x = (b₂−E)/√Var
///   √β₁ = 6(n²−5n+2)/((n+7)(n+9)) · √(6(n+3)(n+5) / (n(n−2)(n−3)))
///   A = 6 + 8/√β₁ · (2/√β₁ + √(1+4/β₁))
///   Z₂ = ((1−2/(9A)) − ∛((1−2/A)/(1+x√(2/(A−4))))) / √(2/(9A))
/// K² = Z₁² + Z₂² is χ² with two degrees of freedom, so p = exp(−K²/2).
pub fn dagostino_pearson(sample: &[f64]) -> Result<DagostinoPearson> {
    check_sample(sample, DP_MIN_SAMPLES, "d'agostino-pearson")?;
    let n = sample.len() as f64;
    let mu = mean(sample);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in sample {
        let c = x - mu;
        let c2 = c * c;
        m2 += c2;
        m3 += c2 * c;
        m4 += c2 * c2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if m2 <= 0.0 {
        return Err(Error::Degenerate("d'agostino-pearson sample has zero variance".into()));
    }
    let g1 = m3 / m2.powf(1.5);
    let b2 = m4 / (m2 * m2);
    let g2 = b2 - 3.0;

    let y = g1 * ((n + 1.0) * (n + 3.0) / (6.0 * (n - 2.0))).sqrt();
    let beta2 = 3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) * (n + 3.0)
        / ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0));
    let w2 = (2.0 * (beta2 - 1.0)).sqrt() - 1.0;
    let delta = 1.0 / (0.5 * w2.ln()).sqrt();
    let alpha = (2.0 / (w2 - 1.0)).sqrt();
    let z1 = delta * (y / alpha).asinh();

    let e = 3.0 * (n - 1.0) / (n + 1.0);
    let var_b2 = 24.0 * n * (n - 2.0) * (n - 3.0) / ((n + 1.0) * (n + 1.0) * (n + 3.0) * (n + 5.0));
    let x = (b2 - e) / var_b2.sqrt();
    let sqrt_beta1 = 6.0 * (n * n - 5.0 * n + 2.0) / ((n + 7.0) * (n + 9.0))
        * (6.0 * (n + 3.0) * (n + 5.0) / (n * (n - 2.0) * (n - 3.0))).sqrt();
    let a = 6.0 + 8.0 / sqrt_beta1 * (2.0 / sqrt_beta1 + (1.0 + 4.0 / (sqrt_beta1 * sqrt_beta1)).sqrt());
    let term1 = 1.0 - 2.0 / (9.0 * a);
    let denom = 1.0 + x * (2.0 / (a - 4.0)).sqrt();
    if denom == 0.0 {
        return Err(Error::Degenerate("kurtosis transform is singular for this sample".into()));
    }
    let term2 = denom.signum() * ((1.0 - 2.0 / a) / denom.abs()).cbrt();
    let z2 = (term1 - term2) / (2.0 / (9.0 * a)).sqrt();

    let k2 = z1 * z1 + z2 * z2;
    Ok(DagostinoPearson {
        k2,
        p: (-0.5 * k2).exp(),
        g1,
        g2,
        z1,
        z2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoordinateStats {
    pub coordinate: usize,
    pub ad: f64,
    pub dp_k2: f64,
    pub dp_p: f64,
    pub g1: f64,
    pub g2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub ad_threshold: f64,
    pub dp_alpha: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            ad_threshold: AD_THRESHOLD,
            dp_alpha: DP_ALPHA,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    pub per_coordinate: Vec<CoordinateStats>,
    pub avg_ad: f64,
    pub avg_dp_p: f64,
    pub frac_ad_pass: f64,
    pub frac_dp_pass: f64,
    pub thresholds: Thresholds,
    pub groups: usize,
    pub group_size: usize,
}

#[derive(Serialize)]
struct ReportSummary<'a> {
    coordinates: usize,
    groups: usize,
    group_size: usize,
    avg_ad: f64,
    avg_dp_p: f64,
    frac_ad_pass: f64,
    frac_dp_pass: f64,
    thresholds: &'a Thresholds,
}

impl TestReport {
    fn from_stats(per_coordinate: Vec<CoordinateStats>, thresholds: Thresholds, groups: usize, group_size: usize) -> Self {
        let d = per_coordinate.len() as f64;
        let avg_ad = per_coordinate.iter().map(|c| c.ad).sum::<f64>() / d;
        let avg_dp_p = per_coordinate.iter().map(|c| c.dp_p).sum::<f64>() / d;
        let frac_ad_pass = per_coordinate.iter().filter(|c| c.ad < thresholds.ad_threshold).count() as f64 / d;
        let frac_dp_pass = per_coordinate.iter().filter(|c| c.dp_p > thresholds.dp_alpha).count() as f64 / d;
        Self {
            per_coordinate,
            avg_ad,
            avg_dp_p,
            frac_ad_pass,
            frac_dp_pass,
            thresholds,
            groups,
            group_size,
        }
    }

    pub fn write_csv(&self, writer: impl std::io::Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for row in &self.per_coordinate {
            w.serialize(row)?;
        }
        w.flush().map_err(|e| Error::io("<report>", e))?;
        Ok(())
    }

    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ReportSummary {
            coordinates: self.per_coordinate.len(),
            groups: self.groups,
            group_size: self.group_size,
            avg_ad: self.avg_ad,
            avg_dp_p: self.avg_dp_p,
            frac_ad_pass: self.frac_ad_pass,
            frac_dp_pass: self.frac_dp_pass,
            thresholds: &self.thresholds,
        })?)
    }
}

/// Draws `groups` random subsets of `group_size` rows, runs both tests on
/// every coordinate of every subset and averages the statistics per
/// coordinate over groups.
pub fn batch_normality(population: ArrayView2<'_, f64>, groups: usize, group_size: usize, seed: u64) -> Result<TestReport> {
    let (n, d) = population.dim();
    if groups == 0 {
        return Err(Error::InvalidArgument("at least one group is required".into()));
    }
    if d == 0 {
        return Err(Error::InvalidShape("population has zero coordinates".into()));
    }
    if n < group_size {
        return Err(Error::InsufficientData(format!(
            "population of {n} cannot fill a group of {group_size}"
        )));
    }
    let per_group: Vec<Vec<CoordinateStats>> = (0..groups)
        .into_par_iter()
        .map(|g| {
            let mut rng = seed::rng(seed, &[tag::NORMALITY_GROUP, g as u64]);
            let mut rows = index::sample(&mut rng, n, group_size).into_vec();
            rows.sort_unstable();
            let sub = population.select(Axis(0), &rows);
            sub.axis_iter(Axis(1))
                .enumerate()
                .map(|(j, col)| {
                    let col = col.to_vec();
                    let ad = anderson_darling(&col)?;
                    let dp = dagostino_pearson(&col)?;
                    Ok(CoordinateStats {
                        coordinate: j,
                        ad,
                        dp_k2: dp.k2,
                        dp_p: dp.p,
                        g1: dp.g1,
                        g2: dp.g2,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let gf = groups as f64;
    let per_coordinate = (0..d)
        .map(|j| {
            let avg = |f: fn(&CoordinateStats) -> f64| per_group.iter().map(|g| f(&g[j])).sum::<f64>() / gf;
            CoordinateStats {
                coordinate: j,
                ad: avg(|c| c.ad),
                dp_k2: avg(|c| c.dp_k2),
                dp_p: avg(|c| c.dp_p),
                g1: avg(|c| c.g1),
                g2: avg(|c| c.g2),
            }
        })
        .collect();
    Ok(TestReport::from_stats(per_coordinate, Thresholds::default(), groups, group_size))
}

/// Total-variation bound between k coordinates of a √d-scaled uniform point
/// on the unit sphere in R^d and a standard normal in R^k.
pub fn tv_bound(d: usize, k: usize) -> Result<f64> {
    if k < 1 || d < 5 || k > d - 4 {
        return Err(Error::InvalidArgument(format!(
            "projection size k={k} must satisfy 1 <= k <= d-4 for d={d}"
        )));
    }
    Ok(2.0 * (k + 3) as f64 / (d - k - 3) as f64)
}

/// Uniform draw from the unit sphere in R^d.
pub fn sphere_point<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            return g.into_iter().map(|v| v / norm).collect();
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphereCheck {
    /// Fraction of DP tests (one per group of [`SPHERE_GROUP_SIZE`] samples
    /// and projected coordinate) with p above [`DP_ALPHA`].
    pub dp_pass_rate: f64,
    pub tv_bound: f64,
    pub tests: usize,
}

/// Draws `samples` uniform sphere points in R^d, scales the first `k`
/// coordinates by √d and runs DP on them in groups of [`SPHERE_GROUP_SIZE`].
pub fn sphere_projection_check(d: usize, samples: usize, k: usize, seed: u64) -> Result<SphereCheck> {
    let bound = tv_bound(d, k)?;
    let groups = samples / SPHERE_GROUP_SIZE;
    if groups == 0 {
        return Err(Error::InsufficientData(format!(
            "need at least {SPHERE_GROUP_SIZE} samples, got {samples}"
        )));
    }
    let scale = (d as f64).sqrt();
    let passes: Vec<usize> = (0..groups)
        .into_par_iter()
        .map(|g| {
            let mut rng = seed::rng(seed, &[tag::SPHERE, g as u64]);
            let mut coords = Array2::<f64>::zeros((SPHERE_GROUP_SIZE, k));
            for mut row in coords.rows_mut() {
                let p = sphere_point(&mut rng, d);
                for (dst, src) in row.iter_mut().zip(&p[..k]) {
                    *dst = src * scale;
                }
            }
            coords
                .axis_iter(Axis(1))
                .map(|c| dagostino_pearson(&c.to_vec()).map(|r| usize::from(r.p > DP_ALPHA)))
                .sum::<Result<usize>>()
        })
        .collect::<Result<_>>()?;
    let tests = groups * k;
    Ok(SphereCheck {
        dp_pass_rate: passes.iter().sum::<usize>() as f64 / tests as f64,
        tv_bound: bound,
        tests,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    /// `bins + 1` ascending edges.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub mean: f64,
    pub std: f64,
}

impl Histogram {
    fn build(values: &[f64], lo: f64, hi: f64, bins: usize) -> Self {
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|i| lo + width * i as f64).collect();
        let mut counts = vec![0u64; bins];
        for &v in values {
            let b = (((v - lo) / width).floor().max(0.0) as usize).min(bins - 1);
            counts[b] += 1;
        }
        let m = mean(values);
        let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64;
        Self {
            edges,
            counts,
            mean: m,
            std: var.sqrt(),
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Density of a normal with the histogram's mean and std at each bin
    /// centre, for overlay plots.
    pub fn gaussian_overlay(&self) -> Vec<f64> {
        let norm = 1.0 / (self.std * (2.0 * std::f64::consts::PI).sqrt());
        self.edges
            .windows(2)
            .map(|w| {
                let z = (0.5 * (w[0] + w[1]) - self.mean) / self.std;
                norm * (-0.5 * z * z).exp()
            })
            .collect()
    }

    /// Counts divided by total and bin width.
    pub fn density(&self) -> Vec<f64> {
        let total = self.total() as f64;
        self.edges
            .windows(2)
            .zip(&self.counts)
            .map(|(w, &c)| c as f64 / (total * (w[1] - w[0])))
            .collect()
    }
}

/// Cosine similarity of every unordered pair of rows, in row-major pair order.
pub fn pairwise_cosines(vectors: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
    let n = vectors.nrows();
    if n < 2 {
        return Err(Error::InsufficientData("pairwise cosines need at least 2 vectors".into()));
    }
    let mut unit = vectors.to_owned();
    for (i, mut row) in unit.rows_mut().into_iter().enumerate() {
        let norm = row.dot(&row).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Degenerate(format!("vector {i} has no direction")));
        }
        row /= norm;
    }
    let gram = unit.dot(&unit.t());
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            out.push(gram[[i, j]].clamp(-1.0, 1.0));
        }
    }
    Ok(out)
}

/// Histogram of pairwise cosine similarities over [-1, 1].
pub fn pairwise_cosine_histogram(vectors: ArrayView2<'_, f64>, bins: usize) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::InvalidArgument("bins must be positive".into()));
    }
    let cos = pairwise_cosines(vectors)?;
    Ok(Histogram::build(&cos, -1.0, 1.0, bins))
}

/// Histogram of one coordinate over its observed range.
pub fn coordinate_histogram(values: &[f64], bins: usize) -> Result<Histogram> {
    if bins == 0 || values.is_empty() {
        return Err(Error::InvalidArgument("need values and a positive bin count".into()));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::NonFinite {
            location: "histogram values".into(),
        });
    }
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
    Ok(Histogram::build(values, lo, hi, bins))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    // Values from an independent scipy/numpy run on these exact samples.
    const SAMPLE_A: [f64; 20] = [
        0.3, -1.2, 0.8, 2.1, -0.4, 0.0, 1.5, -2.3, 0.7, -0.9,
        1.1, 0.2, -0.6, 3.0, -1.7, 0.45, -0.05, 0.95, -1.35, 0.6,
    ];

    fn sample_b() -> Vec<f64> {
        (0..25).map(|i| (-2.0 + 4.0 * i as f64 / 24.0).exp()).collect()
    }

    #[test]
    fn frozen_reference_values() {
        assert_relative_eq!(anderson_darling(&SAMPLE_A).unwrap(), 0.13065407078134683, max_relative = 1e-10);
        let r = dagostino_pearson(&SAMPLE_A).unwrap();
        assert_relative_eq!(r.k2, 0.22794008562535628, max_relative = 1e-9);
        assert_relative_eq!(r.p, 0.892284685821507, max_relative = 1e-9);
        assert_relative_eq!(r.g1, 0.13356139025124247, max_relative = 1e-12);
        assert_relative_eq!(r.g2, -0.18565672730024918, max_relative = 1e-12);

        let b = sample_b();
        assert_relative_eq!(anderson_darling(&b).unwrap(), 1.757929041728815, max_relative = 1e-10);
        let r = dagostino_pearson(&b).unwrap();
        assert_relative_eq!(r.k2, 9.061365915273626, max_relative = 1e-9);
        assert_relative_eq!(r.p, 0.010773315841338409, max_relative = 1e-9);
        assert_relative_eq!(r.g1, 1.3002255656578563, max_relative = 1e-12);
        assert_relative_eq!(r.g2, 0.636357812007859, max_relative = 1e-12);
    }

    #[test]
    fn ad_small_sample_errors() {
        assert!(matches!(anderson_darling(&[1.0; 7]), Err(Error::InsufficientData(_))));
        assert!(matches!(anderson_darling(&[1.0; 10]), Err(Error::Degenerate(_))));
        assert!(matches!(dagostino_pearson(&[1.0; 19]), Err(Error::InsufficientData(_))));
        assert!(matches!(dagostino_pearson(&[2.0; 30]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn symmetric_sample_has_zero_skew() {
        let half = [0.3, 1.7, 2.2, 0.9, 4.1, 0.05, 1.3, 2.8, 0.6, 3.3, 1.1];
        let sample: Vec<f64> = half.iter().flat_map(|&x| [x, -x]).collect();
        let r = dagostino_pearson(&sample).unwrap();
        assert_eq!(r.g1, 0.0);
        assert_eq!(r.z1, 0.0);
    }

    #[test]
    fn uniform_rejected_by_ad() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u: Vec<f64> = (0..1000).map(|_| rand::Rng::random::<f64>(&mut rng)).collect();
        assert!(anderson_darling(&u).unwrap() > 5.0);
    }

    #[test]
    fn exponential_rejected_by_dp() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let e: Vec<f64> = (0..1000).map(|_| -(1.0 - rand::Rng::random::<f64>(&mut rng)).ln()).collect();
        assert!(dagostino_pearson(&e).unwrap().p < 1e-10);
    }

    #[test]
    fn tv_bound_values() {
        assert_relative_eq!(tv_bound(1024, 1).unwrap(), 8.0 / 1020.0, max_relative = 1e-15);
        assert!(tv_bound(8, 5).is_err());
        assert!(tv_bound(8, 0).is_err());
        assert!(tv_bound(8, 4).is_ok());
    }

    #[test]
    fn cosine_trivial_cases() {
        let h = pairwise_cosine_histogram(array![[1.0, 0.0], [0.0, 2.0]].view(), 10).unwrap();
        assert_eq!(h.total(), 1);
        assert_eq!(h.counts[5], 1);
        assert_eq!(h.mean, 0.0);
        let h = pairwise_cosine_histogram(array![[1.0, 2.0], [-1.0, -2.0]].view(), 10).unwrap();
        assert_eq!(h.counts[0], 1);
        assert_relative_eq!(h.mean, -1.0, max_relative = 1e-15);
        assert!(pairwise_cosine_histogram(array![[1.0, 0.0]].view(), 10).is_err());
    }

    #[test]
    fn report_serializes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pop = Array2::from_shape_fn((100, 3), |_| rand::Rng::sample::<f64, _>(&mut rng, StandardNormal));
        let report = batch_normality(pop.view(), 3, 40, 9).unwrap();
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("coordinate,ad,dp_k2,dp_p,g1,g2\n"));
        assert_eq!(text.lines().count(), 4);
        let json: serde_json::Value = serde_json::from_str(&report.summary_json().unwrap()).unwrap();
        assert_eq!(json["groups"], 3);
        assert!(batch_normality(pop.view(), 3, 101, 9).is_err());
        assert_eq!(report, batch_normality(pop.view(), 3, 40, 9).unwrap());
    }

    proptest! {
        #[test]
        fn ad_affine_invariant(
            xs in proptest::collection::vec(-10.0f64..10.0, 8..60),
            a in 0.01f64..100.0,
            b in -50.0f64..50.0,
        ) {
            prop_assume!(xs.iter().any(|&x| (x - xs[0]).abs() > 1e-3));
            let ys: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
            let (p, q) = (anderson_darling(&xs).unwrap(), anderson_darling(&ys).unwrap());
            prop_assert!((p - q).abs() <= 1e-9 * p.abs().max(1.0));
        }

        #[test]
        fn dp_reflection(xs in proptest::collection::vec(-10.0f64..10.0, 20..80)) {
            prop_assume!(xs.iter().any(|&x| (x - xs[0]).abs() > 1e-3));
            let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
            let (p, q) = (dagostino_pearson(&xs).unwrap(), dagostino_pearson(&neg).unwrap());
            prop_assert!((p.g1 + q.g1).abs() <= 1e-10 * p.g1.abs().max(1.0));
            prop_assert!((p.g2 - q.g2).abs() <= 1e-10 * p.g2.abs().max(1.0));
            prop_assert!((p.k2 - q.k2).abs() <= 1e-9 * p.k2.max(1.0));
            prop_assert!((0.0..=1.0).contains(&p.p));
        }
    }
}
