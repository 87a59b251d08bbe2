//! Experiment drivers shared by the binary and the test suites.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{CorruptionModel, CorruptionSpec, ToyParams, generate_toy};
use crate::linalg::{eig_symmetrized, symmetrize, thin_svd};
use crate::prox::{psd_eig_threshold_raw, svt_raw};
use crate::segmentation::{AffinityMode, affinity_from_representation, spectral_cluster};
use crate::solver::{AlmConfig, NoiseNorm, SpectrumReport, StepTiming, solve, spectrum_report};
use crate::{Error, Mat, Result};

/// Environment variable capping repetition-level parallelism.
pub const THREADS_ENV: &str = "LOWRANKSEG_THREADS";

/// Added to a data seed to obtain the seed of its corruption draw.
pub const CORRUPTION_SEED_OFFSET: u64 = 1000;

/// Default trade-off weight for `noise-compare`.
pub const NOISE_COMPARE_LAMBDA: f64 = 0.15;

/// Parses `start:step:end` (inclusive), a comma list, or a single value.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let num = |s: &str| -> Result<f64> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| Error::Parameter(format!("invalid number {s:?} in grid {spec:?}")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Parameter(format!("non-finite value in grid {spec:?}")))
        }
    };
    let parts: Vec<&str> = spec.split(':').collect();
    let values = match parts.as_slice() {
        [start, step, end] => {
            let (start, step, end) = (num(start)?, num(step)?, num(end)?);
            if step <= 0.0 {
                return Err(Error::Parameter(format!("grid step must be positive, got {step}")));
            }
            if end < start {
                Vec::new()
            } else {
                let count = ((end - start) / step + 1e-9).floor() as usize + 1;
                (0..count)
                    .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
                    .collect()
            }
        }
        [list] => list
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(num)
            .collect::<Result<Vec<_>>>()?,
        _ => return Err(Error::Parameter(format!("malformed grid {spec:?}"))),
    };
    if values.is_empty() {
        return Err(Error::Parameter(format!("grid {spec:?} is empty")));
    }
    Ok(values)
}

/// Thread cap from [`THREADS_ENV`]; 1 when unset.
pub fn thread_count() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(1),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::Parameter(format!("{THREADS_ENV} must be a positive integer, got {s:?}"))),
        },
    }
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Parameter(format!("cannot build thread pool: {e}")))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub psd: bool,
    pub iterations: usize,
    pub converged: bool,
    pub spectrum: SpectrumReport,
    /// Largest per-entry gap between the sorted eigenvalues and singular values.
    pub eig_sv_gap: f64,
    pub timing: StepTiming,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VariantGap {
    pub lambda: f64,
    /// Largest per-entry gap between the two sorted eigen-spectra.
    pub eigenvalue_gap: f64,
    /// `‖z_psd − z_lrr‖_F / ‖z_lrr‖_F`
    pub relative_difference: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    /// Filled when both variants ran at a λ.
    pub cross_variant: Vec<VariantGap>,
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Solves at every `(λ, variant)` pair and reports the spectra.
pub fn spectrum_sweep(x: &Mat, lambdas: &[f64], variants: &[bool], base: &AlmConfig) -> Result<SweepOutput> {
    let mut rows = Vec::new();
    let mut cross_variant = Vec::new();
    for &lambda in lambdas {
        let mut zs: Vec<(bool, Mat, Vec<f64>)> = Vec::new();
        for &psd in variants {
            let cfg = AlmConfig { lambda, psd, ..*base };
            let res = solve(x, &cfg)?;
            let spectrum = spectrum_report(&res.z)?;
            let eig_sv_gap = max_gap(&spectrum.eigenvalues, &spectrum.singular_values);
            zs.push((psd, res.z, spectrum.eigenvalues.clone()));
            rows.push(SweepRow {
                lambda,
                psd,
                iterations: res.iterations,
                converged: res.converged,
                spectrum,
                eig_sv_gap,
                timing: res.timing,
            });
        }
        let with = zs.iter().find(|v| v.0);
        let without = zs.iter().find(|v| !v.0);
        if let (Some((_, zp, ep)), Some((_, zl, el))) = (with, without) {
            let denom = zl.frobenius();
            let diff = (zp - zl).frobenius();
            cross_variant.push(VariantGap {
                lambda,
                eigenvalue_gap: max_gap(ep, el),
                relative_difference: if denom > 0.0 { diff / denom } else { diff },
            });
        }
    }
    Ok(SweepOutput { rows, cross_variant })
}

/// Plot table: `lambda, psd, iterations, eigenvalues…, singular values…` per row.
pub fn sweep_table(rows: &[SweepRow]) -> Result<Mat> {
    let values: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            let mut v = vec![r.lambda, if r.psd { 1.0 } else { 0.0 }, r.iterations as f64];
            v.extend(&r.spectrum.eigenvalues);
            v.extend(&r.spectrum.singular_values);
            v
        })
        .collect();
    let cols = values.first().map_or(0, Vec::len);
    Mat::from_row_major(values.len(), cols, values.concat())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NoiseCompareParams {
    pub fractions: Vec<f64>,
    pub seeds: Vec<u64>,
    pub lambda: f64,
    pub model: CorruptionModel,
    pub sigma_scale: f64,
    pub psd: bool,
    pub max_iter: usize,
    pub toy: ToyParams,
}

impl NoiseCompareParams {
    pub fn new(fractions: Vec<f64>, seeds: Vec<u64>, lambda: f64) -> Self {
        Self {
            fractions,
            seeds,
            lambda,
            model: CorruptionModel::RandomEntries,
            sigma_scale: 0.3,
            psd: true,
            max_iter: AlmConfig::default().max_iter,
            toy: ToyParams::new(0),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AccuracyStats {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    /// One entry per seed, in seed order.
    pub accuracies: Vec<f64>,
    pub all_converged: bool,
}

impl AccuracyStats {
    fn from_runs(runs: &[(f64, bool)]) -> Self {
        let n = runs.len() as f64;
        let accuracies: Vec<f64> = runs.iter().map(|r| r.0).collect();
        let mean = accuracies.iter().sum::<f64>() / n;
        let var = accuracies.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
        Self { mean, std: var.sqrt(), accuracies, all_converged: runs.iter().all(|r| r.1) }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NoiseRow {
    pub fraction: f64,
    pub l1: AccuracyStats,
    pub l21: AccuracyStats,
}

fn noise_run(p: &NoiseCompareParams, fraction: f64, seed: u64, norm: NoiseNorm) -> Result<(f64, bool)> {
    let ds = generate_toy(&ToyParams { seed, ..p.toy })?;
    let spec = CorruptionSpec {
        model: p.model,
        fraction,
        sigma_scale: p.sigma_scale,
        seed: seed + CORRUPTION_SEED_OFFSET,
    };
    let (ds, _) = ds.corrupted(&spec)?;
    let cfg = AlmConfig {
        lambda: p.lambda,
        noise_norm: norm,
        psd: p.psd,
        max_iter: p.max_iter,
        ..AlmConfig::default()
    };
    let res = solve(&ds.x, &cfg)?;
    let mode = if p.psd { AffinityMode::PsdDirect } else { AffinityMode::AbsSym };
    let w = affinity_from_representation(&res.z, mode)?;
    let clusters = spectral_cluster(&w, p.toy.num_subspaces, seed)?.with_truth(&ds.labels)?;
    Ok((clusters.accuracy.expect("truth supplied"), res.converged))
}

/// Segmentation accuracy of both noise norms over corruption fractions and seeds.
pub fn noise_compare(p: &NoiseCompareParams, threads: usize) -> Result<Vec<NoiseRow>> {
    if p.seeds.is_empty() {
        return Err(Error::Parameter("at least one seed is required".into()));
    }
    if p.fractions.is_empty() {
        return Err(Error::Parameter("at least one fraction is required".into()));
    }
    let mut seeds = p.seeds.clone();
    seeds.sort_unstable();
    let norms = [NoiseNorm::L1, NoiseNorm::L21];
    let mut jobs = Vec::with_capacity(p.fractions.len() * norms.len() * seeds.len());
    for &f in &p.fractions {
        for nn in norms {
            jobs.extend(seeds.iter().map(|&s| (f, s, nn)));
        }
    }
    let runs: Vec<(f64, bool)> = pool(threads)?.install(|| {
        jobs.par_iter()
            .map(|&(f, s, nn)| noise_run(p, f, s, nn))
            .collect::<Result<Vec<_>>>()
    })?;
    let per = p.seeds.len();
    Ok(p
        .fractions
        .iter()
        .zip(runs.chunks(2 * per))
        .map(|(&fraction, chunk)| NoiseRow {
            fraction,
            l1: AccuracyStats::from_runs(&chunk[..per]),
            l21: AccuracyStats::from_runs(&chunk[per..]),
        })
        .collect())
}

/// Median wall-clock seconds for one size.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BenchTiming {
    pub eig: f64,
    pub svd: f64,
    pub j_step_psd: f64,
    pub j_step_lrr: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub reps: usize,
    pub timing: BenchTiming,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) }
}

fn time_reps(reps: usize, mut f: impl FnMut() -> Result<()>) -> Result<f64> {
    let mut samples = Vec::with_capacity(reps);
    for _ in 0..reps {
        let t = Instant::now();
        f()?;
        samples.push(t.elapsed().as_secs_f64());
    }
    Ok(median(samples))
}

/// Symmetric eigen-decomposition vs SVD, and the two J-step variants, per size.
pub fn bench(sizes: &[usize], reps: usize, seed: u64) -> Result<Vec<BenchRow>> {
    if reps == 0 {
        return Err(Error::Parameter("reps must be at least 1".into()));
    }
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::Parameter("sizes must be a nonempty list of positive integers".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sizes
        .iter()
        .map(|&n| {
            let a = Mat::random_normal(n, n, &mut rng);
            let s = symmetrize(a.as_faer());
            let tau = 1.0;
            let timing = BenchTiming {
                eig: time_reps(reps, || eig_symmetrized(s.as_ref()).map(drop))?,
                svd: time_reps(reps, || thin_svd(a.as_faer()).map(drop))?,
                j_step_psd: time_reps(reps, || psd_eig_threshold_raw(a.as_faer(), tau).map(drop))?,
                j_step_lrr: time_reps(reps, || svt_raw(a.as_faer(), tau).map(drop))?,
            };
            Ok(BenchRow { n, reps, timing })
        })
        .collect()
}
