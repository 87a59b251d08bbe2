//! Low-rank representation solvers.
//!
//! Clean data has a closed-form answer ([`lrr_closed_form`]): the projector onto the row
//! space of `X`, which is simultaneously the unique LRR minimizer and the unique
//! PSD-constrained minimizer. Noisy data is handled by [`solve`], an inexact augmented
//! Lagrange multiplier scheme for
//!
//! ```text
//! min ‖J‖_* + λ‖E‖_ℓ   s.t.  X = XZ + E,  Z = J  (,  J ⪰ 0)
//! ```
//!
//! Each iteration updates `J` by a nuclear-norm proximal map (eigenvalue thresholding
//! with the PSD constraint, SVT without it), `Z` by a cached Cholesky solve, `E` by ℓ1 or
//! ℓ2,1 shrinkage, then the multipliers `Y1`, `Y2` and the penalty `μ`.

use std::time::Instant;

use faer::linalg::solvers::{Llt, Solve};
use faer::{MatRef, Scale, Side};
use serde::{Deserialize, Serialize};

use crate::linalg::{all_finite, eig_symmetrized, max_abs, row_space_projector, symmetrize};
use crate::prox::{psd_eig_threshold_raw, shrink_l1_raw, shrink_l21_raw, svt_raw};
use crate::{Error, Mat, Result, Step};

/// Unique minimizer of `‖Z‖_*` subject to `X = XZ`: the row-space projector `V·Vᵀ`.
pub fn lrr_closed_form(x: &Mat) -> Mat {
    row_space_projector(x)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum NoiseNorm {
    /// Entrywise ℓ1: scattered corruptions.
    L1,
    /// Column ℓ2,1: sample-specific corruptions.
    L21,
}

/// Inexact ALM hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlmConfig {
    pub lambda: f64,
    pub noise_norm: NoiseNorm,
    pub mu0: f64,
    pub rho: f64,
    pub mu_max: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Constrain the representation to the PSD cone.
    pub psd: bool,
}

impl Default for AlmConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            noise_norm: NoiseNorm::L21,
            mu0: 1e-6,
            rho: 1.1,
            mu_max: 1e10,
            tol: 1e-6,
            max_iter: 1000,
            psd: true,
        }
    }
}

impl AlmConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Parameter(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("lambda", self.lambda)?;
        positive("mu0", self.mu0)?;
        positive("mu_max", self.mu_max)?;
        positive("tol", self.tol)?;
        if !(self.rho > 1.0 && self.rho.is_finite()) {
            return Err(Error::Parameter(format!("rho must exceed 1, got {}", self.rho)));
        }
        if self.mu0 >= self.mu_max {
            return Err(Error::Parameter(format!(
                "mu0 ({}) must be below mu_max ({})",
                self.mu0, self.mu_max
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Parameter("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Max-abs of `X − XZ − E` (for PSD runs, the larger of that and `X − XJ − E`).
    pub primal_residual: f64,
    /// Max-abs of `Z − J`.
    pub gap: f64,
    /// `‖J‖_* + λ‖E‖_ℓ`.
    pub objective: f64,
}

/// Wall-clock seconds accumulated per sub-step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepTiming {
    pub z_step: f64,
    pub e_step: f64,
    pub j_step: f64,
    pub multiplier_step: f64,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    /// `n × n` representation; for PSD runs this is the final `J`.
    pub z: Mat,
    pub e: Mat,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<IterationRecord>,
    pub timing: StepTiming,
}

/// Cholesky factor of `XᵀX + I`, reused by every Z-step of a solve.
pub struct GramFactor {
    llt: Llt<f64>,
    n: usize,
}

impl GramFactor {
    pub fn new(x: &Mat) -> Result<Self> {
        let xf = x.as_faer();
        let n = xf.ncols();
        let mut gram = xf.transpose() * xf;
        for i in 0..n {
            gram[(i, i)] += 1.0;
        }
        let llt = gram
            .llt(Side::Lower)
            .map_err(|e| Error::NonFinite(format!("XᵀX + I is not factorizable: {e:?}")))?;
        Ok(Self { llt, n })
    }

    pub fn dim(&self) -> usize {
        self.n
    }
}

/// Exact minimizer of the augmented Lagrangian in `Z`:
/// solves `(XᵀX + I)·Z = Xᵀ(X − E) + J + (XᵀY1 − Y2)/μ`.
pub fn update_coefficient(
    x: &Mat,
    e: &Mat,
    j: &Mat,
    y1: &Mat,
    y2: &Mat,
    mu: f64,
    factor: &GramFactor,
) -> Result<Mat> {
    let (d, n) = x.shape();
    let conformant = e.shape() == (d, n)
        && y1.shape() == (d, n)
        && j.shape() == (n, n)
        && y2.shape() == (n, n)
        && factor.dim() == n;
    if !conformant {
        return Err(Error::Dimension(format!(
            "Z-step operands: X {:?}, E {:?}, J {:?}, Y1 {:?}, Y2 {:?}, factor {}",
            x.shape(),
            e.shape(),
            j.shape(),
            y1.shape(),
            y2.shape(),
            factor.dim()
        )));
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::Parameter(format!("mu must be positive, got {mu}")));
    }
    let z = z_step(x.as_faer(), e.as_faer(), j.as_faer(), y1.as_faer(), y2.as_faer(), mu, factor);
    Mat::from_faer(z)
}

fn z_step(
    x: MatRef<'_, f64>,
    e: MatRef<'_, f64>,
    j: MatRef<'_, f64>,
    y1: MatRef<'_, f64>,
    y2: MatRef<'_, f64>,
    mu: f64,
    factor: &GramFactor,
) -> faer::Mat<f64> {
    let inv_mu = 1.0 / mu;
    // Xᵀ(X − E + Y1/μ) + J − Y2/μ
    let inner = x - e + Scale(inv_mu) * y1;
    let mut rhs = x.transpose() * &inner + j - Scale(inv_mu) * y2;
    factor.llt.solve_in_place(&mut rhs);
    rhs
}

fn guard(m: MatRef<'_, f64>, step: Step, iteration: usize) -> Result<()> {
    if all_finite(m) { Ok(()) } else { Err(Error::Divergence { step, iteration }) }
}

/// Robust LRR (`cfg.psd == false`) or robust LRR-PSD (`cfg.psd == true`) by inexact ALM.
///
/// Starts from all-zero variables. Stops once both max-abs residuals are within
/// `cfg.tol`; hitting `cfg.max_iter` yields `converged == false`, not an error.
pub fn solve(x: &Mat, cfg: &AlmConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let factor = GramFactor::new(x)?;
    let xf = x.as_faer();
    let (d, n) = x.shape();

    let mut z = faer::Mat::<f64>::zeros(n, n);
    let mut j = faer::Mat::<f64>::zeros(n, n);
    let mut e = faer::Mat::<f64>::zeros(d, n);
    let mut y1 = faer::Mat::<f64>::zeros(d, n);
    let mut y2 = faer::Mat::<f64>::zeros(n, n);
    let mut mu = cfg.mu0;

    let mut timing = StepTiming::default();
    let mut history = Vec::new();
    let mut converged = false;

    for iteration in 1..=cfg.max_iter {
        let t = Instant::now();
        let g = &z + Scale(1.0 / mu) * &y2;
        let (j_new, nuclear) = if cfg.psd {
            psd_eig_threshold_raw(g.as_ref(), 1.0 / mu)?
        } else {
            svt_raw(g.as_ref(), 1.0 / mu)?
        };
        j = j_new;
        timing.j_step += t.elapsed().as_secs_f64();
        guard(j.as_ref(), Step::J, iteration)?;

        let t = Instant::now();
        z = z_step(xf, e.as_ref(), j.as_ref(), y1.as_ref(), y2.as_ref(), mu, &factor);
        timing.z_step += t.elapsed().as_secs_f64();
        guard(z.as_ref(), Step::Z, iteration)?;

        let t = Instant::now();
        let xz = xf * &z;
        let target = xf - &xz + Scale(1.0 / mu) * &y1;
        let shrink = cfg.lambda / mu;
        e = match cfg.noise_norm {
            NoiseNorm::L1 => shrink_l1_raw(target.as_ref(), shrink),
            NoiseNorm::L21 => shrink_l21_raw(target.as_ref(), shrink),
        };
        timing.e_step += t.elapsed().as_secs_f64();
        guard(e.as_ref(), Step::E, iteration)?;

        let t = Instant::now();
        let r1 = xf - &xz - &e;
        let r2 = &z - &j;
        let mut primal = max_abs(r1.as_ref());
        if cfg.psd {
            // The PSD run returns J, so J must be feasible too.
            let rj = xf - xf * &j - &e;
            primal = primal.max(max_abs(rj.as_ref()));
        }
        let gap = max_abs(r2.as_ref());
        let noise = match cfg.noise_norm {
            NoiseNorm::L1 => l1(e.as_ref()),
            NoiseNorm::L21 => l21(e.as_ref()),
        };
        history.push(IterationRecord {
            iteration,
            primal_residual: primal,
            gap,
            objective: nuclear + cfg.lambda * noise,
        });
        if primal <= cfg.tol && gap <= cfg.tol {
            converged = true;
            timing.multiplier_step += t.elapsed().as_secs_f64();
            break;
        }
        y1 += Scale(mu) * &r1;
        y2 += Scale(mu) * &r2;
        mu = (cfg.rho * mu).min(cfg.mu_max);
        timing.multiplier_step += t.elapsed().as_secs_f64();
        guard(y1.as_ref(), Step::Multiplier, iteration)?;
        guard(y2.as_ref(), Step::Multiplier, iteration)?;
    }

    let z = if cfg.psd { j } else { z };
    Ok(SolveResult {
        z: Mat::from_faer_unchecked(z),
        e: Mat::from_faer_unchecked(e),
        iterations: history.len(),
        converged,
        history,
        timing,
    })
}

fn l1(m: MatRef<'_, f64>) -> f64 {
    (0..m.ncols()).map(|j| (0..m.nrows()).map(|i| m[(i, j)].abs()).sum::<f64>()).sum()
}

fn l21(m: MatRef<'_, f64>) -> f64 {
    (0..m.ncols()).map(|j| m.col(j).norm_l2()).sum()
}

/// Thresholds reported by [`spectrum_report`].
pub const SPECTRUM_THRESHOLDS: [f64; 2] = [1e-3, 0.5];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCount {
    pub threshold: f64,
    pub eigenvalues: usize,
    pub singular_values: usize,
}

/// Sorted spectra of a learned representation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// Eigenvalues of `(Z + Zᵀ)/2`, descending.
    pub eigenvalues: Vec<f64>,
    /// Singular values of `Z`, descending.
    pub singular_values: Vec<f64>,
    pub count_above: Vec<ThresholdCount>,
}

impl SpectrumReport {
    pub fn eigen_count_above(&self, threshold: f64) -> usize {
        self.eigenvalues.iter().filter(|&&l| l > threshold).count()
    }
}

pub fn spectrum_report(z: &Mat) -> Result<SpectrumReport> {
    if !z.is_square() {
        return Err(Error::Dimension(format!(
            "spectrum of a non-square {}×{} matrix",
            z.rows(),
            z.cols()
        )));
    }
    let (_, eigenvalues) = eig_symmetrized(symmetrize(z.as_faer()).as_ref())?;
    let singular_values = crate::linalg::singular_values(z);
    let count_above = SPECTRUM_THRESHOLDS
        .iter()
        .map(|&threshold| ThresholdCount {
            threshold,
            eigenvalues: eigenvalues.iter().filter(|&&l| l > threshold).count(),
            singular_values: singular_values.iter().filter(|&&s| s > threshold).count(),
        })
        .collect();
    Ok(SpectrumReport { eigenvalues, singular_values, count_above })
}
