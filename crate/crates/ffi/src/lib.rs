//! C ABI over `lowrankseg`.
//!
//! Matrices and solver results cross the boundary as opaque handles ([`LrsMat`],
//! [`LrsSolveResult`]) that the caller releases with the matching `_free` function.
//! Every fallible call returns an [`LrsStatus`]; on failure the message is available from
//! [`lrs_last_error_message`] on the same thread. Output handles are set to NULL before
//! any work starts, so they are NULL whenever the status is not `LRS_STATUS_OK`.
//! Matrix buffers are row-major.

use std::cell::RefCell;
use std::ffi::{CStr, CString, c_char};
use std::panic::{AssertUnwindSafe, catch_unwind};
use std::ptr;

use lowrankseg::data::{self, CorruptionModel, CorruptionSpec, ToyParams};
use lowrankseg::linalg::{self, NormKind};
use lowrankseg::segmentation::{self, AffinityMode};
use lowrankseg::solver::{self, AlmConfig, NoiseNorm, SolveResult};
use lowrankseg::{Error, Mat, prox};

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LrsStatus {
    Ok = 0,
    NullPointer = 1,
    Dimension = 2,
    Symmetry = 3,
    Parameter = 4,
    NonFinite = 5,
    Divergence = 6,
    Decomposition = 7,
    Parse = 8,
    Io = 9,
    InvalidUtf8 = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LrsNoiseNorm {
    L1 = 0,
    L21 = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LrsNormKind {
    Nuclear = 0,
    Frobenius = 1,
    Operator = 2,
    L1 = 3,
    L21 = 4,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LrsAffinityMode {
    AbsSym = 0,
    PsdDirect = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LrsCorruptionModel {
    RandomEntries = 0,
    SampleSpecific = 1,
}

/// Solver hyperparameters; start from [`lrs_alm_config_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct LrsAlmConfig {
    pub lambda: f64,
    pub noise_norm: LrsNoiseNorm,
    pub mu0: f64,
    pub rho: f64,
    pub mu_max: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub psd: bool,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct LrsToyParams {
    pub seed: u64,
    pub num_subspaces: usize,
    pub subspace_dim: usize,
    pub ambient_dim: usize,
    pub samples_per: usize,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct LrsCorruptionSpec {
    pub model: LrsCorruptionModel,
    pub fraction: f64,
    pub sigma_scale: f64,
    pub seed: u64,
}

/// Seconds spent in each solver sub-step.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct LrsStepTiming {
    pub z_step: f64,
    pub e_step: f64,
    pub j_step: f64,
    pub multiplier_step: f64,
}

/// Opaque dense matrix.
pub struct LrsMat(Mat);

/// Opaque solver output.
pub struct LrsSolveResult(SolveResult);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(LrsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Dimension(_) => LrsStatus::Dimension,
            Error::Symmetry { .. } => LrsStatus::Symmetry,
            Error::Parameter(_) => LrsStatus::Parameter,
            Error::NonFinite(_) => LrsStatus::NonFinite,
            Error::Divergence { .. } => LrsStatus::Divergence,
            Error::Decomposition(_) => LrsStatus::Decomposition,
            Error::Parse { .. } => LrsStatus::Parse,
            Error::Io(_) => LrsStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LrsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            LrsStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("panic: {msg}"));
            LrsStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(LrsStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn mat_ref<'a>(m: *const LrsMat, what: &str) -> Result<&'a Mat, Failure> {
    // SAFETY: the caller passes NULL or a live handle from this library.
    unsafe { m.as_ref() }.map(|h| &h.0).ok_or_else(|| null(what))
}

unsafe fn clear_out<T>(out: *mut *mut T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    // SAFETY: checked non-null; the caller guarantees it is writable.
    unsafe { *out = ptr::null_mut() };
    Ok(())
}

unsafe fn put_mat(out: *mut *mut LrsMat, m: Mat) {
    // SAFETY: `out` was validated by `clear_out`.
    unsafe { *out = Box::into_raw(Box::new(LrsMat(m))) };
}

unsafe fn slice_in<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    // SAFETY: the caller guarantees `len` readable elements at `p`.
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

unsafe fn slice_out<'a, T>(p: *mut T, len: usize, need: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    if len < need {
        return Err(Failure(LrsStatus::BufferTooSmall, format!("{what} holds {len} elements, {need} required")));
    }
    // SAFETY: the caller guarantees `len` writable elements at `p`.
    Ok(unsafe { std::slice::from_raw_parts_mut(p, need) })
}

unsafe fn path_arg(p: *const c_char) -> Result<String, Failure> {
    if p.is_null() {
        return Err(null("path"));
    }
    // SAFETY: the caller passes a NUL-terminated string.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map(str::to_owned)
        .map_err(|_| Failure(LrsStatus::InvalidUtf8, "path is not valid UTF-8".into()))
}

impl From<LrsNoiseNorm> for NoiseNorm {
    fn from(n: LrsNoiseNorm) -> Self {
        match n {
            LrsNoiseNorm::L1 => NoiseNorm::L1,
            LrsNoiseNorm::L21 => NoiseNorm::L21,
        }
    }
}

impl From<&LrsAlmConfig> for AlmConfig {
    fn from(c: &LrsAlmConfig) -> Self {
        AlmConfig {
            lambda: c.lambda,
            noise_norm: c.noise_norm.into(),
            mu0: c.mu0,
            rho: c.rho,
            mu_max: c.mu_max,
            tol: c.tol,
            max_iter: c.max_iter,
            psd: c.psd,
        }
    }
}

/// Message of the last failed call on this thread; empty after a successful call.
/// The pointer stays valid until the next call into this library on the same thread.
#[unsafe(no_mangle)]
pub extern "C" fn lrs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[unsafe(no_mangle)]
pub extern "C" fn lrs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies `rows × cols` row-major values into a new matrix.
///
/// # Safety
/// `data` must point to `rows * cols` readable doubles; `out` must be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lrs_mat_new(rows: usize, cols: usize, data: *const f64, out: *mut *mut LrsMat) -> LrsStatus {
    guard(|| unsafe {
        clear_out(out)?;
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| Failure(LrsStatus::Dimension, "matrix size overflows".into()))?;
        let values = slice_in(data, len, "data")?;
        put_mat(out, Mat::from_row_major(rows, cols, values.to_vec())?);
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lrs_mat_zeros(rows: usize, cols: usize, out: *mut *mut LrsMat) -> LrsStatus {
    guard(|| unsafe {
        clear_out(out)?;
        if rows == 0 || cols == 0 {
            return Err(Failure(LrsStatus::Dimension, "matrix dimensions must be positive".into()));
        }
        put_mat(out, Mat::zeros(rows, cols));
        Ok(())
    })
}

/// Releases a matrix; NULL is ignored.
///
/// # Safety
/// `m` must be NULL or a handle from this library that has not been freed.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lrs_mat_free(m: *mut LrsMat) {
    if !m.is_null() {
        // SAFETY: handles are created by `Box::into_raw`.
        drop(unsafe { Box::from_raw(m) });
    }
}

/// Row count, or 0 for NULL.
///
/// # Safety
/// `m` must be NULL or a live handle.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lrs_mat_rows(m: *const LrsMat) -> usize {
    unsafe { m.as_ref() }.map_or(0, |h| h.0.rows())
}

/// Column count, or 0 for NULL.
///
/// # Safety
/// `m` must be NULL or a live handle.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lrs_mat_cols(m: *const LrsMat) -> usize {
    unsafe { m.as_ref() }.map_or(0, |h| h.0.cols())
}

/// Copies the entries in row-major order into `buf` (at least `rows * cols` long).
///
/// # Safety
/// `m` must be a live handle; `buf` must point to `len` writable doubles.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lrs_mat_copy_to(m: *const LrsMat, buf: *mut f64, len: usize) -> LrsStatus {
    guard(|| unsafe {
        let m = mat_ref(m, "matrix")?;
        let values = m.to_row_major();
        slice_out(buf, len, values.len(), "buffer")?.copy_from_slice(&values);
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lrs_mat_load(path: *const c_char, out: *mut *mut LrsMat) -> LrsStatus {
    guard(|| unsafe {
        clear_out(out)?;
        let path = path_arg(path)?;
        put_mat(out, data::load_matrix(path)?);
        Ok(())
    })
}

/// # Safety
/// `m` must be a live handle; `path` must be a NUL-terminated string.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lrs_mat_save(m: *const LrsMat, path: *const c_char) -> LrsStatus {
    guard(|| unsafe {
        let m = mat_ref(m, "matrix")?;
        data::save_matrix(path_arg(path)?, m)?;
        Ok(())
    })
}

/// Default synthetic dataset shape for `seed`: 5 subspaces of dimension 4 in R^100, 20 samples each.
#[unsafe(no_mangle)]
pub extern "C" fn lrs_toy_params_default(seed: u64) -> LrsToyParams {
    let p = ToyParams::new(seed);
    LrsToyParams {
        seed: p.seed,
        num_subspaces: p.num_subspaces,
        subspace_dim: p.subspace_dim,
        ambient_dim: p.ambient_dim,
        samples_per: p.samples_per,
    }
}

/// Generates the synthetic dataset. `labels` may be NULL; otherwise it receives one
/// label per sample and must hold at least `num_subspaces * samples_per` entries.
///
/// # Safety
/// `params` must be readable, `x_out` writable, and `labels` NULL or `labels_len` writable entries.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lrs_generate_toy(
    params: *const LrsToyParams,
    x_out: *mut *mut LrsMat,
    labels: *mut usize,
    labels_len: usize,
) -> LrsStatus {
    guard(|| unsafe {
        clear_out(x_out)?;
        let p = params.as_ref().ok_or_else(|| null("params"))?;
        let ds = data::generate_toy(&ToyParams {
            seed: p.seed,
            num_subspaces: p.num_subspaces,
            subspace_dim: p.subspace_dim,
            ambient_dim: p.ambient_dim,
            samples_per: p.samples_per,
        })?;
        if !labels.is_null() {
            slice_out(labels, labels_len, ds.labels.len(), "labels")?.copy_from_slice(&ds.labels);
        }
        put_mat(x_out, ds.x);
        Ok(())
    })
}

/// Returns a corrupted copy of `x`.
///
/// # Safety
/// `x` must be a live handle, `spec` readable and `out` writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lrs_corrupt(x: *const LrsMat, spec: *const LrsCorruptionSpec, out: *mut *mut LrsMat) -> LrsStatus {
    guard(|| unsafe {
        clear_out(out)?;
        let x = mat_ref(x, "x")?;
        let s = spec.as_ref().ok_or_else(|| null("spec"))?;
        let spec = CorruptionSpec {
            model: match s.model {
                LrsCorruptionModel::RandomEntries => CorruptionModel::RandomEntries,
                LrsCorruptionModel::SampleSpecific => CorruptionModel::SampleSpecific,
            },
            fraction: s.fraction,
            sigma_scale: s.sigma_scale,
            seed: s.seed,
        };
        put_mat(out, data::corrupt(x, &spec)?.0);
        Ok(())
    })
}

/// # Safety
/// `a` must be a live handle; `out` must be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lrs_norm(a: *const LrsMat, kind: LrsNormKind, out: *mut f64) -> LrsStatus {
    guard(|| unsafe {
        let a = mat_ref(a, "matrix")?;
        let kind = match kind {
            LrsNormKind::Nuclear => NormKind::Nuclear,
            LrsNormKind::Frobenius => NormKind::Frobenius,
            LrsNormKind::Operator => NormKind::Operator,
            LrsNormKind::L1 => NormKind::L1,
            LrsNormKind::L21 => NormKind::L21,
        };
        *out.as_mut().ok_or_else(|| null("out"))? = linalg::norm(a, kind);
        Ok(())
    })
}

/// # Safety
/// `a` must be a live handle; `out` must be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lrs_numerical_rank(a: *const LrsMat, rel_tol: f64, out: *mut usize) -> LrsStatus {
    guard(|| unsafe {
        let a = mat_ref(a, "matrix")?;
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(Failure(LrsStatus::Parameter, format!("rel_tol {rel_tol} outside (0, 1)")));
        }
        *out.as_mut().ok_or_else(|| null("out"))? = linalg::numerical_rank(a, rel_tol);
        Ok(())
    })
}

/// Eigenvalues of a symmetric matrix, descending, into `values` (length ≥ n).
///
/// # Safety
/// `s` must be a live handle; `values` must point to `len` writable doubles.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lrs_eig_sym_values(s: *const LrsMat, symmetry_tol: f64, values: *mut f64, len: usize) -> LrsStatus {
    guard(|| unsafe {
        let s = mat_ref(s, "matrix")?;
        let e = linalg::eig_sym(s, symmetry_tol)?;
        slice_out(values, len, e.values.len(), "values")?.copy_from_slice(&e.values);
        Ok(())
    })
}

/// Singular values, descending, into `values` (length ≥ min(rows, cols)).
///
/// # Safety
/// `a` must be a live handle; `values` must point to `len` writable doubles.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lrs_singular_values(a: *const LrsMat, values: *mut f64, len: usize) -> LrsStatus {
    guard(|| unsafe {
        let a = mat_ref(a, "matrix")?;
        let sv = linalg::svd(a)?.singular_values;
        slice_out(values, len, sv.len(), "values")?.copy_from_slice(&sv);
        Ok(())
    })
}

unsafe fn unary(a: *const LrsMat, out: *mut *mut LrsMat, f: impl FnOnce(&Mat) -> lowrankseg::Result<Mat>) -> LrsStatus {
    guard(|| unsafe {
        clear_out(out)?;
        let a = mat_ref(a, "matrix")?;
        put_mat(out, f(a)?);
        Ok(())
    })
}

/// Row-space projector: the clean-data minimizer of the nuclear norm subject to `X = XZ`.
///
/// # Safety
/// `x` must be a live handle; `out` must be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lrs_lrr_closed_form(x: *const LrsMat, out: *mut *mut LrsMat) -> LrsStatus {
    unsafe { unary(x, out, |x| Ok(solver::lrr_closed_form(x))) }
}

/// Singular value thresholding.
///
/// # Safety
/// `g` must be a live handle; `out` must be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lrs_svt(g: *const LrsMat, tau: f64, out: *mut *mut LrsMat) -> LrsStatus {
    unsafe { unary(g, out, |g| prox::svt(g, tau)) }
}

/// Nuclear-norm proximal map on the PSD cone via eigenvalue thresholding.
///
/// # Safety
/// `g` must be a live handle; `out` must be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lrs_psd_eig_threshold(g: *const LrsMat, tau: f64, out: *mut *mut LrsMat) -> LrsStatus {
    unsafe { unary(g, out, |g| prox::psd_eig_threshold(g, tau)) }
}

/// # Safety
/// `g` must be a live handle; `out` must be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lrs_shrink_l1(g: *const LrsMat, tau: f64, out: *mut *mut LrsMat) -> LrsStatus {
    unsafe { unary(g, out, |g| prox::shrink_l1(g, tau)) }
}

/// # Safety
/// `g` must be a live handle; `out` must be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lrs_shrink_l21(g: *const LrsMat, tau: f64, out: *mut *mut LrsMat) -> LrsStatus {
    unsafe { unary(g, out, |g| prox::shrink_l21(g, tau)) }
}

#[unsafe(no_mangle)]
pub extern "C" fn lrs_alm_config_default() -> LrsAlmConfig {
    let c = AlmConfig::default();
    LrsAlmConfig {
        lambda: c.lambda,
        noise_norm: match c.noise_norm {
            NoiseNorm::L1 => LrsNoiseNorm::L1,
            NoiseNorm::L21 => LrsNoiseNorm::L21,
        },
        mu0: c.mu0,
        rho: c.rho,
        mu_max: c.mu_max,
        tol: c.tol,
        max_iter: c.max_iter,
        psd: c.psd,
    }
}

/// Runs the inexact ALM solver. Reaching `max_iter` is not an error: check
/// [`lrs_solve_result_converged`].
///
/// # Safety
/// `x` must be a live handle, `cfg` readable and `out` writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lrs_solve(x: *const LrsMat, cfg: *const LrsAlmConfig, out: *mut *mut LrsSolveResult) -> LrsStatus {
    guard(|| unsafe {
        clear_out(out)?;
        let x = mat_ref(x, "x")?;
        let cfg = cfg.as_ref().ok_or_else(|| null("config"))?;
        let res = solver::solve(x, &AlmConfig::from(cfg))?;
        *out = Box::into_raw(Box::new(LrsSolveResult(res)));
        Ok(())
    })
}

/// # Safety
/// `r` must be NULL or a result from [`lrs_solve`] that has not been freed.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lrs_solve_result_free(r: *mut LrsSolveResult) {
    if !r.is_null() {
        // SAFETY: results are created by `Box::into_raw`.
        drop(unsafe { Box::from_raw(r) });
    }
}

unsafe fn result_ref<'a>(r: *const LrsSolveResult) -> Result<&'a SolveResult, Failure> {
    unsafe { r.as_ref() }.map(|h| &h.0).ok_or_else(|| null("result"))
}

/// Copies the representation `Z` (`n × n`) into a new matrix.
///
/// # Safety
/// `r` must be a live result; `out` must be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lrs_solve_result_z(r: *const LrsSolveResult, out: *mut *mut LrsMat) -> LrsStatus {
    guard(|| unsafe {
        clear_out(out)?;
        put_mat(out, result_ref(r)?.z.clone());
        Ok(())
    })
}

/// Copies the noise estimate `E` (`d × n`) into a new matrix.
///
/// # Safety
/// `r` must be a live result; `out` must be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lrs_solve_result_e(r: *const LrsSolveResult, out: *mut *mut LrsMat) -> LrsStatus {
    guard(|| unsafe {
        clear_out(out)?;
        put_mat(out, result_ref(r)?.e.clone());
        Ok(())
    })
}

/// Iteration count, or 0 for NULL.
///
/// # Safety
/// `r` must be NULL or a live result.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lrs_solve_result_iterations(r: *const LrsSolveResult) -> usize {
    unsafe { r.as_ref() }.map_or(0, |h| h.0.iterations)
}

/// Whether both residuals reached the tolerance; false for NULL.
///
/// # Safety
/// `r` must be NULL or a live result.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lrs_solve_result_converged(r: *const LrsSolveResult) -> bool {
    unsafe { r.as_ref() }.is_some_and(|h| h.0.converged)
}

/// # Safety
/// `r` must be a live result; `out` must be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lrs_solve_result_timing(r: *const LrsSolveResult, out: *mut LrsStepTiming) -> LrsStatus {
    guard(|| unsafe {
        let t = result_ref(r)?.timing;
        *out.as_mut().ok_or_else(|| null("out"))? = LrsStepTiming {
            z_step: t.z_step,
            e_step: t.e_step,
            j_step: t.j_step,
            multiplier_step: t.multiplier_step,
        };
        Ok(())
    })
}

/// Symmetric nonnegative affinity from a representation.
///
/// # Safety
/// `z` must be a live handle; `out` must be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lrs_affinity(z: *const LrsMat, mode: LrsAffinityMode, out: *mut *mut LrsMat) -> LrsStatus {
    let mode = match mode {
        LrsAffinityMode::AbsSym => AffinityMode::AbsSym,
        LrsAffinityMode::PsdDirect => AffinityMode::PsdDirect,
    };
    unsafe { unary(z, out, |z| segmentation::affinity_from_representation(z, mode)) }
}

/// Gaussian kernel between the columns of `x`.
///
/// # Safety
/// `x` must be a live handle; `out` must be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lrs_gaussian_affinity(x: *const LrsMat, sigma: f64, out: *mut *mut LrsMat) -> LrsStatus {
    unsafe { unary(x, out, |x| segmentation::gaussian_affinity(x, sigma)) }
}

/// Nonnegative linear kernel between the columns of `x`.
///
/// # Safety
/// `x` must be a live handle; `out` must be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lrs_linear_affinity(x: *const LrsMat, out: *mut *mut LrsMat) -> LrsStatus {
    unsafe { unary(x, out, |x| Ok(segmentation::linear_affinity(x))) }
}

/// Normalized spectral clustering of an `n × n` affinity; writes `n` labels in `[0, k)`.
///
/// # Safety
/// `w` must be a live handle; `labels` must point to `len` writable entries.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lrs_spectral_cluster(w: *const LrsMat, k: usize, seed: u64, labels: *mut usize, len: usize) -> LrsStatus {
    guard(|| unsafe {
        let w = mat_ref(w, "affinity")?;
        let res = segmentation::spectral_cluster(w, k, seed)?;
        slice_out(labels, len, res.labels.len(), "labels")?.copy_from_slice(&res.labels);
        Ok(())
    })
}

/// Best-matching fraction of agreeing labels.
///
/// # Safety
/// `pred` and `truth` must point to `len` readable entries; `out` must be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lrs_segmentation_accuracy(pred: *const usize, truth: *const usize, len: usize, out: *mut f64) -> LrsStatus {
    guard(|| unsafe {
        let pred = slice_in(pred, len, "pred")?;
        let truth = slice_in(truth, len, "truth")?;
        *out.as_mut().ok_or_else(|| null("out"))? = segmentation::segmentation_accuracy(pred, truth)?;
        Ok(())
    })
}

/// Fraction of `Σ|z_ij|` inside consecutive diagonal blocks of the given sizes.
///
/// # Safety
/// `z` must be a live handle, `sizes` must point to `groups` readable entries and `out` must be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lrs_block_diagonal_mass(z: *const LrsMat, sizes: *const usize, groups: usize, out: *mut f64) -> LrsStatus {
    guard(|| unsafe {
        let z = mat_ref(z, "matrix")?;
        let sizes = slice_in(sizes, groups, "sizes")?;
        *out.as_mut().ok_or_else(|| null("out"))? = segmentation::block_diagonal_mass(z, sizes)?;
        Ok(())
    })
}
