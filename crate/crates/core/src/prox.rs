//! Closed-form proximal maps used as ALM sub-steps.
//!
//! Each operator solves `argmin_M τ·‖M‖ + ½‖M − G‖_F²` for its norm:
//!
//! | operator                | norm           | feasible set |
//! |-------------------------|----------------|--------------|
//! | [`svt`]                 | nuclear        | all matrices |
//! | [`psd_eig_threshold`]   | nuclear        | PSD cone     |
//! | [`shrink_l1`]           | entrywise ℓ1   | all matrices |
//! | [`shrink_l21`]          | column ℓ2,1    | all matrices |
//!
//! On the PSD cone the nuclear norm is the trace, so the constrained map only needs an
//! eigen-decomposition of the symmetric part of `G`, never an SVD.

use faer::MatRef;

use crate::linalg::{column_norm, eig_symmetrized, symmetrize, thin_svd};
use crate::{Error, Mat, Result};

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Parameter(format!("threshold must be positive and finite, got {tau}")));
    }
    Ok(())
}

/// Singular value thresholding: `U·Diag(max(σ − τ, 0))·Vᵀ`.
pub fn svt(g: &Mat, tau: f64) -> Result<Mat> {
    check_tau(tau)?;
    let (m, _) = svt_raw(g.as_faer(), tau)?;
    Ok(Mat::from_faer_unchecked(m))
}

/// SVT returning the nuclear norm of the result alongside it.
pub(crate) fn svt_raw(g: MatRef<'_, f64>, tau: f64) -> Result<(faer::Mat<f64>, f64)> {
    let (u, sv, v) = thin_svd(g)?;
    let kept: Vec<f64> = sv.iter().map(|s| s - tau).take_while(|&s| s > 0.0).collect();
    let (rows, cols) = (g.nrows(), g.ncols());
    let k = kept.len();
    if k == 0 {
        return Ok((faer::Mat::zeros(rows, cols), 0.0));
    }
    let us = faer::Mat::from_fn(rows, k, |i, c| u[(i, c)] * kept[c]);
    let m = &us * v.as_ref().get(.., 0..k).transpose();
    Ok((m, kept.iter().sum()))
}

/// Nuclear-norm proximal map restricted to the PSD cone.
///
/// Symmetrizes `g` to `P = (g + gᵀ)/2`, factors `P = Q·Λ·Qᵀ` and returns
/// `Q·Diag(max(λ − τ, 0))·Qᵀ`, which is exactly symmetric and PSD.
pub fn psd_eig_threshold(g: &Mat, tau: f64) -> Result<Mat> {
    check_tau(tau)?;
    if !g.is_square() {
        return Err(Error::Dimension(format!(
            "PSD thresholding needs a square matrix, got {}×{}",
            g.rows(),
            g.cols()
        )));
    }
    let (m, _) = psd_eig_threshold_raw(g.as_faer(), tau)?;
    Ok(Mat::from_faer_unchecked(m))
}

/// PSD eigenvalue thresholding returning the trace (= nuclear norm) of the result.
pub(crate) fn psd_eig_threshold_raw(g: MatRef<'_, f64>, tau: f64) -> Result<(faer::Mat<f64>, f64)> {
    let n = g.nrows();
    let (q, values) = eig_symmetrized(symmetrize(g).as_ref())?;
    let kept: Vec<f64> = values.iter().map(|l| l - tau).take_while(|&l| l > 0.0).collect();
    let k = kept.len();
    if k == 0 {
        return Ok((faer::Mat::zeros(n, n), 0.0));
    }
    let qk = q.as_ref().get(.., 0..k);
    let scaled = faer::Mat::from_fn(n, k, |i, c| qk[(i, c)] * kept[c]);
    let m = &scaled * qk.transpose();
    Ok((symmetrize(m.as_ref()), kept.iter().sum()))
}

/// Entrywise soft threshold `sign(g)·max(|g| − τ, 0)`.
pub fn shrink_l1(g: &Mat, tau: f64) -> Result<Mat> {
    check_tau(tau)?;
    Ok(Mat::from_faer_unchecked(shrink_l1_raw(g.as_faer(), tau)))
}

pub(crate) fn shrink_l1_raw(g: MatRef<'_, f64>, tau: f64) -> faer::Mat<f64> {
    faer::Mat::from_fn(g.nrows(), g.ncols(), |i, j| {
        let v = g[(i, j)];
        v.signum() * (v.abs() - tau).max(0.0)
    })
}

/// Column shrinkage: column `j` becomes `max(1 − τ/‖g_j‖, 0)·g_j`; zero columns stay zero.
pub fn shrink_l21(g: &Mat, tau: f64) -> Result<Mat> {
    check_tau(tau)?;
    Ok(Mat::from_faer_unchecked(shrink_l21_raw(g.as_faer(), tau)))
}

pub(crate) fn shrink_l21_raw(g: MatRef<'_, f64>, tau: f64) -> faer::Mat<f64> {
    let mut out = faer::Mat::zeros(g.nrows(), g.ncols());
    for j in 0..g.ncols() {
        let col: Vec<f64> = (0..g.nrows()).map(|i| g[(i, j)]).collect();
        let nrm = column_norm(&col);
        if nrm > tau {
            let factor = 1.0 - tau / nrm;
            for (dst, v) in out.col_as_slice_mut(j).iter_mut().zip(&col) {
                *dst = factor * v;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::linalg::{NormKind, eig_sym, norm};

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn rejects_bad_threshold() {
        let g = Mat::identity(2);
        for tau in [0.0, -1.0, f64::NAN] {
            assert!(matches!(svt(&g, tau), Err(Error::Parameter(_))));
            assert!(matches!(psd_eig_threshold(&g, tau), Err(Error::Parameter(_))));
            assert!(matches!(shrink_l1(&g, tau), Err(Error::Parameter(_))));
            assert!(matches!(shrink_l21(&g, tau), Err(Error::Parameter(_))));
        }
    }

    #[test]
    fn svt_diagonal() {
        let out = svt(&Mat::from_diag(&[3.0, 1.0, 0.2]).unwrap(), 1.0).unwrap();
        assert!((&out - &Mat::from_diag(&[2.0, 0.0, 0.0]).unwrap()).max_abs() < 1e-12);
    }

    #[test]
    fn svt_full_shrinkage() {
        let g = Mat::random_normal(4, 6, &mut rng(1));
        let op = norm(&g, NormKind::Operator);
        assert_eq!(svt(&g, op).unwrap(), Mat::zeros(4, 6));
        assert_eq!(svt(&g, op * 1.5).unwrap(), Mat::zeros(4, 6));
    }

    #[test]
    fn psd_threshold_examples() {
        let out = psd_eig_threshold(&Mat::from_diag(&[2.0, 0.5]).unwrap(), 1.0).unwrap();
        assert!((&out - &Mat::from_diag(&[1.0, 0.0]).unwrap()).max_abs() < 1e-12);

        let anti = Mat::from_rows(&[[0.0, 1.0], [-1.0, 0.0]]).unwrap();
        for tau in [1e-6, 1.0, 10.0] {
            assert_eq!(psd_eig_threshold(&anti, tau).unwrap(), Mat::zeros(2, 2));
        }

        let g = Mat::from_rows(&[[2.0, 1.0], [0.0, 2.0]]).unwrap();
        let want = Mat::from_rows(&[[1.0, 0.5], [0.5, 1.0]]).unwrap();
        assert!((&psd_eig_threshold(&g, 1.0).unwrap() - &want).max_abs() < 1e-12);
    }

    #[test]
    fn psd_threshold_rejects_rectangular() {
        assert!(matches!(psd_eig_threshold(&Mat::zeros(2, 3), 1.0), Err(Error::Dimension(_))));
    }

    #[test]
    fn psd_threshold_repeated_eigenvalues() {
        // Multiplicity-3 eigenvalue in a rotated basis: output must not depend on the basis.
        let q = Mat::random_orthonormal(5, 5, &mut rng(8));
        let d = Mat::from_diag(&[2.0, 2.0, 2.0, 0.3, -1.0]).unwrap();
        let g = q.matmul(&d).matmul(&q.transpose()).symmetric_part();
        let out = psd_eig_threshold(&g, 0.5).unwrap();
        let want = q
            .matmul(&Mat::from_diag(&[1.5, 1.5, 1.5, 0.0, 0.0]).unwrap())
            .matmul(&q.transpose());
        assert!((&out - &want).max_abs() < 1e-12);
    }

    #[test]
    fn shrink_l1_examples() {
        let g = Mat::from_rows(&[[1.5, -0.3], [-2.0, 0.0]]).unwrap();
        let out = shrink_l1(&g, 1.0).unwrap();
        assert_eq!(out, Mat::from_rows(&[[0.5, 0.0], [-1.0, 0.0]]).unwrap());
    }

    #[test]
    fn shrink_l21_examples() {
        let g = Mat::from_rows(&[[3.0, 0.3, 0.0], [4.0, 0.4, 0.0]]).unwrap();
        let out = shrink_l21(&g, 1.0).unwrap();
        assert!((out[(0, 0)] - 2.4).abs() < 1e-14);
        assert!((out[(1, 0)] - 3.2).abs() < 1e-14);
        assert_eq!(out[(0, 1)], 0.0);
        assert_eq!(out[(1, 1)], 0.0);
        assert_eq!(out[(0, 2)], 0.0);
    }

    #[test]
    fn psd_output_is_symmetric_psd() {
        for seed in 0..20 {
            let g = Mat::random_normal(7, 7, &mut rng(seed));
            let out = psd_eig_threshold(&g, 0.3).unwrap();
            assert_eq!(out, out.transpose());
            let e = eig_sym(&out, 0.0).unwrap();
            assert!(e.values.iter().all(|&l| l >= -1e-10), "{:?}", e.values);
        }
    }
}
