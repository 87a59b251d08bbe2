//! Reference routines written against plain nested `Vec`s so they share no code with the
//! library's dense backend.

#![allow(dead_code)]

use lowrankseg::Mat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Dense = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn to_dense(m: &Mat) -> Dense {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m[(i, j)]).collect()).collect()
}

pub fn from_dense(d: &Dense) -> Mat {
    Mat::from_fn(d.len(), d[0].len(), |i, j| d[i][j]).unwrap()
}

pub fn transpose(a: &Dense) -> Dense {
    (0..a[0].len()).map(|j| a.iter().map(|row| row[j]).collect()).collect()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let inner = b.len();
    a.iter()
        .map(|row| (0..b[0].len()).map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum()).collect())
        .collect()
}

pub fn sub(a: &Dense, b: &Dense) -> Dense {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p - q).collect()).collect()
}

pub fn frob(a: &Dense) -> f64 {
    a.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn sym(a: &Dense) -> Dense {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| 0.5 * (a[i][j] + a[j][i])).collect()).collect()
}

/// Cyclic Jacobi on a symmetric matrix: eigenvalues (descending) and eigenvectors as columns.
pub fn jacobi_eig(a: &Dense) -> (Vec<f64>, Dense) {
    let n = a.len();
    let mut m = a.clone();
    let mut v: Dense = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let scale = frob(a).max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| m[y][y].total_cmp(&m[x][x]));
    let values = order.iter().map(|&k| m[k][k]).collect();
    let vectors = (0..n).map(|i| order.iter().map(|&k| v[i][k]).collect()).collect();
    (values, vectors)
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn inverse(a: &Dense) -> Dense {
    let n = a.len();
    let mut aug: Dense = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| aug[x][col].abs().total_cmp(&aug[y][col].abs())).unwrap();
        aug.swap(col, piv);
        let d = aug[col][col];
        assert!(d.abs() > 1e-300, "singular matrix");
        aug[col].iter_mut().for_each(|v| *v /= d);
        for r in 0..n {
            if r != col {
                let f = aug[r][col];
                if f != 0.0 {
                    let pivot_row = aug[col].clone();
                    aug[r].iter_mut().zip(&pivot_row).for_each(|(v, p)| *v -= f * p);
                }
            }
        }
    }
    aug.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Orthogonal polar factor of a nonsingular square matrix by Newton iteration.
pub fn polar_factor(a: &Dense) -> Dense {
    let mut q = a.clone();
    for _ in 0..100 {
        let inv_t = transpose(&inverse(&q));
        let next: Dense = q
            .iter()
            .zip(&inv_t)
            .map(|(x, y)| x.iter().zip(y).map(|(p, r)| 0.5 * (p + r)).collect())
            .collect();
        let delta = frob(&sub(&next, &q));
        q = next;
        if delta < 1e-15 {
            break;
        }
    }
    q
}

/// Euclidean projection onto the PSD cone of the symmetric part.
pub fn project_psd(a: &Dense) -> Dense {
    let (values, vectors) = jacobi_eig(&sym(a));
    let n = a.len();
    let mut out = vec![vec![0.0; n]; n];
    for (k, &l) in values.iter().enumerate() {
        if l > 0.0 {
            for i in 0..n {
                for j in 0..n {
                    out[i][j] += l * vectors[i][k] * vectors[j][k];
                }
            }
        }
    }
    sym(&out)
}

/// Projected gradient for `min τ·tr(M) + ½‖M − G‖_F²` over `M ⪰ 0`, where the nuclear
/// norm reduces to the trace.
pub fn psd_prox_oracle(g: &Dense, tau: f64, iters: usize) -> Dense {
    let n = g.len();
    let step = 0.5;
    let mut m = vec![vec![0.0; n]; n];
    for _ in 0..iters {
        let grad: Dense = (0..n)
            .map(|i| (0..n).map(|j| m[i][j] - g[i][j] + if i == j { tau } else { 0.0 }).collect())
            .collect();
        let trial: Dense = (0..n).map(|i| (0..n).map(|j| m[i][j] - step * grad[i][j]).collect()).collect();
        m = project_psd(&trial);
    }
    m
}

/// Nuclear norm through the eigenvalues of `AᵀA`.
pub fn nuclear_oracle(a: &Dense) -> f64 {
    let (values, _) = jacobi_eig(&matmul(&transpose(a), a));
    values.iter().map(|l| l.max(0.0).sqrt()).sum()
}

/// `τ‖M‖_* + ½‖M − G‖_F²`
pub fn prox_objective(m: &Dense, g: &Dense, tau: f64) -> f64 {
    tau * nuclear_oracle(m) + 0.5 * frob(&sub(m, g)).powi(2)
}

/// Maximum fraction of agreement over every bijection of label values.
pub fn brute_force_accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    let k = pred.iter().chain(truth).max().unwrap() + 1;
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = 0;
    loop {
        let hits = pred.iter().zip(truth).filter(|&(&p, &t)| perm[p] == t).count();
        best = best.max(hits);
        if !next_permutation(&mut perm) {
            break;
        }
    }
    best as f64 / pred.len() as f64
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Random symmetric, asymmetric or antisymmetric 6×6 input by `kind % 3`.
pub fn mixed_input(kind: usize, seed: u64) -> Mat {
    let a = Mat::random_normal(6, 6, &mut rng(seed)).scale(2.0);
    match kind % 3 {
        0 => a.symmetric_part(),
        1 => a,
        _ => (&a - &a.transpose()).scale(0.5),
    }
}

/// `τ‖M‖_* + ½‖M − G‖_F²` for symmetric `M`, with the nuclear norm as `Σ|λ|`.
pub fn sym_prox_objective(m: &Dense, g: &Dense, tau: f64) -> f64 {
    let (values, _) = jacobi_eig(&sym(m));
    tau * values.iter().map(|l| l.abs()).sum::<f64>() + 0.5 * frob(&sub(m, g)).powi(2)
}
