//! Small dense linear algebra helpers.
//!
//! Matrices are dense row-major `Vec<Vec<f64>>`; problem sizes are
//! desk-scale, so simplicity beats sparsity here.

use crate::{Error, Result};

pub type Matrix = Vec<Vec<f64>>;

/// Maximum absolute asymmetry `|A_ij - A_ji|`.
pub fn asymmetry(a: &Matrix) -> f64 {
    let n = a.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((a[i][j] - a[j][i]).abs());
        }
    }
    worst
}

pub fn is_symmetric(a: &Matrix, tol: f64) -> bool {
    asymmetry(a) <= tol
}

/// `x' A y`.
pub fn quad_form(a: &Matrix, x: &[f64], y: &[f64]) -> f64 {
    let mut total = 0.0;
    for (i, row) in a.iter().enumerate() {
        let mut acc = 0.0;
        for (j, &aij) in row.iter().enumerate() {
            acc += aij * y[j];
        }
        total += x[i] * acc;
    }
    total
}

/// `out = A v`.
pub fn mat_vec(a: &Matrix, v: &[f64], out: &mut [f64]) {
    for (i, row) in a.iter().enumerate() {
        out[i] = row.iter().zip(v).map(|(&aij, &vj)| aij * vj).sum();
    }
}

/// Attempts a Cholesky factorization of a symmetric matrix. Returns the
/// lower factor, or `None` if a pivot drops below `-pivot_tol` times the
/// running diagonal scale (matrix not PSD at that tolerance).
pub fn cholesky(a: &Matrix, pivot_tol: f64) -> Option<Matrix> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    let scale = (0..n).map(|i| a[i][i].abs()).fold(1.0f64, f64::max);
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d -= l[j][k] * l[j][k];
        }
        if d <= pivot_tol * scale {
            if d < -pivot_tol * scale {
                return None;
            }
            // semidefinite pivot: zero out the column
            l[j][j] = 0.0;
            for i in (j + 1)..n {
                l[i][j] = 0.0;
            }
            continue;
        }
        let dj = d.sqrt();
        l[j][j] = dj;
        for i in (j + 1)..n {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            l[i][j] = s / dj;
        }
    }
    Some(l)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn sym_eigenvalues(a: &Matrix) -> Vec<f64> {
    let n = a.len();
    if n == 0 {
        return vec![];
    }
    let mut m: Vec<Vec<f64>> = a.clone();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i][j] * m[i][j];
            }
        }
        if off.sqrt() < 1e-13 * (1.0 + frob(&m)) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eigs
}

fn frob(a: &Matrix) -> f64 {
    a.iter()
        .flat_map(|r| r.iter())
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
}

/// Smallest eigenvalue: cheap Cholesky screen first, Jacobi fallback.
pub fn min_eigenvalue(a: &Matrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    *sym_eigenvalues(a).first().unwrap()
}

/// Solves `A x = b` for symmetric positive definite `A` via Cholesky.
pub fn solve_spd(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.len();
    let l = cholesky(a, 1e-14).ok_or_else(|| Error::Singular("matrix not PD".into()))?;
    for i in 0..n {
        if l[i][i] == 0.0 {
            return Err(Error::Singular(format!("zero pivot at index {i}")));
        }
    }
    // forward solve L z = b
    let mut z = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * z[k];
        }
        z[i] = s / l[i][i];
    }
    // back solve L' x = z
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = z[i];
        for k in (i + 1)..n {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    Ok(x)
}

/// Inverse of a symmetric positive definite matrix.
pub fn inverse_spd(a: &Matrix) -> Result<Matrix> {
    let n = a.len();
    let mut inv = vec![vec![0.0; n]; n];
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = solve_spd(a, &e)?;
        for i in 0..n {
            inv[i][j] = col[i];
        }
        e[j] = 0.0;
    }
    Ok(inv)
}

/// Largest eigenvalue magnitude by power iteration (100 rounds, tol 1e-10).
pub fn power_max_eig(a: &Matrix) -> f64 {
    let n = a.len();
    if n == 0 {
        return 0.0;
    }
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64) * 0.01).collect();
    let norm = |u: &[f64]| u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut lambda = 0.0;
    let mut av = vec![0.0; n];
    for _ in 0..100 {
        mat_vec(a, &v, &mut av);
        let nv = norm(&av);
        if nv < 1e-300 {
            return 0.0;
        }
        let next = av.iter().map(|x| x / nv).collect::<Vec<_>>();
        let new_lambda = quad_form(a, &next, &next);
        let done = (new_lambda - lambda).abs() <= 1e-10 * (1.0 + new_lambda.abs());
        lambda = new_lambda;
        v = next;
        if done {
            break;
        }
    }
    lambda.abs()
}

/// Principal submatrix indexed by `idx`.
pub fn submatrix(a: &Matrix, idx: &[usize]) -> Matrix {
    idx.iter()
        .map(|&i| idx.iter().map(|&j| a[i][j]).collect())
        .collect()
}
