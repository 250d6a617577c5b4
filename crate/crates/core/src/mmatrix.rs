//! M-matrix validation and pairwise decomposition of quadratic forms.
//!
//! An M-matrix here is symmetric PSD with non-positive off-diagonal
//! entries. Its quadratic form splits into row-sum-weighted squares plus
//! nonnegatively weighted difference squares:
//!
//! ```text
//! y'Qy = sum_i (sum_j Q_ij) y_i^2 + sum_{i<j} (-Q_ij) (y_i - y_j)^2
//! ```
//!
//! which is the identity every hull-based relaxation in this crate builds on.

use crate::linalg::{self, Matrix};
use crate::num::PAIR_DROP_TOL;
use crate::{Error, Result};

/// Result of pairwise-decomposing a quadratic matrix.
#[derive(Clone, Debug)]
pub struct PairDecomposition {
    /// Row sums `Qbar_i = sum_j Q_ij`, the diagonal square weights.
    pub diag_weights: Vec<f64>,
    /// Indices with strictly positive row sum.
    pub pos_set: Vec<usize>,
    /// `(i, j, w)` with `i < j`, `w = -Q_ij > 0`: difference-square weights.
    pub neg_pairs: Vec<(usize, usize, f64)>,
    /// `(i, j, v)` with `i < j`, `v = A_ij > 0`: sum-square weights
    /// (populated only by [`general_decompose`]).
    pub pos_pairs: Vec<(usize, usize, f64)>,
}

impl PairDecomposition {
    /// Evaluates the decomposed quadratic form at `y`.
    pub fn quad_value(&self, y: &[f64]) -> f64 {
        let mut v = 0.0;
        for (i, &w) in self.diag_weights.iter().enumerate() {
            v += w * y[i] * y[i];
        }
        for &(i, j, w) in &self.neg_pairs {
            let d = y[i] - y[j];
            v += w * d * d;
        }
        for &(i, j, w) in &self.pos_pairs {
            let s = y[i] + y[j];
            v += w * s * s;
        }
        v
    }
}

/// Diagnostics from [`is_m_matrix`].
#[derive(Clone, Debug)]
pub struct MMatrixCheck {
    pub is_m: bool,
    /// Off-diagonal entries `(i, j, value)` exceeding the tolerance.
    pub offdiag_violations: Vec<(usize, usize, f64)>,
    /// Smallest eigenvalue (from Cholesky screen or Jacobi fallback).
    pub min_eigenvalue: f64,
}

/// Checks whether `q` is an M-matrix: all off-diagonals `<= tol` and
/// smallest eigenvalue `>= -tol`. The PSD test first attempts a Cholesky
/// factorization and falls back to a symmetric eigenvalue solve.
pub fn is_m_matrix(q: &Matrix, tol: f64) -> Result<MMatrixCheck> {
    ensure_symmetric(q)?;
    let n = q.len();
    let mut offdiag_violations = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if q[i][j] > tol {
                offdiag_violations.push((i, j, q[i][j]));
            }
        }
    }
    let min_eigenvalue = if linalg::cholesky(q, crate::num::PSD_TOL).is_some() {
        0.0f64.max(-tol)
    } else {
        linalg::min_eigenvalue(q)
    };
    Ok(MMatrixCheck {
        is_m: offdiag_violations.is_empty() && min_eigenvalue >= -tol,
        offdiag_violations,
        min_eigenvalue,
    })
}

fn ensure_symmetric(q: &Matrix) -> Result<()> {
    if !linalg::is_symmetric(q, 1e-12) {
        return Err(Error::Validation {
            field: "Q".into(),
            msg: "matrix is not symmetric within 1e-12".into(),
        });
    }
    Ok(())
}

/// Pairwise decomposition of an M-matrix. Pairs with `|Q_ij| <= 1e-12` are
/// dropped to avoid degenerate epigraph terms.
pub fn decompose(q: &Matrix) -> Result<PairDecomposition> {
    let check = is_m_matrix(q, crate::num::TOL)?;
    if !check.is_m {
        return Err(Error::Domain(format!(
            "decompose requires an M-matrix ({} positive off-diagonals, min eig {:.3e})",
            check.offdiag_violations.len(),
            check.min_eigenvalue
        )));
    }
    Ok(decompose_unchecked(q))
}

pub(crate) fn decompose_unchecked(q: &Matrix) -> PairDecomposition {
    let n = q.len();
    let diag_weights: Vec<f64> = (0..n).map(|i| q[i].iter().sum()).collect();
    let pos_set = (0..n).filter(|&i| diag_weights[i] > 0.0).collect();
    let mut neg_pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if q[i][j] < -PAIR_DROP_TOL {
                neg_pairs.push((i, j, -q[i][j]));
            }
        }
    }
    PairDecomposition {
        diag_weights,
        pos_set,
        neg_pairs,
        pos_pairs: Vec::new(),
    }
}

/// Splits a symmetric PSD matrix `A` into an M-part `Q` and a residual:
/// `Q_ij = min{0, A_ij}` for `i != j`, `Q_ii = -sum_{j!=i} Q_ij`, and
/// `R = A - Q - diag(upsilon)`. Returns `(Q, R, r_min_eig)`; a residual
/// eigenvalue below `-1e-8` signals that the chosen diagonal was too
/// aggressive (a warning condition, not an error).
pub fn extract_m_part(a: &Matrix, residual_diag: &[f64]) -> Result<(Matrix, Matrix, f64)> {
    ensure_symmetric(a)?;
    let n = a.len();
    if residual_diag.len() != n {
        return Err(Error::Validation {
            field: "residual_diag".into(),
            msg: format!("expected length {n}"),
        });
    }
    let mut q = vec![vec![0.0; n]; n];
    for i in 0..n {
        let mut rowsum = 0.0;
        for j in 0..n {
            if i != j {
                q[i][j] = a[i][j].min(0.0);
                rowsum += q[i][j];
            }
        }
        q[i][i] = -rowsum;
    }
    let mut r = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            r[i][j] = a[i][j] - q[i][j];
        }
        r[i][i] -= residual_diag[i];
    }
    let r_min_eig = if linalg::cholesky(&r, crate::num::PSD_TOL).is_some() {
        0.0
    } else {
        linalg::min_eigenvalue(&r)
    };
    Ok((q, r, r_min_eig))
}

/// Decomposition of a general symmetric matrix into diagonal weights,
/// difference squares for negative off-diagonals, and sum squares for
/// positive ones:
///
/// ```text
/// y'Ay = sum_i (A_ii - sum_{j!=i} |A_ij|) y_i^2
///      + sum_{A_ij<0, i<j} |A_ij| (y_i - y_j)^2
///      + sum_{A_ij>0, i<j} A_ij (y_i + y_j)^2
/// ```
pub fn general_decompose(a: &Matrix) -> Result<PairDecomposition> {
    ensure_symmetric(a)?;
    let n = a.len();
    let diag_weights: Vec<f64> = (0..n)
        .map(|i| {
            let offsum: f64 = (0..n).filter(|&j| j != i).map(|j| a[i][j].abs()).sum();
            a[i][i] - offsum
        })
        .collect();
    let pos_set = (0..n).filter(|&i| diag_weights[i] > 0.0).collect();
    let mut neg_pairs = Vec::new();
    let mut pos_pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if a[i][j] < -PAIR_DROP_TOL {
                neg_pairs.push((i, j, -a[i][j]));
            } else if a[i][j] > PAIR_DROP_TOL {
                pos_pairs.push((i, j, a[i][j]));
            }
        }
    }
    Ok(PairDecomposition {
        diag_weights,
        pos_set,
        neg_pairs,
        pos_pairs,
    })
}

/// Checks inverse-positivity of a positive definite M-matrix: every entry
/// of `Q^{-1}` is `>= -1e-9`.
pub fn inverse_positive_check(q: &Matrix) -> Result<bool> {
    ensure_symmetric(q)?;
    let inv = linalg::inverse_spd(q)?;
    Ok(inv.iter().flatten().all(|&v| v >= -1e-9))
}
