//! Set-function reduction of the unbounded minimization problem.
//!
//! For a positive definite M-matrix `Q`, costs `a >= 0`, and `b <= 0`, the
//! problem `min a'x + b'y + y'Qy` with `y_i > 0` only where `x_i = 1`
//! reduces to minimizing the set function
//!
//! ```text
//! v(T) = a(T) - b_T' Q_T^{-1} b_T / 4
//! ```
//!
//! over subsets `T` of the index set, where the optimal `y` restricted to
//! `T` is `-Q_T^{-1} b_T / 2`. The function is submodular, so its exact
//! minimization is tractable; this module implements the exponential
//! enumeration oracle (desk scale) plus numeric checks of the monotone
//! supermodularity claims behind the reduction.

use crate::linalg::{self, Matrix};
use crate::{Error, Result};

const MAX_BRUTE_N: usize = 22;

/// The reduced set function `v(T) = a(T) - b_T' Q_T^{-1} b_T / 4`.
#[derive(Clone, Debug)]
pub struct SetFunction {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub q: Matrix,
    /// True when positive `b` entries were clamped to zero at construction.
    pub clamped_b: bool,
}

impl SetFunction {
    /// Builds the set function. `a` must be nonnegative; positive `b`
    /// entries are clamped to zero (they never help the minimization) and
    /// flagged. `q` must be a positive definite M-matrix.
    pub fn new(a: Vec<f64>, b: Vec<f64>, q: Matrix) -> Result<SetFunction> {
        let n = q.len();
        if a.len() != n || b.len() != n {
            return Err(Error::Validation {
                field: "a/b".into(),
                msg: format!("expected length {n}"),
            });
        }
        if a.iter().any(|&ai| ai < 0.0) {
            return Err(Error::Domain("indicator costs must be nonnegative".into()));
        }
        let check = crate::mmatrix::is_m_matrix(&q, crate::num::TOL)?;
        if !check.is_m || linalg::cholesky(&q, 1e-14).is_none() {
            return Err(Error::Domain("Q must be a positive definite M-matrix".into()));
        }
        let mut clamped_b = false;
        let b = b
            .into_iter()
            .map(|bi| {
                if bi > 0.0 {
                    clamped_b = true;
                    0.0
                } else {
                    bi
                }
            })
            .collect();
        Ok(SetFunction { a, b, q, clamped_b })
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    /// Evaluates `v(T)`; `v(empty) = 0`.
    pub fn eval(&self, subset: &[usize]) -> Result<f64> {
        if subset.is_empty() {
            return Ok(0.0);
        }
        let a_sum: f64 = subset.iter().map(|&i| self.a[i]).sum();
        let q_sub = linalg::submatrix(&self.q, subset);
        let b_sub: Vec<f64> = subset.iter().map(|&i| self.b[i]).collect();
        let sol = linalg::solve_spd(&q_sub, &b_sub)?;
        let btqb: f64 = b_sub.iter().zip(&sol).map(|(b, s)| b * s).sum();
        Ok(a_sum - 0.25 * btqb)
    }

    /// Optimal continuous values on `T`: `y_T = -Q_T^{-1} b_T / 2`.
    pub fn optimal_y(&self, subset: &[usize]) -> Result<Vec<f64>> {
        let q_sub = linalg::submatrix(&self.q, subset);
        let b_sub: Vec<f64> = subset.iter().map(|&i| self.b[i]).collect();
        let sol = linalg::solve_spd(&q_sub, &b_sub)?;
        Ok(sol.into_iter().map(|v| -0.5 * v).collect())
    }
}

fn mask_to_subset(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|&i| (mask >> i) & 1 == 1).collect()
}

/// True when subset `s` precedes `t` in lexicographic order of sorted
/// element lists.
fn lex_smaller(s: &[usize], t: &[usize]) -> bool {
    for (a, b) in s.iter().zip(t.iter()) {
        if a != b {
            return a < b;
        }
    }
    s.len() < t.len()
}

/// Exact minimization of `v` over all subsets by enumeration; ties resolve
/// to the lexicographically smallest subset. Capped at `n <= 22`.
pub fn minimize_bruteforce(sf: &SetFunction) -> Result<(Vec<usize>, f64)> {
    let n = sf.n();
    if n > MAX_BRUTE_N {
        return Err(Error::TooLarge(format!(
            "brute-force minimization capped at n = {MAX_BRUTE_N}, got {n}"
        )));
    }
    let mut best_set: Vec<usize> = vec![];
    let mut best_val = 0.0;
    for mask in 1..(1u32 << n) {
        let subset = mask_to_subset(mask, n);
        let val = sf.eval(&subset)?;
        if val < best_val || (val == best_val && lex_smaller(&subset, &best_set)) {
            best_val = val;
            best_set = subset;
        }
    }
    Ok((best_set, best_val))
}

/// Witness of a failed monotonicity or supermodularity check.
#[derive(Clone, Debug)]
pub struct Witness {
    pub element: usize,
    pub base: Vec<usize>,
    pub added: Option<usize>,
    pub gap: f64,
}

/// Verifies supermodularity by enumeration (marginal gains nondecreasing
/// in the base set), using the pairwise criterion: for all `k != l` and
/// `T` avoiding both, `v(T+l+k) - v(T+l) >= v(T+k) - v(T)`.
/// Capped at `n <= 10`.
pub fn check_supermodular<F>(value: F, n: usize) -> Result<(bool, Option<Witness>)>
where
    F: Fn(&[usize]) -> f64,
{
    if n > 10 {
        return Err(Error::TooLarge(format!(
            "supermodularity enumeration capped at n = 10, got {n}"
        )));
    }
    let tol = 1e-9;
    for mask in 0..(1u32 << n) {
        let base = mask_to_subset(mask, n);
        let v_base = value(&base);
        for k in 0..n {
            if (mask >> k) & 1 == 1 {
                continue;
            }
            let v_k = value(&mask_to_subset(mask | (1 << k), n));
            for l in 0..n {
                if l == k || (mask >> l) & 1 == 1 {
                    continue;
                }
                let v_l = value(&mask_to_subset(mask | (1 << l), n));
                let v_lk = value(&mask_to_subset(mask | (1 << l) | (1 << k), n));
                if (v_lk - v_l) < (v_k - v_base) - tol {
                    return Ok((
                        false,
                        Some(Witness {
                            element: k,
                            base,
                            added: Some(l),
                            gap: (v_k - v_base) - (v_lk - v_l),
                        }),
                    ));
                }
            }
        }
    }
    Ok((true, None))
}

/// Verifies monotone nondecrease by enumeration: adding any element never
/// lowers the value. Capped at `n <= 10`.
pub fn check_monotone<F>(value: F, n: usize) -> Result<(bool, Option<Witness>)>
where
    F: Fn(&[usize]) -> f64,
{
    if n > 10 {
        return Err(Error::TooLarge(format!(
            "monotonicity enumeration capped at n = 10, got {n}"
        )));
    }
    let tol = 1e-9;
    for mask in 0..(1u32 << n) {
        let base = mask_to_subset(mask, n);
        let v_base = value(&base);
        for k in 0..n {
            if (mask >> k) & 1 == 1 {
                continue;
            }
            let v_k = value(&mask_to_subset(mask | (1 << k), n));
            if v_k < v_base - tol {
                return Ok((
                    false,
                    Some(Witness {
                        element: k,
                        base,
                        added: None,
                        gap: v_base - v_k,
                    }),
                ));
            }
        }
    }
    Ok((true, None))
}

/// The inverse-entry set function `theta_ij(T) = (Q_T^{-1})_ij` (zero when
/// `i` or `j` is outside `T`), the object whose monotone supermodularity
/// underlies the reduction.
pub fn theta_fn(q: &Matrix, i: usize, j: usize) -> impl Fn(&[usize]) -> f64 + '_ {
    move |subset: &[usize]| {
        let pi = subset.iter().position(|&k| k == i);
        let pj = subset.iter().position(|&k| k == j);
        match (pi, pj) {
            (Some(pi), Some(pj)) => {
                let q_sub = linalg::submatrix(q, subset);
                match linalg::inverse_spd(&q_sub) {
                    Ok(inv) => inv[pi][pj],
                    Err(_) => f64::NAN,
                }
            }
            _ => 0.0,
        }
    }
}
