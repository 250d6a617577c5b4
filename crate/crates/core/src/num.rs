//! Numeric conventions shared across the crate.
//!
//! All reals are `f64`. Comparisons use the absolute tolerance [`TOL`]
//! unless an operation documents otherwise.

use crate::{Error, Result};

/// Default absolute comparison tolerance.
pub const TOL: f64 = 1e-9;

/// Entries with magnitude at or below this are treated as structural zeros
/// when building pair decompositions.
pub const PAIR_DROP_TOL: f64 = 1e-12;

/// Pivot tolerance for the Cholesky-based PSD test.
pub const PSD_TOL: f64 = 1e-10;

/// Integrality tolerance on indicator variables.
pub const INT_TOL: f64 = 1e-5;

/// Shift substituted for zero indicator values when taking first-order
/// expansions of hull functions.
pub const ZERO_X_SHIFT: f64 = 1e-5;

/// Cut coefficients above this magnitude are rejected.
pub const CUT_COEFF_CAP: f64 = 1e12;

/// Division with the extended-real convention `0/0 = 0` and `a/0 = +inf`
/// for `a > 0`. Both arguments must be nonnegative.
pub fn safe_div(num: f64, den: f64) -> Result<f64> {
    if num < 0.0 || den < 0.0 {
        return Err(Error::Domain(format!(
            "safe_div requires nonnegative arguments, got ({num}, {den})"
        )));
    }
    Ok(sdiv(num, den))
}

/// Unchecked variant of [`safe_div`] for internal call sites whose domains
/// already guarantee nonnegative arguments.
#[inline]
pub(crate) fn sdiv(num: f64, den: f64) -> f64 {
    debug_assert!(num >= 0.0 && den >= 0.0);
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

/// Ratio `n/d` used by hull subgradients where the active piece guarantees
/// `0 <= n <= d`; the degenerate `0/0` resolves to the limit 1.
#[inline]
pub(crate) fn ratio_or_one(n: f64, d: f64) -> f64 {
    if d.abs() <= f64::EPSILON {
        1.0
    } else {
        n / d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn safe_div_conventions() {
        assert_eq!(safe_div(0.0, 0.0).unwrap(), 0.0);
        assert_eq!(safe_div(3.0, 0.0).unwrap(), f64::INFINITY);
        assert_eq!(safe_div(1.0, 4.0).unwrap(), 0.25);
    }

    #[test]
    fn safe_div_rejects_negative() {
        assert!(safe_div(-1.0, 1.0).is_err());
        assert!(safe_div(1.0, -1.0).is_err());
    }

    #[test]
    fn safe_div_monotone() {
        // nondecreasing in the numerator, nonincreasing in the denominator
        let nums = [0.0, 0.5, 1.0, 2.0, 10.0];
        let dens = [0.0, 0.25, 1.0, 3.0];
        for &d in &dens {
            let mut prev = -1.0;
            for &n in &nums {
                let v = safe_div(n, d).unwrap();
                assert!(v >= prev);
                prev = v;
            }
        }
        for &n in &nums {
            let mut prev = f64::INFINITY;
            for &d in &dens {
                let v = safe_div(n, d).unwrap();
                assert!(v <= prev);
                prev = v;
            }
        }
    }
}
