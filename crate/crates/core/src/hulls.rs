//! Closed-form convex-hull functions for two-variable quadratic pieces and
//! the valid inequalities derived from them.
//!
//! The basic object is the mixed-integer pair set: two indicators
//! `x1, x2 in {0,1}`, two continuous `y1, y2 >= 0` linked by `y_i <= x_i`
//! (or only by `y_i = 0` when `x_i = 0` in the unbounded variant), and an
//! epigraph variable `t >= (y1 - y2)^2`. [`hull_unbounded`] and
//! [`hull_bounded`] evaluate the piecewise functions whose epigraphs (with
//! the box constraints) are exactly the convex hulls of the unbounded and
//! bounded pair sets; [`hull_one_indicator`] is the intermediate hull with
//! a single indicator. Their subgradients supply cutting planes, and the
//! remaining functions evaluate the conic/limiting inequalities used by the
//! strengthened formulations.

use std::collections::BTreeMap;

use crate::linalg::Matrix;
use crate::mmatrix::PairDecomposition;
use crate::num::{ratio_or_one, sdiv, CUT_COEFF_CAP, ZERO_X_SHIFT};
use crate::types::{Cut, Point};
use crate::{Error, Result};

/// A point of the two-pair domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairPoint {
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
}

impl PairPoint {
    pub fn new(x1: f64, x2: f64, y1: f64, y2: f64) -> Self {
        PairPoint { x1, x2, y1, y2 }
    }
}

/// Value and partial derivatives of a hull function at a point; the induced
/// tangent under-estimates the function on its whole domain.
#[derive(Clone, Copy, Debug)]
pub struct Subgradient {
    pub value: f64,
    pub dx1: f64,
    pub dx2: f64,
    pub dy1: f64,
    pub dy2: f64,
}

impl Subgradient {
    /// Tangent value at `q`, anchored at the evaluation point `p`.
    pub fn tangent_at(&self, p: &PairPoint, q: &PairPoint) -> f64 {
        self.value
            + self.dx1 * (q.x1 - p.x1)
            + self.dx2 * (q.x2 - p.x2)
            + self.dy1 * (q.y1 - p.y1)
            + self.dy2 * (q.y2 - p.y2)
    }
}

/// Replaces indicator components below the first-order shift by the shift
/// value `1e-5`; subgradients are taken at the shifted point.
pub fn shift_point(p: &PairPoint) -> PairPoint {
    PairPoint {
        x1: p.x1.max(ZERO_X_SHIFT),
        x2: p.x2.max(ZERO_X_SHIFT),
        y1: p.y1,
        y2: p.y2,
    }
}

/// Hull function of the unbounded pair set:
/// `(y1-y2)^2 / x1` on `y1 >= y2`, symmetric otherwise (extended reals).
pub fn hull_unbounded(p: &PairPoint) -> f64 {
    let d = p.y1 - p.y2;
    if d >= 0.0 {
        sdiv(d * d, p.x1)
    } else {
        sdiv(d * d, p.x2)
    }
}

/// Subgradient of [`hull_unbounded`] at `p` (zero indicators shifted).
pub fn hull_unbounded_subgrad(p: &PairPoint) -> Subgradient {
    let p = shift_point(p);
    let d = p.y1 - p.y2;
    if d >= 0.0 {
        let r = d / p.x1;
        Subgradient {
            value: r * d,
            dx1: -r * r,
            dx2: 0.0,
            dy1: 2.0 * r,
            dy2: -2.0 * r,
        }
    } else {
        let r = -d / p.x2;
        Subgradient {
            value: -r * d,
            dx1: 0.0,
            dx2: -r * r,
            dy1: -2.0 * r,
            dy2: 2.0 * r,
        }
    }
}

/// Hull function of the single-indicator set
/// `{(x, y1, y2, t): (y1-y2)^2 <= t, 0 <= y1 <= x, 0 <= y2 <= 1}`.
pub fn hull_one_indicator(x: f64, y1: f64, y2: f64) -> Result<f64> {
    let tol = 1e-7;
    if !(-tol..=1.0 + tol).contains(&x) || y1 < -tol || y1 > x + tol || !(-tol..=1.0 + tol).contains(&y2) {
        return Err(Error::Domain(format!(
            "point (x={x}, y1={y1}, y2={y2}) outside the single-indicator domain"
        )));
    }
    let x = x.clamp(0.0, 1.0);
    let y1 = y1.clamp(0.0, x);
    let y2 = y2.clamp(0.0, 1.0);
    Ok(one_indicator_value(x, y1, y2))
}

fn one_indicator_value(x: f64, y1: f64, y2: f64) -> f64 {
    if x - y1 <= x * (y2 - y1) {
        let a = y2 - x;
        let b = x - y1;
        sdiv(a * a, 1.0 - x) + sdiv(b * b, x)
    } else if y2 <= y1 {
        let d = y1 - y2;
        sdiv(d * d, x)
    } else {
        let d = y2 - y1;
        d * d
    }
}

fn check_bounded_domain(p: &PairPoint) -> Result<PairPoint> {
    let tol = 1e-7;
    let ok = |y: f64, x: f64| y >= -tol && y <= x + tol && (-tol..=1.0 + tol).contains(&x);
    if !ok(p.y1, p.x1) || !ok(p.y2, p.x2) {
        return Err(Error::Domain(format!(
            "point ({}, {}, {}, {}) outside 0 <= y_i <= x_i <= 1",
            p.x1, p.x2, p.y1, p.y2
        )));
    }
    let x1 = p.x1.clamp(0.0, 1.0);
    let x2 = p.x2.clamp(0.0, 1.0);
    Ok(PairPoint {
        x1,
        x2,
        y1: p.y1.clamp(0.0, x1),
        y2: p.y2.clamp(0.0, x2),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum BoundedPiece {
    CaseOne,
    CaseTwo,
    Diff,
}

fn bounded_piece(p: &PairPoint) -> BoundedPiece {
    if p.y2 <= p.x2 && p.x2 <= p.y1 && p.x2 * (p.x1 - p.y1) <= p.y2 * (p.x1 - p.x2) {
        BoundedPiece::CaseOne
    } else if p.y1 <= p.x1 && p.x1 <= p.y2 && p.x1 * (p.x2 - p.y2) <= p.y1 * (p.x2 - p.x1) {
        BoundedPiece::CaseTwo
    } else {
        BoundedPiece::Diff
    }
}

/// Hull function of the bounded pair set on `0 <= y_i <= x_i <= 1`.
pub fn hull_bounded(p: &PairPoint) -> Result<f64> {
    let p = check_bounded_domain(p)?;
    Ok(bounded_value(&p))
}

fn bounded_value(p: &PairPoint) -> f64 {
    match bounded_piece(p) {
        BoundedPiece::CaseOne => {
            let a = p.y1 - p.x2;
            let b = p.x2 - p.y2;
            sdiv(a * a, p.x1 - p.x2) + sdiv(b * b, p.x2)
        }
        BoundedPiece::CaseTwo => {
            let a = p.y2 - p.x1;
            let b = p.x1 - p.y1;
            sdiv(a * a, p.x2 - p.x1) + sdiv(b * b, p.x1)
        }
        BoundedPiece::Diff => hull_unbounded(p),
    }
}

/// Subgradient of [`hull_bounded`] at `p` (zero indicators shifted, `y`
/// clamped back into the link bounds afterwards).
pub fn hull_bounded_subgrad(p: &PairPoint) -> Subgradient {
    let s = shift_point(p);
    let s = PairPoint {
        x1: s.x1,
        x2: s.x2,
        y1: p.y1.clamp(0.0, s.x1),
        y2: p.y2.clamp(0.0, s.x2),
    };
    match bounded_piece(&s) {
        BoundedPiece::CaseOne => {
            // ratios stay in [0,1] on this piece; 0/0 resolves to the
            // limit 1 approached along the binary restriction
            let r1 = ratio_or_one(s.y1 - s.x2, s.x1 - s.x2);
            let r2 = (s.x2 - s.y2) / s.x2;
            let a = s.y1 - s.x2;
            let b = s.x2 - s.y2;
            Subgradient {
                value: sdiv(a * a, s.x1 - s.x2) + sdiv(b * b, s.x2),
                dx1: -r1 * r1,
                dx2: -2.0 * r1 + r1 * r1 + 2.0 * r2 - r2 * r2,
                dy1: 2.0 * r1,
                dy2: -2.0 * r2,
            }
        }
        BoundedPiece::CaseTwo => {
            let r1 = ratio_or_one(s.y2 - s.x1, s.x2 - s.x1);
            let r2 = (s.x1 - s.y1) / s.x1;
            let a = s.y2 - s.x1;
            let b = s.x1 - s.y1;
            Subgradient {
                value: sdiv(a * a, s.x2 - s.x1) + sdiv(b * b, s.x1),
                dx2: -r1 * r1,
                dx1: -2.0 * r1 + r1 * r1 + 2.0 * r2 - r2 * r2,
                dy2: 2.0 * r1,
                dy1: -2.0 * r2,
            }
        }
        BoundedPiece::Diff => hull_unbounded_subgrad(&s),
    }
}

/// Left-hand sides of the three limiting inequalities for the bounded pair
/// set (valid also without sign restrictions on `y`): `which` selects
/// `y2^2/x2 - x1`, `y1^2/x1 - x2`, or `(y1-y2)^2/(x1+x2)`.
pub fn limit_ineq_lhs(p: &PairPoint, which: usize) -> Result<f64> {
    match which {
        1 => Ok(sdiv(p.y2 * p.y2, p.x2) - p.x1),
        2 => Ok(sdiv(p.y1 * p.y1, p.x1) - p.x2),
        3 => {
            let d = p.y1 - p.y2;
            Ok(sdiv(d * d, p.x1 + p.x2))
        }
        _ => Err(Error::Domain(format!("limit inequality index {which} not in 1..=3"))),
    }
}

/// LHS of the lifted conic inequality
/// `y1^2/x1 + y2^2/x2 - 2 min{y1, y2} <= t`.
pub fn valid12_lhs(p: &PairPoint) -> f64 {
    sdiv(p.y1 * p.y1, p.x1) + sdiv(p.y2 * p.y2, p.x2) - 2.0 * p.y1.min(p.y2)
}

/// LHS of the inequality for the positive cross-term set
/// (epigraph of `(y1+y2)^2`): `y1^2/x1 + y2^2/x2 <= t`.
pub fn plus_pair_lhs(p: &PairPoint) -> f64 {
    sdiv(p.y1 * p.y1, p.x1) + sdiv(p.y2 * p.y2, p.x2)
}

/// LHS of the inequality for sign-unrestricted continuous variables
/// (`-x_i <= y_i <= x_i`): `y1^2/x1 - x2 <= t`.
pub fn signed_pair_lhs(x1: f64, x2: f64, y1: f64) -> f64 {
    sdiv(y1 * y1, x1) - x2
}

fn check_coeff_cap(cut: &Cut) -> Result<Cut> {
    let cap_ok = cut
        .coeffs_x
        .iter()
        .chain(cut.coeffs_y.iter())
        .chain(std::iter::once(&cut.rhs))
        .all(|v| v.abs() <= CUT_COEFF_CAP);
    if !cap_ok || !cut.all_finite() {
        return Err(Error::Domain(format!(
            "cut `{}` rejected: coefficient magnitude above {CUT_COEFF_CAP:.0e}",
            cut.tag
        )));
    }
    Ok(cut.clone())
}

/// Linear cut from the extended polymatroid of the binary restriction
/// `x'Qx`. In the order given by `perm`,
/// `pi_i = Q_ii + 2 sum_{j before i} Q_ij` and
/// `alpha_i = 2 sum_{j up to i} Q_ij`; the cut is
///
/// ```text
/// sum_i pi_i x_i - sum_i alpha_i (x_i - y_i)
///                + sum_{i: Qbar_i <= 0} Qbar_i (x_i - y_i) <= t
/// ```
///
/// It is valid for the whole mixed-integer set and tight at binary `x = y`
/// points whose support is a prefix of `perm`.
pub fn polymatroid_cut(q: &Matrix, perm: &[usize]) -> Result<Cut> {
    let n = q.len();
    let check = crate::mmatrix::is_m_matrix(q, crate::num::TOL)?;
    if !check.is_m {
        return Err(Error::Domain("polymatroid cut requires an M-matrix".into()));
    }
    let mut seen = vec![false; n];
    for &i in perm {
        if i >= n || seen[i] {
            return Err(Error::Domain("perm is not a permutation of 0..n".into()));
        }
        seen[i] = true;
    }
    if perm.len() != n {
        return Err(Error::Domain("perm is not a permutation of 0..n".into()));
    }

    let rowsum: Vec<f64> = (0..n).map(|i| q[i].iter().sum()).collect();
    let mut pi = vec![0.0; n];
    let mut alpha = vec![0.0; n];
    for (k, &i) in perm.iter().enumerate() {
        let before: f64 = perm[..k].iter().map(|&j| q[i][j]).sum();
        pi[i] = q[i][i] + 2.0 * before;
        alpha[i] = 2.0 * (before + q[i][i]);
    }
    let mut coeffs_x = vec![0.0; n];
    let mut coeffs_y = vec![0.0; n];
    for i in 0..n {
        let qbar_corr = if rowsum[i] <= 0.0 { rowsum[i] } else { 0.0 };
        coeffs_x[i] = pi[i] - alpha[i] + qbar_corr;
        coeffs_y[i] = alpha[i] - qbar_corr;
    }
    let mut coeff_t = BTreeMap::new();
    coeff_t.insert("total".to_string(), -1.0);
    check_coeff_cap(&Cut {
        coeffs_x,
        coeffs_y,
        coeff_t,
        rhs: 0.0,
        tag: "polymatroid".into(),
    })
}

/// Which pair hull supplies the subgradients of an aggregated cut.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HullMode {
    /// Bounded hull, valid when the pair's links are `y_i <= x_i`.
    Bounded,
    /// Unbounded hull, valid for any upper bounds.
    Unbounded,
}

/// Aggregated subgradient cut: the sum over the decomposition of tangents
/// of the per-term hulls at `point` — perspective tangents for positive
/// diagonal weights, secant linear terms `Qbar_i u_i y_i` for nonpositive
/// ones, and pair-hull tangents weighted by the pair weights. The result is
/// one linear cut bounding the `total` quadratic block. Pairs fall back to
/// the unbounded hull when their upper bounds are not both 1.
pub fn aggregate_subgrad_cut(
    dec: &PairDecomposition,
    point: &Point,
    mode: HullMode,
    u: &[f64],
) -> Result<Cut> {
    let n = dec.diag_weights.len();
    let mut coeffs_x = vec![0.0; n];
    let mut coeffs_y = vec![0.0; n];
    let mut offset = 0.0;

    for i in 0..n {
        let w = dec.diag_weights[i];
        if w > 0.0 {
            let x = point.x[i].max(ZERO_X_SHIFT);
            let y = point.y[i].max(0.0);
            let r = y / x;
            // tangent of w * y^2/x at (x, y)
            coeffs_x[i] += -w * r * r;
            coeffs_y[i] += 2.0 * w * r;
            let val = w * r * y;
            offset += val - (-w * r * r * x + 2.0 * w * r * y);
        } else if w < 0.0 {
            // secant under-estimator of w*y^2 on [0, u]
            coeffs_y[i] += w * u[i];
        }
    }

    for &(i, j, w) in &dec.neg_pairs {
        let raw = PairPoint::new(point.x[i], point.x[j], point.y[i], point.y[j]);
        let p = shift_point(&raw);
        let use_bounded = mode == HullMode::Bounded && u[i] == 1.0 && u[j] == 1.0;
        let (sg, anchor) = if use_bounded {
            let anchor = PairPoint {
                x1: p.x1,
                x2: p.x2,
                y1: p.y1.clamp(0.0, p.x1),
                y2: p.y2.clamp(0.0, p.x2),
            };
            (hull_bounded_subgrad(&anchor), anchor)
        } else {
            (hull_unbounded_subgrad(&p), p)
        };
        coeffs_x[i] += w * sg.dx1;
        coeffs_x[j] += w * sg.dx2;
        coeffs_y[i] += w * sg.dy1;
        coeffs_y[j] += w * sg.dy2;
        let lin_at_anchor =
            sg.dx1 * anchor.x1 + sg.dx2 * anchor.x2 + sg.dy1 * anchor.y1 + sg.dy2 * anchor.y2;
        offset += w * (sg.value - lin_at_anchor);
    }

    let mut coeff_t = BTreeMap::new();
    coeff_t.insert("total".to_string(), -1.0);
    check_coeff_cap(&Cut {
        coeffs_x,
        coeffs_y,
        coeff_t,
        rhs: -offset,
        tag: match mode {
            HullMode::Bounded => "subgrad-g".into(),
            HullMode::Unbounded => "subgrad-f".into(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn pp(x1: f64, x2: f64, y1: f64, y2: f64) -> PairPoint {
        PairPoint::new(x1, x2, y1, y2)
    }

    #[test]
    fn unbounded_examples() {
        assert!((hull_unbounded(&pp(1.0, 1.0, 0.5, 0.2)) - 0.09).abs() < 1e-12);
        assert!((hull_unbounded(&pp(0.5, 1.0, 0.6, 0.2)) - 0.32).abs() < 1e-12);
        assert_eq!(hull_unbounded(&pp(0.0, 0.0, 0.0, 0.0)), 0.0);
        assert!((hull_unbounded(&pp(0.0, 1.0, 0.0, 0.3)) - 0.09).abs() < 1e-12);
    }

    #[test]
    fn unbounded_subgrad_examples() {
        let s = hull_unbounded_subgrad(&pp(1.0, 1.0, 1.0, 0.0));
        assert!((s.value - 1.0).abs() < 1e-12);
        assert!((s.dx1 + 1.0).abs() < 1e-12);
        assert!((s.dy1 - 2.0).abs() < 1e-12);
        assert!((s.dy2 + 2.0).abs() < 1e-12);
        assert_eq!(s.dx2, 0.0);

        let s = hull_unbounded_subgrad(&pp(0.5, 1.0, 0.5, 0.5));
        assert_eq!(s.value, 0.0);
        assert_eq!((s.dx1, s.dx2, s.dy1, s.dy2), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn unbounded_subgrad_underestimates() {
        let mut rng = Rng::new(41);
        for _ in 0..10_000 {
            let p = pp(rng.f64(), rng.f64(), 2.0 * rng.f64(), 2.0 * rng.f64());
            let q = pp(rng.f64(), rng.f64(), 2.0 * rng.f64(), 2.0 * rng.f64());
            let s = hull_unbounded_subgrad(&p);
            let anchor = shift_point(&p);
            let tangent = s.tangent_at(&anchor, &q);
            let actual = hull_unbounded(&q);
            assert!(
                tangent <= actual + 1e-9,
                "tangent {tangent} above value {actual} at {q:?}"
            );
        }
    }

    #[test]
    fn one_indicator_examples() {
        assert!((hull_one_indicator(0.5, 0.5, 1.0).unwrap() - 0.5).abs() < 1e-12);
        assert!((hull_one_indicator(1.0, 0.3, 0.7).unwrap() - 0.16).abs() < 1e-12);
        assert!((hull_one_indicator(0.4, 0.4, 0.1).unwrap() - 0.225).abs() < 1e-12);
    }

    #[test]
    fn one_indicator_domain_error() {
        assert!(hull_one_indicator(0.5, 0.7, 0.5).is_err());
    }

    #[test]
    fn bounded_examples() {
        assert!((hull_bounded(&pp(1.0, 0.5, 1.0, 0.25)).unwrap() - 0.625).abs() < 1e-12);
        assert!((hull_bounded(&pp(1.0, 0.0, 1.0, 0.0)).unwrap() - 1.0).abs() < 1e-12);
        assert!((hull_bounded(&pp(1.0, 1.0, 0.7, 0.2)).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn bounded_domain_error() {
        assert!(hull_bounded(&pp(0.5, 1.0, 0.7, 0.0)).is_err());
    }

    #[test]
    fn bounded_subgrad_case1_partial() {
        let s = hull_bounded_subgrad(&pp(1.0, 0.5, 1.0, 0.25));
        assert!((s.dy1 - 2.0).abs() < 1e-12);
        assert!((s.value - 0.625).abs() < 1e-12);
    }

    #[test]
    fn bounded_subgrad_matches_unbounded_on_diff_piece() {
        let p = pp(1.0, 1.0, 0.7, 0.2);
        let sg = hull_bounded_subgrad(&p);
        let sf = hull_unbounded_subgrad(&p);
        assert_eq!(sg.value, sf.value);
        assert_eq!(sg.dx1, sf.dx1);
        assert_eq!(sg.dy1, sf.dy1);
    }

    #[test]
    fn bounded_subgrad_underestimates() {
        let mut rng = Rng::new(43);
        for _ in 0..10_000 {
            let (p, q) = (random_bounded(&mut rng), random_bounded(&mut rng));
            let s = hull_bounded_subgrad(&p);
            let anchor = shift_point(&p);
            let tangent = s.tangent_at(&anchor, &q);
            let actual = hull_bounded(&q).unwrap();
            assert!(
                tangent <= actual + 1e-9,
                "tangent {tangent} above value {actual}: p={p:?} q={q:?}"
            );
        }
    }

    fn random_bounded(rng: &mut Rng) -> PairPoint {
        let x1 = rng.f64();
        let x2 = rng.f64();
        pp(x1, x2, x1 * rng.f64(), x2 * rng.f64())
    }

    #[test]
    fn binary_restriction_tangent_matches_polymatroid() {
        // at x = y = (1,1) the bounded-hull subgradient of the motif pair
        // reproduces the identity-permutation polymatroid coefficients
        let s = hull_bounded_subgrad(&pp(1.0, 1.0, 1.0, 1.0));
        assert_eq!((s.dx1, s.dx2, s.dy1, s.dy2), (-1.0, -1.0, 2.0, 0.0));
    }

    #[test]
    fn limit_ineq_examples() {
        assert!((limit_ineq_lhs(&pp(1.0, 1.0, 1.0, 0.0), 3).unwrap() - 0.5).abs() < 1e-12);
        assert!(limit_ineq_lhs(&pp(1.0, 1.0, 0.0, 1.0), 1).unwrap().abs() < 1e-12);
        assert!(limit_ineq_lhs(&pp(1.0, 1.0, 0.0, 1.0), 4).is_err());
    }

    #[test]
    fn unbounded_dominates_limit3() {
        let mut rng = Rng::new(47);
        for _ in 0..10_000 {
            let p = pp(rng.f64(), rng.f64(), 2.0 * rng.f64(), 2.0 * rng.f64());
            let f = hull_unbounded(&p);
            let j3 = limit_ineq_lhs(&p, 3).unwrap();
            assert!(f >= j3 - 1e-9, "{f} < {j3} at {p:?}");
        }
    }

    #[test]
    fn valid12_examples_and_dominance() {
        assert_eq!(valid12_lhs(&pp(1.0, 1.0, 1.0, 1.0)), 0.0);
        assert_eq!(valid12_lhs(&pp(1.0, 1.0, 1.0, 0.0)), 1.0);
        let mut rng = Rng::new(53);
        for _ in 0..10_000 {
            let p = random_bounded(&mut rng);
            let v = valid12_lhs(&p);
            let j1 = limit_ineq_lhs(&p, 1).unwrap();
            let j2 = limit_ineq_lhs(&p, 2).unwrap();
            assert!(v >= j1 - 1e-9 && v >= j2 - 1e-9);
        }
    }

    #[test]
    fn valid12_below_quadratic_on_integer_grid() {
        for x1 in [0.0, 1.0] {
            for x2 in [0.0, 1.0] {
                let mut y1 = 0.0;
                while y1 <= x1 + 1e-12 {
                    let mut y2 = 0.0;
                    while y2 <= x2 + 1e-12 {
                        let p = pp(x1, x2, y1, y2);
                        let d = (y1 - y2) * (y1 - y2);
                        assert!(valid12_lhs(&p) <= d + 1e-9);
                        assert!(hull_bounded(&p).unwrap() <= d + 1e-9);
                        assert!(hull_unbounded(&p) <= d + 1e-9);
                        if x1 == 1.0 && x2 == 1.0 {
                            assert!((hull_bounded(&p).unwrap() - d).abs() <= 1e-9);
                        }
                        y2 += 0.05;
                    }
                    y1 += 0.05;
                }
            }
        }
    }

    #[test]
    fn plus_pair_examples_and_validity() {
        assert_eq!(plus_pair_lhs(&pp(1.0, 1.0, 1.0, 1.0)), 2.0);
        assert_eq!(plus_pair_lhs(&pp(0.5, 1.0, 0.5, 0.0)), 0.5);
        for x1 in [0.0f64, 1.0] {
            for x2 in [0.0f64, 1.0] {
                let mut y1 = 0.0;
                while y1 <= x1 + 1e-12 {
                    let mut y2 = 0.0;
                    while y2 <= x2 + 1e-12 {
                        let s = (y1 + y2) * (y1 + y2);
                        assert!(plus_pair_lhs(&pp(x1, x2, y1, y2)) <= s + 1e-9);
                        y2 += 0.05;
                    }
                    y1 += 0.05;
                }
            }
        }
    }

    #[test]
    fn signed_pair_examples_and_validity() {
        assert_eq!(signed_pair_lhs(1.0, 1.0, 1.0), 0.0);
        assert_eq!(signed_pair_lhs(1.0, 0.0, 0.5), 0.25);
        // over integer x and a grid of y in [-x, x], compare against the
        // quadratic minimized over feasible y2
        for x1 in [0.0f64, 1.0] {
            for x2 in [0.0f64, 1.0] {
                let mut y1 = -x1;
                while y1 <= x1 + 1e-12 {
                    let tmin = {
                        let r = (y1.abs() - x2).max(0.0);
                        r * r
                    };
                    assert!(signed_pair_lhs(x1, x2, y1) <= tmin + 1e-9);
                    y1 += 0.05;
                }
            }
        }
    }

    #[test]
    fn convexity_midpoint_all_hulls() {
        let mut rng = Rng::new(59);
        for _ in 0..20_000 {
            // unbounded hull
            let p = pp(rng.f64(), rng.f64(), 2.0 * rng.f64(), 2.0 * rng.f64());
            let q = pp(rng.f64(), rng.f64(), 2.0 * rng.f64(), 2.0 * rng.f64());
            let m = pp(
                0.5 * (p.x1 + q.x1),
                0.5 * (p.x2 + q.x2),
                0.5 * (p.y1 + q.y1),
                0.5 * (p.y2 + q.y2),
            );
            assert!(hull_unbounded(&m) <= 0.5 * (hull_unbounded(&p) + hull_unbounded(&q)) + 1e-9);

            // bounded hull
            let p = random_bounded(&mut rng);
            let q = random_bounded(&mut rng);
            let m = pp(
                0.5 * (p.x1 + q.x1),
                0.5 * (p.x2 + q.x2),
                0.5 * (p.y1 + q.y1),
                0.5 * (p.y2 + q.y2),
            );
            let hm = hull_bounded(&m).unwrap();
            assert!(hm <= 0.5 * (hull_bounded(&p).unwrap() + hull_bounded(&q).unwrap()) + 1e-9);

            // single-indicator hull
            let (xa, xb) = (rng.f64(), rng.f64());
            let (pa, pb) = ((xa * rng.f64(), rng.f64()), (xb * rng.f64(), rng.f64()));
            let hm = hull_one_indicator(
                0.5 * (xa + xb),
                0.5 * (pa.0 + pb.0),
                0.5 * (pa.1 + pb.1),
            )
            .unwrap();
            let ha = hull_one_indicator(xa, pa.0, pa.1).unwrap();
            let hb = hull_one_indicator(xb, pb.0, pb.1).unwrap();
            assert!(hm <= 0.5 * (ha + hb) + 1e-9);
        }
    }

    #[test]
    fn polymatroid_motif_example() {
        let q = vec![vec![1.0, -1.0], vec![-1.0, 1.0]];
        let cut = polymatroid_cut(&q, &[0, 1]).unwrap();
        assert_eq!(cut.coeffs_x, vec![-1.0, -1.0]);
        assert_eq!(cut.coeffs_y, vec![2.0, 0.0]);
        assert_eq!(cut.rhs, 0.0);
        assert_eq!(cut.coeff_t.get("total"), Some(&-1.0));
    }

    #[test]
    fn polymatroid_identity_is_perspective_tangent() {
        let q = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let cut = polymatroid_cut(&q, &[1, 0]).unwrap();
        assert_eq!(cut.coeffs_x, vec![-1.0, -1.0]);
        assert_eq!(cut.coeffs_y, vec![2.0, 2.0]);
    }

    #[test]
    fn polymatroid_validity_random() {
        let mut rng = Rng::new(61);
        let n = 4;
        for _ in 0..20 {
            let mut q = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let w = -rng.f64();
                    q[i][j] = w;
                    q[j][i] = w;
                }
            }
            for i in 0..n {
                let offsum: f64 = (0..n).filter(|&j| j != i).map(|j| q[i][j].abs()).sum();
                q[i][i] = offsum + rng.f64();
            }
            // all orderings of 4 indices
            let perms = permutations(n);
            for perm in &perms {
                let cut = polymatroid_cut(&q, perm).unwrap();
                for _ in 0..40 {
                    let x: Vec<f64> = (0..n).map(|_| (rng.f64() < 0.5) as u8 as f64).collect();
                    let y: Vec<f64> = (0..n).map(|i| x[i] * rng.f64()).collect();
                    let t = crate::linalg::quad_form(&q, &y, &y);
                    let lhs = cut.linear_part(&x, &y) - t;
                    assert!(lhs <= cut.rhs + 1e-8, "violated: {lhs} > {}", cut.rhs);
                }
            }
        }
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut items: Vec<usize> = (0..n).collect();
        permute(&mut items, 0, &mut out);
        out
    }

    fn permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if k == items.len() {
            out.push(items.clone());
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            permute(items, k + 1, out);
            items.swap(k, i);
        }
    }

    #[test]
    fn polymatroid_tight_on_prefix_sets() {
        let q = vec![
            vec![2.0, -0.5, -0.3],
            vec![-0.5, 1.5, -0.4],
            vec![-0.3, -0.4, 1.8],
        ];
        let perm = vec![2, 0, 1];
        let cut = polymatroid_cut(&q, &perm).unwrap();
        for m in 0..=3 {
            let mut x = vec![0.0; 3];
            for &i in &perm[..m] {
                x[i] = 1.0;
            }
            let t = crate::linalg::quad_form(&q, &x, &x);
            let slack = cut.rhs - (cut.linear_part(&x, &x) - t);
            assert!(slack.abs() <= 1e-9, "prefix {m} slack {slack}");
        }
    }

    #[test]
    fn aggregate_cut_matches_polymatroid_on_motif() {
        let q = vec![vec![1.0, -1.0], vec![-1.0, 1.0]];
        let dec = crate::mmatrix::decompose(&q).unwrap();
        let point = Point::new(vec![1.0, 1.0], vec![1.0, 1.0], vec![]);
        let agg = aggregate_subgrad_cut(&dec, &point, HullMode::Bounded, &[1.0, 1.0]).unwrap();
        let pm = polymatroid_cut(&q, &[0, 1]).unwrap();
        for i in 0..2 {
            assert!((agg.coeffs_x[i] - pm.coeffs_x[i]).abs() < 1e-12);
            assert!((agg.coeffs_y[i] - pm.coeffs_y[i]).abs() < 1e-12);
        }
        assert!((agg.rhs - pm.rhs).abs() < 1e-12);
    }

    #[test]
    fn aggregate_cut_diagonal_is_perspective_tangent() {
        let q = vec![vec![2.0, 0.0], vec![0.0, 1.0]];
        let dec = crate::mmatrix::decompose(&q).unwrap();
        let point = Point::new(vec![1.0, 1.0], vec![0.5, 1.0], vec![]);
        let cut = aggregate_subgrad_cut(&dec, &point, HullMode::Bounded, &[1.0, 1.0]).unwrap();
        // tangents of 2*y1^2/x1 at (1, 0.5) and y2^2/x2 at (1, 1)
        assert!((cut.coeffs_x[0] - (-2.0 * 0.25)).abs() < 1e-12);
        assert!((cut.coeffs_y[0] - 2.0).abs() < 1e-12);
        assert!((cut.coeffs_x[1] - (-1.0)).abs() < 1e-12);
        assert!((cut.coeffs_y[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn aggregate_cut_valid_on_integer_points() {
        let mut rng = Rng::new(67);
        let n = 3;
        let q = vec![
            vec![1.5, -0.7, -0.2],
            vec![-0.7, 1.2, -0.5],
            vec![-0.2, -0.5, 1.0],
        ];
        let dec = crate::mmatrix::decompose(&q).unwrap();
        let u = vec![1.0; n];
        for _ in 0..50 {
            let point = Point::new(
                (0..n).map(|_| rng.f64()).collect(),
                (0..n).map(|_| rng.f64() * 0.8).collect(),
                vec![],
            );
            let point = Point::new(
                point.x.clone(),
                point
                    .y
                    .iter()
                    .zip(&point.x)
                    .map(|(&y, &x)| y.min(x))
                    .collect(),
                vec![],
            );
            let cut = aggregate_subgrad_cut(&dec, &point, HullMode::Bounded, &u).unwrap();
            for mask in 0..(1u32 << n) {
                let x: Vec<f64> = (0..n).map(|i| ((mask >> i) & 1) as f64).collect();
                for _ in 0..20 {
                    let y: Vec<f64> = (0..n).map(|i| x[i] * rng.f64()).collect();
                    let t = crate::linalg::quad_form(&q, &y, &y);
                    assert!(cut.linear_part(&x, &y) - t <= cut.rhs + 1e-8);
                }
            }
        }
    }
}
