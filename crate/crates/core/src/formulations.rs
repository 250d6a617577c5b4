//! Relaxation builders: turn an [`Instance`] into a [`ConvexProgram`] under
//! one of the formulation variants, and manage the cut pool.
//!
//! Epigraph variables never appear explicitly. Each term knows its
//! closed-form value at `(x, y)` — perspective terms evaluate `y_i^2/x_i`,
//! pair terms evaluate the active maximum of their pieces — and the
//! objective is the linear part plus the weighted term values. Cuts fold
//! into the term they reference: a cut bounding a pair epigraph raises that
//! pair's value, a cut bounding the `total` quadratic block raises the
//! whole block. Both foldings preserve convexity (each value stays a max
//! of convex functions) and validity (every cut under-estimates the true
//! quadratic at integer-feasible points).

use serde::Serialize;

use crate::hulls::{self, PairPoint};
use crate::linalg::{self, Matrix};
use crate::mmatrix;
use crate::num::sdiv;
use crate::types::{Cut, Instance, LinearConstraint};
use crate::{Error, Result};

/// Formulation variants.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormulationKind {
    /// Quadratic objective as-is, links `y_i <= u_i x_i`.
    Basic,
    /// Diagonal split into perspective cones, remainder quadratic.
    Perspective,
    /// Perspective plus per-pair epigraphs with the conic rows.
    Conic,
    /// Conic with root-node cut separation enabled.
    ConicCuts,
    /// Per-pair epigraphs carrying the unbounded hull function.
    HullF,
    /// Per-pair epigraphs carrying the bounded hull function.
    HullG,
    /// The binary-restriction LP (min-cut bound); no continuous variables.
    BinaryMincutLP,
}

impl FormulationKind {
    pub fn parse(s: &str) -> Option<FormulationKind> {
        Some(match s.to_ascii_lowercase().as_str() {
            "basic" => FormulationKind::Basic,
            "perspective" => FormulationKind::Perspective,
            "conic" => FormulationKind::Conic,
            "conic-cuts" | "coniccuts" => FormulationKind::ConicCuts,
            "hullf" => FormulationKind::HullF,
            "hullg" => FormulationKind::HullG,
            "mincut" | "binarymincutlp" => FormulationKind::BinaryMincutLP,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            FormulationKind::Basic => "basic",
            FormulationKind::Perspective => "perspective",
            FormulationKind::Conic => "conic",
            FormulationKind::ConicCuts => "conic-cuts",
            FormulationKind::HullF => "hullf",
            FormulationKind::HullG => "hullg",
            FormulationKind::BinaryMincutLP => "mincut",
        }
    }
}

/// How a pair epigraph bounds its `t` value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairMode {
    /// `t >= (y_i - y_j)^2` only.
    Quad,
    /// `t >= max{(y_i-y_j)^2, z_i+z_j-2y_i, z_i+z_j-2y_j}`.
    Conic,
    /// `t >= f(x_i, x_j, y_i, y_j)` (unbounded hull).
    HullF,
    /// `t >= g(x_i, x_j, y_i, y_j)` (bounded hull).
    HullG,
}

#[derive(Clone, Debug)]
pub struct PerspTerm {
    pub i: usize,
    pub weight: f64,
}

#[derive(Clone, Debug)]
pub struct PairTerm {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
    pub mode: PairMode,
}

/// A cut plus its activity counter used for pool eviction.
#[derive(Clone, Debug)]
pub struct PoolCut {
    pub cut: Cut,
    pub times_tight: u64,
}

/// Bounded pool of cuts; eviction drops the cut that has been tight at
/// relaxation solutions least often.
#[derive(Clone, Debug, Default)]
pub struct CutPool {
    pub cuts: Vec<PoolCut>,
    pub capacity: usize,
}

impl CutPool {
    pub fn push(&mut self, cut: Cut) {
        self.cuts.push(PoolCut { cut, times_tight: 0 });
        if self.cuts.len() > self.capacity {
            let worst = self
                .cuts
                .iter()
                .enumerate()
                .min_by_key(|(_, c)| c.times_tight)
                .map(|(k, _)| k)
                .unwrap();
            self.cuts.remove(worst);
        }
    }
}

/// Root separation configuration (used when the kind enables cuts).
#[derive(Clone, Copy, Debug)]
pub struct SeparationConfig {
    pub max_rounds: usize,
    pub violation_tol: f64,
    pub budget: usize,
}

/// A relaxation with epigraph variables eliminated analytically.
#[derive(Clone, Debug)]
pub struct ConvexProgram {
    pub kind: FormulationKind,
    pub n: usize,
    pub obj_const: f64,
    pub obj_x: Vec<f64>,
    pub obj_y: Vec<f64>,
    /// Linear under-estimators of nonpositive diagonal weights; part of the
    /// quadratic block, not of `obj_y`.
    pub quad_lin_y: Vec<f64>,
    pub persp: Vec<PerspTerm>,
    pub pairs: Vec<PairTerm>,
    /// `(i, j, w)`: `w * |x_i - x_j|` terms (binary-restriction LP).
    pub abs_pairs: Vec<(usize, usize, f64)>,
    /// Full quadratic `y'Qy` (Basic).
    pub full_quad: Option<Matrix>,
    /// Residual quadratic `y'Ry`.
    pub residual: Option<Matrix>,
    pub u: Vec<f64>,
    pub x_lo: Vec<f64>,
    pub x_hi: Vec<f64>,
    pub rows: Vec<LinearConstraint>,
    pub cuts: CutPool,
    pub y_enabled: bool,
    pub separation: Option<SeparationConfig>,
}

/// Source of the M-part when the instance matrix is not itself an M-matrix.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MPartSource {
    /// Use `Q` directly when it passes the M-matrix check, else extract.
    #[default]
    Auto,
    /// Require `Q` to be an M-matrix.
    MMatrixOnly,
    /// Always extract `min{0, Q_ij}` and a residual.
    Extract,
}

#[derive(Clone, Debug, Default)]
pub struct BuildOptions {
    pub m_part: MPartSource,
    /// Diagonal `upsilon` for the perspective split on general matrices;
    /// falls back to `meta.upsilon`, then to zeros.
    pub residual_diag: Option<Vec<f64>>,
}

fn is_zero_matrix(m: &Matrix) -> bool {
    m.iter().flatten().all(|&v| v == 0.0)
}

/// Builds the relaxation of `instance` for the requested formulation.
pub fn build(
    instance: &Instance,
    kind: FormulationKind,
    options: &BuildOptions,
) -> Result<ConvexProgram> {
    instance.validate()?;
    let n = instance.n;
    let mut prog = ConvexProgram {
        kind,
        n,
        obj_const: 0.0,
        obj_x: instance.a.clone(),
        obj_y: instance.b.clone(),
        quad_lin_y: vec![0.0; n],
        persp: vec![],
        pairs: vec![],
        abs_pairs: vec![],
        full_quad: None,
        residual: None,
        u: instance.u.clone(),
        x_lo: vec![0.0; n],
        x_hi: vec![1.0; n],
        rows: instance.constraints.clone(),
        cuts: CutPool {
            cuts: vec![],
            capacity: 5 * n,
        },
        y_enabled: true,
        separation: None,
    };

    if kind == FormulationKind::Basic {
        prog.full_quad = Some(instance.q.clone());
        return Ok(prog);
    }

    if kind == FormulationKind::BinaryMincutLP {
        let dec = mmatrix::decompose(&instance.q)?;
        prog.obj_x = dec.diag_weights.clone();
        prog.obj_y = vec![0.0; n];
        prog.y_enabled = false;
        prog.abs_pairs = dec.neg_pairs;
        return Ok(prog);
    }

    // Perspective-family builds need an M-part and a diagonal split.
    let is_m = options.m_part != MPartSource::Extract
        && mmatrix::is_m_matrix(&instance.q, crate::num::TOL)?.is_m;
    if options.m_part == MPartSource::MMatrixOnly && !is_m {
        return Err(Error::Domain("instance matrix is not an M-matrix".into()));
    }

    let (persp_weights, pairs, residual): (Vec<f64>, Vec<(usize, usize, f64)>, Option<Matrix>) =
        if is_m {
            let dec = mmatrix::decompose_unchecked(&instance.q);
            let mut weights = vec![0.0; n];
            for i in 0..n {
                if dec.diag_weights[i] > 0.0 {
                    weights[i] = dec.diag_weights[i];
                } else if dec.diag_weights[i] < 0.0 {
                    prog.quad_lin_y[i] = dec.diag_weights[i] * instance.u[i];
                }
            }
            let residual = match kind {
                // keep the pairwise part as a residual quadratic
                FormulationKind::Perspective => {
                    let mut r = instance.q.clone();
                    for i in 0..n {
                        r[i][i] -= dec.diag_weights[i];
                    }
                    if is_zero_matrix(&r) {
                        None
                    } else {
                        Some(r)
                    }
                }
                _ => None,
            };
            let pairs = match kind {
                FormulationKind::Perspective => vec![],
                _ => dec.neg_pairs.clone(),
            };
            (weights, pairs, residual)
        } else {
            let upsilon = options
                .residual_diag
                .clone()
                .or_else(|| instance.meta_upsilon())
                .unwrap_or_else(|| vec![0.0; n]);
            if kind == FormulationKind::Perspective && upsilon.iter().all(|&v| v <= 0.0) {
                return Err(Error::Domain("no diagonal to extract".into()));
            }
            let (q_m, r, _r_eig) = mmatrix::extract_m_part(&instance.q, &upsilon)?;
            let dec = mmatrix::decompose_unchecked(&q_m);
            let pairs = match kind {
                FormulationKind::Perspective => vec![],
                _ => dec.neg_pairs.clone(),
            };
            let residual = match kind {
                FormulationKind::Perspective => {
                    // remainder keeps the M-part quadratic too
                    let mut full = instance.q.clone();
                    for i in 0..n {
                        full[i][i] -= upsilon[i];
                    }
                    Some(full)
                }
                _ => {
                    if is_zero_matrix(&r) {
                        None
                    } else {
                        Some(r)
                    }
                }
            };
            (upsilon, pairs, residual)
        };

    for (i, &w) in persp_weights.iter().enumerate() {
        if w > 0.0 {
            prog.persp.push(PerspTerm { i, weight: w });
        }
    }
    prog.residual = residual;

    let pair_mode = |i: usize, j: usize| -> PairMode {
        let unit = instance.u[i] == 1.0 && instance.u[j] == 1.0;
        match kind {
            FormulationKind::Conic | FormulationKind::ConicCuts => {
                if unit {
                    PairMode::Conic
                } else {
                    PairMode::Quad
                }
            }
            FormulationKind::HullG => {
                if unit {
                    PairMode::HullG
                } else {
                    PairMode::HullF
                }
            }
            FormulationKind::HullF => PairMode::HullF,
            _ => PairMode::Quad,
        }
    };
    for (i, j, w) in pairs {
        prog.pairs.push(PairTerm {
            i,
            j,
            weight: w,
            mode: pair_mode(i, j),
        });
    }

    // conic rows reference z_i for every pair member, so make sure a cone
    // exists even with zero objective weight
    if matches!(kind, FormulationKind::Conic | FormulationKind::ConicCuts) {
        let mut has_cone = vec![false; n];
        for t in &prog.persp {
            has_cone[t.i] = true;
        }
        for p in &prog.pairs {
            if p.mode == PairMode::Conic {
                for idx in [p.i, p.j] {
                    if !has_cone[idx] {
                        prog.persp.push(PerspTerm { i: idx, weight: 0.0 });
                        has_cone[idx] = true;
                    }
                }
            }
        }
        prog.persp.sort_by_key(|t| t.i);
    }

    if kind == FormulationKind::ConicCuts {
        prog.separation = Some(SeparationConfig {
            max_rounds: 20,
            violation_tol: 1e-6,
            budget: (2 * n).max(4),
        });
    }

    Ok(prog)
}

impl ConvexProgram {
    /// Fixes indicator `i` to a binary value (box collapses; the link then
    /// pins `y_i` when the value is 0).
    pub fn fix(&mut self, i: usize, value: bool) {
        let v = if value { 1.0 } else { 0.0 };
        self.x_lo[i] = v;
        self.x_hi[i] = v;
    }

    pub fn fixings(&self) -> Vec<Option<bool>> {
        (0..self.n)
            .map(|i| {
                if self.x_lo[i] == self.x_hi[i] {
                    Some(self.x_lo[i] == 1.0)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Adds a cut to the pool (capacity-bounded).
    pub fn add_cut(&mut self, cut: Cut) {
        self.cuts.push(cut);
    }

    /// Perspective value `z_i = y_i^2 / x_i`.
    pub fn persp_value(&self, i: usize, x: &[f64], y: &[f64]) -> f64 {
        sdiv(y[i] * y[i], x[i].max(0.0))
    }

    /// Value of a pair epigraph at `(x, y)` including folded pair cuts.
    pub fn pair_value(&self, k: usize, x: &[f64], y: &[f64]) -> f64 {
        let term = &self.pairs[k];
        let (i, j) = (term.i, term.j);
        let p = PairPoint::new(x[i], x[j], y[i], y[j]);
        let base = match term.mode {
            PairMode::Quad => {
                let d = y[i] - y[j];
                d * d
            }
            PairMode::Conic => {
                let d = y[i] - y[j];
                let zi = self.persp_value(i, x, y);
                let zj = self.persp_value(j, x, y);
                (d * d).max(zi + zj - 2.0 * y[i]).max(zi + zj - 2.0 * y[j])
            }
            PairMode::HullF => hulls::hull_unbounded(&p),
            PairMode::HullG => {
                let x1 = p.x1.clamp(0.0, 1.0);
                let x2 = p.x2.clamp(0.0, 1.0);
                let clamped = PairPoint {
                    x1,
                    x2,
                    y1: p.y1.clamp(0.0, x1),
                    y2: p.y2.clamp(0.0, x2),
                };
                hulls::hull_bounded(&clamped).unwrap_or(f64::INFINITY)
            }
        };
        let id = pair_term_id(i, j);
        let mut v = base;
        for pc in &self.cuts.cuts {
            if pc.cut.coeff_t.get(&id) == Some(&-1.0) {
                v = v.max(pc.cut.linear_part(x, y) - pc.cut.rhs);
            }
        }
        v
    }

    /// Value of the whole quadratic block: the split representation
    /// (perspective + pairs + residual/full quadratic + secant terms),
    /// raised by any `total` cuts in the pool.
    pub fn quad_block_value(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut split = 0.0;
        for t in &self.persp {
            split += t.weight * self.persp_value(t.i, x, y);
        }
        for k in 0..self.pairs.len() {
            split += self.pairs[k].weight * self.pair_value(k, x, y);
        }
        for &(i, j, w) in &self.abs_pairs {
            split += w * (x[i] - x[j]).abs();
        }
        if let Some(q) = &self.full_quad {
            split += linalg::quad_form(q, y, y);
        }
        if let Some(r) = &self.residual {
            split += linalg::quad_form(r, y, y);
        }
        split += self
            .quad_lin_y
            .iter()
            .zip(y)
            .map(|(c, v)| c * v)
            .sum::<f64>();
        let mut v = split;
        for pc in &self.cuts.cuts {
            if pc.cut.coeff_t.get("total") == Some(&-1.0) {
                v = v.max(pc.cut.linear_part(x, y) - pc.cut.rhs);
            }
        }
        v
    }

    /// Full objective value at `(x, y)`.
    pub fn objective_value(&self, x: &[f64], y: &[f64]) -> f64 {
        let lin_x: f64 = self.obj_x.iter().zip(x).map(|(c, v)| c * v).sum();
        let lin_y: f64 = self.obj_y.iter().zip(y).map(|(c, v)| c * v).sum();
        self.obj_const + lin_x + lin_y + self.quad_block_value(x, y)
    }

    /// Epigraph term values in dump order (perspective, pairs, abs).
    pub fn term_values(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.persp.len() + self.pairs.len() + self.abs_pairs.len());
        for t in &self.persp {
            out.push(self.persp_value(t.i, x, y));
        }
        for k in 0..self.pairs.len() {
            out.push(self.pair_value(k, x, y));
        }
        for &(i, j, _) in &self.abs_pairs {
            out.push((x[i] - x[j]).abs());
        }
        out
    }

    /// Marks pool cuts that are tight at `(x, y)`; drives eviction order.
    pub fn record_tight_cuts(&mut self, x: &[f64], y: &[f64]) {
        let pair_ids: Vec<String> = self.pairs.iter().map(|p| pair_term_id(p.i, p.j)).collect();
        let pair_vals: Vec<f64> = (0..self.pairs.len())
            .map(|k| self.pair_value(k, x, y))
            .collect();
        let total = self.quad_block_value(x, y);
        for pc in &mut self.cuts.cuts {
            let lhs = pc.cut.linear_part(x, y) - pc.cut.rhs;
            let target = if pc.cut.coeff_t.contains_key("total") {
                total
            } else if let Some(k) = pair_ids
                .iter()
                .position(|id| pc.cut.coeff_t.contains_key(id))
            {
                pair_vals[k]
            } else {
                continue;
            };
            if (lhs - target).abs() <= 1e-7 * (1.0 + target.abs()) {
                pc.times_tight += 1;
            }
        }
    }
}

pub fn pair_term_id(i: usize, j: usize) -> String {
    format!("t_{i}_{j}")
}

/// Generates cuts violated by more than the separation tolerance at
/// `(x, y)`, ordered by decreasing violation, at most `budget` of them.
/// Sources: bounded or unbounded pair-hull subgradients on each pair
/// epigraph, and a polymatroid cut for the permutation sorting `y`
/// decreasingly (ties by index).
pub fn separate(
    prog: &ConvexProgram,
    instance: &Instance,
    x: &[f64],
    y: &[f64],
    budget: usize,
) -> Vec<Cut> {
    let tol = prog.separation.map(|s| s.violation_tol).unwrap_or(1e-6);
    let mut candidates: Vec<(f64, Cut)> = Vec::new();

    for (k, term) in prog.pairs.iter().enumerate() {
        let (i, j) = (term.i, term.j);
        let raw = PairPoint::new(x[i], x[j], y[i], y[j]);
        let bounded = instance.u[i] == 1.0 && instance.u[j] == 1.0;
        let (sg, anchor) = if bounded {
            let s = hulls::shift_point(&raw);
            let anchor = PairPoint {
                x1: s.x1,
                x2: s.x2,
                y1: raw.y1.clamp(0.0, s.x1),
                y2: raw.y2.clamp(0.0, s.x2),
            };
            (hulls::hull_bounded_subgrad(&anchor), anchor)
        } else {
            let anchor = hulls::shift_point(&raw);
            (hulls::hull_unbounded_subgrad(&anchor), anchor)
        };
        let mut coeffs_x = vec![0.0; prog.n];
        let mut coeffs_y = vec![0.0; prog.n];
        coeffs_x[i] = sg.dx1;
        coeffs_x[j] = sg.dx2;
        coeffs_y[i] = sg.dy1;
        coeffs_y[j] = sg.dy2;
        let lin_at_anchor =
            sg.dx1 * anchor.x1 + sg.dx2 * anchor.x2 + sg.dy1 * anchor.y1 + sg.dy2 * anchor.y2;
        let mut coeff_t = std::collections::BTreeMap::new();
        coeff_t.insert(pair_term_id(i, j), -1.0);
        let cut = Cut {
            coeffs_x,
            coeffs_y,
            coeff_t,
            rhs: lin_at_anchor - sg.value,
            tag: if bounded {
                "subgrad-g".into()
            } else {
                "subgrad-f".into()
            },
        };
        if !cut.all_finite() {
            continue;
        }
        let viol = cut.linear_part(x, y) - cut.rhs - prog.pair_value(k, x, y);
        if viol > tol {
            candidates.push((viol, cut));
        }
    }

    // polymatroid cut for the ordering by decreasing y
    let all_unit = instance.u.iter().all(|&ui| ui == 1.0);
    if all_unit && !prog.pairs.is_empty() {
        if let Ok(check) = mmatrix::is_m_matrix(&instance.q, crate::num::TOL) {
            if check.is_m {
                let mut perm: Vec<usize> = (0..prog.n).collect();
                perm.sort_by(|&a, &b| y[b].partial_cmp(&y[a]).unwrap().then(a.cmp(&b)));
                if let Ok(cut) = hulls::polymatroid_cut(&instance.q, &perm) {
                    let viol = cut.linear_part(x, y) - cut.rhs - prog.quad_block_value(x, y);
                    if viol > tol {
                        candidates.push((viol, cut));
                    }
                }
            }
        }
    }

    candidates.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    candidates.truncate(budget);
    candidates.into_iter().map(|(_, c)| c).collect()
}

#[derive(Serialize)]
struct DumpTerm {
    #[serde(rename = "type")]
    kind: &'static str,
    id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    i: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    j: Option<usize>,
    weight: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    mode: Option<&'static str>,
}

#[derive(Serialize)]
struct DumpModel<'a> {
    kind: &'static str,
    n: usize,
    objective_const: f64,
    objective_x: &'a [f64],
    objective_y: &'a [f64],
    quad_linear_y: &'a [f64],
    terms: Vec<DumpTerm>,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual: Option<&'a Matrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    full_quad: Option<&'a Matrix>,
    boxes: Vec<serde_json::Value>,
    linear: &'a [LinearConstraint],
    cuts: Vec<&'a Cut>,
    fixings: Vec<Option<bool>>,
}

impl ConvexProgram {
    /// JSON model dump mirroring the term records (for golden-file tests
    /// and `--dump-model`).
    pub fn dump_model(&self) -> Result<String> {
        let mut terms = Vec::new();
        for t in &self.persp {
            terms.push(DumpTerm {
                kind: "PerspectiveCone",
                id: format!("z_{}", t.i),
                i: Some(t.i),
                j: None,
                weight: t.weight,
                mode: None,
            });
        }
        for p in &self.pairs {
            terms.push(DumpTerm {
                kind: match p.mode {
                    PairMode::Quad | PairMode::Conic => "QuadEpigraph",
                    PairMode::HullF | PairMode::HullG => "HullEpigraph",
                },
                id: pair_term_id(p.i, p.j),
                i: Some(p.i),
                j: Some(p.j),
                weight: p.weight,
                mode: Some(match p.mode {
                    PairMode::Quad => "quad",
                    PairMode::Conic => "conic",
                    PairMode::HullF => "f",
                    PairMode::HullG => "g",
                }),
            });
        }
        for &(i, j, w) in &self.abs_pairs {
            terms.push(DumpTerm {
                kind: "AbsEpigraph",
                id: format!("s_{i}_{j}"),
                i: Some(i),
                j: Some(j),
                weight: w,
                mode: None,
            });
        }
        let boxes: Vec<serde_json::Value> = (0..self.n)
            .map(|i| {
                serde_json::json!({
                    "var": format!("x_{i}"),
                    "lo": self.x_lo[i],
                    "hi": self.x_hi[i],
                    "link_u": self.u[i],
                })
            })
            .collect();
        let model = DumpModel {
            kind: self.kind.name(),
            n: self.n,
            objective_const: self.obj_const,
            objective_x: &self.obj_x,
            objective_y: &self.obj_y,
            quad_linear_y: &self.quad_lin_y,
            terms,
            residual: self.residual.as_ref(),
            full_quad: self.full_quad.as_ref(),
            boxes,
            linear: &self.rows,
            cuts: self.cuts.cuts.iter().map(|c| &c.cut).collect(),
            fixings: self.fixings(),
        };
        Ok(serde_json::to_string_pretty(&model)?)
    }
}
