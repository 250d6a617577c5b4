//! Domain types shared by all modules.
//!
//! All types are immutable after construction and safe to share across
//! concurrent readers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::linalg::{self, Matrix};
use crate::{Error, Result};

/// Constraint sense.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    #[serde(rename = "le")]
    Le,
    #[serde(rename = "ge")]
    Ge,
    #[serde(rename = "eq")]
    Eq,
}

/// A linear side constraint `cx'x + cy'y (sense) rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    #[serde(rename = "cx", with = "crate::io::num_vec")]
    pub coeffs_x: Vec<f64>,
    #[serde(rename = "cy", with = "crate::io::num_vec")]
    pub coeffs_y: Vec<f64>,
    pub sense: Sense,
    #[serde(with = "crate::io::num")]
    pub rhs: f64,
}

impl LinearConstraint {
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let sx: f64 = self.coeffs_x.iter().zip(x).map(|(c, v)| c * v).sum();
        let sy: f64 = self.coeffs_y.iter().zip(y).map(|(c, v)| c * v).sum();
        sx + sy
    }

    /// Signed violation; positive means the constraint is broken.
    pub fn violation(&self, x: &[f64], y: &[f64]) -> f64 {
        let v = self.eval(x, y);
        match self.sense {
            Sense::Le => v - self.rhs,
            Sense::Ge => self.rhs - v,
            Sense::Eq => (v - self.rhs).abs(),
        }
    }
}

/// Problem data for
/// `min a'x + b'y + y'Qy  s.t.  0 <= y_i <= u_i x_i, x binary, side rows`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Instance {
    pub name: String,
    pub n: usize,
    #[serde(with = "crate::io::num_vec")]
    pub a: Vec<f64>,
    #[serde(with = "crate::io::num_vec")]
    pub b: Vec<f64>,
    #[serde(rename = "Q", with = "crate::io::num_mat")]
    pub q: Matrix,
    #[serde(with = "crate::io::num_vec")]
    pub u: Vec<f64>,
    #[serde(default)]
    pub constraints: Vec<LinearConstraint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

impl Instance {
    /// Validates the structural invariants: vector lengths, `Q` symmetric
    /// within 1e-12, `u >= 0`, `n >= 1`.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Validation {
                field: "n".into(),
                msg: "n must be at least 1".into(),
            });
        }
        for (field, len) in [("a", self.a.len()), ("b", self.b.len()), ("u", self.u.len())] {
            if len != self.n {
                return Err(Error::Validation {
                    field: field.into(),
                    msg: format!("expected length {}, got {len}", self.n),
                });
            }
        }
        if self.q.len() != self.n || self.q.iter().any(|row| row.len() != self.n) {
            return Err(Error::Validation {
                field: "Q".into(),
                msg: format!("expected {0}x{0} matrix", self.n),
            });
        }
        if !linalg::is_symmetric(&self.q, 1e-12) {
            return Err(Error::Validation {
                field: "Q".into(),
                msg: "matrix is not symmetric within 1e-12".into(),
            });
        }
        if let Some(i) = self.u.iter().position(|&ui| !(ui >= 0.0)) {
            return Err(Error::Validation {
                field: "u".into(),
                msg: format!("u[{i}] must be nonnegative"),
            });
        }
        for (k, c) in self.constraints.iter().enumerate() {
            if c.coeffs_x.len() != self.n || c.coeffs_y.len() != self.n {
                return Err(Error::Validation {
                    field: format!("constraints[{k}]"),
                    msg: format!("coefficient vectors must have length {}", self.n),
                });
            }
        }
        Ok(())
    }

    /// Objective `a'x + b'y + y'Qy` (excludes any recorded constant).
    pub fn objective(&self, x: &[f64], y: &[f64]) -> f64 {
        let lin_x: f64 = self.a.iter().zip(x).map(|(c, v)| c * v).sum();
        let lin_y: f64 = self.b.iter().zip(y).map(|(c, v)| c * v).sum();
        lin_x + lin_y + linalg::quad_form(&self.q, y, y)
    }

    /// Constant recorded by the generators under `meta.objective_constant`.
    pub fn objective_constant(&self) -> f64 {
        self.meta
            .as_ref()
            .and_then(|m| m.get("objective_constant"))
            .and_then(|v| v.as_f64())
            .unwrap_or(0.0)
    }

    /// Residual diagonal recorded by the factor generator under `meta.upsilon`.
    pub fn meta_upsilon(&self) -> Option<Vec<f64>> {
        let v = self.meta.as_ref()?.get("upsilon")?.as_array()?;
        v.iter().map(|x| x.as_f64()).collect()
    }
}

/// A primal point of a relaxation: indicators `x`, continuous `y`, and the
/// values of the active formulation's epigraph terms.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: Vec<f64>,
}

impl Point {
    pub fn new(x: Vec<f64>, y: Vec<f64>, t: Vec<f64>) -> Self {
        Point { x, y, t }
    }
}

/// A linear cut `coeffs_x'x + coeffs_y'y + sum_k coeff_t[k] * t_k <= rhs`.
///
/// Epigraph references are keyed by the term ids used in the model dump
/// (`"t_i_j"` for pair terms, `"total"` for the whole quadratic block).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    #[serde(with = "crate::io::num_vec")]
    pub coeffs_x: Vec<f64>,
    #[serde(with = "crate::io::num_vec")]
    pub coeffs_y: Vec<f64>,
    pub coeff_t: BTreeMap<String, f64>,
    #[serde(with = "crate::io::num")]
    pub rhs: f64,
    pub tag: String,
}

impl Cut {
    /// Linear part `coeffs_x'x + coeffs_y'y`.
    pub fn linear_part(&self, x: &[f64], y: &[f64]) -> f64 {
        let sx: f64 = self.coeffs_x.iter().zip(x).map(|(c, v)| c * v).sum();
        let sy: f64 = self.coeffs_y.iter().zip(y).map(|(c, v)| c * v).sum();
        sx + sy
    }

    pub fn all_finite(&self) -> bool {
        self.coeffs_x.iter().all(|v| v.is_finite())
            && self.coeffs_y.iter().all(|v| v.is_finite())
            && self.coeff_t.values().all(|v| v.is_finite())
            && self.rhs.is_finite()
    }
}
