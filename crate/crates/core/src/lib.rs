//! Quadratic optimization with M-matrices and semi-continuous variables.
//!
//! The library solves problems of the form
//!
//! ```text
//!     min  a'x + b'y + y'Qy
//!     s.t. 0 <= y_i <= u_i * x_i,   x in {0,1}^n,
//!          optional linear side constraints on (x, y),
//! ```
//!
//! where `Q` is (or contains) an M-matrix: positive semidefinite with
//! non-positive off-diagonal entries. The quadratic form is decomposed into
//! one- and two-variable pieces, each piece is replaced by its convex hull
//! (perspective terms, pairwise hull functions, conic rows), and the
//! resulting relaxations are solved with a projected-subgradient method
//! that certifies lower bounds. A branch-and-bound driver, cutting planes,
//! seeded instance generators, and brute-force verification oracles round
//! out the toolkit.
//!
//! Module map:
//! - [`types`] / [`io`]: instance data model and JSON file format
//! - [`mmatrix`]: M-matrix checks and pairwise decompositions
//! - [`hulls`]: closed-form hull functions, subgradients, valid inequalities
//! - [`formulations`]: relaxation builders and the cut pool
//! - [`relax`]: first-order relaxation solver with certified bounds
//! - [`bnb`]: branch-and-bound and comparison reports
//! - [`submodular`]: set-function reduction and brute-force minimization
//! - [`oracle`]: independent oracles used by tests and verification
//! - [`instances`]: seeded generators for the benchmark families

pub mod bnb;
pub mod formulations;
pub mod hulls;
pub mod instances;
pub mod io;
pub mod linalg;
pub mod mmatrix;
pub mod num;
pub mod oracle;
pub mod relax;
pub mod rng;
pub mod submodular;
pub mod types;

pub use num::safe_div;
pub use types::{Cut, Instance, LinearConstraint, Point, Sense};

/// Library-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("validation error in field `{field}`: {msg}")]
    Validation { field: String, msg: String },
    #[error("parse error in field `{field}`: {msg}")]
    Parse { field: String, msg: String },
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("problem too large: {0}")]
    TooLarge(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
