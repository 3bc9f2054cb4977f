//! Exact computational machinery for even non-degenerate integral lattices:
//! discriminant groups and finite quadratic forms, orthogonal group elements
//! with spinor norms and discriminant actions, orbit equivalence of
//! non-isotropic vectors, coset transversals, and Tits buildings of
//! signature (2,n) lattices with DOT export.
//!
//! All arithmetic is arbitrary-precision integer/rational; results are
//! deterministic across runs and thread counts.

pub mod buildings;
pub mod cosets;
pub mod discform;
pub mod expr;
pub mod isometry;
pub mod lattice;
pub mod matrix;
pub mod ogroup;
pub mod orbits;
pub mod par;
pub mod vectors;

pub use lattice::{DiscGroup, Lattice, Sublattice};
pub use matrix::{Int, IntMat, Rat, RatMat};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("lattice is not even: diagonal entry {0} at index {1}")]
    NotEven(String, usize),
    #[error("gram matrix is degenerate")]
    Degenerate,
    #[error("gram matrix is not symmetric")]
    NotSymmetric,
    #[error("vector is zero")]
    ZeroVector,
    #[error("vector is not integral on the lattice")]
    NotIntegral,
    #[error("vector is not primitive")]
    NotPrimitive,
    #[error("vector is isotropic")]
    Isotropic,
    #[error("vector is not isotropic")]
    NotIsotropic,
    #[error("expected a definite form")]
    NotDefinite,
    #[error("expected an indefinite form")]
    NotIndefinite,
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("map is not an isometry of the lattice")]
    NotIsometry,
    #[error("determinant is not 1")]
    NotDetOne,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("budget exhausted: {0}")]
    Budget(String),
    #[error("computation incomplete: {0}")]
    Incomplete(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("parse error at byte {at}: {msg}")]
    Parse { at: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
