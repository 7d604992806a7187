//! Network steering on linear networks with trusted endpoints.
//!
//! The crate computes network assemblages produced by independent sources and
//! fixed central measurements, certifies network steering through entanglement
//! of assemblage elements, and builds explicit network local hidden state
//! (NLHS) models from structural assumptions on the sources.
//!
//! Matrices follow the row-major Kronecker convention everywhere: in a
//! `QOperator` with dims `[d0, d1, ...]` the first factor is the most
//! significant index block.

pub mod assemblage;
pub mod certify;
pub mod channel;
pub mod error;
pub mod network;
pub mod nlhs;
mod nnls;
pub mod operator;
pub mod povm;
pub mod random;
pub mod states;

pub use error::{Error, Result};
pub use operator::{Dims, QOperator};

use serde::{Deserialize, Serialize};

/// Numerical tolerances shared by the whole crate.
pub mod tol {
    /// Max-entry distance for operator equality.
    pub const EQ: f64 = 1e-10;
    /// Max-entry Hermiticity defect accepted before eigen-decomposition.
    pub const HERM: f64 = 1e-9;
    /// Most negative eigenvalue still accepted as positive semidefinite.
    pub const PSD: f64 = 1e-9;
    /// Eigenvalues below `-NEGATIVITY_CUTOFF` count towards negativity.
    pub const NEGATIVITY_CUTOFF: f64 = 1e-12;
    /// Slack for optimisation-based criteria.
    pub const OPT: f64 = 1e-6;
}

/// Which end of a bipartite object an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    /// Factor index of this side in a two-factor operator.
    pub fn index(self) -> usize {
        match self {
            Side::Left => 0,
            Side::Right => 1,
        }
    }
}
