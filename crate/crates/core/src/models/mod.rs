//! The two parametric systems analysed by the diagnostics: a two-level
//! Hamiltonian with an exceptional point and a finite-difference Helmholtz
//! operator on an elliptic cavity, optionally with an absorbing strip.

mod cavity;
mod ellipse;
mod mode;
mod two_level;

pub use cavity::{
    assemble_helmholtz, build_ellipse_grid, solve_cavity_modes, solve_cavity_modes_with, CavitySpec, CavityVariant, GridGeometry,
    MIN_INTERIOR_POINTS,
};
pub use ellipse::distance_to_ellipse;
pub use mode::{Mode, Provenance, Support};
pub use two_level::{two_level_hamiltonian, two_level_modes, TwoLevelParams};

use thiserror::Error;

use crate::linalg::LinalgError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("grid too coarse: {count} interior points (need at least {min})")]
    GridTooCoarse { count: usize, min: usize },
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error(transparent)]
    Solver(#[from] LinalgError),
}
