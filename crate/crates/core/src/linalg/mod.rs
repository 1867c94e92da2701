//! Complex linear algebra for extracting a few eigenpairs of a
//! complex-symmetric operator near a target shift.
//!
//! Everything here is written against `num_complex::Complex64` and plain
//! `Vec` storage: a compressed-row sparse operator, a banded LU with partial
//! pivoting, a small dense eigensolver used for Rayleigh-Ritz projections, a
//! shift-invert subspace iteration and a closed-form 2x2 solver.

mod dense;
mod eig2;
mod eigs;
mod lu;
mod sparse;
mod vector;

pub use dense::{eig_dense, jacobi_symmetric, DenseMatrix};
pub use eig2::{eig2x2, Eig2x2, Matrix2};
pub use eigs::{shift_invert_eigs, EigenPair, DEFAULT_MAX_ITER, DEFAULT_TOL};
pub use lu::{lu_factor, Factorization, PIVOT_TOL};
pub use sparse::SparseOperator;
pub use vector::ComplexVector;

pub use num_complex::Complex64 as C64;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    /// A pivot collapsed: the shift sits numerically on an eigenvalue.
    #[error("shift {shift} is numerically singular (pivot {pivot:e} in column {column})")]
    SingularShift { shift: C64, column: usize, pivot: f64 },
    #[error("no convergence after {max_iter} iterations (best residual {best_residual:e})")]
    NoConvergence { max_iter: usize, best_residual: f64 },
    #[error("duplicate entry at ({row}, {col})")]
    DuplicateEntry { row: usize, col: usize },
    #[error("entry ({row}, {col}) has no equal transposed partner")]
    NotSymmetric { row: usize, col: usize },
    #[error("index ({row}, {col}) out of range for dimension {n}")]
    OutOfRange { row: usize, col: usize, n: usize },
    #[error("non-finite value")]
    NonFinite,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Conjugated inner product `<a|b> = sum conj(a_i) b_i`.
pub(crate) fn dotc(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).fold(C64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y)
}

/// Unconjugated bilinear form `a^T b`.
pub(crate) fn dotu(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).fold(C64::new(0.0, 0.0), |acc, (x, y)| acc + x * y)
}

pub(crate) fn norm2(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}
