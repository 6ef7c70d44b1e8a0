//! Bit-packed linear algebra over GF(2).

mod affine;
mod matrix;
pub mod subspace;
mod vector;

pub use affine::AffineSpace;
pub use matrix::{BitMatrix, Echelon};
pub use subspace::{
    dual_space, enumerate_subspaces, enumerate_subspaces_between, intersection_dim,
    is_subspace_of, random_subspace, random_subspace_between, span_indices,
};
pub use vector::BitVector;

/// Largest dimension that brute-force enumeration will materialise.
pub const ENUMERATION_CAP: usize = 22;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Gf2Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("basis rows are linearly dependent")]
    DependentRows,
    #[error("lower subspace is not contained in upper subspace")]
    NotContained,
    #[error("dimension {d} outside [{lo}, {hi}]")]
    DimensionOutOfRange { d: usize, lo: usize, hi: usize },
    #[error("enumeration of 2^{dim} elements exceeds cap 2^{cap}")]
    EnumerationCap { dim: usize, cap: usize },
    #[error("encoding error: {0}")]
    Encoding(String),
}
