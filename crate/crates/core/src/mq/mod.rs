//! The degree-2 multivariate hash `f_A(x) = (xᵀ A_i x)_i` over GF(2) and the
//! linear-algebra attacks on it.

pub mod attacks;
mod hash;

pub use attacks::{
    colliding_space_for_deltas, find_affine_collision_space, find_collision,
    find_nonaffine_multicollision, is_nonaffine, AffineCollision, Collision, MultiCollision,
    DEFAULT_MAX_TRIES,
};
pub use hash::{Digest, HashKey};

use crate::gf2::Gf2Error;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MqError {
    #[error("need 1 <= n < m, got n={n}, m={m}")]
    InvalidShape { n: usize, m: usize },
    #[error("matrix {index} has a nonzero entry below the diagonal")]
    NotUpperTriangular { index: usize },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no success after {tries} tries (ranks {rank_history:?})")]
    TriesExhausted {
        tries: usize,
        rank_history: Vec<usize>,
    },
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
}
