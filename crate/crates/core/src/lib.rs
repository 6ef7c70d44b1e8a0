//! Desk-scale simulation of quantum lightning from degree-2 multivariate
//! hashes, subspace-state quantum money, and quantitative no-cloning bounds.
//!
//! Everything here is exact linear algebra: GF(2) elimination for the hash
//! attacks and dense complex statevectors for the quantum side. Parameters
//! are kept small enough that every claim can be checked by enumeration.

pub mod bounds;
pub mod gf2;
pub mod lightning;
pub mod money;
pub mod mq;
pub mod qsim;
pub mod rng;
pub mod stats;

pub use bounds::BoundsError;
pub use gf2::{AffineSpace, BitMatrix, BitVector, Gf2Error};
pub use lightning::{Bolt, LightningError, Params, Scheme};
pub use money::MoneyError;
pub use mq::{Digest, HashKey, MqError};
pub use qsim::{QsimError, StateVector};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
    #[error(transparent)]
    Mq(#[from] MqError),
    #[error(transparent)]
    Qsim(#[from] QsimError),
    #[error(transparent)]
    Lightning(#[from] LightningError),
    #[error(transparent)]
    Money(#[from] MoneyError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
}

impl Error {
    /// Stable machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Gf2(_) | Error::Mq(MqError::Gf2(_)) => "gf2",
            Error::Mq(MqError::TriesExhausted { .. }) => "tries_exhausted",
            Error::Mq(MqError::Precondition(_)) => "precondition",
            Error::Mq(_) => "hash",
            Error::Qsim(QsimError::CapExceeded { .. }) => "qubit_cap",
            Error::Qsim(_) => "simulator",
            Error::Lightning(LightningError::Budget { .. }) => "qubit_cap",
            Error::Lightning(LightningError::InvalidParams(_)) => "invalid_params",
            Error::Lightning(LightningError::MalformedBolt(_)) => "malformed_bolt",
            Error::Lightning(LightningError::StormFailed(_)) => "storm_failed",
            Error::Lightning(LightningError::Mq(e)) => Error::Mq(e.clone()).kind(),
            Error::Lightning(LightningError::Qsim(e)) => Error::Qsim(e.clone()).kind(),
            Error::Lightning(LightningError::Gf2(_)) => "gf2",
            Error::Money(MoneyError::Qsim(e)) => Error::Qsim(e.clone()).kind(),
            Error::Money(_) => "money",
            Error::Bounds(BoundsError::NonConvergence { .. }) => "non_convergence",
            Error::Bounds(_) => "bounds",
        }
    }
}
