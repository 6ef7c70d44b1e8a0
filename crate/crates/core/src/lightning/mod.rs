//! Quantum lightning from the degree-2 hash `f_A`.
//!
//! A bolt is `|ψ'_y⟩^{⊗(k+1)}` where `|ψ'_y⟩` is the uniform superposition over
//! `f_A⁻¹(y)`. Verification projects each register onto
//! `span{|φ_r⟩ : r ∈ {0,1}^n}` with `|φ_r⟩ ∝ Σ_x (−1)^{r·f(x)} |x⟩`, which equals
//! `span{|ψ'_z⟩}`, then measures `f` to read the serial number.

mod bolt;
mod extraction;
mod game;
mod oracle;
mod verify;

pub use bolt::{Bolt, BoltMode, JointAnalysis};
pub use extraction::{ExtractionPlan, ExtractionTranscript, RoundPlan, RoundRecord};
pub use game::{
    AffineStorm, CheatDuplicateStorm, ClassicalStorm, CollapseReport, ConstantSerialStorm,
    EmpiricalRates, GameReport, HonestStorm, MinEntropyReport, SelfRejectingStorm, Storm,
};
pub use oracle::SpanOracle;
pub use verify::{
    FullVerdict, FullVerifyReport, MiniVerdict, MiniVerifyReport, RejectReason, SerialOutcome,
    Strategy,
};

use serde::{Deserialize, Serialize};

use crate::gf2::Gf2Error;
use crate::mq::{HashKey, MqError};
use crate::qsim::QsimError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LightningError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("{qubits} qubits needed, simulator cap is {cap}")]
    Budget { qubits: usize, cap: usize },
    #[error("malformed bolt: {0}")]
    MalformedBolt(String),
    #[error("storm failed: {0}")]
    StormFailed(String),
    #[error(transparent)]
    Mq(#[from] MqError),
    #[error(transparent)]
    Qsim(#[from] QsimError),
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
}

/// `n`: digest bits. `m`: input bits. `k + 1`: registers per bolt.
/// `u`: extraction rounds. `lambda`: security-parameter label (informational).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub u: usize,
    pub lambda: usize,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            n: 2,
            m: 12,
            k: 2,
            u: 3,
            lambda: 2,
        }
    }
}

impl Params {
    pub fn new(n: usize, m: usize, k: usize, u: usize) -> Result<Self, LightningError> {
        let p = Self {
            n,
            m,
            k,
            u,
            lambda: n,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), LightningError> {
        if self.n == 0 || self.n >= self.m {
            return Err(LightningError::InvalidParams(format!(
                "need 1 <= n < m, got n={}, m={}",
                self.n, self.m
            )));
        }
        if self.u < self.n {
            return Err(LightningError::InvalidParams(format!(
                "need u >= n, got u={}, n={}",
                self.u, self.n
            )));
        }
        if self.m < self.u * (self.n + 1) {
            return Err(LightningError::InvalidParams(format!(
                "need m >= u(n+1) = {}, got m={}",
                self.u * (self.n + 1),
                self.m
            )));
        }
        if self.m > 64 {
            return Err(LightningError::InvalidParams("m must be at most 64".into()));
        }
        Ok(())
    }

    pub fn registers(&self) -> usize {
        self.k + 1
    }
}

/// A key together with its parameters and the per-key precomputation shared
/// by generation and verification.
#[derive(Clone, Debug)]
pub struct Scheme {
    key: HashKey,
    params: Params,
    oracle: std::sync::OnceLock<SpanOracle>,
    plan: std::sync::OnceLock<ExtractionPlan>,
    fibers: std::sync::OnceLock<Vec<u64>>,
}

impl Scheme {
    pub fn new(key: HashKey, params: Params) -> Result<Self, LightningError> {
        params.validate()?;
        if key.n() != params.n || key.m() != params.m {
            return Err(LightningError::InvalidParams(format!(
                "key is ({}, {}) but params are ({}, {})",
                key.n(),
                key.m(),
                params.n,
                params.m
            )));
        }
        Ok(Self {
            key,
            params,
            oracle: Default::default(),
            plan: Default::default(),
            fibers: Default::default(),
        })
    }

    /// Samples a fresh key: `n` uniform upper-triangular `m × m` matrices.
    pub fn setup<R: rand::Rng + ?Sized>(params: Params, rng: &mut R) -> Result<Self, LightningError> {
        params.validate()?;
        Self::new(HashKey::keygen(params.n, params.m, rng)?, params)
    }

    pub fn key(&self) -> &HashKey {
        &self.key
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn oracle(&self) -> Result<&SpanOracle, LightningError> {
        if let Some(o) = self.oracle.get() {
            return Ok(o);
        }
        let o = SpanOracle::new(&self.key)?;
        Ok(self.oracle.get_or_init(|| o))
    }

    pub fn plan(&self) -> &ExtractionPlan {
        self.plan
            .get_or_init(|| ExtractionPlan::new(&self.key, self.params.u))
    }

    /// `|f⁻¹(y)|` indexed by `y`.
    pub fn fiber_sizes(&self) -> Result<&[u64], LightningError> {
        if let Some(f) = self.fibers.get() {
            return Ok(f);
        }
        let f = self.key.fiber_sizes()?;
        Ok(self.fibers.get_or_init(|| f))
    }

    /// `Pr[f(x) = y]` for uniform `x`.
    pub fn digest_distribution(&self) -> Result<Vec<f64>, LightningError> {
        let total = (1u64 << self.params.m) as f64;
        Ok(self
            .fiber_sizes()?
            .iter()
            .map(|&c| c as f64 / total)
            .collect())
    }

    /// `Σ_y p_y²`: the chance two honest bolts share a serial.
    pub fn serial_collision_probability(&self) -> Result<f64, LightningError> {
        Ok(self.digest_distribution()?.iter().map(|p| p * p).sum())
    }

    /// `−log₂ max_y p_y`.
    pub fn digest_min_entropy(&self) -> Result<f64, LightningError> {
        let max = self
            .digest_distribution()?
            .into_iter()
            .fold(0.0f64, f64::max);
        Ok(-max.log2())
    }
}
