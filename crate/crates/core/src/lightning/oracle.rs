use crate::mq::HashKey;
use crate::qsim::{Complex64, OrthonormalBasis, SpanProjection, StateVector};

use super::LightningError;

/// The ideal projector onto `span{|φ_r⟩}` for one key.
#[derive(Clone, Debug)]
pub struct SpanOracle {
    phis: Vec<StateVector>,
    basis: OrthonormalBasis,
    digests: Vec<u64>,
}

impl SpanOracle {
    pub fn new(key: &HashKey) -> Result<Self, LightningError> {
        let digests = key.digest_table()?;
        let m = key.m();
        let amp = (0.5f64).powf(m as f64 / 2.0);
        let phis = (0..1u64 << key.n())
            .map(|r| {
                let amps = digests
                    .iter()
                    .map(|&y| {
                        let sign = if (r & y).count_ones() & 1 == 1 { -amp } else { amp };
                        Complex64::new(sign, 0.0)
                    })
                    .collect();
                StateVector::from_amplitudes(m, amps)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let basis = OrthonormalBasis::new(&phis)?;
        Ok(Self {
            phis,
            basis,
            digests,
        })
    }

    /// `|φ_r⟩` for `r` given as an index.
    pub fn phi(&self, r: u64) -> &StateVector {
        &self.phis[r as usize]
    }

    pub fn phis(&self) -> &[StateVector] {
        &self.phis
    }

    pub fn basis(&self) -> &OrthonormalBasis {
        &self.basis
    }

    /// `f(x)` for every `x`, by index.
    pub fn digests(&self) -> &[u64] {
        &self.digests
    }

    pub fn project(&self, state: &StateVector) -> Result<SpanProjection, LightningError> {
        Ok(self.basis.project(state)?)
    }

    /// `⟨x|Π|x⟩` for every basis state `x`.
    pub fn basis_acceptance(&self) -> Vec<f64> {
        self.basis.diagonal()
    }
}
