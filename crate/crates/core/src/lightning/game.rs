use serde::Serialize;

use super::{Bolt, BoltMode, FullVerdict, LightningError, Scheme, Strategy};
use crate::gf2::BitVector;
use crate::mq::{find_affine_collision_space, is_nonaffine, DEFAULT_MAX_TRIES};
use crate::qsim::StateVector;
use crate::rng::{self, SimRng};
use crate::stats::{wilson, Interval, Z95};
use rand::Rng;

/// An adversarial bolt producer. The challenger calls [`Storm::bolt_pair`]
/// once per uniqueness trial and [`Storm::bolt`] once per min-entropy trial.
pub trait Storm {
    fn name(&self) -> &str;

    /// False for strategies that only a simulator can run, such as copying
    /// amplitudes.
    fn physical(&self) -> bool {
        true
    }

    fn bolt(&self, scheme: &Scheme, rng: &mut SimRng) -> Result<Bolt, LightningError>;

    fn bolt_pair(&self, scheme: &Scheme, rng: &mut SimRng) -> Result<(Bolt, Bolt), LightningError> {
        Ok((self.bolt(scheme, rng)?, self.bolt(scheme, rng)?))
    }

    /// Closed-form challenger acceptance under the oracle strategy, when known.
    fn expected_accept(&self, _scheme: &Scheme) -> Result<Option<f64>, LightningError> {
        Ok(None)
    }
}

/// Runs generation honestly, independently for each bolt.
#[derive(Clone, Copy, Debug)]
pub struct HonestStorm {
    pub mode: BoltMode,
}

impl Default for HonestStorm {
    fn default() -> Self {
        Self {
            mode: BoltMode::IdealizedProduct,
        }
    }
}

impl Storm for HonestStorm {
    fn name(&self) -> &str {
        "honest"
    }

    fn bolt(&self, scheme: &Scheme, rng: &mut SimRng) -> Result<Bolt, LightningError> {
        scheme.gen_bolt(rng, self.mode)
    }

    fn expected_accept(&self, scheme: &Scheme) -> Result<Option<f64>, LightningError> {
        if self.mode == BoltMode::JointMicro {
            return Ok(None);
        }
        Ok(Some(scheme.serial_collision_probability()?))
    }
}

/// `|x⟩^{⊗(k+1)}` for a uniform `x`, output twice.
#[derive(Clone, Copy, Debug, Default)]
pub struct ClassicalStorm;

impl ClassicalStorm {
    /// `2^{2(k+1)(n−m)}`: the acceptance bound when `f` is balanced.
    pub fn product_bound(scheme: &Scheme) -> f64 {
        let p = scheme.params();
        2f64.powf(2.0 * p.registers() as f64 * (p.n as f64 - p.m as f64))
    }
}

impl Storm for ClassicalStorm {
    fn name(&self) -> &str {
        "classical"
    }

    fn bolt(&self, scheme: &Scheme, rng: &mut SimRng) -> Result<Bolt, LightningError> {
        let p = scheme.params();
        let x = rng.random_range(0..1u64 << p.m);
        let reg = StateVector::basis(p.m, x)?;
        Ok(Bolt {
            serial: scheme.key().digest_from_index(scheme.key().eval_index(x)),
            mode: BoltMode::IdealizedProduct,
            registers: vec![reg; p.registers()],
        })
    }

    fn bolt_pair(&self, scheme: &Scheme, rng: &mut SimRng) -> Result<(Bolt, Bolt), LightningError> {
        let b = self.bolt(scheme, rng)?;
        Ok((b.clone(), b))
    }

    /// `E_x[a_x^{2(k+1)}]` with `a_x = 1/|f⁻¹(f(x))|` the single-register
    /// acceptance of `|x⟩`.
    fn expected_accept(&self, scheme: &Scheme) -> Result<Option<f64>, LightningError> {
        let diag = scheme.oracle()?.basis_acceptance();
        let e = 2 * scheme.params().registers() as i32;
        Ok(Some(diag.iter().map(|a| a.powi(e)).sum::<f64>() / diag.len() as f64))
    }
}

/// Generates one honest bolt and hands the challenger an exact amplitude
/// copy of it. Not physically realizable.
#[derive(Clone, Copy, Debug, Default)]
pub struct CheatDuplicateStorm;

impl Storm for CheatDuplicateStorm {
    fn name(&self) -> &str {
        "cheat-duplicate"
    }

    fn physical(&self) -> bool {
        false
    }

    fn bolt(&self, scheme: &Scheme, rng: &mut SimRng) -> Result<Bolt, LightningError> {
        scheme.gen_bolt(rng, BoltMode::IdealizedProduct)
    }

    fn bolt_pair(&self, scheme: &Scheme, rng: &mut SimRng) -> Result<(Bolt, Bolt), LightningError> {
        let b = self.bolt(scheme, rng)?;
        Ok((b.clone(), b))
    }

    fn expected_accept(&self, _scheme: &Scheme) -> Result<Option<f64>, LightningError> {
        Ok(Some(1.0))
    }
}

/// Finds an affine space on which `f` is constant with value `y`, then
/// outputs two copies of the idealized bolt for `y`. Only runs when
/// `m ≥ (2k+1)n`, the regime where affine collision spaces of the needed
/// size are easy to find.
#[derive(Clone, Copy, Debug, Default)]
pub struct AffineStorm;

impl AffineStorm {
    /// Smallest affine dimension holding `2(k+1)` points.
    pub fn space_dim(scheme: &Scheme) -> usize {
        let points = 2 * scheme.params().registers();
        points.next_power_of_two().trailing_zeros() as usize
    }
}

impl Storm for AffineStorm {
    fn name(&self) -> &str {
        "affine"
    }

    fn physical(&self) -> bool {
        false
    }

    fn bolt(&self, scheme: &Scheme, rng: &mut SimRng) -> Result<Bolt, LightningError> {
        Ok(self.bolt_pair(scheme, rng)?.0)
    }

    fn bolt_pair(&self, scheme: &Scheme, rng: &mut SimRng) -> Result<(Bolt, Bolt), LightningError> {
        let p = scheme.params();
        if p.m < (2 * p.k + 1) * p.n {
            return Err(LightningError::StormFailed(format!(
                "affine storm needs m >= (2k+1)n = {}, got m = {}",
                (2 * p.k + 1) * p.n,
                p.m
            )));
        }
        let found = find_affine_collision_space(scheme.key(), Self::space_dim(scheme), rng, DEFAULT_MAX_TRIES)?;
        let b = scheme.idealized_bolt(found.digest.to_index())?;
        Ok((b.clone(), b))
    }

    fn expected_accept(&self, _scheme: &Scheme) -> Result<Option<f64>, LightningError> {
        Ok(Some(1.0))
    }
}

/// Always outputs the idealized bolt for one fixed serial.
#[derive(Clone, Copy, Debug)]
pub struct ConstantSerialStorm {
    pub serial: u64,
}

impl Storm for ConstantSerialStorm {
    fn name(&self) -> &str {
        "constant-serial"
    }

    fn physical(&self) -> bool {
        false
    }

    fn bolt(&self, scheme: &Scheme, _rng: &mut SimRng) -> Result<Bolt, LightningError> {
        scheme.idealized_bolt(self.serial)
    }

    fn expected_accept(&self, scheme: &Scheme) -> Result<Option<f64>, LightningError> {
        let nonempty = scheme.fiber_sizes()?[self.serial as usize] > 0;
        Ok(Some(if nonempty { 1.0 } else { 0.0 }))
    }
}

/// Registers prepared for two different serials, so full verification
/// always fails on a serial mismatch.
#[derive(Clone, Copy, Debug, Default)]
pub struct SelfRejectingStorm;

impl Storm for SelfRejectingStorm {
    fn name(&self) -> &str {
        "self-rejecting"
    }

    fn bolt(&self, scheme: &Scheme, rng: &mut SimRng) -> Result<Bolt, LightningError> {
        let fibers = scheme.fiber_sizes()?;
        let image: Vec<u64> = (0..fibers.len() as u64).filter(|&y| fibers[y as usize] > 0).collect();
        if image.len() < 2 {
            return Err(LightningError::StormFailed("image has a single serial".into()));
        }
        let a = image[rng.random_range(0..image.len())];
        let b = loop {
            let b = image[rng.random_range(0..image.len())];
            if b != a {
                break b;
            }
        };
        let mut bolt = scheme.idealized_bolt(a)?;
        let last = bolt.registers.len() - 1;
        bolt.registers[last] = scheme.honest_register(b)?;
        Ok(bolt)
    }

    fn expected_accept(&self, _scheme: &Scheme) -> Result<Option<f64>, LightningError> {
        Ok(Some(0.0))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EmpiricalRates {
    pub accept: f64,
    pub accept_interval: Interval,
    /// Among accepting trials.
    pub witness: f64,
    pub witness_interval: Interval,
}

#[derive(Clone, Debug, Serialize)]
pub struct GameReport {
    pub storm: String,
    pub physical: bool,
    pub strategy: Strategy,
    pub trials: u64,
    pub accepts: u64,
    pub witness_count: u64,
    pub errors: u64,
    pub empirical_rates: EmpiricalRates,
    pub expected_accept: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MinEntropyReport {
    pub storm: String,
    pub trials: u64,
    pub accepts: u64,
    /// `−log₂` of the largest empirical serial frequency among accepted bolts.
    pub estimate: Option<f64>,
    /// `(serial, count)` in increasing serial order.
    pub counts: Vec<(u64, u64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CollapseReport {
    /// `Pr[out = 1 | b = 0]`.
    pub p0: f64,
    /// `Pr[out = 1 | b = 1]`.
    pub p1: f64,
    pub advantage: f64,
}

impl Scheme {
    /// Measures every register of a bolt in the computational basis.
    pub fn measure_bolt(&self, bolt: &Bolt, rng: &mut SimRng) -> Result<Vec<BitVector>, LightningError> {
        let m = self.params().m;
        match bolt.mode {
            BoltMode::IdealizedProduct => bolt
                .registers
                .iter()
                .map(|r| {
                    let q: Vec<usize> = (0..m).collect();
                    Ok(r.measure_register(&q, rng)?.value)
                })
                .collect(),
            BoltMode::JointMicro => {
                let s = &bolt.registers[0];
                let q: Vec<usize> = (0..s.num_qubits()).collect();
                let v = s.measure_register(&q, rng)?.value.to_index();
                let regs = s.num_qubits() / m;
                let mask = (1u64 << m) - 1;
                Ok((0..regs)
                    .map(|j| BitVector::from_index(v >> ((regs - 1 - j) * m) & mask, m))
                    .collect())
            }
        }
    }

    /// One challenger run: verify both bolts, accept iff both pass with the
    /// same serial. Returns `(accepted, witness)` where `witness` says the
    /// measured registers form a non-affine multi-collision.
    pub fn uniqueness_trial(
        &self,
        storm: &dyn Storm,
        strategy: Strategy,
        rng: &mut SimRng,
    ) -> Result<(bool, bool), LightningError> {
        let (b0, b1) = storm.bolt_pair(self, rng)?;
        let v0 = self.full_verify(&b0, strategy, rng)?;
        let v1 = self.full_verify(&b1, strategy, rng)?;
        let (
            FullVerdict::Accept { serial: s0, post: p0 },
            FullVerdict::Accept { serial: s1, post: p1 },
        ) = (v0, v1)
        else {
            return Ok((false, false));
        };
        if s0 != s1 {
            return Ok((false, false));
        }
        let mut points = self.measure_bolt(&p0, rng)?;
        points.extend(self.measure_bolt(&p1, rng)?);
        let y = s0.to_index();
        let collide = points.iter().all(|x| self.key().eval_index(x.to_index()) == y);
        Ok((true, collide && is_nonaffine(&points)?))
    }

    /// Trial `t` draws from stream `t` of `seed`, so reports are reproducible.
    /// A storm error counts as a rejected trial.
    pub fn uniqueness_game(
        &self,
        storm: &dyn Storm,
        strategy: Strategy,
        trials: u64,
        seed: u64,
    ) -> Result<GameReport, LightningError> {
        let (mut accepts, mut witness_count, mut errors) = (0, 0, 0);
        for t in 0..trials {
            let mut rng = rng::stream(seed, t);
            match self.uniqueness_trial(storm, strategy, &mut rng) {
                Ok((a, w)) => {
                    accepts += a as u64;
                    witness_count += w as u64;
                }
                Err(LightningError::StormFailed(_)) | Err(LightningError::Mq(_)) => errors += 1,
                Err(e) => return Err(e),
            }
        }
        let rate = |k: u64, of: u64| if of == 0 { 0.0 } else { k as f64 / of as f64 };
        Ok(GameReport {
            storm: storm.name().to_string(),
            physical: storm.physical(),
            strategy,
            trials,
            accepts,
            witness_count,
            errors,
            empirical_rates: EmpiricalRates {
                accept: rate(accepts, trials),
                accept_interval: wilson(accepts, trials, Z95),
                witness: rate(witness_count, accepts),
                witness_interval: wilson(witness_count, accepts, Z95),
            },
            expected_accept: storm.expected_accept(self)?,
        })
    }

    pub fn minentropy_probe(
        &self,
        storm: &dyn Storm,
        strategy: Strategy,
        trials: u64,
        seed: u64,
    ) -> Result<MinEntropyReport, LightningError> {
        let mut counts = std::collections::BTreeMap::<u64, u64>::new();
        let mut accepts = 0;
        for t in 0..trials {
            let mut rng = rng::stream(seed, t);
            let bolt = storm.bolt(self, &mut rng)?;
            if let FullVerdict::Accept { serial, .. } = self.full_verify(&bolt, strategy, &mut rng)? {
                accepts += 1;
                *counts.entry(serial.to_index()).or_default() += 1;
            }
        }
        let estimate = counts
            .values()
            .max()
            .map(|&c| -(c as f64 / accepts as f64).log2());
        Ok(MinEntropyReport {
            storm: storm.name().to_string(),
            trials,
            accepts,
            estimate,
            counts: counts.into_iter().collect(),
        })
    }

    /// The collapsing experiment with the span-test distinguisher: sample
    /// `x`, keep `|ψ'_{f(x)}⟩` (`b = 0`) or `|x⟩` (`b = 1`), output the span
    /// test result.
    pub fn collapse_trial(&self, b: bool, rng: &mut SimRng) -> Result<bool, LightningError> {
        let m = self.params().m;
        let x = rng.random_range(0..1u64 << m);
        let state = if b {
            StateVector::basis(m, x)?
        } else {
            self.honest_register(self.key().eval_index(x))?
        };
        let p = self.oracle()?.project(&state)?.probability;
        Ok(rng.random::<f64>() < p)
    }

    /// Exact output probabilities of the collapsing experiment.
    pub fn collapse_exact(&self) -> Result<CollapseReport, LightningError> {
        let fibers = self.fiber_sizes()?;
        let total = (1u64 << self.params().m) as f64;
        let mut p0 = 0.0;
        for (y, &c) in fibers.iter().enumerate() {
            if c > 0 {
                let reg = self.honest_register(y as u64)?;
                p0 += c as f64 / total * self.oracle()?.project(&reg)?.probability;
            }
        }
        let diag = self.oracle()?.basis_acceptance();
        let p1 = diag.iter().sum::<f64>() / total;
        Ok(CollapseReport {
            p0,
            p1,
            advantage: p0 - p1,
        })
    }
}
