use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{LightningError, Scheme};
use crate::gf2::{BitVector, ENUMERATION_CAP};
use crate::mq::attacks::colliding_space_unchecked;
use crate::mq::Digest;
use crate::qsim::{qubit_cap, Complex64, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoltMode {
    /// `k + 1` independent copies of `|ψ'_y⟩`.
    IdealizedProduct,
    /// One entangled state over `(k + 1)·m` qubits built by the full
    /// generation procedure. Register 0 occupies the highest qubits.
    JointMicro,
}

/// A bolt and the serial number it was generated with. The serial is a
/// claim; verification recomputes it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bolt {
    #[serde(with = "digest_hex")]
    pub serial: Digest,
    pub mode: BoltMode,
    pub registers: Vec<StateVector>,
}

mod digest_hex {
    use super::*;

    #[derive(Serialize, Deserialize)]
    struct Repr {
        n: usize,
        hex: String,
    }

    pub fn serialize<S: serde::Serializer>(d: &Digest, s: S) -> Result<S::Ok, S::Error> {
        Repr {
            n: d.len(),
            hex: d.to_hex(),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Digest, D::Error> {
        let r = Repr::deserialize(d)?;
        BitVector::from_hex(&r.hex, r.n)
            .map(Digest)
            .map_err(serde::de::Error::custom)
    }
}

/// How far the joint generation output for one serial is from the
/// idealized product state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointAnalysis {
    pub serial: u64,
    pub probability: f64,
    /// `|⟨joint|ψ'_y^{⊗(k+1)}⟩|²` from the simulated states.
    pub fidelity: f64,
    /// Fraction of all difference tuples whose `S_Δ` is empty or not of
    /// dimension `m − nk`.
    pub delta_mass: f64,
    /// `1 − (|G|/|T|)·w_G`, where `T` is the support of the ideal state, `G ⊆ T`
    /// the tuples reached through generic `Δ`, and `w_G` the weight of the
    /// joint state on `G`. Fidelity is at least `1 − delta_rigorous` by
    /// Cauchy–Schwarz.
    pub delta_rigorous: f64,
    /// The same fidelity from closed-form branch weights.
    pub fidelity_analytic: f64,
}

impl Bolt {
    pub fn num_registers(&self) -> usize {
        self.registers.len()
    }

    pub fn check_shape(&self, scheme: &Scheme) -> Result<(), LightningError> {
        let p = scheme.params();
        let ok = match self.mode {
            BoltMode::IdealizedProduct => {
                self.registers.len() == p.registers()
                    && self.registers.iter().all(|r| r.num_qubits() == p.m)
            }
            BoltMode::JointMicro => {
                self.registers.len() == 1 && self.registers[0].num_qubits() == p.registers() * p.m
            }
        };
        if !ok || self.serial.len() != p.n {
            return Err(LightningError::MalformedBolt(format!(
                "{:?} bolt with {} registers does not match n={}, m={}, k={}",
                self.mode,
                self.registers.len(),
                p.n,
                p.m,
                p.k
            )));
        }
        Ok(())
    }
}

impl Scheme {
    /// `|ψ'_y⟩`, uniform over `f⁻¹(y)`.
    pub fn honest_register(&self, y: u64) -> Result<StateVector, LightningError> {
        let m = self.params().m;
        if m > ENUMERATION_CAP {
            return Err(crate::gf2::Gf2Error::EnumerationCap {
                dim: m,
                cap: ENUMERATION_CAP,
            }
            .into());
        }
        let digests = self.oracle()?.digests();
        let pre: Vec<u64> = (0..1u64 << m).filter(|&x| digests[x as usize] == y).collect();
        Ok(StateVector::uniform_over(&pre, m)?)
    }

    pub fn idealized_bolt(&self, y: u64) -> Result<Bolt, LightningError> {
        let reg = self.honest_register(y)?;
        Ok(Bolt {
            serial: self.key().digest_from_index(y),
            mode: BoltMode::IdealizedProduct,
            registers: vec![reg; self.params().registers()],
        })
    }

    pub fn gen_bolt<R: Rng + ?Sized>(&self, rng: &mut R, mode: BoltMode) -> Result<Bolt, LightningError> {
        match mode {
            BoltMode::IdealizedProduct => {
                let x = rng.random_range(0..1u64 << self.params().m);
                self.idealized_bolt(self.key().eval_index(x))
            }
            BoltMode::JointMicro => {
                let outcomes = self.joint_outcomes()?;
                let probs: Vec<f64> = outcomes.iter().map(|o| o.1).collect();
                let i = crate::qsim::sample_index(&probs, rng);
                let (y, _, state, _) = outcomes.into_iter().nth(i).expect("sampled index");
                Ok(Bolt {
                    serial: self.key().digest_from_index(y),
                    mode: BoltMode::JointMicro,
                    registers: vec![state],
                })
            }
        }
    }

    fn joint_budget(&self) -> Result<(), LightningError> {
        let p = self.params();
        let qubits = p.registers() * p.m + p.k * p.m;
        if qubits > qubit_cap() {
            return Err(LightningError::Budget {
                qubits,
                cap: qubit_cap(),
            });
        }
        Ok(())
    }

    /// Every serial the full generation procedure can output, with its
    /// probability, the resulting joint state, and branch statistics.
    #[allow(clippy::type_complexity)]
    fn joint_outcomes(&self) -> Result<Vec<(u64, f64, StateVector, BranchStats)>, LightningError> {
        self.joint_budget()?;
        let p = *self.params();
        let (m, k) = (p.m, p.k);
        let km = k * m;
        let mask = (1u64 << m) - 1;
        let generic_dim = m.checked_sub(p.n * k);
        let split = |d: u64| -> Vec<BitVector> {
            (0..k)
                .map(|j| BitVector::from_index(d >> ((k - 1 - j) * m) & mask, m))
                .collect()
        };

        let total = 1usize << (km + m);
        let mut amps = vec![Complex64::new(0.0, 0.0); total];
        let mut stats: Vec<BranchStats> = vec![BranchStats::default(); 1 << p.n];
        let mut bad_deltas = 0u64;
        for d in 0..1u64 << km {
            let space = colliding_space_unchecked(self.key(), &split(d))?;
            let generic = matches!((&space, generic_dim), (Some(s), Some(g)) if s.dim() == g);
            if !generic {
                bad_deltas += 1;
            }
            let Some(space) = space else { continue };
            let size = (1u64 << space.dim()) as f64;
            let a = 1.0 / size.sqrt();
            for x in space.enumerate_default()? {
                let xi = x.to_index();
                amps[((xi << km) | d) as usize] = Complex64::new(a, 0.0);
                let st = &mut stats[self.key().eval_index(xi) as usize];
                st.weight += 1.0 / size;
                st.amp_sum += a;
                if generic {
                    st.generic_weight += 1.0 / size;
                    st.generic_count += 1;
                }
            }
        }
        let delta_mass = bad_deltas as f64 / (1u64 << km) as f64;
        let phi1 = StateVector::normalized(km + m, amps)?;
        let repeat = |x: u64| (0..k).fold(0u64, |acc, j| acc | x << (j * m));
        let mut out = Vec::new();
        for o in phi1.measure_function(|idx| self.key().eval_index(idx >> km)) {
            let mut state = o.post_state;
            state.apply_bijection(|idx| {
                let x = idx >> km;
                idx ^ repeat(x)
            })?;
            let mut st = stats[o.value as usize].clone();
            st.delta_mass = delta_mass;
            out.push((o.value, o.probability, state, st));
        }
        Ok(out)
    }

    /// Runs the full generation procedure exhaustively and compares each
    /// possible output with the idealized product state.
    pub fn joint_analysis(&self) -> Result<Vec<JointAnalysis>, LightningError> {
        let regs = self.params().registers();
        let fibers = self.fiber_sizes()?.to_vec();
        let mut out = Vec::new();
        for (y, probability, state, st) in self.joint_outcomes()? {
            let reg = self.honest_register(y)?;
            let mut ideal = reg.clone();
            for _ in 1..regs {
                ideal = ideal.tensor(&reg)?;
            }
            let fidelity = ideal.fidelity(&state)?;
            let support = (fibers[y as usize] as f64).powi(regs as i32);
            let fidelity_analytic = st.amp_sum * st.amp_sum / (support * st.weight);
            let delta_rigorous =
                1.0 - (st.generic_count as f64 / support) * (st.generic_weight / st.weight);
            out.push(JointAnalysis {
                serial: y,
                probability,
                fidelity,
                delta_mass: st.delta_mass,
                delta_rigorous,
                fidelity_analytic,
            });
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Default)]
struct BranchStats {
    /// Σ over support tuples of squared (unnormalized) amplitude.
    weight: f64,
    /// Σ over support tuples of (unnormalized) amplitude.
    amp_sum: f64,
    generic_weight: f64,
    generic_count: u64,
    delta_mass: f64,
}
