use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Bolt, BoltMode, LightningError, Scheme};
use crate::mq::Digest;
use crate::qsim::{sample_index, Complex64, StateVector};

/// How the span test is carried out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// The ideal projector onto `span{|φ_r⟩}`.
    Oracle,
    /// The extraction circuit with every intermediate value kept coherent.
    Circuit,
    /// The extraction circuit with the round data measured.
    CircuitMeasured,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    /// The span test failed.
    Span,
    /// The extracted linear system did not determine `r`.
    RankDeficient,
    /// Registers accepted with different serials.
    SerialMismatch,
}

#[derive(Clone, Debug)]
pub struct SerialOutcome {
    pub serial: u64,
    /// Joint probability of accepting and reading this serial.
    pub probability: f64,
    /// Absent for the measured circuit, whose post-state is mixed.
    pub post_state: Option<StateVector>,
}

/// Exact outcome distribution of one mini verification.
#[derive(Clone, Debug)]
pub struct MiniVerifyReport {
    pub accept_probability: f64,
    pub span_reject_probability: f64,
    pub rank_reject_probability: f64,
    pub outcomes: Vec<SerialOutcome>,
    /// Weight left in the circuit ancillas after recomputation, conditioned
    /// on acceptance. Always 0 for the oracle.
    pub ancilla_residue: f64,
}

impl MiniVerifyReport {
    pub fn serial_probability(&self, y: u64) -> f64 {
        self.outcomes
            .iter()
            .filter(|o| o.serial == y)
            .map(|o| o.probability)
            .sum()
    }
}

#[derive(Clone, Debug)]
pub enum MiniVerdict {
    Accept { serial: Digest, post: StateVector },
    Reject(RejectReason),
}

#[derive(Clone, Debug)]
pub enum FullVerdict {
    Accept { serial: Digest, post: Bolt },
    Reject { reason: RejectReason, register: usize },
}

impl FullVerdict {
    pub fn serial(&self) -> Option<&Digest> {
        match self {
            FullVerdict::Accept { serial, .. } => Some(serial),
            FullVerdict::Reject { .. } => None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FullVerifyReport {
    pub accept_probability: f64,
    /// `(serial, probability)` for every serial accepted with positive probability.
    pub serials: Vec<(u64, f64)>,
    pub mismatch_probability: f64,
    pub rank_reject_probability: f64,
    /// Post-bolt for the most likely accepted serial (product bolts under a
    /// strategy with pure post-states).
    #[serde(skip)]
    pub post: Option<Bolt>,
}

/// Serial outcomes below this probability are rounding residue of the
/// projection and are dropped from reports.
const NEGLIGIBLE: f64 = 1e-20;

fn register_mask(m: usize) -> u64 {
    (1u64 << m) - 1
}

impl Scheme {
    /// Exact distribution of mini verification on the `m`-qubit register at
    /// qubits `offset..offset + m` of `state`.
    pub fn mini_verify_exact_at(
        &self,
        state: &StateVector,
        offset: usize,
        strategy: Strategy,
    ) -> Result<MiniVerifyReport, LightningError> {
        let m = self.params().m;
        if offset + m > state.num_qubits() {
            return Err(LightningError::MalformedBolt(format!(
                "register at {offset} does not fit in {} qubits",
                state.num_qubits()
            )));
        }
        match strategy {
            Strategy::Oracle => self.oracle_exact(state, offset),
            Strategy::Circuit => self.circuit_exact(state, offset, false),
            Strategy::CircuitMeasured => self.circuit_exact(state, offset, true),
        }
    }

    pub fn mini_verify_exact(
        &self,
        register: &StateVector,
        strategy: Strategy,
    ) -> Result<MiniVerifyReport, LightningError> {
        self.mini_verify_exact_at(register, 0, strategy)
    }

    /// One run of mini verification with Born-rule sampling.
    pub fn mini_verify<R: Rng + ?Sized>(
        &self,
        register: &StateVector,
        strategy: Strategy,
        rng: &mut R,
    ) -> Result<MiniVerdict, LightningError> {
        self.mini_verify_at(register, 0, strategy, rng)
    }

    pub fn mini_verify_at<R: Rng + ?Sized>(
        &self,
        state: &StateVector,
        offset: usize,
        strategy: Strategy,
        rng: &mut R,
    ) -> Result<MiniVerdict, LightningError> {
        if strategy == Strategy::CircuitMeasured {
            return self.circuit_measured_sample(state, offset, rng);
        }
        let report = self.mini_verify_exact_at(state, offset, strategy)?;
        Ok(sample_verdict(self, report, rng))
    }

    fn oracle_exact(&self, state: &StateVector, offset: usize) -> Result<MiniVerifyReport, LightningError> {
        let m = self.params().m;
        let oracle = self.oracle()?;
        let vectors = oracle.basis().vectors();
        let q = state.num_qubits();
        let mask = register_mask(m);
        // Π ⊗ I on the register: for every setting of the other qubits,
        // project the register slice.
        let rest_count = 1usize << (q - m);
        let mut out = vec![Complex64::new(0.0, 0.0); state.dim()];
        let amps = state.amps();
        let low = (1usize << offset) - 1;
        let index = |rest: usize, z: usize| -> usize {
            let lo = rest & low;
            let hi = rest >> offset;
            (hi << (offset + m)) | (z << offset) | lo
        };
        for rest in 0..rest_count {
            for e in vectors {
                let c: Complex64 = (0..=mask as usize)
                    .map(|z| e[z].conj() * amps[index(rest, z)])
                    .sum();
                if c.norm_sqr() == 0.0 {
                    continue;
                }
                for z in 0..=mask as usize {
                    out[index(rest, z)] += c * e[z];
                }
            }
        }
        let accept: f64 = out.iter().map(Complex64::norm_sqr).sum::<f64>().min(1.0);
        let mut outcomes = Vec::new();
        if accept > 1e-300 {
            let projected = StateVector::normalized(q, out)?;
            let digests = oracle.digests();
            for o in projected.measure_function(|idx| digests[((idx >> offset) & mask) as usize]) {
                if accept * o.probability < NEGLIGIBLE {
                    continue;
                }
                outcomes.push(SerialOutcome {
                    serial: o.value,
                    probability: (accept * o.probability).min(1.0),
                    post_state: Some(o.post_state),
                });
            }
        }
        Ok(MiniVerifyReport {
            accept_probability: accept,
            span_reject_probability: 1.0 - accept,
            rank_reject_probability: 0.0,
            outcomes,
            ancilla_residue: 0.0,
        })
    }

    /// XORs the extracted `r` and the unsolved flag into the ancillas, reading
    /// the register label after `W`.
    fn xor_extracted(&self, s: &mut StateVector, offset: usize, anc: usize) -> Result<(), LightningError> {
        let plan = self.plan();
        let mask = register_mask(self.params().m);
        let n = self.params().n;
        s.apply_bijection(|idx| {
            let z = (idx >> offset) & mask;
            let v = match plan.solve(z).1 {
                Some(r) => r,
                None => 1 << n,
            };
            idx ^ (v << anc)
        })?;
        Ok(())
    }

    /// `|r⟩|0⟩ ↦ |r⟩|φ_r⟩` run backwards (`undo = true`) or forwards.
    fn prep(&self, s: &mut StateVector, offset: usize, anc: usize, undo: bool) -> Result<(), LightningError> {
        let m = self.params().m;
        let n = self.params().n;
        let mask = register_mask(m);
        let rmask = register_mask(n);
        let digests = self.oracle()?.digests().to_vec();
        let phase = |s: &mut StateVector| {
            s.apply_phase(|idx| {
                let r = (idx >> anc) & rmask;
                (r & digests[((idx >> offset) & mask) as usize]).count_ones() & 1 == 1
            })
        };
        let h = |s: &mut StateVector| -> Result<(), LightningError> {
            for j in 0..m {
                s.hadamard(offset + j)?;
            }
            Ok(())
        };
        if undo {
            phase(s);
            h(s)?;
        } else {
            h(s)?;
            phase(s);
        }
        Ok(())
    }

    /// `E = W⁻¹ · XOR(r, flag) · W`: the coherent extraction.
    fn extract(&self, s: &mut StateVector, offset: usize, anc: usize) -> Result<(), LightningError> {
        self.plan().forward(s, offset)?;
        self.xor_extracted(s, offset, anc)?;
        self.plan().inverse(s, offset)?;
        Ok(())
    }

    fn circuit_exact(
        &self,
        state: &StateVector,
        offset: usize,
        measured: bool,
    ) -> Result<MiniVerifyReport, LightningError> {
        let (n, m) = (self.params().n, self.params().m);
        let q = state.num_qubits();
        let anc = q;
        let mut s = StateVector::zero(n + 1)?.tensor(state)?;
        if !measured {
            self.extract(&mut s, offset, anc)?;
            return self.circuit_finish(s, offset, anc, 1.0);
        }
        // Measured variant: sample the round data after W, then continue.
        self.plan().forward(&mut s, offset)?;
        let consumed: Vec<usize> = self.plan().consumed_qubits().iter().map(|&c| c + offset).collect();
        let probs = s.outcome_probabilities(&consumed)?;
        let mut total = MiniVerifyReport {
            accept_probability: 0.0,
            span_reject_probability: 0.0,
            rank_reject_probability: 0.0,
            outcomes: Vec::new(),
            ancilla_residue: 0.0,
        };
        let _ = m;
        for (v, &p) in probs.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            let (_, mut branch) = s
                .post_measurement_state(&consumed, v as u64)?
                .expect("positive probability");
            self.xor_extracted(&mut branch, offset, anc)?;
            self.plan().inverse(&mut branch, offset)?;
            let r = self.circuit_finish(branch, offset, anc, p)?;
            total.accept_probability += r.accept_probability;
            total.span_reject_probability += r.span_reject_probability;
            total.rank_reject_probability += r.rank_reject_probability;
            total.ancilla_residue += r.ancilla_residue * r.accept_probability;
            for o in r.outcomes {
                match total.outcomes.iter_mut().find(|t| t.serial == o.serial) {
                    Some(t) => t.probability += o.probability,
                    None => total.outcomes.push(SerialOutcome {
                        serial: o.serial,
                        probability: o.probability,
                        post_state: None,
                    }),
                }
            }
        }
        if total.accept_probability > 0.0 {
            total.ancilla_residue /= total.accept_probability;
        }
        total.outcomes.sort_by_key(|o| o.serial);
        Ok(total)
    }

    /// From the state after extraction: undo the preparation, test for
    /// `|0⟩` with a clear flag, recompute, and measure the serial. `scale` is
    /// the probability of reaching this branch.
    fn circuit_finish(
        &self,
        mut s: StateVector,
        offset: usize,
        anc: usize,
        scale: f64,
    ) -> Result<MiniVerifyReport, LightningError> {
        let (n, m) = (self.params().n, self.params().m);
        let mask = register_mask(m);
        self.prep(&mut s, offset, anc, true)?;
        let flag_bit = 1u64 << (anc + n);
        let data_mask = mask << offset;
        let mut rank_reject = 0.0;
        let mut accept = 0.0;
        let mut amps = s.amps().to_vec();
        for (idx, a) in amps.iter_mut().enumerate() {
            let idx = idx as u64;
            let w = a.norm_sqr();
            if idx & flag_bit != 0 {
                rank_reject += w;
                *a = Complex64::new(0.0, 0.0);
            } else if idx & data_mask != 0 {
                *a = Complex64::new(0.0, 0.0);
            } else {
                accept += w;
            }
        }
        let accept = accept.min(1.0);
        let mut report = MiniVerifyReport {
            accept_probability: scale * accept,
            span_reject_probability: scale * (1.0 - accept - rank_reject).max(0.0),
            rank_reject_probability: scale * rank_reject,
            outcomes: Vec::new(),
            ancilla_residue: 0.0,
        };
        if accept <= 1e-300 {
            return Ok(report);
        }
        let mut s = StateVector::normalized(s.num_qubits(), amps)?;
        self.prep(&mut s, offset, anc, false)?;
        self.extract(&mut s, offset, anc)?;
        // Keep the ancilla-zero part.
        let q = anc;
        let clean = &s.amps()[..1usize << q];
        let clean_weight: f64 = clean.iter().map(Complex64::norm_sqr).sum();
        report.ancilla_residue = (1.0 - clean_weight).max(0.0);
        let post = StateVector::normalized(q, clean.to_vec())?;
        let digests = self.oracle()?.digests();
        for o in post.measure_function(|idx| digests[((idx >> offset) & mask) as usize]) {
            if scale * accept * o.probability < NEGLIGIBLE {
                continue;
            }
            report.outcomes.push(SerialOutcome {
                serial: o.value,
                probability: scale * accept * o.probability,
                post_state: Some(o.post_state),
            });
        }
        Ok(report)
    }

    fn circuit_measured_sample<R: Rng + ?Sized>(
        &self,
        state: &StateVector,
        offset: usize,
        rng: &mut R,
    ) -> Result<MiniVerdict, LightningError> {
        let n = self.params().n;
        let anc = state.num_qubits();
        let mut s = StateVector::zero(n + 1)?.tensor(state)?;
        self.plan().forward(&mut s, offset)?;
        let consumed: Vec<usize> = self.plan().consumed_qubits().iter().map(|&c| c + offset).collect();
        let mut s = s.measure_register(&consumed, rng)?.post_state;
        self.xor_extracted(&mut s, offset, anc)?;
        self.plan().inverse(&mut s, offset)?;
        let report = self.circuit_finish(s, offset, anc, 1.0)?;
        Ok(sample_verdict(self, report, rng))
    }

    /// Exact acceptance distribution of full verification.
    pub fn full_verify_exact(&self, bolt: &Bolt, strategy: Strategy) -> Result<FullVerifyReport, LightningError> {
        bolt.check_shape(self)?;
        match bolt.mode {
            BoltMode::IdealizedProduct => self.full_exact_product(bolt, strategy),
            BoltMode::JointMicro => self.full_exact_joint(bolt, strategy),
        }
    }

    fn full_exact_product(&self, bolt: &Bolt, strategy: Strategy) -> Result<FullVerifyReport, LightningError> {
        let reports = bolt
            .registers
            .iter()
            .map(|r| self.mini_verify_exact(r, strategy))
            .collect::<Result<Vec<_>, _>>()?;
        let all_accept: f64 = reports.iter().map(|r| r.accept_probability).product();
        // P(no register is rank-rejected and at least one is).
        let no_rank: f64 = reports.iter().map(|r| 1.0 - r.rank_reject_probability).product();
        let mut serials = Vec::new();
        for y in 0..1u64 << self.params().n {
            let p: f64 = reports.iter().map(|r| r.serial_probability(y)).product();
            if p > 0.0 {
                serials.push((y, p));
            }
        }
        let accept: f64 = serials.iter().map(|s| s.1).sum::<f64>().min(1.0);
        let post = serials
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .and_then(|&(y, _)| {
                let regs: Option<Vec<StateVector>> = reports
                    .iter()
                    .map(|r| {
                        r.outcomes
                            .iter()
                            .find(|o| o.serial == y)
                            .and_then(|o| o.post_state.clone())
                    })
                    .collect();
                regs.map(|registers| Bolt {
                    serial: self.key().digest_from_index(y),
                    mode: BoltMode::IdealizedProduct,
                    registers,
                })
            });
        Ok(FullVerifyReport {
            accept_probability: accept,
            serials,
            mismatch_probability: (all_accept - accept).max(0.0),
            rank_reject_probability: 1.0 - no_rank,
            post,
        })
    }

    fn full_exact_joint(&self, bolt: &Bolt, strategy: Strategy) -> Result<FullVerifyReport, LightningError> {
        if strategy == Strategy::CircuitMeasured {
            return Err(LightningError::InvalidParams(
                "exact joint verification needs pure post-states".into(),
            ));
        }
        let p = *self.params();
        // Branches: (common serial so far, probability, state).
        let mut branches: Vec<(Option<u64>, f64, StateVector)> = vec![(None, 1.0, bolt.registers[0].clone())];
        let mut mismatch = 0.0;
        let mut rank_reject = 0.0;
        for j in 0..p.registers() {
            let offset = (p.k - j) * p.m;
            let mut next = Vec::new();
            for (serial, prob, state) in branches {
                let r = self.mini_verify_exact_at(&state, offset, strategy)?;
                rank_reject += prob * r.rank_reject_probability;
                for o in r.outcomes {
                    let q = prob * o.probability;
                    if serial.is_some_and(|s| s != o.serial) {
                        mismatch += q;
                        continue;
                    }
                    next.push((Some(o.serial), q, o.post_state.expect("pure")));
                }
            }
            branches = next;
        }
        let mut serials: Vec<(u64, f64)> = Vec::new();
        for (s, q, _) in &branches {
            let s = s.expect("set after first register");
            match serials.iter_mut().find(|e| e.0 == s) {
                Some(e) => e.1 += q,
                None => serials.push((s, *q)),
            }
        }
        serials.sort_by_key(|e| e.0);
        let best = branches.iter().max_by(|a, b| a.1.total_cmp(&b.1));
        let post = best.map(|(s, _, st)| Bolt {
            serial: self.key().digest_from_index(s.expect("set")),
            mode: BoltMode::JointMicro,
            registers: vec![st.clone()],
        });
        Ok(FullVerifyReport {
            accept_probability: serials.iter().map(|e| e.1).sum::<f64>().min(1.0),
            serials,
            mismatch_probability: mismatch,
            rank_reject_probability: rank_reject,
            post,
        })
    }

    /// One sampled run of full verification: every register is verified in
    /// turn and all must agree on the serial.
    pub fn full_verify<R: Rng + ?Sized>(
        &self,
        bolt: &Bolt,
        strategy: Strategy,
        rng: &mut R,
    ) -> Result<FullVerdict, LightningError> {
        bolt.check_shape(self)?;
        let p = *self.params();
        let mut serial: Option<Digest> = None;
        let mut post = bolt.clone();
        let count = match bolt.mode {
            BoltMode::IdealizedProduct => p.registers(),
            BoltMode::JointMicro => p.registers(),
        };
        let mut mismatch_at = None;
        for j in 0..count {
            let verdict = match bolt.mode {
                BoltMode::IdealizedProduct => self.mini_verify(&post.registers[j], strategy, rng)?,
                BoltMode::JointMicro => {
                    self.mini_verify_at(&post.registers[0], (p.k - j) * p.m, strategy, rng)?
                }
            };
            match verdict {
                MiniVerdict::Reject(reason) => return Ok(FullVerdict::Reject { reason, register: j }),
                MiniVerdict::Accept { serial: y, post: st } => {
                    match bolt.mode {
                        BoltMode::IdealizedProduct => post.registers[j] = st,
                        BoltMode::JointMicro => post.registers[0] = st,
                    }
                    match &serial {
                        None => serial = Some(y),
                        Some(s) if *s != y && mismatch_at.is_none() => mismatch_at = Some(j),
                        Some(_) => {}
                    }
                }
            }
        }
        if let Some(register) = mismatch_at {
            return Ok(FullVerdict::Reject {
                reason: RejectReason::SerialMismatch,
                register,
            });
        }
        let serial = serial.expect("at least one register");
        post.serial = serial.clone();
        Ok(FullVerdict::Accept { serial, post })
    }
}

fn sample_verdict<R: Rng + ?Sized>(scheme: &Scheme, report: MiniVerifyReport, rng: &mut R) -> MiniVerdict {
    let mut probs: Vec<f64> = report.outcomes.iter().map(|o| o.probability).collect();
    probs.push(report.span_reject_probability);
    probs.push(report.rank_reject_probability);
    let i = sample_index(&probs, rng);
    let count = report.outcomes.len();
    if i == count {
        return MiniVerdict::Reject(RejectReason::Span);
    }
    if i == count + 1 {
        return MiniVerdict::Reject(RejectReason::RankDeficient);
    }
    let o = report.outcomes.into_iter().nth(i).expect("sampled");
    MiniVerdict::Accept {
        serial: scheme.key().digest_from_index(o.serial),
        post: o.post_state.expect("pure post-state for sampled verdicts"),
    }
}
