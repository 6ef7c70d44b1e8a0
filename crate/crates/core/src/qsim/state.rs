use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::QsimError;
use crate::gf2::BitVector;

pub const DEFAULT_QUBIT_CAP: usize = 26;

static QUBIT_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_QUBIT_CAP);

pub fn qubit_cap() -> usize {
    QUBIT_CAP.load(Ordering::Relaxed)
}

/// Sets the process-wide qubit cap.
pub fn set_qubit_cap(cap: usize) {
    QUBIT_CAP.store(cap, Ordering::Relaxed);
}

fn check_cap(qubits: usize) -> Result<(), QsimError> {
    let cap = qubit_cap();
    if qubits > cap {
        return Err(QsimError::CapExceeded { qubits, cap });
    }
    Ok(())
}

const NORM_TOLERANCE: f64 = 1e-9;
const DUMP_THRESHOLD: f64 = 1e-12;

/// Bits of `x` at positions `qubits`, packed so `qubits[j]` lands in bit `j`.
#[inline]
pub fn gather_bits(x: u64, qubits: &[usize]) -> u64 {
    qubits
        .iter()
        .enumerate()
        .fold(0, |acc, (j, &q)| acc | ((x >> q) & 1) << j)
}

/// Inverse of [`gather_bits`]: spreads bit `j` of `v` to position `qubits[j]`.
#[inline]
pub fn scatter_bits(v: u64, qubits: &[usize]) -> u64 {
    qubits
        .iter()
        .enumerate()
        .fold(0, |acc, (j, &q)| acc | ((v >> j) & 1) << q)
}

/// A normalized pure state on `num_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

#[derive(Clone, Debug)]
pub struct MeasurementOutcome {
    pub value: BitVector,
    pub probability: f64,
    pub post_state: StateVector,
}

/// Result of evaluating a classical function into a fresh register and
/// measuring it. The register ends in the product state `|value⟩`, so only
/// the input part is kept.
#[derive(Clone, Debug)]
pub struct FunctionOutcome {
    pub value: u64,
    pub probability: f64,
    pub post_state: StateVector,
}

impl StateVector {
    pub fn basis(num_qubits: usize, index: u64) -> Result<Self, QsimError> {
        check_cap(num_qubits)?;
        check_index(index, num_qubits)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amps[index as usize] = Complex64::new(1.0, 0.0);
        Ok(Self { num_qubits, amps })
    }

    pub fn zero(num_qubits: usize) -> Result<Self, QsimError> {
        Self::basis(num_qubits, 0)
    }

    /// Equal superposition over the listed basis states.
    pub fn uniform_over(points: &[u64], num_qubits: usize) -> Result<Self, QsimError> {
        check_cap(num_qubits)?;
        if points.is_empty() {
            return Err(QsimError::EmptySupport);
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        let a = Complex64::new(1.0 / (points.len() as f64).sqrt(), 0.0);
        for &p in points {
            check_index(p, num_qubits)?;
            if amps[p as usize].re != 0.0 {
                return Err(QsimError::DuplicateIndex(p));
            }
            amps[p as usize] = a;
        }
        Ok(Self { num_qubits, amps })
    }

    /// Takes amplitudes that must already have unit norm (within 1e-9).
    pub fn from_amplitudes(num_qubits: usize, amps: Vec<Complex64>) -> Result<Self, QsimError> {
        let s = Self::from_unnormalized_raw(num_qubits, amps)?;
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(QsimError::NotNormalized(norm.sqrt()));
        }
        Ok(s)
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(num_qubits: usize, amps: Vec<Complex64>) -> Result<Self, QsimError> {
        let mut s = Self::from_unnormalized_raw(num_qubits, amps)?;
        let norm = s.norm_sqr().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(QsimError::ZeroState);
        }
        for a in &mut s.amps {
            *a /= norm;
        }
        Ok(s)
    }

    fn from_unnormalized_raw(num_qubits: usize, amps: Vec<Complex64>) -> Result<Self, QsimError> {
        check_cap(num_qubits)?;
        if amps.len() != 1usize << num_qubits {
            return Err(QsimError::Dump(format!(
                "{} amplitudes for {} qubits",
                amps.len(),
                num_qubits
            )));
        }
        Ok(Self { num_qubits, amps })
    }

    /// Haar-ish random state: i.i.d. Gaussian real and imaginary parts.
    pub fn random<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> Result<Self, QsimError> {
        check_cap(num_qubits)?;
        let amps = (0..1usize << num_qubits)
            .map(|_| Complex64::new(gaussian(rng), gaussian(rng)))
            .collect();
        Self::normalized(num_qubits, amps)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amp(&self, index: u64) -> Complex64 {
        self.amps[index as usize]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    /// Basis indices with nonzero amplitude above the dump threshold.
    pub fn support(&self) -> Vec<u64> {
        self.amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > DUMP_THRESHOLD)
            .map(|(i, _)| i as u64)
            .collect()
    }

    fn check_qubit(&self, qubit: usize) -> Result<(), QsimError> {
        if qubit >= self.num_qubits {
            return Err(QsimError::QubitOutOfRange {
                qubit,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    fn check_register(&self, qubits: &[usize]) -> Result<(), QsimError> {
        let mut seen = 0u64;
        for &q in qubits {
            self.check_qubit(q)?;
            if seen >> q & 1 == 1 {
                return Err(QsimError::RepeatedQubit(q));
            }
            seen |= 1 << q;
        }
        Ok(())
    }

    fn check_same_dim(&self, other: &Self) -> Result<(), QsimError> {
        if self.num_qubits != other.num_qubits {
            return Err(QsimError::DimensionMismatch {
                left: self.num_qubits,
                right: other.num_qubits,
            });
        }
        Ok(())
    }

    pub fn hadamard(&mut self, qubit: usize) -> Result<(), QsimError> {
        self.check_qubit(qubit)?;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bit = 1usize << qubit;
        for block in (0..self.amps.len()).step_by(bit << 1) {
            for i in block..block + bit {
                let (a, b) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = (a + b) * s;
                self.amps[i | bit] = (a - b) * s;
            }
        }
        Ok(())
    }

    /// `H^{⊗q}`, the Fourier transform over GF(2)^q.
    pub fn hadamard_all(&mut self) {
        for q in 0..self.num_qubits {
            self.hadamard(q).expect("in range");
        }
    }

    pub fn hadamard_register(&mut self, qubits: &[usize]) -> Result<(), QsimError> {
        self.check_register(qubits)?;
        for &q in qubits {
            self.hadamard(q)?;
        }
        Ok(())
    }

    /// Pauli X on one qubit.
    pub fn flip(&mut self, qubit: usize) -> Result<(), QsimError> {
        self.check_qubit(qubit)?;
        let bit = 1usize << qubit;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                self.amps.swap(i, i | bit);
            }
        }
        Ok(())
    }

    /// `amp(x) ← (−1)^{f(x)} amp(x)`.
    pub fn apply_phase(&mut self, f: impl Fn(u64) -> bool) {
        for (x, a) in self.amps.iter_mut().enumerate() {
            if f(x as u64) {
                *a = -*a;
            }
        }
    }

    /// Diagonal unitary `amp(x) ← e^{iθ(x)} amp(x)`.
    pub fn apply_diagonal(&mut self, theta: impl Fn(u64) -> f64) {
        for (x, a) in self.amps.iter_mut().enumerate() {
            *a *= Complex64::from_polar(1.0, theta(x as u64));
        }
    }

    /// Relabels basis states: `amp'(π(x)) = amp(x)` over the support. Fails if
    /// two support points collide or an image is out of range.
    pub fn apply_bijection(&mut self, pi: impl Fn(u64) -> u64) -> Result<(), QsimError> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        let mut filled = vec![false; self.amps.len()];
        for (x, &a) in self.amps.iter().enumerate() {
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            let y = pi(x as u64);
            check_index(y, self.num_qubits)?;
            if filled[y as usize] {
                return Err(QsimError::NotInjective(y));
            }
            filled[y as usize] = true;
            out[y as usize] = a;
        }
        self.amps = out;
        Ok(())
    }

    /// `|x⟩ ↦ |x ⊕ (g(x_in) placed at target)⟩`: XORs `g` of the `input` register
    /// into the `target` register. Always a bijection.
    pub fn xor_function(
        &mut self,
        input: &[usize],
        target: &[usize],
        g: impl Fn(u64) -> u64,
    ) -> Result<(), QsimError> {
        self.check_register(input)?;
        self.check_register(target)?;
        if input.iter().any(|q| target.contains(q)) {
            return Err(QsimError::RepeatedQubit(
                *input.iter().find(|q| target.contains(q)).expect("found"),
            ));
        }
        self.apply_bijection(|x| x ^ scatter_bits(g(gather_bits(x, input)), target))
    }

    /// `a ⊗ b` with `a` on the high-order qubits: index `(i_a << q_b) | i_b`.
    pub fn tensor(&self, b: &Self) -> Result<Self, QsimError> {
        let q = self.num_qubits + b.num_qubits;
        check_cap(q)?;
        let mut amps = Vec::with_capacity(1 << q);
        for &x in &self.amps {
            amps.extend(b.amps.iter().map(|&y| x * y));
        }
        Ok(Self { num_qubits: q, amps })
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex64, QsimError> {
        self.check_same_dim(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨a|b⟩|²`.
    pub fn fidelity(&self, other: &Self) -> Result<f64, QsimError> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Born probabilities of every value of the register, indexed by the
    /// packed value (see [`gather_bits`]).
    pub fn outcome_probabilities(&self, qubits: &[usize]) -> Result<Vec<f64>, QsimError> {
        self.check_register(qubits)?;
        let mut p = vec![0.0; 1 << qubits.len()];
        for (x, a) in self.amps.iter().enumerate() {
            p[gather_bits(x as u64, qubits) as usize] += a.norm_sqr();
        }
        Ok(p)
    }

    /// Post-measurement state for register value `value`, or `None` when that
    /// outcome has probability zero.
    pub fn post_measurement_state(
        &self,
        qubits: &[usize],
        value: u64,
    ) -> Result<Option<(f64, StateVector)>, QsimError> {
        self.check_register(qubits)?;
        let mut amps = self.amps.clone();
        let mut prob = 0.0;
        for (x, a) in amps.iter_mut().enumerate() {
            if gather_bits(x as u64, qubits) == value {
                prob += a.norm_sqr();
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        if prob <= 0.0 {
            return Ok(None);
        }
        Ok(Some((prob, Self::normalized(self.num_qubits, amps)?)))
    }

    /// Every outcome of measuring `qubits` with nonzero probability, in
    /// increasing order of the packed value.
    pub fn measure_distribution(&self, qubits: &[usize]) -> Result<Vec<MeasurementOutcome>, QsimError> {
        let probs = self.outcome_probabilities(qubits)?;
        let mut out = Vec::new();
        for (v, &p) in probs.iter().enumerate() {
            if p > 0.0 {
                if let Some((probability, post_state)) = self.post_measurement_state(qubits, v as u64)? {
                    out.push(MeasurementOutcome {
                        value: BitVector::from_index(v as u64, qubits.len()),
                        probability,
                        post_state,
                    });
                }
            }
        }
        Ok(out)
    }

    /// Samples a Born outcome of measuring `qubits`.
    pub fn measure_register<R: Rng + ?Sized>(
        &self,
        qubits: &[usize],
        rng: &mut R,
    ) -> Result<MeasurementOutcome, QsimError> {
        let probs = self.outcome_probabilities(qubits)?;
        let v = sample_index(&probs, rng);
        let (probability, post_state) = self
            .post_measurement_state(qubits, v as u64)?
            .ok_or(QsimError::ZeroState)?;
        Ok(MeasurementOutcome {
            value: BitVector::from_index(v as u64, qubits.len()),
            probability,
            post_state,
        })
    }

    /// Evaluates `f` on the basis label into a fresh register and measures it,
    /// for every value of nonzero probability (ascending).
    pub fn measure_function(&self, f: impl Fn(u64) -> u64) -> Vec<FunctionOutcome> {
        let mut groups: std::collections::BTreeMap<u64, Vec<Complex64>> = Default::default();
        for (x, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            let v = f(x as u64);
            let g = groups
                .entry(v)
                .or_insert_with(|| vec![Complex64::new(0.0, 0.0); self.amps.len()]);
            g[x] = *a;
        }
        groups
            .into_iter()
            .map(|(value, amps)| {
                let probability = amps.iter().map(Complex64::norm_sqr).sum();
                FunctionOutcome {
                    value,
                    probability,
                    post_state: Self::normalized(self.num_qubits, amps).expect("nonzero group"),
                }
            })
            .collect()
    }

    /// Sparse dump: `(index hex, re, im)` for every amplitude above 1e-12.
    pub fn to_sparse(&self) -> Vec<(String, f64, f64)> {
        self.amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > DUMP_THRESHOLD)
            .map(|(i, a)| (format!("{i:x}"), a.re, a.im))
            .collect()
    }

    pub fn from_sparse(num_qubits: usize, entries: &[(String, f64, f64)]) -> Result<Self, QsimError> {
        check_cap(num_qubits)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        for (h, re, im) in entries {
            let i = u64::from_str_radix(h, 16).map_err(|e| QsimError::Dump(format!("{h}: {e}")))?;
            check_index(i, num_qubits)?;
            amps[i as usize] = Complex64::new(*re, *im);
        }
        Self::from_amplitudes(num_qubits, amps)
    }

    /// Squared norm of the part of `self` where `qubits` read `value`.
    pub fn register_weight(&self, qubits: &[usize], value: u64) -> Result<f64, QsimError> {
        Ok(self.outcome_probabilities(qubits)?[value as usize])
    }
}

#[derive(Serialize, Deserialize)]
struct StateDump {
    num_qubits: usize,
    entries: Vec<(String, f64, f64)>,
}

impl Serialize for StateVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        StateDump {
            num_qubits: self.num_qubits,
            entries: self.to_sparse(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let dump = StateDump::deserialize(d)?;
        StateVector::from_sparse(dump.num_qubits, &dump.entries).map_err(serde::de::Error::custom)
    }
}

fn check_index(index: u64, num_qubits: usize) -> Result<(), QsimError> {
    if num_qubits < 64 && index >> num_qubits != 0 {
        return Err(QsimError::IndexOutOfRange { index, num_qubits });
    }
    Ok(())
}

pub(crate) fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let total: f64 = probs.iter().sum();
    let mut t = rng.random::<f64>() * total;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last = i;
            if t < p {
                return i;
            }
            t -= p;
        }
    }
    last
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Box–Muller.
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
