//! Subspace-state money over GF(2).
//!
//! A note is `|$_S⟩ = 2^{−n/4} Σ_{x∈S} |x⟩` for a secret `n/2`-dimensional
//! `S`. Verification holds membership oracles for `S` and `S^⊥` only.

use rand::Rng;
use serde::Serialize;

use crate::gf2::{dual_space, random_subspace, random_subspace_between, span_indices, BitMatrix, Gf2Error};
use crate::qsim::{Complex64, QsimError, StateVector};
use crate::rng::{self, SimRng};
use crate::stats::{wilson, Interval, Z95};

pub const MAX_NOTE_QUBITS: usize = 20;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MoneyError {
    #[error("note dimension must be even and at least 2, got {0}")]
    OddDimension(usize),
    #[error("note dimension {n} exceeds {max}")]
    TooLarge { n: usize, max: usize },
    #[error("adversary failed: {0}")]
    Adversary(String),
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
    #[error(transparent)]
    Qsim(#[from] QsimError),
}

fn check_dimension(n: usize) -> Result<(), MoneyError> {
    if n < 2 || n % 2 == 1 {
        return Err(MoneyError::OddDimension(n));
    }
    if n > MAX_NOTE_QUBITS {
        return Err(MoneyError::TooLarge {
            n,
            max: MAX_NOTE_QUBITS,
        });
    }
    Ok(())
}

fn masks(m: &BitMatrix) -> Vec<u64> {
    m.rows().iter().map(|r| r.to_index()).collect()
}

/// Membership test for one subspace, given as the rows of a basis of its
/// dual: `x ∈ V` iff `x·c = 0` for every check row `c`.
#[derive(Clone, Debug)]
pub struct MembershipOracle {
    n: usize,
    checks: Vec<u64>,
}

impl MembershipOracle {
    fn for_space(space: &BitMatrix) -> Result<Self, MoneyError> {
        Ok(Self {
            n: space.num_cols(),
            checks: masks(&dual_space(space)?),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn contains(&self, x: u64) -> bool {
        self.checks.iter().all(|c| (c & x).count_ones() % 2 == 0)
    }
}

/// The pair `(P_0, P_1)` deciding membership in `S` and `S^⊥`.
#[derive(Clone, Debug)]
pub struct Oracles {
    pub primal: MembershipOracle,
    pub dual: MembershipOracle,
}

impl Oracles {
    pub fn new(subspace: &BitMatrix) -> Result<Self, MoneyError> {
        Ok(Self {
            primal: MembershipOracle::for_space(subspace)?,
            dual: MembershipOracle::for_space(&dual_space(subspace)?)?,
        })
    }

    pub fn n(&self) -> usize {
        self.primal.n
    }
}

#[derive(Clone, Debug)]
pub struct MoneyNote {
    /// Canonical basis of `S`. Secret from adversaries.
    pub subspace: BitMatrix,
    /// Opaque handle naming the oracle pair.
    pub serial: u64,
    pub state: StateVector,
}

impl MoneyNote {
    pub fn from_subspace(subspace: BitMatrix, serial: u64) -> Result<Self, MoneyError> {
        let n = subspace.num_cols();
        check_dimension(n)?;
        if subspace.num_rows() != n / 2 || !subspace.rows_independent() {
            return Err(Gf2Error::DependentRows.into());
        }
        let state = subspace_state(&subspace)?;
        Ok(Self {
            subspace,
            serial,
            state,
        })
    }

    pub fn n(&self) -> usize {
        self.subspace.num_cols()
    }

    pub fn oracles(&self) -> Result<Oracles, MoneyError> {
        Oracles::new(&self.subspace)
    }
}

/// Uniform superposition over the span of `basis`.
pub fn subspace_state(basis: &BitMatrix) -> Result<StateVector, MoneyError> {
    Ok(StateVector::uniform_over(&span_indices(basis)?, basis.num_cols())?)
}

pub fn money_gen<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<MoneyNote, MoneyError> {
    check_dimension(n)?;
    let s = random_subspace(n, n / 2, rng)?;
    MoneyNote::from_subspace(s, rng.random())
}

#[derive(Clone, Debug)]
pub struct MoneyVerdict {
    pub accept: bool,
    pub post: StateVector,
}

/// Exact acceptance probability of [`money_verify`] and the state left on
/// acceptance.
#[derive(Clone, Debug)]
pub struct MoneyVerifyReport {
    pub accept_probability: f64,
    /// Probability of failing the first (primal) membership test.
    pub primal_reject_probability: f64,
    pub post: Option<StateVector>,
}

/// Splits `amps` by `keep`, returning the kept weight and zeroing the rest.
fn restrict(amps: &mut [Complex64], keep: impl Fn(u64) -> bool) -> f64 {
    let mut w = 0.0;
    for (x, a) in amps.iter_mut().enumerate() {
        if keep(x as u64) {
            w += a.norm_sqr();
        } else {
            *a = Complex64::new(0.0, 0.0);
        }
    }
    w
}

fn check_width(state: &StateVector, oracles: &Oracles) -> Result<(), MoneyError> {
    if state.num_qubits() != oracles.n() {
        return Err(QsimError::DimensionMismatch {
            left: oracles.n(),
            right: state.num_qubits(),
        }
        .into());
    }
    Ok(())
}

/// One membership measurement: `P(outcome = keep)` and the branch for that
/// outcome, or `None` when the branch is empty.
fn membership_branch(
    state: &StateVector,
    oracle: &MembershipOracle,
    outcome: bool,
) -> Result<(f64, Option<StateVector>), MoneyError> {
    let mut amps = state.amps().to_vec();
    let w = restrict(&mut amps, |x| oracle.contains(x) == outcome).min(1.0);
    if w <= 0.0 {
        return Ok((0.0, None));
    }
    Ok((w, Some(StateVector::normalized(state.num_qubits(), amps)?)))
}

pub fn money_verify_exact(state: &StateVector, oracles: &Oracles) -> Result<MoneyVerifyReport, MoneyError> {
    check_width(state, oracles)?;
    let (p0, branch) = membership_branch(state, &oracles.primal, true)?;
    let Some(mut s) = branch else {
        return Ok(MoneyVerifyReport {
            accept_probability: 0.0,
            primal_reject_probability: 1.0,
            post: None,
        });
    };
    s.hadamard_all();
    let (p1, branch) = membership_branch(&s, &oracles.dual, true)?;
    let post = branch.map(|mut t| {
        t.hadamard_all();
        t
    });
    Ok(MoneyVerifyReport {
        accept_probability: p0 * p1,
        primal_reject_probability: 1.0 - p0,
        post,
    })
}

/// Measure `S`-membership, Hadamard every qubit, measure `S^⊥`-membership,
/// Hadamard back. Rejects on either test failing.
pub fn money_verify<R: Rng + ?Sized>(
    state: &StateVector,
    oracles: &Oracles,
    rng: &mut R,
) -> Result<MoneyVerdict, MoneyError> {
    check_width(state, oracles)?;
    let sample = |s: &StateVector, oracle: &MembershipOracle, rng: &mut R| -> Result<(bool, StateVector), MoneyError> {
        let (p, inside) = membership_branch(s, oracle, true)?;
        if rng.random::<f64>() < p {
            Ok((true, inside.expect("positive weight")))
        } else {
            let (_, outside) = membership_branch(s, oracle, false)?;
            Ok((false, outside.unwrap_or_else(|| s.clone())))
        }
    };
    let (ok, mut s) = sample(state, &oracles.primal, rng)?;
    if !ok {
        return Ok(MoneyVerdict { accept: false, post: s });
    }
    s.hadamard_all();
    let (ok, mut s) = sample(&s, &oracles.dual, rng)?;
    s.hadamard_all();
    Ok(MoneyVerdict { accept: ok, post: s })
}

/// The ideal projector onto `|$_S⟩`: `(probability, post-state)`.
pub fn projective_verify(state: &StateVector, subspace: &BitMatrix) -> Result<(f64, StateVector), MoneyError> {
    let note = subspace_state(subspace)?;
    let c = note.inner(state)?;
    Ok((c.norm_sqr().min(1.0), note))
}

/// What a counterfeiter gets: the note and oracle access, never the basis.
pub trait Adversary {
    fn name(&self) -> &str;

    /// Returns a joint state on `2n` qubits; the first note occupies the
    /// high `n` qubits.
    fn attack(&self, note: &StateVector, oracles: &Oracles, rng: &mut SimRng) -> Result<StateVector, MoneyError>;
}

/// Measures the note in the computational basis and outputs `|x⟩|x⟩`.
#[derive(Clone, Copy, Debug, Default)]
pub struct MeasureAndCopy;

impl Adversary for MeasureAndCopy {
    fn name(&self) -> &str {
        "measure-and-copy"
    }

    fn attack(&self, note: &StateVector, _oracles: &Oracles, rng: &mut SimRng) -> Result<StateVector, MoneyError> {
        let n = note.num_qubits();
        let q: Vec<usize> = (0..n).collect();
        let x = note.measure_register(&q, rng)?.value.to_index();
        Ok(StateVector::basis(2 * n, (x << n) | x)?)
    }
}

/// Ignores the note and outputs two copies of `|$_T⟩` for a subspace `T`
/// fixed by `seed`.
#[derive(Clone, Copy, Debug, Default)]
pub struct FixedGuess {
    pub seed: u64,
}

impl Adversary for FixedGuess {
    fn name(&self) -> &str {
        "fixed-guess"
    }

    fn attack(&self, note: &StateVector, _oracles: &Oracles, _rng: &mut SimRng) -> Result<StateVector, MoneyError> {
        let n = note.num_qubits();
        let t = random_subspace(n, n / 2, &mut rng::seeded(self.seed))?;
        let s = subspace_state(&t)?;
        Ok(s.tensor(&s)?)
    }
}

/// Forwards the note untouched and pads with `|0…0⟩`.
#[derive(Clone, Copy, Debug, Default)]
pub struct HonestForward;

impl Adversary for HonestForward {
    fn name(&self) -> &str {
        "honest-forward"
    }

    fn attack(&self, note: &StateVector, _oracles: &Oracles, _rng: &mut SimRng) -> Result<StateVector, MoneyError> {
        Ok(note.tensor(&StateVector::zero(note.num_qubits())?)?)
    }
}

/// `|⟨$_S ⊗ $_S|ψ⟩|²`: the chance both halves pass projective verification.
pub fn pair_success_probability(pair: &StateVector, subspace: &BitMatrix) -> Result<f64, MoneyError> {
    let n = subspace.num_cols();
    if pair.num_qubits() != 2 * n {
        return Err(QsimError::DimensionMismatch {
            left: 2 * n,
            right: pair.num_qubits(),
        }
        .into());
    }
    let points = span_indices(subspace)?;
    let mut c = Complex64::new(0.0, 0.0);
    for &x in &points {
        for &y in &points {
            c += pair.amp((x << n) | y);
        }
    }
    Ok((c.norm_sqr() / (points.len() * points.len()) as f64).min(1.0))
}

#[derive(Clone, Debug)]
pub struct CounterfeitConfig {
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    /// Sample `S` with `lower ⊆ S ⊆ upper` instead of uniformly.
    pub between: Option<(BitMatrix, BitMatrix)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CounterfeitReport {
    pub adversary: String,
    pub n: usize,
    pub trials: u64,
    pub successes: u64,
    pub success_rate: f64,
    pub wilson_95: Interval,
    /// Mean over trials of the exact per-trial success probability: the
    /// adversary's `F²` on the sampled notes.
    pub exact_expected: f64,
}

pub fn counterfeit_experiment(adversary: &dyn Adversary, cfg: &CounterfeitConfig) -> Result<CounterfeitReport, MoneyError> {
    check_dimension(cfg.n)?;
    let mut successes = 0;
    let mut exact_sum = 0.0;
    for t in 0..cfg.trials {
        let mut rng = rng::stream(cfg.seed, t);
        let note = match &cfg.between {
            None => money_gen(cfg.n, &mut rng)?,
            Some((lo, hi)) => {
                let s = random_subspace_between(lo, hi, cfg.n / 2, &mut rng)?;
                MoneyNote::from_subspace(s, rng.random())?
            }
        };
        let pair = adversary.attack(&note.state, &note.oracles()?, &mut rng)?;
        let p = pair_success_probability(&pair, &note.subspace)?;
        exact_sum += p;
        if rng.random::<f64>() < p {
            successes += 1;
        }
    }
    let trials = cfg.trials;
    Ok(CounterfeitReport {
        adversary: adversary.name().to_string(),
        n: cfg.n,
        trials,
        successes,
        success_rate: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
        wilson_95: wilson(successes, trials, Z95),
        exact_expected: if trials == 0 { 0.0 } else { exact_sum / trials as f64 },
    })
}
