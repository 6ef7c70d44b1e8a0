//! Spectral bounds on converting one family of states into another.
//!
//! For families `{|ψ_i⟩}`, `{|φ_i⟩}` with prior `p`, any channel mapping
//! `|ψ_i⟩ ↦ |φ_i⟩` has average squared fidelity `F² ≤ d·λ₁(C)`, where
//! `C = A_ψ ∘ A_φ ∘ B`, `A` are Gram matrices, `B_ij = √(p_i p_j)`, and `d`
//! is the input dimension.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::Rng;
use serde::{Serialize, Serializer};

use crate::gf2::{enumerate_subspaces, intersection_dim, Gf2Error};
use crate::money::subspace_state;
use crate::qsim::{Complex64, QsimError, StateVector};
use crate::rng;

pub type CMatrix = DMatrix<Complex64>;

pub const POWER_TOLERANCE: f64 = 1e-10;
pub const POWER_MAX_ITERATIONS: usize = 100_000;
/// Largest matrix cross-checked against the dense eigensolver.
pub const DENSE_CHECK_MAX: usize = 64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BoundsError {
    #[error("state {index} has norm defect {defect:e}")]
    NotNormalized { index: usize, defect: f64 },
    #[error("family sizes or dimensions disagree: {0}")]
    Shape(String),
    #[error("invalid prior: {0}")]
    Prior(String),
    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("enumeration infeasible: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
    #[error(transparent)]
    Qsim(#[from] QsimError),
    #[error("{0}")]
    Money(String),
}

/// `⟨ψ_i|ψ_j⟩`.
pub fn gram_matrix(states: &[StateVector]) -> Result<CMatrix, BoundsError> {
    if let Some(first) = states.first() {
        for (i, s) in states.iter().enumerate() {
            if s.num_qubits() != first.num_qubits() {
                return Err(BoundsError::Shape(format!(
                    "state {i} has {} qubits, expected {}",
                    s.num_qubits(),
                    first.num_qubits()
                )));
            }
            let defect = (s.norm_sqr() - 1.0).abs();
            if defect > 1e-9 {
                return Err(BoundsError::NotNormalized { index: i, defect });
            }
        }
    }
    let n = states.len();
    let mut g = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = states[i].inner(&states[j])?;
            g[(i, j)] = v;
            g[(j, i)] = v.conj();
        }
    }
    Ok(g)
}

fn check_prior(probs: &[f64]) -> Result<(), BoundsError> {
    if let Some(p) = probs.iter().find(|p| !(**p >= 0.0)) {
        return Err(BoundsError::Prior(format!("negative or NaN entry {p}")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(BoundsError::Prior(format!("sums to {total}")));
    }
    Ok(())
}

/// `√(p_i p_j)`.
pub fn prior_matrix(probs: &[f64]) -> Result<CMatrix, BoundsError> {
    if let Some(p) = probs.iter().find(|p| !(**p >= 0.0)) {
        return Err(BoundsError::Prior(format!("negative or NaN entry {p}")));
    }
    let n = probs.len();
    Ok(CMatrix::from_fn(n, n, |i, j| Complex64::new((probs[i] * probs[j]).sqrt(), 0.0)))
}

pub fn hadamard_product(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.component_mul(b)
}

/// `a ∘ a ∘ … ∘ a` with `k` factors (`k = 0` gives all ones).
pub fn hadamard_power(a: &CMatrix, k: usize) -> CMatrix {
    let mut out = CMatrix::from_element(a.nrows(), a.ncols(), Complex64::new(1.0, 0.0));
    for _ in 0..k {
        out = out.component_mul(a);
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct PowerIteration {
    pub lambda: f64,
    pub iterations: usize,
    pub restarts: usize,
    /// `‖Cv − λv‖` at the returned unit vector.
    pub residual: f64,
}

fn random_unit(n: usize, rng: &mut crate::rng::SimRng) -> DVector<Complex64> {
    let v = DVector::from_fn(n, |_, _| Complex64::new(rng.random::<f64>() + 0.5, 0.0));
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

/// Largest eigenvalue of a Hermitian positive semidefinite matrix.
///
/// Starts from a seeded positive vector and restarts from a fresh one when
/// the residual has not improved for 1000 iterations.
pub fn power_iteration(c: &CMatrix) -> Result<PowerIteration, BoundsError> {
    let n = c.nrows();
    if n == 0 || c.ncols() != n {
        return Err(BoundsError::Shape(format!("{}×{} is not a nonempty square", c.nrows(), c.ncols())));
    }
    let scale = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(PowerIteration {
            lambda: 0.0,
            iterations: 0,
            restarts: 0,
            residual: 0.0,
        });
    }
    let mut rng = rng::seeded(0);
    let mut v = random_unit(n, &mut rng);
    let (mut best, mut since_best, mut restarts) = (f64::INFINITY, 0usize, 0usize);
    let mut residual = f64::INFINITY;
    for it in 1..=POWER_MAX_ITERATIONS {
        let w = c * &v;
        let lambda = v.dotc(&w).re;
        residual = (&w - &v * Complex64::new(lambda, 0.0)).norm();
        if residual <= POWER_TOLERANCE * scale.max(lambda) {
            return Ok(PowerIteration {
                lambda,
                iterations: it,
                restarts,
                residual,
            });
        }
        if residual < best * (1.0 - 1e-9) {
            best = residual;
            since_best = 0;
        } else {
            since_best += 1;
        }
        let norm = w.norm();
        if norm == 0.0 || since_best >= 1000 {
            v = random_unit(n, &mut rng);
            restarts += 1;
            best = f64::INFINITY;
            since_best = 0;
            continue;
        }
        v = w / Complex64::new(norm, 0.0);
    }
    Err(BoundsError::NonConvergence {
        iterations: POWER_MAX_ITERATIONS,
        residual,
    })
}

/// All eigenvalues of a Hermitian matrix, ascending.
pub fn dense_eigenvalues(c: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = c.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub struct ConversionProblem {
    pub family1: Vec<StateVector>,
    pub family2: Vec<StateVector>,
    pub prior: Vec<f64>,
    /// Ambient dimension of the input family.
    pub dim: usize,
}

fn serialize_matrix<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Repr {
        re: Vec<Vec<f64>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        im: Option<Vec<Vec<f64>>>,
    }
    let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect()
    };
    let complex = m.iter().any(|z| z.im != 0.0);
    Repr {
        re: rows(|z| z.re),
        im: complex.then(|| rows(|z| z.im)),
    }
    .serialize(s)
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    #[serde(serialize_with = "serialize_matrix")]
    pub gram1: CMatrix,
    #[serde(serialize_with = "serialize_matrix")]
    pub gram2: CMatrix,
    #[serde(serialize_with = "serialize_matrix")]
    pub prior_matrix: CMatrix,
    #[serde(serialize_with = "serialize_matrix")]
    pub c: CMatrix,
    pub lambda1: f64,
    pub power: PowerIteration,
    /// λ₁ from the dense eigensolver, for matrices up to [`DENSE_CHECK_MAX`].
    pub lambda1_dense: Option<f64>,
    pub dim: usize,
    /// `d·λ₁`, which may exceed 1.
    pub f2_bound: f64,
    pub f2_bound_clipped: f64,
}

pub fn bound_from_grams(gram1: CMatrix, gram2: CMatrix, prior: &[f64], dim: usize) -> Result<BoundReport, BoundsError> {
    check_prior(prior)?;
    let n = prior.len();
    for g in [&gram1, &gram2] {
        if g.nrows() != n || g.ncols() != n {
            return Err(BoundsError::Shape(format!("gram is {}×{}, prior has {n} entries", g.nrows(), g.ncols())));
        }
    }
    let b = prior_matrix(prior)?;
    let c = gram1.component_mul(&gram2).component_mul(&b);
    let power = power_iteration(&c)?;
    let lambda1_dense = (n <= DENSE_CHECK_MAX).then(|| *dense_eigenvalues(&c).last().expect("nonempty"));
    let lambda1 = power.lambda;
    let f2_bound = dim as f64 * lambda1;
    Ok(BoundReport {
        gram1,
        gram2,
        prior_matrix: b,
        c,
        lambda1,
        power,
        lambda1_dense,
        dim,
        f2_bound,
        f2_bound_clipped: f2_bound.min(1.0),
    })
}

pub fn conversion_bound(problem: &ConversionProblem) -> Result<BoundReport, BoundsError> {
    let n = problem.prior.len();
    if problem.family1.len() != n || problem.family2.len() != n {
        return Err(BoundsError::Shape(format!(
            "families have {} and {} states, prior has {n}",
            problem.family1.len(),
            problem.family2.len()
        )));
    }
    bound_from_grams(
        gram_matrix(&problem.family1)?,
        gram_matrix(&problem.family2)?,
        &problem.prior,
        problem.dim,
    )
}

/// Bound for turning one copy of `|ψ_i⟩` into `copies` copies:
/// `C = A^{∘(copies+1)} ∘ B`. `d` is the single-copy dimension.
pub fn cloning_bound(states: &[StateVector], prior: &[f64], copies: usize) -> Result<BoundReport, BoundsError> {
    let g = gram_matrix(states)?;
    let dim = states.first().map(StateVector::dim).unwrap_or(0);
    bound_from_grams(g.clone(), hadamard_power(&g, copies), prior, dim)
}

fn gaussian_product(a: usize, b: usize, q: u64) -> BigUint {
    let qb = BigUint::from(q).pow(b as u32);
    let mut acc = BigUint::one();
    let mut qi = BigUint::one();
    for _ in 0..a {
        acc *= &qb - &qi;
        qi *= q;
    }
    acc
}

/// `(q^b − 1)(q^b − q)⋯(q^b − q^{a−1})`: ordered bases of `a` independent
/// vectors in `F_q^b`.
pub fn count_ordered_bases(a: usize, b: usize, q: u64) -> BigUint {
    gaussian_product(a, b, q)
}

/// Gaussian binomial `[b choose a]_q`: `a`-dimensional subspaces of `F_q^b`.
pub fn count_subspaces(a: usize, b: usize, q: u64) -> BigUint {
    if a > b {
        return BigUint::ZERO;
    }
    gaussian_product(a, b, q) / gaussian_product(a, a, q)
}

/// Number of `t`-dimensional `T ⊆ F_q^n` meeting a fixed `s`-dimensional `S`
/// in exactly `k` dimensions.
pub fn count_with_intersection(n: usize, s: usize, t: usize, k: usize, q: u64) -> BigUint {
    if k > s || k > t || t - k > n - s {
        return BigUint::ZERO;
    }
    count_subspaces(k, s, q) * count_subspaces(t - k, n - s, q) * BigUint::from(q).pow(((s - k) * (t - k)) as u32)
}

/// `a / b` as a float without overflowing on huge operands.
fn ratio(a: &BigUint, b: &BigUint) -> f64 {
    let shift = b.bits().max(a.bits()).saturating_sub(1000);
    let (a, b) = (a >> shift, b >> shift);
    a.to_f64().unwrap_or(f64::INFINITY) / b.to_f64().unwrap_or(f64::INFINITY)
}

/// One `k` term of the eigenvalue chain.
#[derive(Clone, Debug, Serialize)]
pub struct ChainTerm {
    pub k: usize,
    /// `q^{3k − 3n/2}`.
    pub weight: f64,
    /// Exact fraction of `T` with `dim(S₀ ∩ T) = k`.
    pub fraction_exact: f64,
    /// `N_{k,n/2}·N_{n/2−k,n} / N_{n/2,n}` with `N` the ordered-basis product.
    pub ratio_printed: f64,
    /// The same ratio with `N` the subspace count.
    pub ratio_subspaces: f64,
    /// `q^{−kn/2}`, the claimed upper bound on the ratio.
    pub ratio_claimed: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalyticChain {
    pub n: usize,
    pub q: u64,
    pub terms: Vec<ChainTerm>,
    /// `Σ_k weight·fraction_exact`: λ₁ of the two-copy cloning matrix.
    pub lambda1_exact: f64,
    pub sum_printed: f64,
    pub sum_subspaces: f64,
    /// `Σ_k q^{3k − 3n/2 − kn/2}`.
    pub sum_claimed: f64,
    /// `q^{−3n/2} Σ_ℓ q^{−ℓ(n+1)}`, the closed form the chain is rewritten as.
    pub closed_form: f64,
    /// `2·q^{−3n/2}`.
    pub lambda_bound: f64,
    /// `2·q^{−n/2}`.
    pub f2_bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactSubspaceBound {
    pub subspaces: usize,
    pub dim: usize,
    pub lambda1: f64,
    pub lambda1_dense: Option<f64>,
    /// Largest deviation of a Gram entry from `q^{dim(S∩T) − n/2}`.
    pub gram_closed_form_error: f64,
    pub f2_bound: f64,
    pub lambda_bound: f64,
    pub lambda_check: bool,
    pub f2_bound_claimed: f64,
    pub f2_check: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SubspaceExampleReport {
    pub n: usize,
    pub q: u64,
    pub exact: Option<ExactSubspaceBound>,
    pub analytic: AnalyticChain,
}

fn check_field(n: usize, q: u64) -> Result<(), BoundsError> {
    if n == 0 || n % 2 == 1 {
        return Err(BoundsError::Shape(format!("n must be even and positive, got {n}")));
    }
    if q < 2 {
        return Err(BoundsError::Shape(format!("field size must be at least 2, got {q}")));
    }
    Ok(())
}

/// The chain bounding λ₁ for two-copy cloning of the `n/2`-dimensional
/// subspace states of `F_q^n`, term by term.
pub fn subspace_chain(n: usize, q: u64) -> Result<AnalyticChain, BoundsError> {
    check_field(n, q)?;
    let h = n / 2;
    let qf = q as f64;
    let total = count_subspaces(h, n, q);
    let total_printed = count_ordered_bases(h, n, q);
    let mut terms = Vec::new();
    for k in 0..=h {
        let weight = qf.powf(3.0 * k as f64 - 1.5 * n as f64);
        terms.push(ChainTerm {
            k,
            weight,
            fraction_exact: ratio(&count_with_intersection(n, h, h, k, q), &total),
            ratio_printed: ratio(&(count_ordered_bases(k, h, q) * count_ordered_bases(h - k, n, q)), &total_printed),
            ratio_subspaces: ratio(&(count_subspaces(k, h, q) * count_subspaces(h - k, n, q)), &total),
            ratio_claimed: qf.powf(-((k * h) as f64)),
        });
    }
    let sum = |f: fn(&ChainTerm) -> f64| terms.iter().map(|t| t.weight * f(t)).sum::<f64>();
    Ok(AnalyticChain {
        n,
        q,
        lambda1_exact: sum(|t| t.fraction_exact),
        sum_printed: sum(|t| t.ratio_printed),
        sum_subspaces: sum(|t| t.ratio_subspaces),
        sum_claimed: sum(|t| t.ratio_claimed),
        closed_form: qf.powf(-1.5 * n as f64) * (0..=h).map(|l| qf.powf(-((l * (n + 1)) as f64))).sum::<f64>(),
        terms,
        lambda_bound: 2.0 * qf.powf(-1.5 * n as f64),
        f2_bound: 2.0 * qf.powf(-(h as f64)),
    })
}

pub const SUBSPACE_EXACT_MAX_N: usize = 6;

/// Two-copy cloning of subspace states: the exact spectral bound by
/// enumeration (`q = 2`, `n ≤ 6`) next to the analytic chain.
pub fn subspace_example(n: usize, q: u64) -> Result<SubspaceExampleReport, BoundsError> {
    let analytic = subspace_chain(n, q)?;
    let exact = if q == 2 && n <= SUBSPACE_EXACT_MAX_N {
        Some(subspace_exact(n)?)
    } else {
        None
    };
    Ok(SubspaceExampleReport { n, q, exact, analytic })
}

pub fn subspace_exact(n: usize) -> Result<ExactSubspaceBound, BoundsError> {
    check_field(n, 2)?;
    if n > SUBSPACE_EXACT_MAX_N {
        return Err(BoundsError::Infeasible(format!(
            "enumerating subspaces needs n <= {SUBSPACE_EXACT_MAX_N}, got {n}"
        )));
    }
    let spaces = enumerate_subspaces(n, n / 2)?;
    let states = spaces
        .iter()
        .map(subspace_state)
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| BoundsError::Money(e.to_string()))?;
    let count = spaces.len();
    let prior = vec![1.0 / count as f64; count];
    let report = cloning_bound(&states, &prior, 2)?;
    let mut err: f64 = 0.0;
    for i in 0..count {
        for j in 0..count {
            let d = intersection_dim(&spaces[i], &spaces[j])?;
            let want = 2f64.powi(d as i32 - (n / 2) as i32);
            err = err.max((report.gram1[(i, j)] - Complex64::new(want, 0.0)).norm());
        }
    }
    let lambda_bound = 2.0 * 2f64.powf(-1.5 * n as f64);
    let f2_bound_claimed = 2.0 * 2f64.powf(-((n / 2) as f64));
    Ok(ExactSubspaceBound {
        subspaces: count,
        dim: report.dim,
        lambda1: report.lambda1,
        lambda1_dense: report.lambda1_dense,
        gram_closed_form_error: err,
        f2_bound: report.f2_bound,
        lambda_bound,
        lambda_check: report.lambda1 <= lambda_bound,
        f2_bound_claimed,
        f2_check: report.f2_bound <= f2_bound_claimed,
    })
}
