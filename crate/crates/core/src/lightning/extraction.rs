//! Coherent extraction of `r` from `|φ_r⟩`.
//!
//! The phase of `|φ_r⟩` is `Σ_i r_i q_i(x)` for quadratic forms `q_i`. Write the
//! lowest live qubit as `b`, so `q_i = P_i + b·Q_i` with `Q_i` affine in the
//! other qubits. A Hadamard on `b` leaves `b = Σ_i r_i Q_i`. The live part of
//! `Q` is then moved into place by a linear relabelling: with `R` the reduced
//! echelon form of the live coefficient rows, pivot qubit `p_j` is replaced by
//! `R_j · x`. The pivot qubits now hold fixed values on every branch, so each
//! round contributes the equation `ℓ · r = c` with `c` read from qubit `b` and
//! `ℓ` an affine function of the stored pivot and earlier values. The phases
//! on the remaining live qubits are again quadratic, and the next round
//! repeats the step on them.
//!
//! Every step is a Hadamard or a basis permutation that does not depend on
//! `r`, so the whole procedure is a fixed unitary `W`. On `W|φ_r⟩` each basis
//! label satisfies all of its round equations.

use crate::gf2::BitVector;
use crate::mq::HashKey;
use crate::qsim::{QsimError, StateVector};

/// One round: `qubit` receives `c`, `pivots[j]` receives `R_j · x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundPlan {
    pub qubit: usize,
    pub pivots: Vec<usize>,
    /// `R_j` without its pivot bit; the relabelling is
    /// `x[p_j] ^= parity(remap[j] & x)`, an involution.
    pub remap: Vec<u64>,
    /// Bit `j` of `coeffs[i]` is the weight of stored pivot `j` in `ℓ_i`.
    pub coeffs: Vec<u64>,
    /// Earlier stored qubits feeding `ℓ_i`.
    pub param_masks: Vec<u64>,
    /// Bit `i` is the constant term of `ℓ_i`.
    pub constants: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundRecord {
    pub c: bool,
    pub ell: BitVector,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtractionTranscript {
    pub rounds: Vec<RoundRecord>,
    pub solved_r: Option<BitVector>,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtractionPlan {
    n: usize,
    m: usize,
    rounds: Vec<RoundPlan>,
}

type Form = Vec<u64>;

#[inline]
fn parity(x: u64) -> bool {
    x.count_ones() & 1 == 1
}

fn ones(mut x: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if x == 0 {
            return None;
        }
        let j = x.trailing_zeros() as usize;
        x &= x - 1;
        Some(j)
    })
}

/// `q(T x)` in upper-triangular form, where row `j` of `T` is `trows[j]`.
fn substitute(form: &Form, trows: &[u64]) -> Form {
    let m = form.len();
    let mut full = vec![0u64; m];
    for j in 0..m {
        for k in ones(form[j]) {
            for s in ones(trows[j]) {
                full[s] ^= trows[k];
            }
        }
    }
    let mut out = vec![0u64; m];
    for s in 0..m {
        let mut row = full[s] & (1 << s);
        for t in (s + 1)..m {
            if ((full[s] >> t) ^ (full[t] >> s)) & 1 == 1 {
                row |= 1 << t;
            }
        }
        out[s] = row;
    }
    out
}

/// Reduced echelon form of `rows`, pivots taken in increasing column order
/// among `cols`.
fn rref(rows: &[u64], cols: u64) -> (Vec<u64>, Vec<usize>) {
    let mut rows = rows.to_vec();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in ones(cols) {
        let Some(r) = (rank..rows.len()).find(|&r| rows[r] >> col & 1 == 1) else {
            continue;
        };
        rows.swap(rank, r);
        let piv = rows[rank];
        for (i, row) in rows.iter_mut().enumerate() {
            if i != rank && *row >> col & 1 == 1 {
                *row ^= piv;
            }
        }
        pivots.push(col);
        rank += 1;
    }
    rows.truncate(rank);
    (rows, pivots)
}

impl ExtractionPlan {
    pub fn new(key: &HashKey, u: usize) -> Self {
        let (n, m) = (key.n(), key.m());
        assert!(m <= 64, "extraction works on at most 64 qubits");
        let mut forms: Vec<Form> = key
            .mats()
            .iter()
            .map(|a| a.rows().iter().map(|r| r.words()[0]).collect())
            .collect();
        let mut active: u64 = if m == 64 { u64::MAX } else { (1 << m) - 1 };
        let mut params: u64 = 0;
        let mut rounds = Vec::with_capacity(u);
        for _ in 0..u {
            if active == 0 {
                break;
            }
            let b = active.trailing_zeros() as usize;
            let bit = 1u64 << b;
            let mut lin = Vec::with_capacity(n);
            let mut constants = 0u64;
            for (i, f) in forms.iter_mut().enumerate() {
                if f[b] & bit != 0 {
                    constants |= 1 << i;
                }
                let mut l = f[b] & !bit;
                for (j, row) in f.iter().enumerate().take(b) {
                    if row & bit != 0 {
                        l |= 1 << j;
                    }
                }
                debug_assert_eq!(l & !(active | params), 0);
                lin.push(l);
                f[b] = 0;
                for row in f.iter_mut().take(b) {
                    *row &= !bit;
                }
            }
            active &= !bit;
            let live: Vec<u64> = lin.iter().map(|l| l & active).collect();
            let param_masks: Vec<u64> = lin.iter().map(|l| l & params).collect();
            let (r, pivots) = rref(&live, active);
            let coeffs = live
                .iter()
                .map(|l| {
                    pivots
                        .iter()
                        .enumerate()
                        .fold(0u64, |acc, (j, &p)| acc | (l >> p & 1) << j)
                })
                .collect();
            let remap: Vec<u64> = r
                .iter()
                .zip(&pivots)
                .map(|(row, &p)| row & !(1u64 << p))
                .collect();
            let mut trows: Vec<u64> = (0..m).map(|j| 1u64 << j).collect();
            for (row, &p) in r.iter().zip(&pivots) {
                trows[p] = *row;
            }
            for f in forms.iter_mut() {
                *f = substitute(f, &trows);
            }
            for &p in &pivots {
                params |= 1 << p;
                active &= !(1u64 << p);
            }
            rounds.push(RoundPlan {
                qubit: b,
                pivots,
                remap,
                coeffs,
                param_masks,
                constants,
            });
        }
        Self { n, m, rounds }
    }

    pub fn rounds(&self) -> &[RoundPlan] {
        &self.rounds
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Qubits that carry round data (`c` and stored pivots) after `W`.
    pub fn consumed_qubits(&self) -> Vec<usize> {
        let mut q = Vec::new();
        for r in &self.rounds {
            q.push(r.qubit);
            q.extend(&r.pivots);
        }
        q
    }

    fn relabel(round: &RoundPlan, z: u64) -> u64 {
        round
            .pivots
            .iter()
            .zip(&round.remap)
            .fold(z, |acc, (&p, &mask)| acc ^ (u64::from(parity(mask & z)) << p))
    }

    /// Applies `W` to the register occupying qubits `offset..offset + m`.
    pub fn forward(&self, state: &mut StateVector, offset: usize) -> Result<(), QsimError> {
        let mask = self.register_mask();
        for round in &self.rounds {
            state.hadamard(offset + round.qubit)?;
            state.apply_bijection(|x| {
                let z = (x >> offset) & mask;
                (x & !(mask << offset)) | (Self::relabel(round, z) << offset)
            })?;
        }
        Ok(())
    }

    /// Applies `W⁻¹`.
    pub fn inverse(&self, state: &mut StateVector, offset: usize) -> Result<(), QsimError> {
        let mask = self.register_mask();
        for round in self.rounds.iter().rev() {
            state.apply_bijection(|x| {
                let z = (x >> offset) & mask;
                (x & !(mask << offset)) | (Self::relabel(round, z) << offset)
            })?;
            state.hadamard(offset + round.qubit)?;
        }
        Ok(())
    }

    fn register_mask(&self) -> u64 {
        if self.m == 64 {
            u64::MAX
        } else {
            (1u64 << self.m) - 1
        }
    }

    /// `(ℓ, c)` for every round, read off the label `z` after `W`.
    pub(crate) fn equations(&self, z: u64) -> Vec<(u64, bool)> {
        self.rounds
            .iter()
            .map(|round| {
                let stored = round
                    .pivots
                    .iter()
                    .enumerate()
                    .fold(0u64, |acc, (j, &p)| acc | (z >> p & 1) << j);
                let mut ell = 0u64;
                for i in 0..self.n {
                    let v = parity(round.coeffs[i] & stored)
                        ^ parity(round.param_masks[i] & z)
                        ^ (round.constants >> i & 1 == 1);
                    ell |= u64::from(v) << i;
                }
                (ell, z >> round.qubit & 1 == 1)
            })
            .collect()
    }

    /// Rank of the `ℓ` rows and the unique `r` when the system pins it down.
    pub(crate) fn solve(&self, z: u64) -> (usize, Option<u64>) {
        let eqs = self.equations(z);
        // Augmented rows: bits 0..n are ℓ, bit n is c.
        let mut rows: Vec<u64> = eqs
            .iter()
            .map(|&(ell, c)| ell | u64::from(c) << self.n)
            .collect();
        let full = (1u64 << self.n) - 1;
        let mut rank = 0;
        for col in 0..self.n {
            let Some(r) = (rank..rows.len()).find(|&r| rows[r] >> col & 1 == 1) else {
                continue;
            };
            rows.swap(rank, r);
            let piv = rows[rank];
            for (i, row) in rows.iter_mut().enumerate() {
                if i != rank && *row >> col & 1 == 1 {
                    *row ^= piv;
                }
            }
            rank += 1;
        }
        let consistent = rows[rank..].iter().all(|&row| row == 0);
        if rank < self.n || !consistent {
            return (rank, None);
        }
        let r = (0..self.n).fold(0u64, |acc, i| acc | (rows[i] >> self.n & 1) << i);
        debug_assert!(rows[..self.n].iter().all(|&row| (row & full).count_ones() == 1));
        (rank, Some(r))
    }

    pub fn transcript(&self, z: u64) -> ExtractionTranscript {
        let rounds = self
            .equations(z)
            .into_iter()
            .map(|(ell, c)| RoundRecord {
                c,
                ell: BitVector::from_index(ell, self.n),
            })
            .collect();
        let (rank, r) = self.solve(z);
        ExtractionTranscript {
            rounds,
            solved_r: r.map(|r| BitVector::from_index(r, self.n)),
            rank,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lightning::SpanOracle;
    use crate::rng::seeded;

    #[test]
    fn substitute_identity_is_noop() {
        let f: Form = vec![0b111, 0b110, 0b100];
        let id: Vec<u64> = (0..3).map(|j| 1 << j).collect();
        assert_eq!(substitute(&f, &id), f);
    }

    #[test]
    fn substitute_matches_direct_evaluation() {
        let mut rng = seeded(9);
        let key = HashKey::keygen(1, 6, &mut rng).unwrap();
        let f: Form = key.mats()[0].rows().iter().map(|r| r.words()[0]).collect();
        // x0 ← x0 + x3 + x5 (an involution).
        let mut trows: Vec<u64> = (0..6).map(|j| 1 << j).collect();
        trows[0] = 0b101001;
        let g = substitute(&f, &trows);
        let eval = |form: &Form, x: u64| {
            (0..6).fold(false, |acc, j| acc ^ (x >> j & 1 == 1 && parity(form[j] & x)))
        };
        for x in 0..64u64 {
            let tx = x ^ (u64::from(parity(0b101000 & x)));
            assert_eq!(eval(&g, x), eval(&f, tx));
        }
    }

    #[test]
    fn round_equations_hold_on_every_branch() {
        for seed in 0..6 {
            let key = HashKey::keygen(2, 9, &mut seeded(seed)).unwrap();
            let plan = ExtractionPlan::new(&key, 3);
            let oracle = SpanOracle::new(&key).unwrap();
            for r in 0..4u64 {
                let mut s = oracle.phi(r).clone();
                plan.forward(&mut s, 0).unwrap();
                for z in s.support() {
                    for (ell, c) in plan.equations(z) {
                        assert_eq!(parity(ell & r), c, "seed {seed} r {r} z {z:b}");
                    }
                    if let (_, Some(found)) = plan.solve(z) {
                        assert_eq!(found, r);
                    }
                }
                plan.inverse(&mut s, 0).unwrap();
                assert!(s.fidelity(oracle.phi(r)).unwrap() > 1.0 - 1e-12);
            }
        }
    }

    #[test]
    fn rounds_consume_at_most_n_plus_one_qubits() {
        let key = HashKey::keygen(2, 12, &mut seeded(4)).unwrap();
        let plan = ExtractionPlan::new(&key, 3);
        assert_eq!(plan.rounds().len(), 3);
        for r in plan.rounds() {
            assert!(r.pivots.len() <= 2);
        }
        let mut q = plan.consumed_qubits();
        q.sort();
        q.dedup();
        assert_eq!(q.len(), plan.consumed_qubits().len());
    }
}
