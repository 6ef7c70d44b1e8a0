//! Linear subspaces of GF(2)^n, represented by a basis in reduced row-echelon
//! form so that equal subspaces have equal matrices.

use rand::Rng;

use super::{BitMatrix, BitVector, Gf2Error};

fn ensure_independent(s: &BitMatrix) -> Result<(), Gf2Error> {
    if s.rows_independent() {
        Ok(())
    } else {
        Err(Gf2Error::DependentRows)
    }
}

/// Basis of `S^⊥ = {x : x·y = 0 for all y in S}` in canonical form.
pub fn dual_space(s: &BitMatrix) -> Result<BitMatrix, Gf2Error> {
    ensure_independent(s)?;
    Ok(s.nullspace().canonical())
}

/// Uniformly random `d`-dimensional subspace of GF(2)^n.
///
/// Rejection-samples a full-rank `d × n` matrix; every subspace is the row
/// space of the same number of full-rank matrices, so the result is uniform.
pub fn random_subspace<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    rng: &mut R,
) -> Result<BitMatrix, Gf2Error> {
    if d > n {
        return Err(Gf2Error::DimensionOutOfRange { d, lo: 0, hi: n });
    }
    loop {
        let m = BitMatrix::random(d, n, rng);
        if m.rank() == d {
            return Ok(m.canonical());
        }
    }
}

/// True when the row space of `inner` is contained in that of `outer`.
pub fn is_subspace_of(inner: &BitMatrix, outer: &BitMatrix) -> Result<bool, Gf2Error> {
    if inner.num_cols() != outer.num_cols() {
        return Err(Gf2Error::DimensionMismatch {
            expected: outer.num_cols(),
            found: inner.num_cols(),
        });
    }
    let rank_outer = outer.rank();
    Ok(outer.stack(inner)?.rank() == rank_outer)
}

/// Rows extending `lower`'s basis to a basis of `upper` (a complement of
/// `lower` inside `upper`).
fn complement_within(lower: &BitMatrix, upper: &BitMatrix) -> Vec<BitVector> {
    let mut acc = lower.clone();
    let mut rank = acc.rank();
    let mut extra = Vec::new();
    for row in upper.rows() {
        let mut trial = acc.clone();
        trial.push_row(row.clone()).expect("same width");
        let r = trial.rank();
        if r > rank {
            acc = trial;
            rank = r;
            extra.push(row.clone());
        }
    }
    extra
}

/// Uniformly random `d`-dimensional `S` with `lower ⊆ S ⊆ upper`.
///
/// Such subspaces correspond bijectively to `(d − dim lower)`-dimensional
/// subspaces of a complement of `lower` in `upper`, so sampling one of those
/// uniformly and adding `lower` is uniform.
pub fn random_subspace_between<R: Rng + ?Sized>(
    lower: &BitMatrix,
    upper: &BitMatrix,
    d: usize,
    rng: &mut R,
) -> Result<BitMatrix, Gf2Error> {
    ensure_independent(lower)?;
    ensure_independent(upper)?;
    if !is_subspace_of(lower, upper)? {
        return Err(Gf2Error::NotContained);
    }
    let (lo, hi) = (lower.num_rows(), upper.num_rows());
    if d < lo || d > hi {
        return Err(Gf2Error::DimensionOutOfRange { d, lo, hi });
    }
    let complement = complement_within(lower, upper);
    let coords = random_subspace(complement.len(), d - lo, rng)?;
    Ok(lift_between(lower, &complement, &coords))
}

fn lift_between(lower: &BitMatrix, complement: &[BitVector], coords: &BitMatrix) -> BitMatrix {
    let n = lower.num_cols();
    let mut rows: Vec<BitVector> = lower.rows().to_vec();
    for c in coords.rows() {
        let mut v = BitVector::zeros(n);
        for j in c.ones() {
            v.xor_assign_unchecked(&complement[j]);
        }
        rows.push(v);
    }
    BitMatrix::from_rows(n, rows).expect("same width").canonical()
}

/// Every `d`-dimensional subspace of GF(2)^n, each as its canonical basis.
///
/// Walks pivot sets in lexicographic order and fills the free entries of the
/// reduced echelon form; the count is the Gaussian binomial `[n choose d]_2`.
pub fn enumerate_subspaces(n: usize, d: usize) -> Result<Vec<BitMatrix>, Gf2Error> {
    if d > n {
        return Err(Gf2Error::DimensionOutOfRange { d, lo: 0, hi: n });
    }
    let mut out = Vec::new();
    let mut pivots = Vec::with_capacity(d);
    pivot_sets(n, d, 0, &mut pivots, &mut |piv| {
        // Free slots: (row i, column j) with j > piv[i] and j not a pivot.
        let slots: Vec<(usize, usize)> = piv
            .iter()
            .enumerate()
            .flat_map(|(i, &p)| ((p + 1)..n).filter(|j| !piv.contains(j)).map(move |j| (i, j)))
            .collect();
        assert!(slots.len() < 64, "enumeration too large");
        for fill in 0u64..(1u64 << slots.len()) {
            let mut m = BitMatrix::zeros(d, n);
            for (i, &p) in piv.iter().enumerate() {
                m.set(i, p, true);
            }
            for (s, &(i, j)) in slots.iter().enumerate() {
                if fill >> s & 1 == 1 {
                    m.set(i, j, true);
                }
            }
            out.push(m);
        }
    });
    Ok(out)
}

fn pivot_sets(
    n: usize,
    d: usize,
    start: usize,
    cur: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]),
) {
    if cur.len() == d {
        visit(cur);
        return;
    }
    for p in start..n {
        if n - p < d - cur.len() {
            break;
        }
        cur.push(p);
        pivot_sets(n, d, p + 1, cur, visit);
        cur.pop();
    }
}

/// Every `d`-dimensional subspace between `lower` and `upper`, canonical.
pub fn enumerate_subspaces_between(
    lower: &BitMatrix,
    upper: &BitMatrix,
    d: usize,
) -> Result<Vec<BitMatrix>, Gf2Error> {
    ensure_independent(lower)?;
    ensure_independent(upper)?;
    if !is_subspace_of(lower, upper)? {
        return Err(Gf2Error::NotContained);
    }
    let (lo, hi) = (lower.num_rows(), upper.num_rows());
    if d < lo || d > hi {
        return Err(Gf2Error::DimensionOutOfRange { d, lo, hi });
    }
    let complement = complement_within(lower, upper);
    Ok(enumerate_subspaces(complement.len(), d - lo)?
        .iter()
        .map(|c| lift_between(lower, &complement, c))
        .collect())
}

/// `dim(S ∩ T)` via `dim S + dim T − dim(S + T)`.
pub fn intersection_dim(s: &BitMatrix, t: &BitMatrix) -> Result<usize, Gf2Error> {
    let sum = s.stack(t)?.rank();
    Ok(s.rank() + t.rank() - sum)
}

/// All elements of the span of the rows of `s`, as basis-state indices.
pub fn span_indices(s: &BitMatrix) -> Result<Vec<u64>, Gf2Error> {
    let space = super::AffineSpace::new(BitVector::zeros(s.num_cols()), s.canonical())?;
    Ok(space
        .enumerate_default()?
        .iter()
        .map(BitVector::to_index)
        .collect())
}
