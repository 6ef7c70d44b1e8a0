//! Collision-finding by linearisation.
//!
//! For any fixed difference `Δ`, `f(x) = f(x + Δ)` is the linear system
//! `B_Δ x = f(Δ)`. Stacking systems for several differences gives
//! multi-collisions; choosing the differences mutually orthogonal under the
//! bilinear forms `A_i + A_iᵀ` gives whole affine spaces of collisions.

use rand::Rng;

use super::{Digest, HashKey, MqError};
use crate::gf2::{AffineSpace, BitMatrix, BitVector};

pub const DEFAULT_MAX_TRIES: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Collision {
    pub x: BitVector,
    pub x_prime: BitVector,
    pub delta: BitVector,
    pub digest: Digest,
    pub tries: usize,
    pub rank_history: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiCollision {
    pub points: Vec<BitVector>,
    pub digest: Digest,
    pub tries: usize,
    pub rank_history: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineCollision {
    pub space: AffineSpace,
    pub digest: Digest,
    pub tries: usize,
    pub rank_history: Vec<usize>,
}

fn random_nonzero<R: Rng + ?Sized>(m: usize, rng: &mut R) -> BitVector {
    loop {
        let v = BitVector::random(m, rng);
        if !v.is_zero() {
            return v;
        }
    }
}

/// The stacked system `{B_{Δ_j} x = f(Δ_j)}_j`. Zero differences are allowed
/// and contribute only trivial rows.
pub(crate) fn stacked_system(
    key: &HashKey,
    deltas: &[BitVector],
) -> Result<(BitMatrix, BitVector), MqError> {
    let mut b = BitMatrix::empty(key.m());
    let mut rhs = Vec::with_capacity(deltas.len() * key.n());
    for d in deltas {
        for row in key.bilinear_rows(d)?.into_rows() {
            b.push_row(row)?;
        }
        rhs.extend(key.quadratic_offsets(d)?.to_bits());
    }
    Ok((b, BitVector::from_bits(&rhs)))
}

/// `S_Δ = {x : f(x) = f(x + Δ_j) for every j}`, or `None` when empty.
pub fn colliding_space_for_deltas(
    key: &HashKey,
    deltas: &[BitVector],
) -> Result<Option<AffineSpace>, MqError> {
    for d in deltas {
        if d.len() != key.m() {
            return Err(MqError::LengthMismatch {
                expected: key.m(),
                found: d.len(),
            });
        }
        if d.is_zero() {
            return Err(MqError::Precondition("differences must be nonzero".into()));
        }
    }
    colliding_space_unchecked(key, deltas)
}

pub(crate) fn colliding_space_unchecked(
    key: &HashKey,
    deltas: &[BitVector],
) -> Result<Option<AffineSpace>, MqError> {
    if deltas.is_empty() {
        return Ok(Some(AffineSpace::new(
            BitVector::zeros(key.m()),
            BitMatrix::identity(key.m()),
        )?));
    }
    let (b, rhs) = stacked_system(key, deltas)?;
    Ok(b.solve_affine(&rhs)?)
}

/// True iff the differences `p_i − p_0` are linearly independent, i.e. the
/// points span an affine space of full dimension `len − 1`.
pub fn is_nonaffine(points: &[BitVector]) -> Result<bool, MqError> {
    if points.len() < 2 {
        return Err(MqError::Precondition("need at least two points".into()));
    }
    let m = points[0].len();
    let diffs = points[1..]
        .iter()
        .map(|p| p.xor(&points[0]))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BitMatrix::from_rows(m, diffs)?.rank() == points.len() - 1)
}

/// One collision `f(x) = f(x + Δ)` for a random nonzero `Δ`.
///
/// Any consistent system is accepted, so degenerate keys (for instance the
/// zero key, where every `B_Δ` vanishes) still yield collisions; fresh `Δ`s
/// are drawn only when the system has no solution.
pub fn find_collision<R: Rng + ?Sized>(
    key: &HashKey,
    rng: &mut R,
    max_tries: usize,
) -> Result<Collision, MqError> {
    let mut rank_history = Vec::new();
    for tries in 1..=max_tries {
        let delta = random_nonzero(key.m(), rng);
        let (b, rhs) = stacked_system(key, std::slice::from_ref(&delta))?;
        rank_history.push(b.rank());
        if let Some(space) = b.solve_affine(&rhs)? {
            let x = space.sample(rng);
            let x_prime = x.xor(&delta)?;
            let digest = key.eval(&x)?;
            return Ok(Collision {
                x,
                x_prime,
                delta,
                digest,
                tries,
                rank_history,
            });
        }
    }
    Err(MqError::TriesExhausted {
        tries: max_tries,
        rank_history,
    })
}

/// `k + 1` colliding points `{x, x + Δ_1, …, x + Δ_k}` with independent
/// differences. Each try draws `k` fresh differences and needs the stacked
/// `kn × m` system to have full rank `kn`.
pub fn find_nonaffine_multicollision<R: Rng + ?Sized>(
    key: &HashKey,
    k: usize,
    rng: &mut R,
    max_tries: usize,
) -> Result<MultiCollision, MqError> {
    if k == 0 {
        return Err(MqError::Precondition("k must be at least 1".into()));
    }
    let mut rank_history = Vec::new();
    for tries in 1..=max_tries {
        let deltas: Vec<BitVector> = (0..k).map(|_| random_nonzero(key.m(), rng)).collect();
        let (b, rhs) = stacked_system(key, &deltas)?;
        let rank = b.rank();
        rank_history.push(rank);
        if rank < k * key.n() {
            continue;
        }
        let Some(space) = b.solve_affine(&rhs)? else {
            continue;
        };
        let x = space.sample(rng);
        let mut points = vec![x.clone()];
        for d in &deltas {
            points.push(x.xor(d)?);
        }
        if !is_nonaffine(&points)? {
            continue;
        }
        let digest = key.eval(&x)?;
        return Ok(MultiCollision {
            points,
            digest,
            tries,
            rank_history,
        });
    }
    Err(MqError::TriesExhausted {
        tries: max_tries,
        rank_history,
    })
}

/// An `r`-dimensional affine space on which `f` is constant.
///
/// `Δ_s` is drawn uniformly from the common kernel of the earlier `B_{Δ_s'}`
/// outside the span of the earlier differences. The cross terms
/// `Δ_sᵀ(A_i + A_iᵀ)Δ_t` then vanish, so `f(x + Σ α_s Δ_s) = f(x)` for all
/// `α` reduces to the `rn` linear equations `B_{Δ_s} x = f(Δ_s)`.
pub fn find_affine_collision_space<R: Rng + ?Sized>(
    key: &HashKey,
    r: usize,
    rng: &mut R,
    max_tries: usize,
) -> Result<AffineCollision, MqError> {
    let (n, m) = (key.n(), key.m());
    let need = r * n + r.saturating_sub(n);
    if r == 0 || m < need {
        return Err(MqError::Precondition(format!(
            "affine collision space of dimension {r} needs m >= {need}, got m = {m}"
        )));
    }
    let mut rank_history = Vec::new();
    'attempt: for tries in 1..=max_tries {
        let mut deltas: Vec<BitVector> = Vec::with_capacity(r);
        let mut constraints = BitMatrix::empty(m);
        for _ in 0..r {
            let kernel = if constraints.num_rows() == 0 {
                BitMatrix::identity(m)
            } else {
                constraints.nullspace()
            };
            let prior = BitMatrix::from_rows(m, deltas.clone())?;
            if kernel.num_rows() <= deltas.len() {
                rank_history.push(constraints.rank());
                continue 'attempt;
            }
            let space = AffineSpace::new(BitVector::zeros(m), kernel)?;
            let delta = loop {
                let d = space.sample(rng);
                if !prior.row_space_contains(&d)? {
                    break d;
                }
            };
            for row in key.bilinear_rows(&delta)?.into_rows() {
                constraints.push_row(row)?;
            }
            deltas.push(delta);
        }
        let (b, rhs) = stacked_system(key, &deltas)?;
        rank_history.push(b.rank());
        let Some(solutions) = b.solve_affine(&rhs)? else {
            continue;
        };
        let x = solutions.sample(rng);
        let digest = key.eval(&x)?;
        let space = AffineSpace::new(x, BitMatrix::from_rows(m, deltas)?)?;
        return Ok(AffineCollision {
            space,
            digest,
            tries,
            rank_history,
        });
    }
    Err(MqError::TriesExhausted {
        tries: max_tries,
        rank_history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn toy_collision_system() {
        let key = HashKey::from_matrices(vec![
            BitMatrix::from_u8_rows(&[&[1, 1], &[0, 0]]).unwrap(),
        ])
        .unwrap();
        let delta = BitVector::from_u8s(&[1, 0]);
        let s = colliding_space_for_deltas(&key, &[delta]).unwrap().unwrap();
        assert_eq!(s.dim(), 1);
        let pts = s.enumerate_default().unwrap();
        assert!(pts.contains(&BitVector::from_u8s(&[0, 1])));
        assert!(pts.contains(&BitVector::from_u8s(&[1, 1])));
        for p in pts {
            assert_eq!(
                key.eval(&p).unwrap(),
                key.eval(&p.xor(&BitVector::from_u8s(&[1, 0])).unwrap()).unwrap()
            );
        }
    }

    #[test]
    fn zero_key_collides_anywhere() {
        let key = HashKey::zero(1, 4).unwrap();
        let c = find_collision(&key, &mut seeded(0), 4).unwrap();
        assert_eq!(c.tries, 1);
        assert_ne!(c.x, c.x_prime);
    }

    #[test]
    fn nonaffine_examples() {
        let e = |j| BitVector::unit(3, j);
        let z = BitVector::zeros(3);
        assert!(is_nonaffine(&[z.clone(), e(0), e(1)]).unwrap());
        let sum = e(0).xor(&e(1)).unwrap();
        assert!(!is_nonaffine(&[z, e(0), e(1), sum]).unwrap());
    }

    #[test]
    fn affine_precondition() {
        let key = HashKey::keygen(2, 12, &mut seeded(1)).unwrap();
        assert!(matches!(
            find_affine_collision_space(&key, 5, &mut seeded(2), 8),
            Err(MqError::Precondition(_))
        ));
    }

    #[test]
    fn duplicate_delta_is_redundant() {
        let key = HashKey::keygen(2, 12, &mut seeded(3)).unwrap();
        let mut rng = seeded(4);
        loop {
            let d = random_nonzero(12, &mut rng);
            if key.bilinear_rows(&d).unwrap().rank() < 2 {
                continue;
            }
            let one = colliding_space_for_deltas(&key, std::slice::from_ref(&d)).unwrap().unwrap();
            let two = colliding_space_for_deltas(&key, &[d.clone(), d]).unwrap().unwrap();
            assert_eq!(one.dim(), 10);
            assert_eq!(two.dim(), 10);
            break;
        }
    }
}
