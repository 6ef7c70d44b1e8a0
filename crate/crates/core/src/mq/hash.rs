use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::MqError;
use crate::gf2::{BitMatrix, BitVector, Gf2Error, ENUMERATION_CAP};

/// An output of `f_A`: a length-`n` bit string.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Digest(pub BitVector);

impl Digest {
    pub fn bits(&self) -> &BitVector {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_index(&self) -> u64 {
        self.0.to_index()
    }

    pub fn to_hex(&self) -> String {
        self.0.to_hex()
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// `A = (A_1, …, A_n)`, upper-triangular `m × m` matrices. Diagonal entries
/// act as linear terms since `x_j² = x_j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "KeyRepr", into = "KeyRepr")]
pub struct HashKey {
    n: usize,
    m: usize,
    seed: Option<u64>,
    mats: Vec<BitMatrix>,
}

#[derive(Serialize, Deserialize)]
struct KeyRepr {
    n: usize,
    m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    mats: Vec<String>,
}

impl From<HashKey> for KeyRepr {
    fn from(k: HashKey) -> Self {
        KeyRepr {
            n: k.n,
            m: k.m,
            seed: k.seed,
            mats: k.mats.iter().map(BitMatrix::to_hex).collect(),
        }
    }
}

impl TryFrom<KeyRepr> for HashKey {
    type Error = MqError;

    fn try_from(r: KeyRepr) -> Result<Self, MqError> {
        if r.mats.len() != r.n {
            return Err(MqError::LengthMismatch {
                expected: r.n,
                found: r.mats.len(),
            });
        }
        let mats = r
            .mats
            .iter()
            .map(|h| BitMatrix::from_hex(r.m, r.m, h))
            .collect::<Result<Vec<_>, Gf2Error>>()?;
        let mut key = HashKey::from_matrices(mats)?;
        if key.n != r.n {
            return Err(MqError::LengthMismatch {
                expected: r.n,
                found: key.n,
            });
        }
        key.seed = r.seed;
        Ok(key)
    }
}

impl HashKey {
    /// Uniform bits on and above the diagonal of each `A_i`.
    pub fn keygen<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Self, MqError> {
        check_shape(n, m)?;
        let mats = (0..n)
            .map(|_| {
                let mut a = BitMatrix::zeros(m, m);
                for j in 0..m {
                    for k in j..m {
                        if rng.random::<bool>() {
                            a.set(j, k, true);
                        }
                    }
                }
                a
            })
            .collect();
        Ok(Self {
            n,
            m,
            seed: None,
            mats,
        })
    }

    /// [`HashKey::keygen`] from a fresh stream seeded by `seed`; the seed is
    /// recorded in the key file.
    pub fn keygen_seeded(n: usize, m: usize, seed: u64) -> Result<Self, MqError> {
        let mut key = Self::keygen(n, m, &mut crate::rng::seeded(seed))?;
        key.seed = Some(seed);
        Ok(key)
    }

    pub fn from_matrices(mats: Vec<BitMatrix>) -> Result<Self, MqError> {
        let n = mats.len();
        let m = mats.first().map_or(0, BitMatrix::num_cols);
        check_shape(n, m)?;
        for (index, a) in mats.iter().enumerate() {
            if a.num_rows() != m || a.num_cols() != m {
                return Err(MqError::Gf2(Gf2Error::ShapeMismatch {
                    left: (m, m),
                    right: (a.num_rows(), a.num_cols()),
                }));
            }
            for j in 0..m {
                if a.row(j).first_one().is_some_and(|k| k < j) {
                    return Err(MqError::NotUpperTriangular { index });
                }
            }
        }
        Ok(Self {
            n,
            m,
            seed: None,
            mats,
        })
    }

    /// The key with every matrix zero; `f` is then constant.
    pub fn zero(n: usize, m: usize) -> Result<Self, MqError> {
        Self::from_matrices(vec![BitMatrix::zeros(m, m); n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn mats(&self) -> &[BitMatrix] {
        &self.mats
    }

    fn check_input(&self, x: &BitVector) -> Result<(), MqError> {
        if x.len() != self.m {
            return Err(MqError::LengthMismatch {
                expected: self.m,
                found: x.len(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, x: &BitVector) -> Result<Digest, MqError> {
        self.check_input(x)?;
        let mut y = BitVector::zeros(self.n);
        for (i, a) in self.mats.iter().enumerate() {
            let mut acc = BitVector::zeros(self.m);
            for j in x.ones() {
                acc.xor_assign_unchecked(a.row(j));
            }
            y.set(i, acc.dot_unchecked(x));
        }
        Ok(Digest(y))
    }

    /// `eval` on basis-index labels (bit `j` of `x` is coordinate `j`).
    /// Requires `m ≤ 64`.
    pub fn eval_index(&self, x: u64) -> u64 {
        debug_assert!(self.m <= 64 && self.n <= 64);
        let mut y = 0u64;
        for (i, a) in self.mats.iter().enumerate() {
            let mut acc = 0u64;
            let mut rest = x;
            while rest != 0 {
                let j = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                acc ^= a.row(j).words()[0];
            }
            y |= u64::from((acc & x).count_ones() & 1) << i;
        }
        y
    }

    /// `B_Δ`: row `i` is `Δᵀ(A_i + A_iᵀ)`, so that
    /// `f(x) + f(x + Δ) = B_Δ x + f(Δ)`.
    pub fn bilinear_rows(&self, delta: &BitVector) -> Result<BitMatrix, MqError> {
        self.check_input(delta)?;
        let rows = self
            .mats
            .iter()
            .map(|a| {
                let mut row = a.vec_mul(delta).expect("length checked");
                row.xor_assign_unchecked(&a.mul_vec(delta).expect("length checked"));
                row
            })
            .collect();
        Ok(BitMatrix::from_rows(self.m, rows)?)
    }

    /// `(Δᵀ A_i Δ)_i`, which is `f(Δ)`.
    pub fn quadratic_offsets(&self, delta: &BitVector) -> Result<BitVector, MqError> {
        Ok(self.eval(delta)?.0)
    }

    fn check_enumerable(&self) -> Result<(), MqError> {
        if self.m > ENUMERATION_CAP {
            return Err(Gf2Error::EnumerationCap {
                dim: self.m,
                cap: ENUMERATION_CAP,
            }
            .into());
        }
        Ok(())
    }

    /// `f(x)` for every `x` in index order.
    pub fn digest_table(&self) -> Result<Vec<u64>, MqError> {
        self.check_enumerable()?;
        Ok((0..1u64 << self.m).map(|x| self.eval_index(x)).collect())
    }

    /// `|f⁻¹(y)|` for every digest index `y`.
    pub fn fiber_sizes(&self) -> Result<Vec<u64>, MqError> {
        let mut counts = vec![0u64; 1 << self.n];
        for y in self.digest_table()? {
            counts[y as usize] += 1;
        }
        Ok(counts)
    }

    /// Basis indices of `f⁻¹(y)`, ascending.
    pub fn preimage_indices(&self, y: &Digest) -> Result<Vec<u64>, MqError> {
        if y.len() != self.n {
            return Err(MqError::LengthMismatch {
                expected: self.n,
                found: y.len(),
            });
        }
        self.check_enumerable()?;
        let target = y.to_index();
        Ok((0..1u64 << self.m)
            .filter(|&x| self.eval_index(x) == target)
            .collect())
    }

    pub fn preimages(&self, y: &Digest) -> Result<Vec<BitVector>, MqError> {
        Ok(self
            .preimage_indices(y)?
            .into_iter()
            .map(|x| BitVector::from_index(x, self.m))
            .collect())
    }

    pub fn digest_from_index(&self, y: u64) -> Digest {
        Digest(BitVector::from_index(y, self.n))
    }
}

fn check_shape(n: usize, m: usize) -> Result<(), MqError> {
    if n == 0 || n >= m {
        return Err(MqError::InvalidShape { n, m });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn toy() -> HashKey {
        HashKey::from_matrices(vec![BitMatrix::from_u8_rows(&[&[1, 1], &[0, 0]]).unwrap()]).unwrap()
    }

    #[test]
    fn toy_evaluations() {
        let k = toy();
        assert!(!k.eval(&BitVector::from_u8s(&[1, 1])).unwrap().0.get(0));
        assert!(k.eval(&BitVector::from_u8s(&[1, 0])).unwrap().0.get(0));
        assert!(k.eval(&BitVector::zeros(2)).unwrap().0.is_zero());
        let b = k.bilinear_rows(&BitVector::from_u8s(&[1, 0])).unwrap();
        assert_eq!(b.row(0), &BitVector::from_u8s(&[0, 1]));
        assert_eq!(
            k.quadratic_offsets(&BitVector::from_u8s(&[1, 0])).unwrap(),
            BitVector::from_u8s(&[1])
        );
    }

    #[test]
    fn keygen_shape_and_lower_zeros() {
        let mut rng = seeded(1);
        assert!(HashKey::keygen(2, 2, &mut rng).is_err());
        assert!(HashKey::keygen(0, 2, &mut rng).is_err());
        let k = HashKey::keygen(2, 12, &mut rng).unwrap();
        assert_eq!(k.mats().len(), 2);
        for a in k.mats() {
            for j in 0..12 {
                for c in 0..j {
                    assert!(!a.get(j, c));
                }
            }
        }
    }

    #[test]
    fn seeded_keygen_is_reproducible() {
        let a = HashKey::keygen_seeded(2, 12, 5).unwrap();
        let b = HashKey::keygen_seeded(2, 12, 5).unwrap();
        let c = HashKey::keygen_seeded(2, 12, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.mats(), c.mats());
    }

    #[test]
    fn eval_index_agrees_with_eval() {
        let k = HashKey::keygen(3, 10, &mut seeded(2)).unwrap();
        for x in 0..1u64 << 10 {
            let y = k.eval(&BitVector::from_index(x, 10)).unwrap();
            assert_eq!(y.to_index(), k.eval_index(x));
        }
    }

    #[test]
    fn lower_triangular_entry_rejected() {
        let a = BitMatrix::from_u8_rows(&[&[0, 0], &[1, 0]]).unwrap();
        assert!(matches!(
            HashKey::from_matrices(vec![a]),
            Err(MqError::NotUpperTriangular { index: 0 })
        ));
    }

    #[test]
    fn zero_key_preimages() {
        let k = HashKey::zero(1, 4).unwrap();
        assert_eq!(k.preimage_indices(&k.digest_from_index(0)).unwrap().len(), 16);
        assert!(k.preimage_indices(&k.digest_from_index(1)).unwrap().is_empty());
    }
}
