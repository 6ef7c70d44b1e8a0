use std::fmt;

use rand::Rng;

use super::Gf2Error;

const WORD: usize = 64;

#[inline]
pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

/// A vector over GF(2), packed 64 coordinates per word.
///
/// Coordinate `j` lives in bit `j % 64` of word `j / 64`. Unused high bits of
/// the last word are always zero, so derived equality and hashing are exact.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    /// The `j`-th standard basis vector.
    pub fn unit(len: usize, j: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(j, true);
        v
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (j, &b) in bits.iter().enumerate() {
            v.set(j, b);
        }
        v
    }

    /// Builds a vector from 0/1 integers; any nonzero entry is treated as 1.
    pub fn from_u8s(bits: &[u8]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (j, &b) in bits.iter().enumerate() {
            v.set(j, b != 0);
        }
        v
    }

    /// Interprets the low `len` bits of `index` as coordinates (bit `j` is
    /// coordinate `j`). This is the basis-state labelling used by the simulator.
    pub fn from_index(index: u64, len: usize) -> Self {
        assert!(len <= 64, "index form supports at most 64 coordinates");
        let mut v = Self::zeros(len);
        if len > 0 {
            let mask = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
            v.words[0] = index & mask;
        }
        v
    }

    /// Inverse of [`BitVector::from_index`].
    pub fn to_index(&self) -> u64 {
        assert!(self.len <= 64, "index form supports at most 64 coordinates");
        self.words.first().copied().unwrap_or(0)
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut v = Self::zeros(len);
        for w in v.words.iter_mut() {
            *w = rng.random();
        }
        v.clear_tail();
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, j: usize) -> bool {
        debug_assert!(j < self.len);
        (self.words[j / WORD] >> (j % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, j: usize, value: bool) {
        debug_assert!(j < self.len);
        let mask = 1u64 << (j % WORD);
        if value {
            self.words[j / WORD] |= mask;
        } else {
            self.words[j / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, j: usize) {
        self.words[j / WORD] ^= 1u64 << (j % WORD);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Index of the lowest set coordinate.
    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, &w)| i * WORD + w.trailing_zeros() as usize)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let tz = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i * WORD + tz)
            })
        })
    }

    fn check_len(&self, other: &Self) -> Result<(), Gf2Error> {
        if self.len != other.len {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.len,
                found: other.len,
            });
        }
        Ok(())
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &Self) -> Result<bool, Gf2Error> {
        self.check_len(other)?;
        Ok(self.dot_unchecked(other))
    }

    #[inline]
    pub(crate) fn dot_unchecked(&self, other: &Self) -> bool {
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones & 1 == 1
    }

    pub fn xor(&self, other: &Self) -> Result<Self, Gf2Error> {
        self.check_len(other)?;
        let mut out = self.clone();
        out.xor_assign_unchecked(other);
        Ok(out)
    }

    #[inline]
    pub(crate) fn xor_assign_unchecked(&mut self, other: &Self) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor_assign(&mut self, other: &Self) -> Result<(), Gf2Error> {
        self.check_len(other)?;
        self.xor_assign_unchecked(other);
        Ok(())
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn to_bits(&self) -> Vec<bool> {
        (0..self.len).map(|j| self.get(j)).collect()
    }

    /// Concatenation `self ‖ other`.
    pub fn concat(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.len + other.len);
        for j in self.ones() {
            out.set(j, true);
        }
        for j in other.ones() {
            out.set(self.len + j, true);
        }
        out
    }

    pub(crate) fn clear_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    /// Packs coordinates into bytes, little-endian bit order within each byte.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.len.div_ceil(8)];
        for j in self.ones() {
            out[j / 8] |= 1 << (j % 8);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Self, Gf2Error> {
        if bytes.len() != len.div_ceil(8) {
            return Err(Gf2Error::Encoding(format!(
                "expected {} bytes for {} bits, found {}",
                len.div_ceil(8),
                len,
                bytes.len()
            )));
        }
        let mut v = Self::zeros(len);
        for (i, &byte) in bytes.iter().enumerate() {
            for b in 0..8 {
                if byte >> b & 1 == 1 {
                    let j = i * 8 + b;
                    if j >= len {
                        return Err(Gf2Error::Encoding(format!(
                            "padding bit {j} set beyond length {len}"
                        )));
                    }
                    v.set(j, true);
                }
            }
        }
        Ok(v)
    }

    /// Hex bitstring: the byte packing of [`BitVector::to_bytes`], hex encoded.
    pub fn to_hex(&self) -> String {
        hex::encode(self.to_bytes())
    }

    pub fn from_hex(s: &str, len: usize) -> Result<Self, Gf2Error> {
        let bytes = hex::decode(s.trim()).map_err(|e| Gf2Error::Encoding(e.to_string()))?;
        Self::from_bytes(&bytes, len)
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector(")?;
        for j in 0..self.len {
            write!(f, "{}", u8::from(self.get(j)))?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.len {
            write!(f, "{}", u8::from(self.get(j)))?;
        }
        Ok(())
    }
}
