use std::fmt;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{AffineSpace, BitVector, Gf2Error};

/// Dense row-major matrix over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitVector>,
}

/// Reduced row-echelon form: nonzero rows only, with their pivot columns in
/// increasing order.
#[derive(Clone, Debug)]
pub struct Echelon {
    pub rows: Vec<BitVector>,
    pub pivots: Vec<usize>,
}

/// Gauss-Jordan elimination restricted to the first `limit` columns.
/// Returns the pivot columns; `rows` is reordered so pivot rows come first.
fn eliminate(rows: &mut [BitVector], limit: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut next = 0;
    for col in 0..limit {
        if next == rows.len() {
            break;
        }
        let Some(found) = (next..rows.len()).find(|&r| rows[r].get(col)) else {
            continue;
        };
        rows.swap(next, found);
        let pivot_row = rows[next].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != next && row.get(col) {
                row.xor_assign_unchecked(&pivot_row);
            }
        }
        pivots.push(col);
        next += 1;
    }
    pivots
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            cols,
            rows: vec![BitVector::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            cols: n,
            rows: (0..n).map(|j| BitVector::unit(n, j)).collect(),
        }
    }

    /// A matrix with no rows (the basis of the zero subspace of GF(2)^cols).
    pub fn empty(cols: usize) -> Self {
        Self {
            cols,
            rows: Vec::new(),
        }
    }

    pub fn from_rows(cols: usize, rows: Vec<BitVector>) -> Result<Self, Gf2Error> {
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Gf2Error::DimensionMismatch {
                expected: cols,
                found: bad.len(),
            });
        }
        Ok(Self { cols, rows })
    }

    /// Convenience constructor from nested 0/1 literals.
    pub fn from_u8_rows(rows: &[&[u8]]) -> Result<Self, Gf2Error> {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_rows(cols, rows.iter().map(|r| BitVector::from_u8s(r)).collect())
    }

    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        Self {
            cols,
            rows: (0..rows).map(|_| BitVector::random(cols, rng)).collect(),
        }
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &BitVector {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<BitVector> {
        self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        self.rows[i].set(j, value);
    }

    pub fn push_row(&mut self, row: BitVector) -> Result<(), Gf2Error> {
        if row.len() != self.cols {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.cols,
                found: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    /// Vertical concatenation.
    pub fn stack(&self, other: &Self) -> Result<Self, Gf2Error> {
        if self.cols != other.cols {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.cols,
                found: other.cols,
            });
        }
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        Ok(Self {
            cols: self.cols,
            rows,
        })
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            for j in row.ones() {
                out.rows[j].set(i, true);
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self, Gf2Error> {
        if self.cols != other.cols || self.rows.len() != other.rows.len() {
            return Err(Gf2Error::ShapeMismatch {
                left: (self.rows.len(), self.cols),
                right: (other.rows.len(), other.cols),
            });
        }
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| {
                let mut r = a.clone();
                r.xor_assign_unchecked(b);
                r
            })
            .collect();
        Ok(Self {
            cols: self.cols,
            rows,
        })
    }

    /// `M · x`.
    pub fn mul_vec(&self, x: &BitVector) -> Result<BitVector, Gf2Error> {
        if x.len() != self.cols {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.cols,
                found: x.len(),
            });
        }
        let mut out = BitVector::zeros(self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            if row.dot_unchecked(x) {
                out.set(i, true);
            }
        }
        Ok(out)
    }

    /// `xᵀ · M`, i.e. the XOR of the rows selected by `x`.
    pub fn vec_mul(&self, x: &BitVector) -> Result<BitVector, Gf2Error> {
        if x.len() != self.rows.len() {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.rows.len(),
                found: x.len(),
            });
        }
        let mut out = BitVector::zeros(self.cols);
        for i in x.ones() {
            out.xor_assign_unchecked(&self.rows[i]);
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, Gf2Error> {
        if self.cols != other.rows.len() {
            return Err(Gf2Error::ShapeMismatch {
                left: (self.rows.len(), self.cols),
                right: (other.rows.len(), other.cols),
            });
        }
        let rows = self
            .rows
            .iter()
            .map(|r| other.vec_mul(r).expect("shape checked"))
            .collect();
        Ok(Self {
            cols: other.cols,
            rows,
        })
    }

    pub fn echelon(&self) -> Echelon {
        let mut rows = self.rows.clone();
        let pivots = eliminate(&mut rows, self.cols);
        rows.truncate(pivots.len());
        Echelon { rows, pivots }
    }

    /// Row rank over GF(2).
    pub fn rank(&self) -> usize {
        self.echelon().pivots.len()
    }

    /// Reduced row-echelon form with zero rows dropped. Two matrices have the
    /// same row space exactly when their canonical forms are equal.
    pub fn canonical(&self) -> Self {
        Self {
            cols: self.cols,
            rows: self.echelon().rows,
        }
    }

    pub fn rows_independent(&self) -> bool {
        self.rank() == self.rows.len()
    }

    pub fn row_space_contains(&self, v: &BitVector) -> Result<bool, Gf2Error> {
        if v.len() != self.cols {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        let ech = self.echelon();
        Ok(reduce_against(&ech, v).is_zero())
    }

    /// Basis of `{x : M·x = 0}` (one row per free column, in column order).
    pub fn nullspace(&self) -> Self {
        let ech = self.echelon();
        null_basis(&ech, self.cols)
    }

    /// Full solution set of `M · x = b`, or `None` when the system is
    /// inconsistent.
    pub fn solve_affine(&self, b: &BitVector) -> Result<Option<AffineSpace>, Gf2Error> {
        if b.len() != self.rows.len() {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.rows.len(),
                found: b.len(),
            });
        }
        let cols = self.cols;
        let mut aug: Vec<BitVector> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut row = BitVector::zeros(cols + 1);
                for j in r.ones() {
                    row.set(j, true);
                }
                row.set(cols, b.get(i));
                row
            })
            .collect();
        let pivots = eliminate(&mut aug, cols);
        if aug[pivots.len()..].iter().any(|r| r.get(cols)) {
            return Ok(None);
        }
        let mut offset = BitVector::zeros(cols);
        for (row, &p) in aug.iter().zip(&pivots) {
            offset.set(p, row.get(cols));
        }
        let reduced = Echelon {
            rows: aug
                .iter()
                .take(pivots.len())
                .map(|r| {
                    let mut t = BitVector::zeros(cols);
                    for j in r.ones().filter(|&j| j < cols) {
                        t.set(j, true);
                    }
                    t
                })
                .collect(),
            pivots,
        };
        let basis = null_basis(&reduced, cols);
        Ok(Some(AffineSpace::from_parts_unchecked(offset, basis)))
    }
}

/// Reduces `v` modulo the row space of a reduced echelon form.
pub(crate) fn reduce_against(ech: &Echelon, v: &BitVector) -> BitVector {
    let mut r = v.clone();
    for (row, &p) in ech.rows.iter().zip(&ech.pivots) {
        if r.get(p) {
            r.xor_assign_unchecked(row);
        }
    }
    r
}

fn null_basis(ech: &Echelon, cols: usize) -> BitMatrix {
    let mut is_pivot = vec![false; cols];
    for &p in &ech.pivots {
        is_pivot[p] = true;
    }
    let rows = (0..cols)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut v = BitVector::unit(cols, f);
            for (row, &p) in ech.rows.iter().zip(&ech.pivots) {
                if row.get(f) {
                    v.set(p, true);
                }
            }
            v
        })
        .collect();
    BitMatrix { cols, rows }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows.len(), self.cols)?;
        for r in &self.rows {
            writeln!(f, "  {r}")?;
        }
        write!(f, "]")
    }
}

#[derive(Serialize, Deserialize)]
struct BitMatrixRepr {
    rows: usize,
    cols: usize,
    data: String,
}

impl BitMatrix {
    /// Row-major packed bytes, each row padded to whole bytes, little-endian
    /// bit order within a byte.
    pub fn to_hex(&self) -> String {
        let bytes: Vec<u8> = self.rows.iter().flat_map(|r| r.to_bytes()).collect();
        hex::encode(bytes)
    }

    pub fn from_hex(rows: usize, cols: usize, data: &str) -> Result<Self, Gf2Error> {
        let bytes = hex::decode(data.trim()).map_err(|e| Gf2Error::Encoding(e.to_string()))?;
        let per_row = cols.div_ceil(8);
        if bytes.len() != rows * per_row {
            return Err(Gf2Error::Encoding(format!(
                "expected {} bytes for a {rows}x{cols} matrix, found {}",
                rows * per_row,
                bytes.len()
            )));
        }
        let rows = if per_row == 0 {
            vec![BitVector::zeros(0); rows]
        } else {
            bytes
                .chunks(per_row)
                .map(|c| BitVector::from_bytes(c, cols))
                .collect::<Result<_, _>>()?
        };
        Ok(Self { cols, rows })
    }
}

impl Serialize for BitMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        BitMatrixRepr {
            rows: self.rows.len(),
            cols: self.cols,
            data: self.to_hex(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BitMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = BitMatrixRepr::deserialize(d)?;
        BitMatrix::from_hex(repr.rows, repr.cols, &repr.data).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_examples() {
        assert_eq!(BitMatrix::identity(3).rank(), 3);
        assert_eq!(BitMatrix::zeros(3, 3).rank(), 0);
        assert_eq!(BitMatrix::from_u8_rows(&[&[1, 1], &[1, 1]]).unwrap().rank(), 1);
    }

    #[test]
    fn solve_unique() {
        let m = BitMatrix::from_u8_rows(&[&[1, 1], &[0, 1]]).unwrap();
        let sol = m.solve_affine(&BitVector::from_u8s(&[1, 0])).unwrap().unwrap();
        assert_eq!(sol.offset(), &BitVector::from_u8s(&[1, 0]));
        assert_eq!(sol.dim(), 0);
    }

    #[test]
    fn solve_inconsistent_and_unconstrained() {
        let m = BitMatrix::zeros(1, 3);
        assert!(m.solve_affine(&BitVector::from_u8s(&[1])).unwrap().is_none());
        let all = m.solve_affine(&BitVector::from_u8s(&[0])).unwrap().unwrap();
        assert_eq!(all.dim(), 3);
        assert_eq!(all.enumerate(22).unwrap().len(), 8);
    }

    #[test]
    fn solve_dimension_mismatch() {
        let m = BitMatrix::zeros(2, 3);
        assert!(matches!(
            m.solve_affine(&BitVector::zeros(3)),
            Err(Gf2Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn nullspace_is_annihilated() {
        let m = BitMatrix::from_u8_rows(&[&[1, 0, 1, 1], &[0, 1, 1, 0]]).unwrap();
        let ns = m.nullspace();
        assert_eq!(ns.num_rows(), 2);
        for v in ns.rows() {
            assert!(m.mul_vec(v).unwrap().is_zero());
        }
    }

    #[test]
    fn serde_layout() {
        let m = BitMatrix::from_u8_rows(&[&[1, 0, 0, 0, 0, 0, 0, 0, 1], &[0, 1, 0, 0, 0, 0, 0, 0, 0]])
            .unwrap();
        assert_eq!(m.to_hex(), "01010200");
        let back = BitMatrix::from_hex(2, 9, "01010200").unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn transpose_and_mul() {
        let a = BitMatrix::from_u8_rows(&[&[1, 1, 0], &[0, 1, 1]]).unwrap();
        let at = a.transpose();
        assert_eq!(at.num_rows(), 3);
        let prod = a.mul(&at).unwrap();
        assert_eq!(prod, BitMatrix::from_u8_rows(&[&[0, 1], &[1, 0]]).unwrap());
    }
}
