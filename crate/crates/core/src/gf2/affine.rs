use super::matrix::reduce_against;
use super::{BitMatrix, BitVector, Gf2Error, ENUMERATION_CAP};

/// `offset + row-span(basis)`, with linearly independent basis rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineSpace {
    offset: BitVector,
    basis: BitMatrix,
}

impl AffineSpace {
    pub fn new(offset: BitVector, basis: BitMatrix) -> Result<Self, Gf2Error> {
        if offset.len() != basis.num_cols() {
            return Err(Gf2Error::DimensionMismatch {
                expected: basis.num_cols(),
                found: offset.len(),
            });
        }
        if !basis.rows_independent() {
            return Err(Gf2Error::DependentRows);
        }
        Ok(Self { offset, basis })
    }

    pub(crate) fn from_parts_unchecked(offset: BitVector, basis: BitMatrix) -> Self {
        debug_assert!(basis.rows_independent());
        Self { offset, basis }
    }

    /// The single point `{p}`.
    pub fn point(p: BitVector) -> Self {
        let n = p.len();
        Self {
            offset: p,
            basis: BitMatrix::empty(n),
        }
    }

    pub fn offset(&self) -> &BitVector {
        &self.offset
    }

    pub fn basis(&self) -> &BitMatrix {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.num_rows()
    }

    /// Ambient dimension.
    pub fn ambient(&self) -> usize {
        self.offset.len()
    }

    pub fn contains(&self, v: &BitVector) -> Result<bool, Gf2Error> {
        let diff = self.offset.xor(v)?;
        self.basis.row_space_contains(&diff)
    }

    /// Same point set, basis in reduced row-echelon form and offset reduced
    /// against it. Equal spaces have equal canonical forms.
    pub fn canonical(&self) -> Self {
        let ech = self.basis.echelon();
        let offset = reduce_against(&ech, &self.offset);
        Self {
            offset,
            basis: BitMatrix::from_rows(self.offset.len(), ech.rows).expect("same width"),
        }
    }

    /// `offset + Σ coeffs_j · basis_j`.
    pub fn point_at(&self, coeffs: u64) -> BitVector {
        let mut p = self.offset.clone();
        for (j, row) in self.basis.rows().iter().enumerate() {
            if coeffs >> j & 1 == 1 {
                p.xor_assign_unchecked(row);
            }
        }
        p
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> BitVector {
        let mut p = self.offset.clone();
        for row in self.basis.rows() {
            if rng.random::<bool>() {
                p.xor_assign_unchecked(row);
            }
        }
        p
    }

    /// All `2^dim` elements, in Gray-code order starting from the offset.
    pub fn enumerate(&self, cap: usize) -> Result<Vec<BitVector>, Gf2Error> {
        let dim = self.dim();
        if dim > cap {
            return Err(Gf2Error::EnumerationCap { dim, cap });
        }
        let mut out = Vec::with_capacity(1usize << dim);
        let mut cur = self.offset.clone();
        out.push(cur.clone());
        for i in 1u64..(1u64 << dim) {
            let flip = i.trailing_zeros() as usize;
            cur.xor_assign_unchecked(self.basis.row(flip));
            out.push(cur.clone());
        }
        Ok(out)
    }

    pub fn enumerate_default(&self) -> Result<Vec<BitVector>, Gf2Error> {
        self.enumerate(ENUMERATION_CAP)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_space_enumerates_offset() {
        let p = BitVector::from_u8s(&[1, 0, 1]);
        assert_eq!(AffineSpace::point(p.clone()).enumerate(22).unwrap(), vec![p]);
    }

    #[test]
    fn dim_two_has_four_distinct_points() {
        let basis = BitMatrix::from_u8_rows(&[&[1, 1, 0, 0], &[0, 1, 1, 1]]).unwrap();
        let a = AffineSpace::new(BitVector::from_u8s(&[0, 0, 0, 1]), basis).unwrap();
        let mut pts = a.enumerate(22).unwrap();
        assert_eq!(pts.len(), 4);
        for p in &pts {
            assert!(a.contains(p).unwrap());
        }
        pts.sort();
        pts.dedup();
        assert_eq!(pts.len(), 4);
    }

    #[test]
    fn identity_basis_covers_cube() {
        let a = AffineSpace::new(BitVector::zeros(3), BitMatrix::identity(3)).unwrap();
        let mut idx: Vec<u64> = a.enumerate(22).unwrap().iter().map(|v| v.to_index()).collect();
        idx.sort();
        assert_eq!(idx, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn cap_is_enforced() {
        let a = AffineSpace::new(BitVector::zeros(5), BitMatrix::identity(5)).unwrap();
        assert!(matches!(a.enumerate(4), Err(Gf2Error::EnumerationCap { dim: 5, cap: 4 })));
    }

    #[test]
    fn dependent_basis_rejected() {
        let basis = BitMatrix::from_u8_rows(&[&[1, 1], &[1, 1]]).unwrap();
        assert!(AffineSpace::new(BitVector::zeros(2), basis).is_err());
    }

    #[test]
    fn canonical_identifies_equal_spaces() {
        let a = AffineSpace::new(
            BitVector::from_u8s(&[1, 0, 0]),
            BitMatrix::from_u8_rows(&[&[1, 1, 0]]).unwrap(),
        )
        .unwrap();
        let b = AffineSpace::new(
            BitVector::from_u8s(&[0, 1, 0]),
            BitMatrix::from_u8_rows(&[&[1, 1, 0]]).unwrap(),
        )
        .unwrap();
        assert_eq!(a.canonical(), b.canonical());
    }
}
