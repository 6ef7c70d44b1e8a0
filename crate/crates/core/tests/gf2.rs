use std::collections::HashMap;

use proptest::prelude::*;
use qlight_core::gf2::*;
use qlight_core::rng;
use rand::Rng;

fn m(rows: &[&[u8]]) -> BitMatrix {
    BitMatrix::from_u8_rows(rows).unwrap()
}

fn v(bits: &[u8]) -> BitVector {
    BitVector::from_u8s(bits)
}

#[test]
fn rank_examples() {
    assert_eq!(BitMatrix::identity(3).rank(), 3);
    assert_eq!(BitMatrix::zeros(3, 3).rank(), 0);
    assert_eq!(m(&[&[1, 1], &[1, 1]]).rank(), 1);
}

#[test]
fn solve_affine_examples() {
    let s = m(&[&[1, 1], &[0, 1]]).solve_affine(&v(&[1, 0])).unwrap().unwrap();
    assert_eq!(s.offset(), &v(&[1, 0]));
    assert_eq!(s.dim(), 0);
    assert!(BitMatrix::zeros(1, 3).solve_affine(&v(&[1])).unwrap().is_none());
    let all = BitMatrix::zeros(1, 3).solve_affine(&v(&[0])).unwrap().unwrap();
    assert_eq!(all.dim(), 3);
    assert_eq!(all.enumerate_default().unwrap().len(), 8);
    assert!(BitMatrix::zeros(2, 3).solve_affine(&v(&[0])).is_err());
}

#[test]
fn dual_space_examples() {
    assert_eq!(dual_space(&m(&[&[1, 0]])).unwrap(), m(&[&[0, 1]]));
    assert_eq!(dual_space(&BitMatrix::identity(2)).unwrap().num_rows(), 0);
    assert!(matches!(dual_space(&m(&[&[1, 1], &[1, 1]])), Err(Gf2Error::DependentRows)));
    let mut r = rng::seeded(0);
    for d in 0..=8 {
        let s = random_subspace(8, d, &mut r).unwrap();
        let dual = dual_space(&s).unwrap();
        assert_eq!(dual.num_rows(), 8 - d);
        for a in s.rows() {
            for b in dual.rows() {
                assert!(!a.dot(b).unwrap());
            }
        }
    }
}

#[test]
fn random_subspace_edges() {
    let mut r = rng::seeded(1);
    assert_eq!(random_subspace(5, 0, &mut r).unwrap().num_rows(), 0);
    assert_eq!(random_subspace(5, 5, &mut r).unwrap(), BitMatrix::identity(5));
    assert!(random_subspace(3, 4, &mut r).is_err());
}

fn chi_squared(counts: &HashMap<BitMatrix, usize>, bins: usize, draws: usize) -> f64 {
    let expected = draws as f64 / bins as f64;
    let seen: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    seen + (bins - counts.len()) as f64 * expected
}

#[test]
fn random_subspace_is_uniform() {
    let mut r = rng::seeded(2);
    let mut counts = HashMap::new();
    for _ in 0..3000 {
        *counts.entry(random_subspace(2, 1, &mut r).unwrap()).or_insert(0) += 1;
    }
    assert_eq!(counts.len(), 3);
    let sigma = (3000.0 * (1.0 / 3.0) * (2.0 / 3.0f64)).sqrt();
    assert!(counts.values().all(|&c| (c as f64 - 1000.0).abs() <= 3.0 * sigma));

    let mut counts = HashMap::new();
    for _ in 0..7000 {
        *counts.entry(random_subspace(3, 1, &mut r).unwrap()).or_insert(0) += 1;
    }
    assert_eq!(counts.len(), 7);
    // 99th percentile of χ² with 6 degrees of freedom.
    assert!(chi_squared(&counts, 7, 7000) < 16.81);
}

#[test]
fn random_subspace_between_examples() {
    let mut r = rng::seeded(3);
    let l = m(&[&[1, 0, 0, 0], &[0, 1, 0, 0]]);
    assert_eq!(random_subspace_between(&l, &l, 2, &mut r).unwrap(), l);

    // L = {0}, U = everything: same law as random_subspace (35 planes in F_2^4).
    let zero = BitMatrix::empty(4);
    let full = BitMatrix::identity(4);
    let mut counts = HashMap::new();
    for _ in 0..7000 {
        *counts.entry(random_subspace_between(&zero, &full, 2, &mut r).unwrap()).or_insert(0) += 1;
    }
    assert_eq!(counts.len(), 35);
    // 99th percentile of χ² with 34 degrees of freedom.
    assert!(chi_squared(&counts, 35, 7000) < 56.06);

    let lower = m(&[&[1, 1, 0, 0]]);
    let upper = m(&[&[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 1]]);
    for _ in 0..200 {
        let s = random_subspace_between(&lower, &upper, 2, &mut r).unwrap();
        assert_eq!(s.num_rows(), 2);
        assert!(is_subspace_of(&lower, &s).unwrap());
        assert!(is_subspace_of(&s, &upper).unwrap());
    }
    assert!(matches!(
        random_subspace_between(&upper, &lower, 2, &mut r),
        Err(Gf2Error::NotContained)
    ));
    assert!(random_subspace_between(&lower, &upper, 4, &mut r).is_err());
}

#[test]
fn affine_enumeration() {
    let p = AffineSpace::point(v(&[1, 0, 1]));
    assert_eq!(p.enumerate_default().unwrap(), vec![v(&[1, 0, 1])]);
    let a = AffineSpace::new(v(&[1, 0, 1]), m(&[&[1, 1, 0], &[0, 1, 1]])).unwrap();
    let pts = a.enumerate_default().unwrap();
    assert_eq!(pts.len(), 4);
    for (i, x) in pts.iter().enumerate() {
        assert!(a.contains(x).unwrap());
        assert!(!pts[..i].contains(x));
    }
    let cube = AffineSpace::new(BitVector::zeros(3), BitMatrix::identity(3)).unwrap();
    assert_eq!(cube.enumerate_default().unwrap().len(), 8);
    let big = AffineSpace::new(BitVector::zeros(24), BitMatrix::identity(24)).unwrap();
    assert!(matches!(big.enumerate_default(), Err(Gf2Error::EnumerationCap { .. })));
    assert!(AffineSpace::new(BitVector::zeros(2), m(&[&[1, 1], &[1, 1]])).is_err());
}

#[test]
fn subspace_enumeration_counts() {
    assert_eq!(enumerate_subspaces(4, 2).unwrap().len(), 35);
    assert_eq!(enumerate_subspaces(3, 1).unwrap().len(), 7);
    let l = m(&[&[1, 0, 0, 0]]);
    let u = m(&[&[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 0]]);
    // Planes between a line and a 3-space: lines of the 2-dimensional quotient.
    assert_eq!(enumerate_subspaces_between(&l, &u, 2).unwrap().len(), 3);
}

#[test]
fn matrix_json_round_trip() {
    let a = BitMatrix::random(5, 11, &mut rng::seeded(4));
    let text = serde_json::to_string(&a).unwrap();
    let back: BitMatrix = serde_json::from_str(&text).unwrap();
    assert_eq!(a, back);
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["rows"], 5);
    assert_eq!(value["cols"], 11);
    // Two bytes per row, little-endian bits within each byte.
    assert_eq!(value["data"].as_str().unwrap().len(), 5 * 4);
    let e = m(&[&[1, 0, 0, 0, 0, 0, 0, 0, 0]]);
    assert_eq!(serde_json::to_value(&e).unwrap()["data"], "0100");
}

fn matrix_strategy() -> impl Strategy<Value = (usize, usize, u64)> {
    (1usize..12, 1usize..20, any::<u64>())
}

proptest! {
    #[test]
    fn solutions_satisfy_the_system((rows, cols, seed) in matrix_strategy()) {
        let mut r = rng::seeded(seed);
        let a = BitMatrix::random(rows, cols, &mut r);
        let x = BitVector::random(cols, &mut r);
        let b = a.mul_vec(&x).unwrap();
        let space = a.solve_affine(&b).unwrap().unwrap();
        prop_assert_eq!(space.dim(), cols - a.rank());
        if space.dim() <= 10 {
            for p in space.enumerate_default().unwrap() {
                prop_assert_eq!(a.mul_vec(&p).unwrap(), b.clone());
            }
        }
        prop_assert!(space.contains(&x).unwrap());
    }

    #[test]
    fn dual_is_an_involution(n in 1usize..14, seed in any::<u64>()) {
        let mut r = rng::seeded(seed);
        let d = r.random_range(0..=n);
        let s = random_subspace(n, d, &mut r).unwrap();
        let dual = dual_space(&s).unwrap();
        prop_assert_eq!(s.num_rows() + dual.num_rows(), n);
        prop_assert_eq!(dual_space(&dual).unwrap(), s);
    }

    #[test]
    fn rank_is_invariant_under_row_operations((rows, cols, seed) in matrix_strategy()) {
        let mut r = rng::seeded(seed);
        let a = BitMatrix::random(rows, cols, &mut r);
        let mut shuffled: Vec<BitVector> = a.rows().to_vec();
        for _ in 0..3 * rows {
            let i = r.random_range(0..rows);
            let j = r.random_range(0..rows);
            if i != j && r.random::<bool>() {
                let add = shuffled[j].clone();
                shuffled[i] = shuffled[i].xor(&add).unwrap();
            } else {
                shuffled.swap(i, j);
            }
        }
        prop_assert_eq!(BitMatrix::from_rows(cols, shuffled).unwrap().rank(), a.rank());
    }

    #[test]
    fn nullspace_is_orthogonal_to_rows((rows, cols, seed) in matrix_strategy()) {
        let a = BitMatrix::random(rows, cols, &mut rng::seeded(seed));
        let ns = a.nullspace();
        prop_assert_eq!(ns.num_rows(), cols - a.rank());
        for k in ns.rows() {
            prop_assert!(a.mul_vec(k).unwrap().is_zero());
        }
    }

    #[test]
    fn canonical_form_decides_equality((rows, cols, seed) in matrix_strategy()) {
        let mut r = rng::seeded(seed);
        let a = BitMatrix::random(rows, cols, &mut r);
        let mix = BitMatrix::random(rows, rows, &mut r);
        let b = mix.mul(&a).unwrap();
        let same = b.rank() == a.rank();
        prop_assert_eq!(a.canonical() == b.canonical(), same);
    }
}
