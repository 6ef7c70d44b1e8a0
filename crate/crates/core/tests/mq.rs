use proptest::prelude::*;
use qlight_core::gf2::{BitMatrix, BitVector};
use qlight_core::mq::*;
use qlight_core::rng;

fn toy() -> HashKey {
    HashKey::from_matrices(vec![BitMatrix::from_u8_rows(&[&[1, 1], &[0, 0]]).unwrap()]).unwrap()
}

fn v(bits: &[u8]) -> BitVector {
    BitVector::from_u8s(bits)
}

/// `xᵀ A x` straight from the definition.
fn naive_eval(key: &HashKey, x: &BitVector) -> Vec<bool> {
    key.mats()
        .iter()
        .map(|a| {
            let mut acc = false;
            for j in 0..key.m() {
                for k in 0..key.m() {
                    acc ^= x.get(j) && a.get(j, k) && x.get(k);
                }
            }
            acc
        })
        .collect()
}

#[test]
fn keygen_shapes() {
    let k = HashKey::keygen_seeded(1, 2, 0).unwrap();
    assert_eq!(k.mats().len(), 1);
    for seed in 0..50 {
        let k = HashKey::keygen_seeded(1, 2, seed).unwrap();
        assert!(!k.mats()[0].get(1, 0));
    }
    let k = HashKey::keygen_seeded(2, 12, 1).unwrap();
    assert_eq!(k.mats().len(), 2);
    assert!(k.mats().iter().all(|a| a.num_rows() == 12 && a.num_cols() == 12));
    assert!(HashKey::keygen_seeded(3, 3, 0).is_err());
    assert!(HashKey::from_matrices(vec![BitMatrix::from_u8_rows(&[&[0, 0], &[1, 0]]).unwrap()]).is_err());
}

#[test]
fn keygen_is_deterministic() {
    let a = serde_json::to_string(&HashKey::keygen_seeded(2, 12, 42).unwrap()).unwrap();
    let b = serde_json::to_string(&HashKey::keygen_seeded(2, 12, 42).unwrap()).unwrap();
    assert_eq!(a, b);
    let c = serde_json::to_string(&HashKey::keygen_seeded(2, 12, 43).unwrap()).unwrap();
    assert_ne!(a, c);
    let back: HashKey = serde_json::from_str(&a).unwrap();
    assert_eq!(back, HashKey::keygen_seeded(2, 12, 42).unwrap());
}

#[test]
fn toy_evaluations() {
    let k = toy();
    assert_eq!(k.eval(&v(&[1, 1])).unwrap().to_index(), 0);
    assert_eq!(k.eval(&v(&[1, 0])).unwrap().to_index(), 1);
    assert_eq!(k.eval(&v(&[0, 0])).unwrap().to_index(), 0);
    assert_eq!(k.bilinear_rows(&v(&[1, 0])).unwrap(), BitMatrix::from_u8_rows(&[&[0, 1]]).unwrap());
    assert_eq!(k.quadratic_offsets(&v(&[1, 0])).unwrap().to_index(), 1);
    assert!(k.bilinear_rows(&v(&[0, 0])).unwrap().rank() == 0);
    assert!(k.eval(&v(&[1, 0, 1])).is_err());
}

#[test]
fn zero_key_preimages() {
    let k = HashKey::zero(2, 5).unwrap();
    assert_eq!(k.preimages(&k.digest_from_index(0)).unwrap().len(), 32);
    for y in 1..4 {
        assert!(k.preimages(&k.digest_from_index(y)).unwrap().is_empty());
    }
}

#[test]
fn preimages_partition_the_domain() {
    let k = HashKey::keygen_seeded(2, 12, 3).unwrap();
    let mut total = 0;
    let mut seen = vec![false; 1 << 12];
    for y in 0..4 {
        let pre = k.preimage_indices(&k.digest_from_index(y)).unwrap();
        assert!(pre.windows(2).all(|w| w[0] < w[1]));
        for x in pre {
            assert!(!seen[x as usize]);
            seen[x as usize] = true;
            total += 1;
        }
    }
    assert_eq!(total, 4096);
    assert_eq!(k.fiber_sizes().unwrap().iter().sum::<u64>() / 4, 1 << 10);
}

#[test]
fn polarization_holds_exhaustively() {
    let k = HashKey::keygen_seeded(2, 10, 5).unwrap();
    let mut r = rng::seeded(0);
    for _ in 0..8 {
        let d = BitVector::random(10, &mut r);
        let b = k.bilinear_rows(&d).unwrap();
        let off = k.quadratic_offsets(&d).unwrap();
        assert_eq!(off, k.eval(&d).unwrap().0);
        assert!(b.mul_vec(&d).unwrap().is_zero());
        for x in 0..1u64 << 10 {
            let xv = BitVector::from_index(x, 10);
            let lhs = k.eval_index(x) ^ k.eval_index(x ^ d.to_index());
            let rhs = b.mul_vec(&xv).unwrap().xor(&off).unwrap().to_index();
            assert_eq!(lhs, rhs);
        }
    }
}

#[test]
fn toy_collision_by_hand() {
    let k = toy();
    let s = colliding_space_for_deltas(&k, &[v(&[1, 0])]).unwrap().unwrap();
    // B_Δ = (0 1), f(Δ) = 1: x_2 = 1.
    let pts = s.enumerate_default().unwrap();
    assert_eq!(pts, vec![v(&[0, 1]), v(&[1, 1])]);
    assert_eq!(k.eval(&pts[0]).unwrap(), k.eval(&pts[1]).unwrap());
    assert!(colliding_space_for_deltas(&k, &[v(&[0, 0])]).is_err());
}

#[test]
fn collisions_verify() {
    let k = HashKey::keygen_seeded(2, 12, 6).unwrap();
    let mut r = rng::seeded(1);
    for _ in 0..100 {
        let c = find_collision(&k, &mut r, DEFAULT_MAX_TRIES).unwrap();
        assert!(!c.delta.is_zero());
        assert_eq!(c.x_prime, c.x.xor(&c.delta).unwrap());
        assert_eq!(k.eval(&c.x).unwrap(), k.eval(&c.x_prime).unwrap());
        assert_eq!(c.digest, k.eval(&c.x).unwrap());
        assert_eq!(c.rank_history.len(), c.tries);
    }
    let z = HashKey::zero(2, 6).unwrap();
    let c = find_collision(&z, &mut r, 1).unwrap();
    assert_eq!(c.digest.to_index(), 0);
}

#[test]
fn multicollisions() {
    let k = HashKey::keygen_seeded(2, 12, 7).unwrap();
    let mut r = rng::seeded(2);
    let mc = find_nonaffine_multicollision(&k, 4, &mut r, DEFAULT_MAX_TRIES).unwrap();
    assert_eq!(mc.points.len(), 5);
    assert!(is_nonaffine(&mc.points).unwrap());
    for p in &mc.points {
        assert_eq!(k.eval(p).unwrap(), mc.digest);
    }
    let one = find_nonaffine_multicollision(&k, 1, &mut r, DEFAULT_MAX_TRIES).unwrap();
    assert_eq!(one.points.len(), 2);

    let tight = HashKey::keygen_seeded(2, 9, 8).unwrap();
    let failures = (0..100)
        .filter(|_| find_nonaffine_multicollision(&tight, 5, &mut r, 4).is_err())
        .count();
    assert!(failures >= 99);
}

#[test]
fn colliding_space_dimensions() {
    let k = HashKey::keygen_seeded(2, 12, 9).unwrap();
    let mut r = rng::seeded(3);
    let mut generic = 0;
    for _ in 0..20 {
        let ds: Vec<BitVector> = (0..4).map(|_| BitVector::random(12, &mut r)).filter(|d| !d.is_zero()).collect();
        let Some(s) = colliding_space_for_deltas(&k, &ds).unwrap() else { continue };
        generic += (s.dim() == 4) as usize;
        for x in s.enumerate_default().unwrap() {
            for d in &ds {
                assert_eq!(k.eval(&x).unwrap(), k.eval(&x.xor(d).unwrap()).unwrap());
            }
        }
    }
    assert!(generic >= 10);
    let d = BitVector::random(12, &mut r);
    let one = colliding_space_for_deltas(&k, std::slice::from_ref(&d)).unwrap().unwrap();
    let two = colliding_space_for_deltas(&k, &[d.clone(), d]).unwrap().unwrap();
    assert_eq!(one.dim(), two.dim());
}

#[test]
fn affine_collision_spaces() {
    let k = HashKey::keygen_seeded(2, 12, 10).unwrap();
    let mut r = rng::seeded(4);
    let a = find_affine_collision_space(&k, 3, &mut r, DEFAULT_MAX_TRIES).unwrap();
    let pts = a.space.enumerate_default().unwrap();
    assert_eq!(pts.len(), 8);
    for p in &pts {
        assert_eq!(k.eval(p).unwrap(), a.digest);
    }
    assert!(!is_nonaffine(&pts[..5]).unwrap());
    assert!(matches!(
        find_affine_collision_space(&k, 5, &mut r, DEFAULT_MAX_TRIES),
        Err(MqError::Precondition(_))
    ));
    let line = find_affine_collision_space(&k, 1, &mut r, DEFAULT_MAX_TRIES).unwrap();
    assert_eq!(line.space.dim(), 1);
}

#[test]
fn nonaffine_examples() {
    let e = |bits: &[u8]| v(bits);
    assert!(is_nonaffine(&[e(&[0, 0, 0]), e(&[1, 0, 0]), e(&[0, 1, 0])]).unwrap());
    assert!(!is_nonaffine(&[e(&[0, 0, 0]), e(&[1, 0, 0]), e(&[0, 1, 0]), e(&[1, 1, 0])]).unwrap());
    assert!(is_nonaffine(&[e(&[0, 0])]).is_err());
    assert!(is_nonaffine(&[e(&[0, 0]), e(&[1, 0, 0])]).is_err());
}

#[test]
fn attack_boundary() {
    // k-target with m ≥ kn + 8 succeeds.
    let mut r = rng::seeded(5);
    let wins = (0..200)
        .filter(|&i| {
            let k = HashKey::keygen_seeded(2, 14, 100 + i).unwrap();
            find_nonaffine_multicollision(&k, 3, &mut r, DEFAULT_MAX_TRIES).is_ok()
        })
        .count();
    assert!(wins >= 190);
    // 2k + 1 differences at m < (k + 1/2)n: the stacked system cannot reach full rank.
    let fails = (0..200)
        .filter(|&i| {
            let k = HashKey::keygen_seeded(2, 8, 300 + i).unwrap();
            find_nonaffine_multicollision(&k, 9, &mut r, 8).is_err()
        })
        .count();
    assert!(fails >= 198);
}

proptest! {
    #[test]
    fn fast_eval_matches_definition(n in 1usize..5, extra in 1usize..12, seed in any::<u64>(), x_seed in any::<u64>()) {
        let m = n + extra;
        let k = HashKey::keygen_seeded(n, m, seed).unwrap();
        let x = BitVector::random(m, &mut rng::seeded(x_seed));
        let naive = naive_eval(&k, &x);
        let d = k.eval(&x).unwrap();
        prop_assert_eq!(d.bits().to_bits(), naive);
        prop_assert_eq!(k.eval_index(x.to_index()), d.to_index());
        prop_assert_eq!(k.quadratic_offsets(&x).unwrap(), d.0);
    }

    #[test]
    fn bilinear_rows_are_symmetrized(seed in any::<u64>(), d_seed in any::<u64>()) {
        let k = HashKey::keygen_seeded(3, 9, seed).unwrap();
        let d = BitVector::random(9, &mut rng::seeded(d_seed));
        let b = k.bilinear_rows(&d).unwrap();
        for (i, a) in k.mats().iter().enumerate() {
            let sym = a.add(&a.transpose()).unwrap();
            prop_assert_eq!(b.row(i), &sym.vec_mul(&d).unwrap());
        }
    }
}
