use qlight_core::gf2::{dual_space, random_subspace, span_indices, BitMatrix};
use qlight_core::money::*;
use qlight_core::qsim::StateVector;
use qlight_core::rng::{self, SimRng};
use rand::Rng;

fn brute_overlap(state: &StateVector, s: &BitMatrix) -> f64 {
    let pts = span_indices(s).unwrap();
    let sum: qlight_core::qsim::Complex64 = pts.iter().map(|&x| state.amp(x)).sum();
    sum.norm_sqr() / pts.len() as f64
}

#[test]
fn notes_are_uniform_over_the_subspace() {
    let mut r = rng::seeded(0);
    let note = money_gen(2, &mut r).unwrap();
    let support = note.state.support();
    assert_eq!(support.len(), 2);
    for x in support {
        assert!((note.state.amp(x).re - 0.5f64.sqrt()).abs() < 1e-12);
    }
    let note = money_gen(8, &mut r).unwrap();
    assert_eq!(note.state.support().len(), 16);
    assert!(note.state.support().iter().all(|&x| (note.state.amp(x).re - 0.25).abs() < 1e-12));
    assert!(matches!(money_gen(5, &mut r), Err(MoneyError::OddDimension(5))));
    assert!(matches!(money_gen(22, &mut r), Err(MoneyError::TooLarge { .. })));
}

#[test]
fn oracles_decide_membership() {
    let mut r = rng::seeded(1);
    let note = money_gen(6, &mut r).unwrap();
    let o = note.oracles().unwrap();
    let s: Vec<u64> = span_indices(&note.subspace).unwrap();
    let dual: Vec<u64> = span_indices(&dual_space(&note.subspace).unwrap()).unwrap();
    for x in 0..64 {
        assert_eq!(o.primal.contains(x), s.contains(&x));
        assert_eq!(o.dual.contains(x), dual.contains(&x));
    }
}

#[test]
fn honest_notes_verify_and_stay_put() {
    let mut r = rng::seeded(2);
    for n in [2, 4, 8, 12] {
        let note = money_gen(n, &mut r).unwrap();
        let o = note.oracles().unwrap();
        let rep = money_verify_exact(&note.state, &o).unwrap();
        assert!((rep.accept_probability - 1.0).abs() < 1e-9);
        assert!(rep.post.unwrap().fidelity(&note.state).unwrap() > 1.0 - 1e-9);
        let mut st = note.state.clone();
        for _ in 0..3 {
            let v = money_verify(&st, &o, &mut r).unwrap();
            assert!(v.accept);
            assert!(v.post.fidelity(&note.state).unwrap() > 1.0 - 1e-9);
            st = v.post;
        }
    }
}

#[test]
fn basis_states() {
    let mut r = rng::seeded(3);
    let n = 8;
    let note = money_gen(n, &mut r).unwrap();
    let o = note.oracles().unwrap();
    let inside = span_indices(&note.subspace).unwrap()[3];
    let rep = money_verify_exact(&StateVector::basis(n, inside).unwrap(), &o).unwrap();
    assert!((rep.accept_probability - 2f64.powi(-4)).abs() < 1e-12);
    assert_eq!(rep.primal_reject_probability, 0.0);
    let outside = (0..256).find(|&x| !o.primal.contains(x)).unwrap();
    let rep = money_verify_exact(&StateVector::basis(n, outside).unwrap(), &o).unwrap();
    assert_eq!(rep.accept_probability, 0.0);
    assert_eq!(rep.primal_reject_probability, 1.0);
    assert!(!money_verify(&StateVector::basis(n, outside).unwrap(), &o, &mut r).unwrap().accept);
}

#[test]
fn projective_verification() {
    let n = 4;
    // S = span{e0, e1}, S' = span{e2, e3}: trivial intersection.
    let s = BitMatrix::from_u8_rows(&[&[1, 0, 0, 0], &[0, 1, 0, 0]]).unwrap();
    let t = BitMatrix::from_u8_rows(&[&[0, 0, 1, 0], &[0, 0, 0, 1]]).unwrap();
    let note_s = MoneyNote::from_subspace(s.clone(), 0).unwrap();
    let note_t = MoneyNote::from_subspace(t, 1).unwrap();
    assert!((projective_verify(&note_s.state, &s).unwrap().0 - 1.0).abs() < 1e-12);
    assert!((projective_verify(&note_t.state, &s).unwrap().0 - 2f64.powi(-(n as i32))).abs() < 1e-12);
}

#[test]
fn verification_is_projective_on_a_battery() {
    let mut r = rng::seeded(4);
    let mut checked = 0;
    for n in [2, 4, 6, 8] {
        for _ in 0..10 {
            let note = money_gen(n, &mut r).unwrap();
            let o = note.oracles().unwrap();
            let other = money_gen(n, &mut r).unwrap().state;
            let mut mix = note.state.amps().to_vec();
            let noise = StateVector::random(n, &mut r).unwrap();
            let w: f64 = r.random();
            for (a, b) in mix.iter_mut().zip(noise.amps()) {
                *a = *a * w + b * (1.0 - w);
            }
            let battery = [
                StateVector::random(n, &mut r).unwrap(),
                StateVector::normalized(n, mix).unwrap(),
                other,
                StateVector::basis(n, r.random_range(0..1 << n)).unwrap(),
            ];
            for st in battery {
                let a = money_verify_exact(&st, &o).unwrap().accept_probability;
                let (b, _) = projective_verify(&st, &note.subspace).unwrap();
                assert!((a - b).abs() < 1e-6);
                assert!((b - brute_overlap(&st, &note.subspace)).abs() < 1e-12);
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 160);
}

#[test]
fn hadamard_maps_subspace_to_dual() {
    let mut r = rng::seeded(5);
    for i in 0..100 {
        let n = 2 + 2 * (i % 6);
        let s = random_subspace(n, r.random_range(0..=n), &mut r).unwrap();
        let mut st = StateVector::uniform_over(&span_indices(&s).unwrap(), n).unwrap();
        st.hadamard_all();
        let dual = StateVector::uniform_over(&span_indices(&dual_space(&s).unwrap()).unwrap(), n).unwrap();
        for x in 0..st.dim() as u64 {
            assert!((st.amp(x) - dual.amp(x)).norm() < 1e-10);
        }
    }
}

fn cfg(n: usize, trials: u64, seed: u64) -> CounterfeitConfig {
    CounterfeitConfig {
        n,
        trials,
        seed,
        between: None,
    }
}

#[test]
fn measure_and_copy_hits_two_to_minus_n() {
    let rep = counterfeit_experiment(&MeasureAndCopy, &cfg(4, 4000, 1)).unwrap();
    assert!((rep.exact_expected - 2f64.powi(-4)).abs() < 1e-12);
    let p = 2f64.powi(-4);
    let sigma = (p * (1.0 - p) / 4000.0).sqrt();
    assert!((rep.success_rate - p).abs() <= 3.0 * sigma);
    assert!(rep.wilson_95.lo <= p && p <= rep.wilson_95.hi);
}

#[test]
fn honest_forward_exact_value() {
    let rep = counterfeit_experiment(&HonestForward, &cfg(6, 200, 2)).unwrap();
    assert!((rep.exact_expected - 2f64.powi(-3)).abs() < 1e-12);
}

#[test]
fn fixed_guess_matches_intersection_formula() {
    let n = 4;
    let c = cfg(n, 300, 3);
    let rep = counterfeit_experiment(&FixedGuess { seed: 9 }, &c).unwrap();
    let t = random_subspace(n, n / 2, &mut rng::seeded(9)).unwrap();
    let mut expect = 0.0;
    for i in 0..c.trials {
        let note = money_gen(n, &mut rng::stream(c.seed, i)).unwrap();
        let d = qlight_core::gf2::intersection_dim(&note.subspace, &t).unwrap();
        // |⟨$_S|$_T⟩|⁴ = 2^{4(dim(S∩T) − n/2)}.
        expect += 2f64.powi(4 * (d as i32 - (n / 2) as i32));
    }
    assert!((rep.exact_expected - expect / c.trials as f64).abs() < 1e-12);
}

struct Copier;

impl Adversary for Copier {
    fn name(&self) -> &str {
        "copier"
    }

    fn attack(&self, note: &StateVector, oracles: &Oracles, _rng: &mut SimRng) -> Result<StateVector, MoneyError> {
        // The lower bound of the sampling range is always inside S.
        if !oracles.primal.contains(0b0001) {
            return Err(MoneyError::Adversary("hidden space misses e0".into()));
        }
        Ok(note.tensor(note)?)
    }
}

#[test]
fn plug_in_adversaries_and_constrained_sampling() {
    let lower = BitMatrix::from_u8_rows(&[&[1, 0, 0, 0, 0, 0]]).unwrap();
    let upper = BitMatrix::from_u8_rows(&[
        &[1, 0, 0, 0, 0, 0],
        &[0, 1, 0, 0, 0, 0],
        &[0, 0, 1, 0, 0, 0],
        &[0, 0, 0, 1, 0, 0],
    ])
    .unwrap();
    let c = CounterfeitConfig {
        n: 6,
        trials: 50,
        seed: 4,
        between: Some((lower, upper)),
    };
    let rep = counterfeit_experiment(&Copier, &c).unwrap();
    assert_eq!(rep.successes, 50);
    assert!((rep.exact_expected - 1.0).abs() < 1e-12);
}

#[test]
fn reports_are_reproducible() {
    let a = serde_json::to_string(&counterfeit_experiment(&MeasureAndCopy, &cfg(4, 100, 7)).unwrap()).unwrap();
    let b = serde_json::to_string(&counterfeit_experiment(&MeasureAndCopy, &cfg(4, 100, 7)).unwrap()).unwrap();
    assert_eq!(a, b);
}
