use num_bigint::BigUint;
use proptest::prelude::*;
use qlight_core::bounds::*;
use qlight_core::gf2::enumerate_subspaces;
use qlight_core::qsim::{Complex64, StateVector};
use qlight_core::rng;
use rand::Rng;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn basis_family(q: usize) -> Vec<StateVector> {
    (0..1u64 << q).map(|x| StateVector::basis(q, x).unwrap()).collect()
}

#[test]
fn gram_of_simple_families() {
    let s = StateVector::random(3, &mut rng::seeded(0)).unwrap();
    let g = gram_matrix(&vec![s; 4]).unwrap();
    assert!(g.iter().all(|z| (z - c(1.0)).norm() < 1e-12));
    let g = gram_matrix(&basis_family(2)).unwrap();
    assert!((g - CMatrix::identity(4, 4)).norm() < 1e-15);
}

#[test]
fn prior_matrices() {
    let b = prior_matrix(&[0.25; 4]).unwrap();
    assert!(b.iter().all(|z| (z - c(0.25)).norm() < 1e-15));
    let b = prior_matrix(&[0.0, 1.0, 0.0]).unwrap();
    assert_eq!(b.iter().filter(|z| z.norm() > 0.0).count(), 1);
    let b = prior_matrix(&[0.75, 0.25]).unwrap();
    assert!((b[(0, 1)].re - 3f64.sqrt() / 4.0).abs() < 1e-15);
    assert!(prior_matrix(&[1.5, -0.5]).is_err());
}

#[test]
fn trivial_conversion_bounds() {
    let s = StateVector::random(2, &mut rng::seeded(1)).unwrap();
    let p = ConversionProblem {
        family1: vec![s.clone()],
        family2: vec![s],
        prior: vec![1.0],
        dim: 4,
    };
    let r = conversion_bound(&p).unwrap();
    assert!((r.lambda1 - 1.0).abs() < 1e-12);
    assert!((r.f2_bound - 4.0).abs() < 1e-12);
    assert_eq!(r.f2_bound_clipped, 1.0);

    let fam = basis_family(3);
    let p = ConversionProblem {
        family1: fam.clone(),
        family2: fam,
        prior: vec![0.125; 8],
        dim: 8,
    };
    let r = conversion_bound(&p).unwrap();
    assert!((r.lambda1 - 0.125).abs() < 1e-12);
    assert!((r.f2_bound - 1.0).abs() < 1e-12);
}

#[test]
fn invalid_priors_are_rejected() {
    assert!(matches!(
        bound_from_grams(CMatrix::identity(2, 2), CMatrix::identity(2, 2), &[0.5, 0.6], 2),
        Err(BoundsError::Prior(_))
    ));
    assert!(matches!(
        bound_from_grams(CMatrix::identity(3, 3), CMatrix::identity(2, 2), &[0.5, 0.5], 2),
        Err(BoundsError::Shape(_))
    ));
}

fn random_psd(n: usize, seed: u64) -> CMatrix {
    let mut r = rng::seeded(seed);
    let g = CMatrix::from_fn(n, n + 2, |_, _| Complex64::new(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5));
    &g * g.adjoint()
}

#[test]
fn power_iteration_matches_dense_solver() {
    for n in 1..=40 {
        for seed in 0..3 {
            let m = random_psd(n, 100 * n as u64 + seed);
            let p = power_iteration(&m).unwrap();
            let dense = *dense_eigenvalues(&m).last().unwrap();
            assert!((p.lambda - dense).abs() < 1e-8, "n={n}: {} vs {dense}", p.lambda);
        }
    }
}

#[test]
fn power_iteration_handles_degenerate_top_eigenvalue() {
    let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(2.0), c(2.0), c(1.0)]));
    assert!((power_iteration(&m).unwrap().lambda - 2.0).abs() < 1e-10);
    assert_eq!(power_iteration(&CMatrix::zeros(3, 3)).unwrap().lambda, 0.0);
}

#[test]
fn reports_are_psd_and_dominate_the_prior() {
    let mut r = rng::seeded(2);
    for trial in 0..10 {
        let fam: Vec<StateVector> = (0..6).map(|_| StateVector::random(3, &mut r).unwrap()).collect();
        let fam2: Vec<StateVector> = (0..6).map(|_| StateVector::random(2, &mut r).unwrap()).collect();
        let mut prior: Vec<f64> = (0..6).map(|_| r.random::<f64>()).collect();
        let total: f64 = prior.iter().sum();
        prior.iter_mut().for_each(|p| *p /= total);
        let report = conversion_bound(&ConversionProblem {
            family1: fam,
            family2: fam2,
            prior: prior.clone(),
            dim: 8,
        })
        .unwrap();
        let ev = dense_eigenvalues(&report.c);
        assert!(ev[0] >= -1e-9, "trial {trial}");
        let pmax = prior.iter().cloned().fold(0.0, f64::max);
        assert!(report.lambda1 >= pmax - 1e-12);
        assert!((report.lambda1 - report.lambda1_dense.unwrap()).abs() < 1e-8);
    }
}

#[test]
fn cloning_bound_limits() {
    let fam = basis_family(2);
    for k in [1, 2, 5] {
        let r = cloning_bound(&fam, &[0.25; 4], k).unwrap();
        assert!((r.f2_bound - 1.0).abs() < 1e-12);
    }
    let s = StateVector::random(2, &mut rng::seeded(3)).unwrap();
    let r = cloning_bound(&vec![s; 3], &[1.0 / 3.0; 3], 2).unwrap();
    assert!((r.lambda1 - 1.0).abs() < 1e-12);
    assert!((r.f2_bound - 4.0).abs() < 1e-12);

    // Eight distinct real states in dimension 4: the bound falls to d/n.
    let mut rr = rng::seeded(4);
    let fam: Vec<StateVector> = (0..8)
        .map(|_| {
            let amps = (0..4).map(|_| c(rr.random::<f64>() - 0.5)).collect();
            StateVector::normalized(2, amps).unwrap()
        })
        .collect();
    let r1 = cloning_bound(&fam, &[0.125; 8], 1).unwrap();
    let r64 = cloning_bound(&fam, &[0.125; 8], 64).unwrap();
    assert!(r64.f2_bound < r1.f2_bound);
    // Gershgorin: |λ₁(A^{∘65}) − 1| ≤ 7·max|A_ij|^65 off the diagonal.
    let g = gram_matrix(&fam).unwrap();
    let off = (0..8)
        .flat_map(|i| (0..8).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| g[(i, j)].norm())
        .fold(0.0, f64::max);
    let slack = 4.0 / 8.0 * 7.0 * off.powi(65);
    assert!((r64.f2_bound - 0.5).abs() <= slack + 1e-12, "{} {slack}", r64.f2_bound);
}

#[test]
fn subspace_counts() {
    assert_eq!(count_subspaces(1, 2, 2), BigUint::from(3u32));
    assert_eq!(count_subspaces(2, 4, 2), BigUint::from(35u32));
    assert_eq!(count_ordered_bases(1, 2, 2), BigUint::from(3u32));
    assert_eq!(count_ordered_bases(2, 2, 2), BigUint::from(6u32));
    assert_eq!(count_subspaces(2, 2, 2), BigUint::from(1u32));
    for n in 1..=6 {
        for d in 0..=n {
            assert_eq!(
                count_subspaces(d, n, 2),
                BigUint::from(enumerate_subspaces(n, d).unwrap().len())
            );
        }
    }
}

#[test]
fn subspace_example_small_cases() {
    let r = subspace_example(4, 2).unwrap();
    let e = r.exact.unwrap();
    assert_eq!(e.subspaces, 35);
    assert_eq!(e.dim, 16);
    assert!(e.gram_closed_form_error < 1e-12);
    // Each S meets 1, 18 and 16 subspaces in dimension 2, 1, 0:
    // λ₁ = (1 + 18/8 + 16/64) / 35.
    assert!((e.lambda1 - 0.1).abs() < 1e-10);
    assert!((r.analytic.lambda1_exact - e.lambda1).abs() < 1e-10);
    assert_eq!(e.lambda_check, e.lambda1 <= e.lambda_bound);
    let t = subspace_example(2, 2).unwrap();
    assert_eq!(t.exact.unwrap().subspaces, 3);
    assert_eq!(t.analytic.f2_bound, 1.0);
    assert!(subspace_example(8, 2).unwrap().exact.is_none());
    assert!(subspace_example(3, 2).is_err());
}

#[test]
fn subspace_chain_for_larger_fields() {
    for (n, q) in [(8, 2), (10, 3), (12, 5), (40, 2)] {
        let a = subspace_chain(n, q).unwrap();
        assert!(a.lambda1_exact <= a.sum_subspaces * (1.0 + 1e-12));
        assert!(a.sum_claimed <= a.lambda_bound, "n={n} q={q}");
        for t in &a.terms {
            assert!(t.ratio_printed <= t.ratio_claimed * (1.0 + 1e-12));
        }
    }
}

#[test]
fn exact_subspace_lambda_matches_dense() {
    let spaces = enumerate_subspaces(4, 2).unwrap();
    let e = subspace_exact(4).unwrap();
    assert_eq!(spaces.len(), e.subspaces);
    assert!((e.lambda1 - e.lambda1_dense.unwrap()).abs() < 1e-10);
}

proptest! {
    #[test]
    fn intersection_counts_partition(n in 1usize..9, s in 0usize..9, t in 0usize..9, q in prop::sample::select(vec![2u64, 3, 4, 5])) {
        prop_assume!(s <= n && t <= n);
        let total: BigUint = (0..=t).map(|k| count_with_intersection(n, s, t, k, q)).sum();
        prop_assert_eq!(total, count_subspaces(t, n, q));
    }

    #[test]
    fn hadamard_power_is_entrywise(seed in 0u64..500, k in 0usize..5) {
        let m = random_psd(4, seed);
        let p = hadamard_power(&m, k);
        for i in 0..4 {
            for j in 0..4 {
                let mut want = c(1.0);
                for _ in 0..k { want *= m[(i, j)]; }
                prop_assert!((p[(i, j)] - want).norm() < 1e-12 * (1.0 + want.norm()));
            }
        }
    }
}
