use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vnet_core::suzuki_lab::*;

fn random_anti_hermitian(n: usize, rng: &mut impl Rng, scale: f64) -> CMat {
    let a = Array2::from_shape_fn((n, n), |_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    (&a - &dagger(&a)).mapv(|z| z * (0.5 * scale))
}

fn random_hermitian(n: usize, rng: &mut impl Rng) -> CMat {
    let a = Array2::from_shape_fn((n, n), |_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    (&a + &dagger(&a)).mapv(|z| z * 0.5)
}

#[test]
fn nested_commutator_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for n in [2, 5, 10, 16] {
        let a = random_anti_hermitian(n, &mut rng, 0.5);
        let b = random_hermitian(n, &mut rng);
        for i in 1..=6 {
            let err = commutator_law_error(&a, &b, i).unwrap();
            assert!(err < 1e-10, "n={n} i={i} err={err:e}");
        }
    }
}

#[test]
fn commuting_operand_gives_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let a = random_anti_hermitian(6, &mut rng, 1.0);
    let b = a.dot(&a);
    for i in 1..=4 {
        assert!(max_abs(&ituple_commutator(&a, &b, i).unwrap()) < 1e-12);
    }
}

#[test]
fn tanh_of_imaginary_argument() {
    for a in [0.0, 0.3, -0.3, 1.0, -1.0, 1.5, -1.5] {
        assert!(tanh_identity_error(a, 1.0) < 1e-14, "a={a}");
    }
    // The opposite sign only holds at a = 0.
    assert!(tanh_identity_error(0.3, -1.0) > 0.5);
}

#[test]
fn series_matches_closed_form_when_convergent() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..20 {
        let n = 4 + trial % 6;
        let g = random_anti_hermitian(n, &mut rng, 0.15);
        let hod = random_hermitian(n, &mut rng);
        let spread = half_generator_spread(&g).unwrap();
        if spread > 0.5 {
            continue;
        }
        let s = z_tanh_series(&g, &hod, 12).unwrap();
        assert!(s.convergent);
        let closed = z_tanh_closed(&g, &hod).unwrap();
        let err = max_abs(&(&s.value - &closed));
        assert!(err < 1e-10, "spread {spread} err {err:e}");
    }
}

#[test]
fn closed_form_rejects_large_spread() {
    let g = ndarray::arr2(&[[c(0.0, 2.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, -2.0)]]);
    let hod = ndarray::arr2(&[[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]);
    assert!(z_tanh_closed(&g, &hod).is_err());
    assert!(!z_tanh_series(&g, &hod, 3).unwrap().convergent);
}

#[test]
fn w_identity_small_coupling() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for r_dim in [2, 3, 4] {
        for _ in 0..10 {
            let prob = random_problem(10, r_dim, 0.05, &mut rng).unwrap();
            let rep = verify_w_identity(&prob, 12).unwrap();
            assert!(rep.generator.rgr < 1e-10 && rep.generator.qgq < 1e-10);
            assert!(rep.generator.decoupling < 1e-10);
            assert!(rep.rel_frobenius < 1e-8, "r_dim={r_dim} rel={:e}", rep.rel_frobenius);
            assert!(hermiticity_error(&rep.lhs) < 1e-12);
            let gen = &rep.generator;
            assert!(spectrum_split_error(&prob, gen).unwrap() < 1e-10);
        }
    }
}

#[test]
fn sweep_reports_every_coupling() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let couplings = [0.01, 0.05, 0.1, 0.2, 0.5];
    let rows = coupling_sweep(8, 3, &couplings, 5, &mut rng).unwrap();
    assert_eq!(rows.len(), couplings.len());
    let csv = sweep_csv(&rows).render();
    assert!(csv.starts_with("coupling,trials,failures,mean_rel,max_rel,max_abs,mean_spread\n"));
    for r in &rows {
        println!("{r:?}");
    }
}
