use ndarray::Array1;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vnet_core::factorized_interactions::{eval_bare_two, eval_eff_two, KernelMatrix};
use vnet_core::tensor_store::Symmetry;

fn draw(seed: u64, ell: usize) -> (Vec<Array1<f64>>, Vec<Array1<f64>>, KernelMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = || Array1::from_iter((0..ell).map(|_| rng.random_range(-2.0..2.0)));
    let phi: Vec<_> = (0..4).map(|_| v()).collect();
    let tilde: Vec<_> = (0..4).map(|_| v()).collect();
    let upper: Vec<f64> = (0..ell * (ell + 1) / 2).map(|_| rng.random_range(-1.0..1.0)).collect();
    (phi, tilde, KernelMatrix::from_upper(ell, &upper).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn bare_head_is_eightfold_invariant(seed in any::<u64>(), ell in 1usize..24) {
        let (phi, _, w) = draw(seed, ell);
        let f = |[a, b, c, d]: [usize; 4]| {
            eval_bare_two(phi[a].view(), phi[b].view(), phi[c].view(), phi[d].view(), &w).unwrap()
        };
        let base = f([0, 1, 2, 3]);
        for img in Symmetry::EightFold.images([0, 1, 2, 3]) {
            prop_assert!((f(img) - base).abs() < 1e-14);
        }
    }

    #[test]
    fn effective_head_is_fourfold_invariant(seed in any::<u64>(), ell in 1usize..24) {
        let (phi, tilde, w) = draw(seed, ell);
        let f = |[a, b, c, d]: [usize; 4]| {
            eval_eff_two(
                phi[a].view(), phi[b].view(), phi[c].view(), phi[d].view(),
                tilde[a].view(), tilde[b].view(), tilde[c].view(), tilde[d].view(),
                &w,
            )
            .unwrap()
        };
        let base = f([0, 1, 2, 3]);
        for img in Symmetry::FourFold.images([0, 1, 2, 3]) {
            prop_assert!((f(img) - base).abs() < 1e-14);
        }
    }

    #[test]
    fn effective_head_reduces_to_bare(seed in any::<u64>(), ell in 1usize..24) {
        let (phi, _, w) = draw(seed, ell);
        let v = |k: usize| phi[k].view();
        let bare = eval_bare_two(v(0), v(1), v(2), v(3), &w).unwrap();
        let eff = eval_eff_two(v(0), v(1), v(2), v(3), v(0), v(1), v(2), v(3), &w).unwrap();
        prop_assert_eq!(bare.to_bits(), eff.to_bits());
    }
}
