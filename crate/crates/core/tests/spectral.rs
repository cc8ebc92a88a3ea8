use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vnet_core::factorized_interactions::KernelMatrix;
use vnet_core::spectral_analysis::{align_eigensystems, eig_sym, jacobi_eigh, project_kernel};

fn random_symmetric(n: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let v: f64 = rng.random_range(-1.0..1.0);
            m[[i, j]] = v;
            m[[j, i]] = v;
        }
    }
    m
}

#[test]
fn random_matrices_reconstruct_and_stay_orthogonal() {
    for (n, seed) in [(1, 1), (2, 2), (7, 3), (50, 4), (300, 5)] {
        let m = random_symmetric(n, seed);
        let e = jacobi_eigh(m.view()).unwrap();
        assert!(e.residual(m.view()) < 1e-10, "n={n} residual {}", e.residual(m.view()));
        assert!(e.orthogonality_error() < 1e-10, "n={n}");
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }
}

#[test]
fn identity_has_unit_spectrum() {
    let e = eig_sym(&KernelMatrix::identity(5)).unwrap();
    assert!(e.values.iter().all(|&v| v == 1.0));
    assert!(e.orthogonality_error() < 1e-15);
}

#[test]
fn alignment_ignores_column_sign_flips() {
    let m = random_symmetric(12, 9);
    let b = jacobi_eigh(m.view()).unwrap();
    let mut flipped = b.clone();
    for c in [0, 3, 7] {
        flipped.vectors.column_mut(c).mapv_inplace(|v| -v);
    }
    let a1 = align_eigensystems(&b, &b).unwrap();
    let a2 = align_eigensystems(&b, &flipped).unwrap();
    let a3 = align_eigensystems(&flipped, &b).unwrap();
    assert_eq!(a1.perm, a2.perm);
    assert_eq!(a1.perm, a3.perm);
    assert!((&a1.overlap - &a2.overlap).iter().all(|v| v.abs() < 1e-14));
    assert!((&a1.overlap - &a3.overlap).iter().all(|v| v.abs() < 1e-14));
}

#[test]
fn projection_preserves_frobenius_norm() {
    let k = KernelMatrix::from_matrix(random_symmetric(20, 11).view(), 0.0).unwrap();
    let z = jacobi_eigh(random_symmetric(20, 12).view()).unwrap().vectors;
    let p = project_kernel(&k, z.view()).unwrap();
    let f = |m: &Array2<f64>| m.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!((f(&p) - f(k.matrix())).abs() < 1e-12 * f(k.matrix()));
}
