//! Small dense complex linear algebra: Hermitian eigensolver, LU solve, and
//! unitary exp/log.

use ndarray::{Array1, Array2, ArrayView2};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = Array2<C64>;

const HERM_TOL: f64 = 1e-15;
const MAX_SWEEPS: usize = 100;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    Array2::from_shape_fn((n, n), |(i, j)| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) })
}

pub fn from_real(a: ArrayView2<f64>) -> CMat {
    a.mapv(|x| c(x, 0.0))
}

/// Conjugate transpose.
pub fn dagger(a: &CMat) -> CMat {
    a.t().mapv(|z| z.conj())
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn frobenius(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a.dot(b) - b.dot(a)
}

/// `max |A − A†|`.
pub fn hermiticity_error(a: &CMat) -> f64 {
    max_abs(&(a - &dagger(a)))
}

/// Real eigenvalues (ascending) and unitary eigenvectors (columns) of a
/// Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermEigen {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl HermEigen {
    /// `V f(Λ) V†` for a complex-valued spectral function.
    pub fn apply(&self, f: impl Fn(f64) -> C64) -> CMat {
        let d = Array1::from_iter(self.values.iter().map(|&x| f(x)));
        (&self.vectors * &d).dot(&dagger(&self.vectors))
    }
}

/// Cyclic complex Jacobi. Each rotation first removes the phase of the pivot
/// and then applies the real symmetric rotation.
pub fn herm_eigh(a: &CMat) -> Result<HermEigen> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Shape(format!(
            "eigensolver needs a square matrix, got {:?}",
            a.shape()
        )));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("matrix passed to the Hermitian eigensolver".into()));
    }
    let scale = max_abs(a).max(f64::MIN_POSITIVE);
    if hermiticity_error(a) > 1e-10 * scale {
        return Err(Error::Invalid(format!(
            "matrix is not Hermitian (|A - A†| = {:e})",
            hermiticity_error(a)
        )));
    }
    let mut m = (a + &dagger(a)).mapv(|z| z * 0.5);
    let mut v = identity(n);
    let total = frobenius(&m).max(f64::MIN_POSITIVE);
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[[i, j]].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= HERM_TOL * total {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[[p, q]];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                // Phase: scale column q by e^{-iφ} and row q by e^{iφ}.
                let ph = apq / r;
                let phc = ph.conj();
                for k in 0..n {
                    m[[k, q]] *= phc;
                    v[[k, q]] *= phc;
                }
                for k in 0..n {
                    m[[q, k]] *= ph;
                }
                let tau = (m[[q, q]].re - m[[p, p]].re) / (2.0 * r);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let (mp, mq) = (m[[k, p]], m[[k, q]]);
                    m[[k, p]] = mp * cs - mq * sn;
                    m[[k, q]] = mp * sn + mq * cs;
                    let (vp, vq) = (v[[k, p]], v[[k, q]]);
                    v[[k, p]] = vp * cs - vq * sn;
                    v[[k, q]] = vp * sn + vq * cs;
                }
                for k in 0..n {
                    let (mp, mq) = (m[[p, k]], m[[q, k]]);
                    m[[p, k]] = mp * cs - mq * sn;
                    m[[q, k]] = mp * sn + mq * cs;
                }
                m[[p, q]] = c(0.0, 0.0);
                m[[q, p]] = c(0.0, 0.0);
                m[[p, p]].im = 0.0;
                m[[q, q]].im = 0.0;
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[i, i]].re.total_cmp(&m[[j, j]].re));
    let values = order.iter().map(|&i| m[[i, i]].re).collect();
    let vectors = Array2::from_shape_fn((n, n), |(r, k)| v[[r, order[k]]]);
    Ok(HermEigen { values, vectors })
}

/// Solves `A X = B` by LU with partial pivoting.
pub fn solve(a: &CMat, b: &CMat) -> Result<CMat> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(Error::Shape(format!(
            "solve: A is {:?}, B is {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let mut lu = a.clone();
    let mut x = b.clone();
    let scale = max_abs(a).max(f64::MIN_POSITIVE);
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| lu[[i, k]].norm().total_cmp(&lu[[j, k]].norm()))
            .unwrap();
        if lu[[piv, k]].norm() <= 1e-14 * scale {
            return Err(Error::Numerical(format!("singular matrix in solve (pivot {k})")));
        }
        if piv != k {
            for j in 0..n {
                lu.swap([k, j], [piv, j]);
            }
            for j in 0..x.ncols() {
                x.swap([k, j], [piv, j]);
            }
        }
        let d = lu[[k, k]];
        for i in k + 1..n {
            let f = lu[[i, k]] / d;
            if f == c(0.0, 0.0) {
                continue;
            }
            for j in k..n {
                let t = lu[[k, j]];
                lu[[i, j]] -= f * t;
            }
            for j in 0..x.ncols() {
                let t = x[[k, j]];
                x[[i, j]] -= f * t;
            }
        }
    }
    for k in (0..n).rev() {
        for j in 0..x.ncols() {
            let mut s = x[[k, j]];
            for i in k + 1..n {
                s -= lu[[k, i]] * x[[i, j]];
            }
            x[[k, j]] = s / lu[[k, k]];
        }
    }
    Ok(x)
}

/// `e^G` for anti-Hermitian `G`, via the eigendecomposition of `iG`.
pub fn expm_anti_hermitian(g: &CMat) -> Result<CMat> {
    let e = herm_eigh(&g.mapv(|z| z * c(0.0, 1.0)))?;
    // iG = V μ V†  ⇒  G = V (−iμ) V†.
    Ok(e.apply(|mu| c(0.0, -mu).exp()))
}

/// Principal logarithm of a unitary matrix.
///
/// The Cayley transform `K = (I − U)(I + U)⁻¹` is anti-Hermitian, and an
/// eigenvalue `e^{iθ}` of `U` maps to `−i tan(θ/2)` of `K`, so
/// `log U = V diag(2i·atan(λ)) V†` with `iK = V λ V†`.
pub fn logm_unitary(u: &CMat) -> Result<CMat> {
    let n = u.nrows();
    let id = identity(n);
    let unit_err = max_abs(&(dagger(u).dot(u) - &id));
    if unit_err > 1e-10 {
        return Err(Error::Invalid(format!(
            "matrix is not unitary (|U†U - I| = {unit_err:e})"
        )));
    }
    // (I + U)⁻¹ and (I − U) commute, so solving gives K directly.
    let k = solve(&(&id + u), &(&id - u))
        .map_err(|_| Error::Numerical("unitary has an eigenvalue at -1; principal logarithm is undefined".into()))?;
    let ik = k.mapv(|z| z * c(0.0, 1.0));
    let ik = (&ik + &dagger(&ik)).mapv(|z| z * 0.5);
    let e = herm_eigh(&ik)?;
    Ok(e.apply(|lam| c(0.0, 2.0 * lam.atan())))
}

/// `A^{-1/2}` for Hermitian positive definite `A`.
pub fn inv_sqrt_hpd(a: &CMat) -> Result<CMat> {
    let e = herm_eigh(a)?;
    let lo = e.values.first().copied().unwrap_or(1.0);
    if !(lo > 0.0) {
        return Err(Error::Numerical(format!(
            "matrix is not positive definite (min eigenvalue {lo:e})"
        )));
    }
    Ok(e.apply(|x| c(1.0 / x.sqrt(), 0.0)))
}
