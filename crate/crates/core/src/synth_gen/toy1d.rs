//! One-dimensional surrogate for one- and two-electron integrals.
//!
//! Basis functions are normalized Gaussians. The one-body operator is
//! `−½ d²/dx² + ½ x²` with an 8th-order finite-difference Laplacian, and the
//! two-body kernel is `1/(|x − x'| + a)`.
//!
//! The kernel has a kink on the diagonal, which plain trapezoid quadrature
//! only resolves to O(h²). Because the kink sits on a grid node, the
//! Euler–Maclaurin boundary terms of the two half-intervals meeting there
//! can be added back exactly: for `f(x') = ρ(x')·g(x' − c)`,
//!
//! ```text
//! ∫ f = T_h[f] + Σ_k B_2k h^2k / (2k)! · J_{2k−1},
//! J_m = Σ_{j odd} C(m, j) ρ^(m−j)(c) · (−2 j! / a^(j+1)),
//! ```
//!
//! where `J_m` is the jump of `f^(m)` across `c`. The densities are products
//! of Gaussians, so their derivatives come from Hermite polynomials.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::tensor_store::{one_body_unit_indices, two_body_unit_indices, Kind, Symmetry, TensorSet};

pub const DEFAULT_SOFTENING: f64 = 0.1;
/// Euler–Maclaurin kink terms added to every inner integral.
pub const KINK_TERMS: usize = 5;
const POINTS_PER_WIDTH: f64 = 8.0;

/// `(πσ²)^(−1/4) exp(−(x − center)² / (2σ²))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gaussian1d {
    pub center: f64,
    pub width: f64,
}

impl Gaussian1d {
    fn norm(&self) -> f64 {
        (std::f64::consts::PI * self.width * self.width).powf(-0.25)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let u = (x - self.center) / self.width;
        self.norm() * (-0.5 * u * u).exp()
    }
}

/// Uniform grid of `n` points on `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureGrid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl QuadratureGrid {
    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.n).map(|i| self.lo + h * i as f64).collect()
    }

    /// Same interval with the step halved.
    pub fn refined(&self) -> Self {
        QuadratureGrid {
            n: 2 * self.n - 1,
            ..*self
        }
    }
}

/// `ρ = φ_p φ_q` as `C exp(−(x − m)² / (2s²))`.
#[derive(Clone, Copy, Debug)]
struct Density {
    c: f64,
    m: f64,
    s: f64,
}

impl Density {
    fn of(a: &Gaussian1d, b: &Gaussian1d) -> Self {
        let (va, vb) = (a.width * a.width, b.width * b.width);
        let prec = 1.0 / va + 1.0 / vb;
        let s2 = 1.0 / prec;
        let m = s2 * (a.center / va + b.center / vb);
        let d = a.center - b.center;
        let c = a.norm() * b.norm() * (-0.5 * d * d / (va + vb)).exp();
        Density { c, m, s: s2.sqrt() }
    }

    /// `ρ, ρ', …, ρ^(order)` at `x` via `d^n e^{−u²/2} = (−1/s)^n He_n(u) e^{−u²/2}`.
    fn derivatives(&self, x: f64, order: usize) -> Vec<f64> {
        let u = (x - self.m) / self.s;
        let base = self.c * (-0.5 * u * u).exp();
        let mut he = vec![1.0; order + 1];
        if order >= 1 {
            he[1] = u;
        }
        for k in 1..order {
            he[k + 1] = u * he[k] - k as f64 * he[k - 1];
        }
        let mut scale = 1.0;
        (0..=order)
            .map(|n| {
                let v = scale * he[n] * base;
                scale *= -1.0 / self.s;
                v
            })
            .collect()
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// B_2, B_4, …, B_{2K}.
const BERNOULLI_EVEN: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// Integrals plus any resolution warnings.
#[derive(Clone, Debug, PartialEq)]
pub struct ToyIntegrals {
    pub set: TensorSet,
    pub warnings: Vec<String>,
}

pub fn toy_integrals_1d(
    system: &str,
    geometry: f64,
    basis: &[Gaussian1d],
    grid: QuadratureGrid,
    softening: f64,
) -> Result<ToyIntegrals> {
    if basis.is_empty() {
        return Err(Error::Invalid("toy integrals need at least one basis function".into()));
    }
    if let Some(g) = basis.iter().find(|g| !(g.width > 0.0) || !g.center.is_finite()) {
        return Err(Error::Invalid(format!("bad Gaussian {g:?}")));
    }
    if grid.n < 9 || !(grid.hi > grid.lo) {
        return Err(Error::Invalid(format!("quadrature grid {grid:?} is too small")));
    }
    if !(softening > 0.0) {
        return Err(Error::Invalid("softening must be positive".into()));
    }
    let h = grid.step();
    let mut warnings = Vec::new();
    let min_width = basis.iter().map(|g| g.width).fold(f64::INFINITY, f64::min);
    if h > min_width / POINTS_PER_WIDTH {
        warnings.push(format!(
            "grid step {h} under-resolves width {min_width} (needs <= {})",
            min_width / POINTS_PER_WIDTH
        ));
    }
    for g in basis {
        let edge = g.eval(grid.lo).abs().max(g.eval(grid.hi).abs());
        if edge > 1e-14 * g.norm() {
            warnings.push(format!(
                "Gaussian at {} is not negligible at the grid edge ({edge:e})",
                g.center
            ));
        }
    }

    let xs = grid.points();
    let n = basis.len();
    let npts = xs.len();
    let weights: Array1<f64> = Array1::from_shape_fn(npts, |i| if i == 0 || i == npts - 1 { 0.5 * h } else { h });
    let phi = Array2::from_shape_fn((n, npts), |(p, i)| basis[p].eval(xs[i]));

    // One-body: Σ w φ_p (H φ_q).
    let lap = laplacian_8th(&phi, h);
    let mut one = Vec::new();
    for [p, q] in one_body_unit_indices(n) {
        let hq = (0..npts).map(|i| -0.5 * lap[[q, i]] + 0.5 * xs[i] * xs[i] * phi[[q, i]]);
        let v: f64 = hq.zip(0..npts).map(|(hv, i)| weights[i] * phi[[p, i]] * hv).sum();
        one.push(([p, q], v));
    }

    // Two-body: inner integral per canonical pair, then outer trapezoid.
    let a = softening;
    let kernel = Array2::from_shape_fn((npts, npts), |(i, j)| weights[j] / ((xs[i] - xs[j]).abs() + a));
    let pairs = one_body_unit_indices(n);
    let mut inner = Vec::with_capacity(pairs.len());
    let mut outer_rho = Vec::with_capacity(pairs.len());
    let order = 2 * KINK_TERMS - 1;
    let em: Vec<f64> = (1..=KINK_TERMS)
        .map(|k| BERNOULLI_EVEN[k - 1] * h.powi(2 * k as i32) / factorial(2 * k))
        .collect();
    for &[r, s] in &pairs {
        let dens = Density::of(&basis[r], &basis[s]);
        let derivs: Vec<Vec<f64>> = xs.iter().map(|&x| dens.derivatives(x, order)).collect();
        let rho = Array1::from_iter(derivs.iter().map(|d| d[0]));
        let mut integral = kernel.dot(&rho);
        for (i, d) in derivs.iter().enumerate() {
            let mut corr = 0.0;
            for (k, coef) in em.iter().enumerate() {
                let m = 2 * k + 1;
                let jump: f64 = (1..=m)
                    .step_by(2)
                    .map(|j| binomial(m, j) * d[m - j] * (-2.0 * factorial(j) / a.powi(j as i32 + 1)))
                    .sum();
                corr += coef * jump;
            }
            integral[i] += corr;
        }
        inner.push(integral);
        outer_rho.push(&rho * &weights);
    }
    let pair_index = |p: usize, q: usize| pairs.iter().position(|&x| x == [p.min(q), p.max(q)]).unwrap();
    let mut two = Vec::new();
    for [p, q, r, s] in two_body_unit_indices(n, Symmetry::EightFold) {
        let v = outer_rho[pair_index(p, q)].dot(&inner[pair_index(r, s)]);
        two.push(([p, q, r, s], v));
    }
    let set = TensorSet::from_unit(system, geometry, Kind::Bare, n, 0.0, one, two)?;
    Ok(ToyIntegrals { set, warnings })
}

/// Second derivative along each row with the 9-point central stencil and
/// zero values beyond the grid.
fn laplacian_8th(f: &Array2<f64>, h: f64) -> Array2<f64> {
    const C: [f64; 5] = [-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];
    let (rows, n) = f.dim();
    let inv = 1.0 / (h * h);
    Array2::from_shape_fn((rows, n), |(r, i)| {
        let mut acc = C[0] * f[[r, i]];
        for (k, c) in C.iter().enumerate().skip(1) {
            let left = if i >= k { f[[r, i - k]] } else { 0.0 };
            let right = if i + k < n { f[[r, i + k]] } else { 0.0 };
            acc += c * (left + right);
        }
        acc * inv
    })
}
