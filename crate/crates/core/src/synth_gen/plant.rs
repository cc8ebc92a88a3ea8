use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use super::TanParams;
use crate::error::{Error, Result};
use crate::factorized_interactions::{eval_bare_two, eval_eff_two, eval_one, KernelMatrix};
use crate::io_util::fmt_f64;
use crate::nn_core::{Block, Checkpoint, ShapeSpec};
use crate::tan_model::MARGIN;
use crate::tensor_store::{two_body_unit_indices, GeometrySeries, Kind, Symmetry, TensorSet};

/// Everything needed to generate a planted series.
#[derive(Clone, Debug, PartialEq)]
pub struct PlantSpec {
    pub system: String,
    pub n_orb: usize,
    pub ell: usize,
    pub geometries: Vec<f64>,
    /// Chebyshev order of the pseudo-orbital curves in the geometry.
    pub order: usize,
    /// Bare eigenvalues run linearly from `eig_hi/ℓ` down to `eig_lo/ℓ`.
    pub eig_lo: f64,
    pub eig_hi: f64,
    pub two_body_tan: TanParams,
    pub one_body_tan: TanParams,
    pub eta: f64,
    pub noise: f64,
    pub seed: u64,
}

impl PlantSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_orb == 0 || self.ell == 0 {
            return Err(Error::Invalid("n_orb and ell must be positive".into()));
        }
        if self.geometries.is_empty() {
            return Err(Error::Invalid("plant needs at least one geometry".into()));
        }
        if self.geometries.windows(2).any(|w| !(w[0] < w[1])) || self.geometries.iter().any(|r| !r.is_finite()) {
            return Err(Error::Invalid(
                "plant geometries must be finite and strictly increasing".into(),
            ));
        }
        if !(self.eig_lo > 0.0 && self.eig_hi >= self.eig_lo) {
            return Err(Error::Invalid(
                "planted spectrum must be positive and bounded away from zero".into(),
            ));
        }
        if !(self.noise >= 0.0) || !self.eta.is_finite() {
            return Err(Error::Invalid("noise must be >= 0 and eta finite".into()));
        }
        for (name, t) in [("two-body", self.two_body_tan), ("one-body", self.one_body_tan)] {
            t.check_range(self.ell)
                .map_err(|e| Error::Invalid(format!("{name} tan law: {e}")))?;
        }
        Ok(())
    }

    fn cheb_x(&self, r: f64) -> f64 {
        let lo = self.geometries[0];
        let hi = *self.geometries.last().unwrap();
        if hi > lo {
            2.0 * (r - lo) / (hi - lo) - 1.0
        } else {
            0.0
        }
    }
}

impl TanParams {
    /// Every index `1..=ell` keeps `|rate(i − center)| < π/2 − MARGIN`.
    pub fn check_range(&self, ell: usize) -> Result<()> {
        let lim = std::f64::consts::FRAC_PI_2 - MARGIN;
        for i in [1.0, ell as f64] {
            let x = self.rate * (i - self.center);
            if !(x.abs() < lim) {
                return Err(Error::Invalid(format!(
                    "argument {x} at index {i} leaves (-pi/2, pi/2) minus the margin"
                )));
            }
        }
        Ok(())
    }

    pub fn factor(&self, i: usize) -> f64 {
        1.0 + self.amplitude * (self.rate * (i as f64 - self.center)).tan()
    }
}

/// Planted objects behind a series.
#[derive(Clone, Debug, PartialEq)]
pub struct Plant {
    pub spec: PlantSpec,
    /// `[orbital][latent][chebyshev]`, flattened row-major.
    pub phi_coef: Vec<f64>,
    pub psi_coef: Vec<f64>,
    pub deform_coef: Vec<f64>,
    pub z_two: Array2<f64>,
    pub z_one: Array2<f64>,
    pub eps_two_b: Vec<f64>,
    pub eps_two_d: Vec<f64>,
    pub eps_one_b: Vec<f64>,
    pub eps_one_d: Vec<f64>,
    pub wb: KernelMatrix,
    pub wd: KernelMatrix,
    pub mb: KernelMatrix,
    pub md: KernelMatrix,
}

fn chebyshev(x: f64, order: usize) -> Vec<f64> {
    let mut t = vec![1.0; order + 1];
    if order >= 1 {
        t[1] = x;
    }
    for m in 2..=order {
        t[m] = 2.0 * x * t[m - 1] - t[m - 2];
    }
    t
}

fn draw_coef(rng: &mut ChaCha8Rng, n_orb: usize, ell: usize, order: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_orb * ell * (order + 1));
    for _ in 0..n_orb * ell {
        for m in 0..=order {
            let u: f64 = rng.random_range(-1.0..1.0);
            out.push(u * 0.5f64.powi(m as i32));
        }
    }
    out
}

/// Orthogonal matrix from Gram–Schmidt (applied twice) on a Gaussian draw.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Array2<f64> {
    let mut q = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        for i in 0..n {
            q[[i, j]] = StandardNormal.sample(rng);
        }
    }
    for j in 0..n {
        for _ in 0..2 {
            for k in 0..j {
                let d = q.column(k).dot(&q.column(j));
                let ck = q.column(k).to_owned();
                q.column_mut(j).scaled_add(-d, &ck);
            }
        }
        let norm = q.column(j).dot(&q.column(j)).sqrt();
        q.column_mut(j).mapv_inplace(|v| v / norm);
    }
    q
}

/// `Z diag(eps) Zᵀ`, symmetrized through the upper triangle.
pub fn kernel_from_eigen(z: &Array2<f64>, eps: &[f64]) -> Result<KernelMatrix> {
    let scaled = z * &Array1::from(eps.to_vec());
    let m = scaled.dot(&z.t());
    KernelMatrix::from_matrix(m.view(), f64::INFINITY)
}

impl Plant {
    pub fn new(spec: &PlantSpec) -> Result<Self> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let (n, ell, order) = (spec.n_orb, spec.ell, spec.order);
        let phi_coef = draw_coef(&mut rng, n, ell, order);
        let psi_coef = draw_coef(&mut rng, n, ell, order);
        let deform_coef = draw_coef(&mut rng, n, ell, order);
        let z_two = random_orthogonal(&mut rng, ell);
        let z_one = random_orthogonal(&mut rng, ell);
        let base: Vec<f64> = (0..ell)
            .map(|k| {
                let f = if ell > 1 { k as f64 / (ell - 1) as f64 } else { 0.0 };
                (spec.eig_hi - (spec.eig_hi - spec.eig_lo) * f) / ell as f64
            })
            .collect();
        let apply = |t: &TanParams| -> Vec<f64> { base.iter().enumerate().map(|(k, e)| e * t.factor(k + 1)).collect() };
        let eps_two_d = apply(&spec.two_body_tan);
        let eps_one_d = apply(&spec.one_body_tan);
        Ok(Plant {
            spec: spec.clone(),
            wb: kernel_from_eigen(&z_two, &base)?,
            wd: kernel_from_eigen(&z_two, &eps_two_d)?,
            mb: kernel_from_eigen(&z_one, &base)?,
            md: kernel_from_eigen(&z_one, &eps_one_d)?,
            phi_coef,
            psi_coef,
            deform_coef,
            z_two,
            z_one,
            eps_two_b: base.clone(),
            eps_two_d,
            eps_one_b: base,
            eps_one_d,
        })
    }

    fn curves(&self, coef: &[f64], r: f64) -> Array2<f64> {
        let (n, ell, order) = (self.spec.n_orb, self.spec.ell, self.spec.order);
        let t = chebyshev(self.spec.cheb_x(r), order);
        Array2::from_shape_fn((n, ell), |(p, k)| {
            let c = &coef[(p * ell + k) * (order + 1)..(p * ell + k + 1) * (order + 1)];
            c.iter().zip(&t).map(|(a, b)| a * b).sum()
        })
    }

    /// Two-body pseudo-orbitals at `r`, one row per orbital.
    pub fn phi(&self, r: f64) -> Array2<f64> {
        self.curves(&self.phi_coef, r)
    }

    pub fn psi(&self, r: f64) -> Array2<f64> {
        self.curves(&self.psi_coef, r)
    }

    /// `φ̃ = φ ⊙ (1 + η·d(R))`.
    pub fn phi_tilde(&self, r: f64) -> Array2<f64> {
        let d = self.curves(&self.deform_coef, r);
        &self.phi(r) * &d.mapv(|v| 1.0 + self.spec.eta * v)
    }

    /// Bare and effective sets at `r`, before noise.
    pub fn sets_at(&self, r: f64) -> Result<(TensorSet, TensorSet)> {
        let n = self.spec.n_orb;
        let phi = self.phi(r);
        let psi = self.psi(r);
        let tilde = self.phi_tilde(r);
        let pairs = crate::tensor_store::one_body_unit_indices(n);
        let one_b = pairs
            .iter()
            .map(|&[p, q]| Ok(([p, q], eval_one(psi.row(p), psi.row(q), &self.mb)?)))
            .collect::<Result<Vec<_>>>()?;
        let one_d = pairs
            .iter()
            .map(|&[p, q]| Ok(([p, q], eval_one(psi.row(p), psi.row(q), &self.md)?)))
            .collect::<Result<Vec<_>>>()?;
        let two_b = two_body_unit_indices(n, Symmetry::EightFold)
            .into_iter()
            .map(|[p, q, s, t]| {
                Ok((
                    [p, q, s, t],
                    eval_bare_two(phi.row(p), phi.row(q), phi.row(s), phi.row(t), &self.wb)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let two_d = two_body_unit_indices(n, Symmetry::FourFold)
            .into_iter()
            .map(|[p, q, s, t]| {
                let v = eval_eff_two(
                    phi.row(p),
                    phi.row(q),
                    phi.row(s),
                    phi.row(t),
                    tilde.row(p),
                    tilde.row(q),
                    tilde.row(s),
                    tilde.row(t),
                    &self.wd,
                )?;
                Ok(([p, q, s, t], v))
            })
            .collect::<Result<Vec<_>>>()?;
        let scalar = 1.0 / r;
        let sys = &self.spec.system;
        Ok((
            TensorSet::from_unit(sys.clone(), r, Kind::Bare, n, scalar, one_b, two_b)?,
            TensorSet::from_unit(sys.clone(), r, Kind::Effective, n, scalar, one_d, two_d)?,
        ))
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let s = &self.spec;
        let mut ck = Checkpoint::new();
        ck.push_meta("system", &s.system);
        ck.push_meta("n_orb", s.n_orb);
        ck.push_meta("ell", s.ell);
        ck.push_meta("order", s.order);
        ck.push_meta("eig_lo", fmt_f64(s.eig_lo));
        ck.push_meta("eig_hi", fmt_f64(s.eig_hi));
        for (tag, t) in [("two", s.two_body_tan), ("one", s.one_body_tan)] {
            ck.push_meta(format!("{tag}_rate"), fmt_f64(t.rate));
            ck.push_meta(format!("{tag}_amplitude"), fmt_f64(t.amplitude));
            ck.push_meta(format!("{tag}_center"), fmt_f64(t.center));
        }
        ck.push_meta("eta", fmt_f64(s.eta));
        ck.push_meta("noise", fmt_f64(s.noise));
        ck.push_meta("seed", s.seed);
        let vector = |name: &str, data: Vec<f64>| Block {
            name: name.into(),
            shape: ShapeSpec::Vector(data.len()),
            seed: s.seed,
            step: 0,
            data,
        };
        let blocks = [
            vector("geometries", s.geometries.clone()),
            vector("phi_coef", self.phi_coef.clone()),
            vector("psi_coef", self.psi_coef.clone()),
            vector("deform_coef", self.deform_coef.clone()),
            vector("z_two", self.z_two.iter().copied().collect()),
            vector("z_one", self.z_one.iter().copied().collect()),
            vector("eps_two_b", self.eps_two_b.clone()),
            vector("eps_two_d", self.eps_two_d.clone()),
            vector("eps_one_b", self.eps_one_b.clone()),
            vector("eps_one_d", self.eps_one_d.clone()),
            self.wb.to_block("w_bare", s.seed, 0),
            self.wd.to_block("w_eff", s.seed, 0),
            self.mb.to_block("m_bare", s.seed, 0),
            self.md.to_block("m_eff", s.seed, 0),
        ];
        for b in blocks {
            ck.push_block(b).unwrap();
        }
        ck
    }
}

/// Bare and effective one- and two-body sets at every planted geometry.
/// Noise, if any, is added to canonical representatives so symmetry stays exact.
pub fn plant_series(spec: &PlantSpec) -> Result<(GeometrySeries, Plant)> {
    let plant = Plant::new(spec)?;
    let mut noise_rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x0153_c0de);
    let normal =
        Normal::new(0.0, spec.noise.max(f64::MIN_POSITIVE)).map_err(|e| Error::Invalid(format!("noise level: {e}")))?;
    let mut sets = Vec::with_capacity(2 * spec.geometries.len());
    for &r in &spec.geometries {
        let (b, d) = plant.sets_at(r)?;
        for set in [b, d] {
            sets.push(if spec.noise > 0.0 {
                add_noise(&set, &normal, &mut noise_rng)?
            } else {
                set
            });
        }
    }
    Ok((GeometrySeries::from_sets(spec.system.clone(), sets)?, plant))
}

fn add_noise(set: &TensorSet, normal: &Normal<f64>, rng: &mut ChaCha8Rng) -> Result<TensorSet> {
    let one: Vec<_> = set
        .one_body_unit()
        .into_iter()
        .map(|(i, v)| (i, v + normal.sample(rng)))
        .collect();
    let two: Vec<_> = set
        .nonsymmetric_unit()
        .into_iter()
        .map(|(i, v)| (i, v + normal.sample(rng)))
        .collect();
    TensorSet::from_unit(
        set.system(),
        set.geometry(),
        set.kind(),
        set.n_orb(),
        set.scalar_term(),
        one,
        two,
    )
}
