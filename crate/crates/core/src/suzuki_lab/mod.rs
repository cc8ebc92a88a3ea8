//! Dense-matrix bench for the commutator-function form of the difference
//! between an effective Hamiltonian and the bare Hamiltonian in a model space.
//!
//! The generator is built by direct rotation: the eigenvectors that overlap
//! most with the R block span the target subspace, the projection of the
//! R/Q blocks onto that subspace and its complement is Löwdin-orthogonalized
//! into a unitary `U`, and `G = log U`.

mod cmat;
mod coeffs;

pub use cmat::{
    c, commutator, dagger, expm_anti_hermitian, frobenius, from_real, herm_eigh, hermiticity_error, identity,
    inv_sqrt_hpd, logm_unitary, max_abs, solve, CMat, HermEigen, C64,
};
pub use coeffs::{bernoulli_numbers, tangent_numbers, tanh_coefficient_bernoulli, TanhCoefficients};

use std::f64::consts::FRAC_PI_2;

use ndarray::{s, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::io_util::{fmt_f64, CsvTable};

pub const HERMITIAN_TOL: f64 = 1e-12;
/// Minimum gap between the R-projection norms of the last assigned and the
/// first unassigned eigenvector.
pub const ASSIGNMENT_GAP: f64 = 1e-8;
pub const DEFAULT_N_MAX: usize = 12;

/// Hermitian `H` with the first `r_dim` basis states forming the R block.
#[derive(Clone, Debug)]
pub struct SuzukiProblem {
    h: CMat,
    r_dim: usize,
}

impl SuzukiProblem {
    pub fn new(h: CMat, r_dim: usize) -> Result<Self> {
        let m = h.nrows();
        if h.ncols() != m {
            return Err(Error::Shape(format!("H must be square, got {:?}", h.shape())));
        }
        if r_dim == 0 || r_dim >= m {
            return Err(Error::Invalid(format!("r_dim must be in 1..{m}, got {r_dim}")));
        }
        let herr = hermiticity_error(&h);
        if herr > HERMITIAN_TOL {
            return Err(Error::Invalid(format!("H is not Hermitian (|H - H†| = {herr:e})")));
        }
        Ok(SuzukiProblem { h, r_dim })
    }

    pub fn from_real(h: &Array2<f64>, r_dim: usize) -> Result<Self> {
        Self::new(from_real(h.view()), r_dim)
    }

    pub fn h(&self) -> &CMat {
        &self.h
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn r_dim(&self) -> usize {
        self.r_dim
    }

    pub fn r_projector(&self) -> CMat {
        Array2::from_shape_fn((self.dim(), self.dim()), |(i, j)| {
            if i == j && i < self.r_dim {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        })
    }

    pub fn q_projector(&self) -> CMat {
        identity(self.dim()) - self.r_projector()
    }

    /// `RHQ + QHR`.
    pub fn h_od(&self) -> CMat {
        off_diagonal(&self.h, self.r_dim)
    }

    /// `RHR` as an `r_dim × r_dim` matrix.
    pub fn h_rr(&self) -> CMat {
        self.h.slice(s![..self.r_dim, ..self.r_dim]).to_owned()
    }
}

fn off_diagonal(a: &CMat, r: usize) -> CMat {
    let mut out = a.clone();
    out.slice_mut(s![..r, ..r]).fill(c(0.0, 0.0));
    out.slice_mut(s![r.., r..]).fill(c(0.0, 0.0));
    out
}

/// Anti-Hermitian generator with its self-checks.
#[derive(Clone, Debug)]
pub struct Generator {
    pub g: CMat,
    /// `max |G + G†|`.
    pub anti_hermiticity: f64,
    /// `max |RGR|` and `max |QGQ|`.
    pub rgr: f64,
    pub qgq: f64,
    /// `max |Q e^{−G} H e^{G} R|`.
    pub decoupling: f64,
    /// Gap between assigned and unassigned R-projection norms.
    pub assignment_gap: f64,
}

pub fn build_generator(prob: &SuzukiProblem) -> Result<Generator> {
    let m = prob.dim();
    let r = prob.r_dim();
    let eig = herm_eigh(prob.h())?;
    let weight = |k: usize| -> f64 { (0..r).map(|i| eig.vectors[[i, k]].norm_sqr()).sum() };
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| weight(b).total_cmp(&weight(a)).then(a.cmp(&b)));
    let gap = weight(order[r - 1]) - weight(order[r]);
    if gap < ASSIGNMENT_GAP {
        return Err(Error::Numerical(format!(
            "ambiguous R assignment: projection norms {} and {} differ by {gap:e}",
            weight(order[r - 1]),
            weight(order[r])
        )));
    }
    let vr = Array2::from_shape_fn((m, r), |(i, k)| eig.vectors[[i, order[k]]]);
    let p_target = vr.dot(&dagger(&vr));
    let q_target = identity(m) - &p_target;
    let x = p_target.dot(&prob.r_projector()) + q_target.dot(&prob.q_projector());
    let u = x.dot(&inv_sqrt_hpd(&dagger(&x).dot(&x))?);
    let g = logm_unitary(&u)?;
    let hbar = similarity(prob.h(), &g)?;
    Ok(Generator {
        anti_hermiticity: max_abs(&(&g + &dagger(&g))),
        rgr: max_abs(&g.slice(s![..r, ..r]).to_owned()),
        qgq: max_abs(&g.slice(s![r.., r..]).to_owned()),
        decoupling: max_abs(&hbar.slice(s![r.., ..r]).to_owned()),
        assignment_gap: gap,
        g,
    })
}

/// `e^{−G} H e^{G}`.
pub fn similarity(h: &CMat, g: &CMat) -> Result<CMat> {
    let u = expm_anti_hermitian(g)?;
    Ok(dagger(&u).dot(h).dot(&u))
}

/// `R e^{−G} H e^{G} R` as an `r_dim × r_dim` matrix.
pub fn h_eff(prob: &SuzukiProblem, gen: &Generator) -> Result<CMat> {
    if gen.g.dim() != prob.h().dim() {
        return Err(Error::Shape("generator and Hamiltonian differ in size".into()));
    }
    let r = prob.r_dim();
    Ok(similarity(prob.h(), &gen.g)?.slice(s![..r, ..r]).to_owned())
}

/// Sorted eigenvalues of `H` against those of the two diagonal blocks of the
/// transformed Hamiltonian; returns the largest mismatch.
pub fn spectrum_split_error(prob: &SuzukiProblem, gen: &Generator) -> Result<f64> {
    let r = prob.r_dim();
    let hbar = similarity(prob.h(), &gen.g)?;
    let herm = |a: CMat| (&a + &dagger(&a)).mapv(|z| z * 0.5);
    let mut split = herm_eigh(&herm(hbar.slice(s![..r, ..r]).to_owned()))?.values;
    split.extend(herm_eigh(&herm(hbar.slice(s![r.., r..]).to_owned()))?.values);
    split.sort_by(f64::total_cmp);
    let full = herm_eigh(prob.h())?.values;
    Ok(full.iter().zip(&split).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// `[A, [A, … [A, B]]]` with `i` copies of `A`.
pub fn ituple_commutator(a: &CMat, b: &CMat, i: usize) -> Result<CMat> {
    if a.dim() != b.dim() || a.nrows() != a.ncols() {
        return Err(Error::Shape(format!(
            "commutator of {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    if i == 0 {
        return Err(Error::Invalid("commutator order must be at least 1".into()));
    }
    let mut cm = b.clone();
    for _ in 0..i {
        cm = commutator(a, &cm);
    }
    Ok(cm)
}

/// Largest deviation of the nested commutator from `b_kl (α_k − α_l)^i` in
/// the eigenbasis of an anti-Hermitian `A` with eigenvalues `α_k`, divided
/// by `max(1, largest predicted element)`. Round-off grows like
/// `(2‖A‖)^i ‖B‖`, so the absolute error alone says little for large `A`.
pub fn commutator_law_error(a: &CMat, b: &CMat, i: usize) -> Result<f64> {
    let e = herm_eigh(&a.mapv(|z| z * c(0.0, 1.0)))?;
    // iA = V μ V†  ⇒  α_k = −i μ_k.
    let alpha: Vec<C64> = e.values.iter().map(|&mu| c(0.0, -mu)).collect();
    let v = &e.vectors;
    let vd = dagger(v);
    let bk = vd.dot(b).dot(v);
    let ck = vd.dot(&ituple_commutator(a, b, i)?).dot(v);
    let mut err: f64 = 0.0;
    let mut scale: f64 = 1.0;
    for ((k, l), val) in ck.indexed_iter() {
        let expect = bk[[k, l]] * (alpha[k] - alpha[l]).powi(i as i32);
        err = err.max((val - expect).norm());
        scale = scale.max(expect.norm());
    }
    Ok(err / scale)
}

/// `|tanh(ia) − sign·i·tan(a)| / max(1, |tan a|)`. Relative above one
/// because `tan` grows fast toward π/2.
pub fn tanh_identity_error(a: f64, sign: f64) -> f64 {
    let t = a.tan();
    (c(0.0, a).tanh() - c(0.0, sign * t)).norm() / t.abs().max(1.0)
}

/// Real eigenphases `g_k` of `G/2 = Σ i g_k |χ_k⟩⟨χ_k|` and the basis.
fn half_generator_basis(g: &CMat) -> Result<(Vec<f64>, CMat)> {
    // i·G/2 = V μ V†  ⇒  G/2 = V (−iμ) V†, so g_k = −μ_k.
    let e = herm_eigh(&g.mapv(|z| z * c(0.0, 0.5)))?;
    Ok((e.values.iter().map(|mu| -mu).collect(), e.vectors))
}

/// `max_{k,l} |g_k − g_l|` over the eigenphases of `G/2`.
pub fn half_generator_spread(g: &CMat) -> Result<f64> {
    let (gs, _) = half_generator_basis(g)?;
    let lo = gs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = gs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(if gs.is_empty() { 0.0 } else { hi - lo })
}

#[derive(Clone, Debug)]
pub struct SeriesResult {
    pub value: CMat,
    pub spread: f64,
    /// False when the spread reaches π/2, outside the radius of convergence.
    pub convergent: bool,
}

/// `Σ_{n ≤ n_max} t_n [(G/2)^{2n−1}, H_OD]`.
pub fn z_tanh_series(g: &CMat, h_od: &CMat, n_max: usize) -> Result<SeriesResult> {
    if n_max == 0 {
        return Err(Error::Invalid("n_max must be at least 1".into()));
    }
    let curve = z_tanh_partial_sums(g, h_od, n_max)?;
    let spread = half_generator_spread(g)?;
    Ok(SeriesResult {
        value: curve.into_iter().last().unwrap(),
        spread,
        convergent: spread < FRAC_PI_2,
    })
}

/// Partial sums for `n_max = 1, 2, …`.
pub fn z_tanh_partial_sums(g: &CMat, h_od: &CMat, n_max: usize) -> Result<Vec<CMat>> {
    if g.dim() != h_od.dim() || g.nrows() != g.ncols() {
        return Err(Error::Shape(format!(
            "G is {:?}, H_OD is {:?}",
            g.shape(),
            h_od.shape()
        )));
    }
    let half = g.mapv(|z| z * 0.5);
    let coef = TanhCoefficients::new(n_max);
    let mut nested = commutator(&half, h_od);
    let mut acc = nested.mapv(|z| z * coef.values[0]);
    let mut out = vec![acc.clone()];
    for t in &coef.values[1..] {
        nested = commutator(&half, &commutator(&half, &nested));
        acc = acc + nested.mapv(|z| z * *t);
        out.push(acc.clone());
    }
    Ok(out)
}

/// Elementwise closed form: in the eigenbasis of `G/2`, element `(k,l)` of
/// `H_OD` is multiplied by `tanh(γ_k − γ_l) = tanh(i(g_k − g_l)) = i tan(g_k − g_l)`.
pub fn z_tanh_closed(g: &CMat, h_od: &CMat) -> Result<CMat> {
    if g.dim() != h_od.dim() || g.nrows() != g.ncols() {
        return Err(Error::Shape(format!(
            "G is {:?}, H_OD is {:?}",
            g.shape(),
            h_od.shape()
        )));
    }
    let (gs, v) = half_generator_basis(g)?;
    let vd = dagger(&v);
    let mut hk = vd.dot(h_od).dot(&v);
    for ((k, l), val) in hk.indexed_iter_mut() {
        let d = gs[k] - gs[l];
        if d.abs() >= FRAC_PI_2 {
            return Err(Error::Numerical(format!(
                "eigenphase gap {d} of G/2 reaches pi/2; closed form is singular"
            )));
        }
        *val *= c(0.0, d.tan());
    }
    Ok(v.dot(&hk).dot(&vd))
}

/// Both sides of `H_eff − RHR = −R Z_tanh[G/2, H_OD] R` and the series
/// convergence toward the closed form.
#[derive(Clone, Debug)]
pub struct WReport {
    pub lhs: CMat,
    pub rhs: CMat,
    pub max_abs: f64,
    pub rel_frobenius: f64,
    pub lhs_norm: f64,
    pub spread: f64,
    /// `(n_max, max |series − closed|)`.
    pub convergence: Vec<(usize, f64)>,
    pub generator: Generator,
}

pub fn verify_w_identity(prob: &SuzukiProblem, n_max: usize) -> Result<WReport> {
    let gen = build_generator(prob)?;
    let r = prob.r_dim();
    let lhs = h_eff(prob, &gen)? - prob.h_rr();
    let z = z_tanh_closed(&gen.g, &prob.h_od())?;
    let rhs = z.slice(s![..r, ..r]).mapv(|v| -v);
    let diff = &lhs - &rhs;
    let lhs_norm = frobenius(&lhs);
    let rel = if lhs_norm > 0.0 {
        frobenius(&diff) / lhs_norm
    } else {
        frobenius(&diff)
    };
    let convergence = z_tanh_partial_sums(&gen.g, &prob.h_od(), n_max.max(1))?
        .iter()
        .enumerate()
        .map(|(i, s)| (i + 1, max_abs(&(s - &z))))
        .collect();
    Ok(WReport {
        max_abs: max_abs(&diff),
        rel_frobenius: rel,
        lhs_norm,
        spread: half_generator_spread(&gen.g)?,
        convergence,
        generator: gen,
        lhs,
        rhs,
    })
}

/// Real symmetric test Hamiltonian: R block with levels in `[0, 1]`, Q block
/// in `[2, 3]`, small intra-block noise, and R–Q coupling entries drawn from
/// `U(−1, 1)` times `coupling`.
pub fn random_problem(dim: usize, r_dim: usize, coupling: f64, rng: &mut impl Rng) -> Result<SuzukiProblem> {
    if r_dim == 0 || r_dim >= dim {
        return Err(Error::Invalid(format!("r_dim must be in 1..{dim}, got {r_dim}")));
    }
    let q_dim = dim - r_dim;
    let level = |i: usize, n: usize| if n > 1 { i as f64 / (n - 1) as f64 } else { 0.5 };
    let mut h = Array2::<f64>::zeros((dim, dim));
    for i in 0..dim {
        h[[i, i]] = if i < r_dim {
            level(i, r_dim)
        } else {
            2.0 + level(i - r_dim, q_dim)
        };
        for j in 0..i {
            let same = (i < r_dim) == (j < r_dim);
            let scale = if same { 0.05 } else { coupling };
            let v = scale * rng.random_range(-1.0..1.0);
            h[[i, j]] = v;
            h[[j, i]] = v;
        }
    }
    SuzukiProblem::from_real(&h, r_dim)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub coupling: f64,
    pub trials: usize,
    pub failures: usize,
    pub mean_rel: f64,
    pub max_rel: f64,
    pub max_abs: f64,
    pub mean_spread: f64,
}

/// Identity mismatch over random problems at each coupling. Trials whose
/// generator or closed form cannot be built are counted as failures.
pub fn coupling_sweep(
    dim: usize,
    r_dim: usize,
    couplings: &[f64],
    trials: usize,
    rng: &mut impl Rng,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &cpl in couplings {
        let (mut rels, mut abss, mut spreads, mut failures) = (Vec::new(), Vec::new(), Vec::new(), 0);
        for _ in 0..trials {
            let prob = random_problem(dim, r_dim, cpl, rng)?;
            match verify_w_identity(&prob, DEFAULT_N_MAX) {
                Ok(rep) => {
                    rels.push(rep.rel_frobenius);
                    abss.push(rep.max_abs);
                    spreads.push(rep.spread);
                }
                Err(e) if e.is_numerical() => failures += 1,
                Err(e) => return Err(e),
            }
        }
        let mean = |v: &[f64]| {
            if v.is_empty() {
                f64::NAN
            } else {
                v.iter().sum::<f64>() / v.len() as f64
            }
        };
        rows.push(SweepRow {
            coupling: cpl,
            trials,
            failures,
            mean_rel: mean(&rels),
            max_rel: rels.iter().copied().fold(f64::NAN, f64::max),
            max_abs: abss.iter().copied().fold(f64::NAN, f64::max),
            mean_spread: mean(&spreads),
        });
    }
    Ok(rows)
}

/// Least-squares slope of `log y` against `log x`, skipping non-positive or
/// non-finite points.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Columns `coupling,trials,failures,mean_rel,max_rel,max_abs,mean_spread`.
pub fn sweep_csv(rows: &[SweepRow]) -> CsvTable {
    let mut t = CsvTable::new([
        "coupling",
        "trials",
        "failures",
        "mean_rel",
        "max_rel",
        "max_abs",
        "mean_spread",
    ]);
    for r in rows {
        t.push([
            fmt_f64(r.coupling),
            r.trials.to_string(),
            r.failures.to_string(),
            fmt_f64(r.mean_rel),
            fmt_f64(r.max_rel),
            fmt_f64(r.max_abs),
            fmt_f64(r.mean_spread),
        ]);
    }
    t
}

/// Per-trial outcome of [`verify_trials`].
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRow {
    pub trial: usize,
    pub rel_frobenius: f64,
    pub max_abs: f64,
    pub rgr: f64,
    pub qgq: f64,
    pub decoupling: f64,
    pub spread: f64,
    pub spectrum_error: f64,
}

/// Per-trial rows and the convergence curve `(n_max, max error)`.
pub type TrialsOutcome = (Vec<TrialRow>, Vec<(usize, f64)>);

/// Random problems from one seed. Returns the per-trial rows and, for each
/// `n_max`, the largest series-vs-closed error over all trials.
pub fn verify_trials(
    dim: usize,
    r_dim: usize,
    coupling: f64,
    trials: usize,
    n_max: usize,
    seed: u64,
) -> Result<TrialsOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(trials);
    let mut curve: Vec<(usize, f64)> = (1..=n_max.max(1)).map(|n| (n, 0.0)).collect();
    for trial in 0..trials {
        let prob = random_problem(dim, r_dim, coupling, &mut rng)?;
        let rep = verify_w_identity(&prob, n_max)?;
        for (slot, &(_, e)) in curve.iter_mut().zip(&rep.convergence) {
            slot.1 = slot.1.max(e);
        }
        rows.push(TrialRow {
            trial,
            rel_frobenius: rep.rel_frobenius,
            max_abs: rep.max_abs,
            rgr: rep.generator.rgr,
            qgq: rep.generator.qgq,
            decoupling: rep.generator.decoupling,
            spread: rep.spread,
            spectrum_error: spectrum_split_error(&prob, &rep.generator)?,
        });
    }
    Ok((rows, curve))
}

/// [`coupling_sweep`] driven by a seed.
pub fn seeded_sweep(dim: usize, r_dim: usize, couplings: &[f64], trials: usize, seed: u64) -> Result<Vec<SweepRow>> {
    coupling_sweep(dim, r_dim, couplings, trials, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Columns `trial,rel_frobenius,max_abs,rgr,qgq,decoupling,spread,spectrum_error`.
pub fn trials_csv(rows: &[TrialRow]) -> CsvTable {
    let mut t = CsvTable::new([
        "trial",
        "rel_frobenius",
        "max_abs",
        "rgr",
        "qgq",
        "decoupling",
        "spread",
        "spectrum_error",
    ]);
    for r in rows {
        t.push([
            r.trial.to_string(),
            fmt_f64(r.rel_frobenius),
            fmt_f64(r.max_abs),
            fmt_f64(r.rgr),
            fmt_f64(r.qgq),
            fmt_f64(r.decoupling),
            fmt_f64(r.spread),
            fmt_f64(r.spectrum_error),
        ]);
    }
    t
}

/// Columns `n_max,max_error`.
pub fn convergence_csv(curve: &[(usize, f64)]) -> CsvTable {
    let mut t = CsvTable::new(["n_max", "max_error"]);
    for (n, e) in curve {
        t.push([n.to_string(), fmt_f64(*e)]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_diagonal_gives_zero_generator() {
        let h = Array2::from_diag(&ndarray::arr1(&[0.0, 0.5, 2.0, 3.0]));
        let prob = SuzukiProblem::from_real(&h, 2).unwrap();
        let gen = build_generator(&prob).unwrap();
        assert!(max_abs(&gen.g) < 1e-15);
        let rep = verify_w_identity(&prob, 4).unwrap();
        assert!(rep.max_abs < 1e-15 && rep.lhs_norm < 1e-15);
    }

    #[test]
    fn two_level_decouples() {
        let h = ndarray::arr2(&[[0.0, 0.1], [0.1, 1.0]]);
        let prob = SuzukiProblem::from_real(&h, 1).unwrap();
        let gen = build_generator(&prob).unwrap();
        assert!(gen.decoupling < 1e-12);
        let e = h_eff(&prob, &gen).unwrap();
        let exact = (1.0 - (1.0f64 + 4.0 * 0.01).sqrt()) / 2.0;
        assert!((e[[0, 0]].re - exact).abs() < 1e-14);
    }

    #[test]
    fn random_generator_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let prob = random_problem(8, 3, 0.05, &mut rng).unwrap();
        let gen = build_generator(&prob).unwrap();
        assert!(gen.rgr < 1e-10 && gen.qgq < 1e-10, "{gen:?}");
        assert!(gen.decoupling < 1e-10 && gen.anti_hermiticity < 1e-12);
        assert!(spectrum_split_error(&prob, &gen).unwrap() < 1e-10);
    }

    #[test]
    fn commutator_example() {
        let a = ndarray::arr2(&[[c(0.0, 1.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, -1.0)]]);
        let b = ndarray::arr2(&[[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]);
        let cm = ituple_commutator(&a, &b, 1).unwrap();
        assert_eq!(cm[[0, 1]], c(0.0, 2.0));
        assert_eq!(cm[[1, 0]], c(0.0, -2.0));
        assert!(ituple_commutator(&a, &b, 0).is_err());
    }

    #[test]
    fn closed_form_scalar_case() {
        // G/2 with eigenphases 0.3 and −0.2 on the basis vectors.
        let g = ndarray::arr2(&[[c(0.0, 0.6), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, -0.4)]]);
        let hod = ndarray::arr2(&[[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]);
        let z = z_tanh_closed(&g, &hod).unwrap();
        assert!((z[[0, 1]] - c(0.0, 0.5f64.tan())).norm() < 1e-15);
        assert!((z[[0, 1]] - c(0.0, 0.5).tanh()).norm() < 1e-15);
        let series = z_tanh_series(&g, &hod, 1).unwrap();
        assert!((series.value[[0, 1]] - c(0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [0.01, 0.02, 0.05].iter().map(|&x| (x, 3.0 * x * x * x)).collect();
        assert!((log_log_slope(&pts).unwrap() - 3.0).abs() < 1e-12);
    }
}
