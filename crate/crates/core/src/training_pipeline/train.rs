//! Mini-batch Adam over the nonsymmetric unit of a set of geometries.
//!
//! Each head is written as a sum of terms `c · (a⊙b)ᵀ W (d⊙e)` whose factors
//! are rows of the pseudo-orbital matrices (or all-ones for one-body heads).
//! A batch gathers the rows it needs, runs the nets once per distinct
//! (geometry, orbital) pair, and evaluates every term as dense matrix products.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Model;
use crate::error::{Error, Result};
use crate::factorized_interactions::{symmetrize, HeadKind, KernelMatrix};
use crate::nn_core::AdamState;
use crate::tensor_store::Quad;

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Sample {
    pub point: usize,
    pub idx: Quad,
    pub target: f64,
}

#[derive(Clone, Copy)]
enum Factor {
    Phi(usize),
    Tilde(usize),
    Ones,
}

struct Term {
    coef: f64,
    f: [Factor; 4],
}

fn terms(head: HeadKind) -> Vec<Term> {
    use Factor::*;
    match head {
        HeadKind::BareOneBody | HeadKind::EffOneBody => vec![Term {
            coef: 1.0,
            f: [Phi(0), Ones, Phi(1), Ones],
        }],
        HeadKind::BareTwoBody => vec![Term {
            coef: 1.0,
            f: [Phi(0), Phi(1), Phi(2), Phi(3)],
        }],
        HeadKind::EffTwoBody => vec![
            Term {
                coef: 0.5,
                f: [Phi(0), Tilde(1), Phi(2), Tilde(3)],
            },
            Term {
                coef: 0.5,
                f: [Phi(1), Tilde(0), Phi(3), Tilde(2)],
            },
        ],
    }
}

pub(crate) struct Outcome {
    pub initial_loss: f64,
    pub final_loss: f64,
    pub epoch_losses: Vec<f64>,
    pub steps: u64,
}

/// Rows of the batch's pseudo-orbital matrices: `row[(point, orbital)]`.
struct BatchRows {
    keys: Vec<(usize, usize)>,
    map: BTreeMap<(usize, usize), usize>,
}

impl BatchRows {
    fn new(batch: &[Sample], n_slots: usize) -> Self {
        let mut map = BTreeMap::new();
        for s in batch {
            for &o in &s.idx[..n_slots] {
                map.entry((s.point, o)).or_insert(0);
            }
        }
        let keys: Vec<_> = map.keys().copied().collect();
        for (i, k) in keys.iter().enumerate() {
            map.insert(*k, i);
        }
        BatchRows { keys, map }
    }

    fn row(&self, s: &Sample, slot: usize) -> usize {
        self.map[&(s.point, s.idx[slot])]
    }
}

pub(crate) struct Trainer<'a> {
    pub model: &'a mut Model,
    pub rnorm: Vec<f64>,
    pub train_nets: bool,
    /// Optimized loss is MSE divided by this (the targets' mean square), which
    /// keeps gradients well above Adam's epsilon late in training.
    pub loss_scale: f64,
}

impl Trainer<'_> {
    fn n_slots(&self) -> usize {
        if self.model.head.is_two_body() {
            4
        } else {
            2
        }
    }

    fn gather(mat: &Array2<f64>, rows: &BatchRows, batch: &[Sample], f: Factor) -> Array2<f64> {
        let ell = mat.ncols();
        let mut out = Array2::zeros((batch.len(), ell));
        for (b, s) in batch.iter().enumerate() {
            match f {
                Factor::Phi(k) | Factor::Tilde(k) => out.row_mut(b).assign(&mat.row(rows.row(s, k))),
                Factor::Ones => out.row_mut(b).fill(1.0),
            }
        }
        out
    }

    /// Loss and (optionally) gradients on one batch. Gradient layout is
    /// `[net, tilde, kernel upper]` restricted to trainable parts.
    fn batch_eval(&self, batch: &[Sample], want_grad: bool) -> Result<(f64, Option<Vec<f64>>)> {
        let model = &*self.model;
        let rows = BatchRows::new(batch, self.n_slots());
        let q: Vec<(usize, f64)> = rows.keys.iter().map(|&(pt, o)| (o, self.rnorm[pt])).collect();
        let x = model.net.encode(&q)?;
        let (phi, phi_cache) = model.net.forward_batch(x.clone())?;
        let tilde = match &model.tilde {
            Some(t) => Some(t.forward_batch(x)?),
            None => None,
        };
        let w = model.kernel.matrix();
        let nb = batch.len();
        let pick = |f: Factor| -> &Array2<f64> {
            match f {
                Factor::Tilde(_) => &tilde.as_ref().unwrap().0,
                _ => &phi,
            }
        };

        struct TermData {
            coef: f64,
            f: [Factor; 4],
            fac: [Array2<f64>; 4],
            u: Array2<f64>,
            v: Array2<f64>,
            wv: Array2<f64>,
        }
        let mut pred = Array1::<f64>::zeros(nb);
        let mut data = Vec::new();
        for t in terms(model.head) {
            let fac = t.f.map(|f| Self::gather(pick(f), &rows, batch, f));
            let u = &fac[0] * &fac[1];
            let v = &fac[2] * &fac[3];
            let wv = v.dot(w);
            pred += &((&u * &wv).sum_axis(Axis(1)) * t.coef);
            data.push(TermData {
                coef: t.coef,
                f: t.f,
                fac,
                u,
                v,
                wv,
            });
        }
        let target = Array1::from_iter(batch.iter().map(|s| s.target));
        let resid = &pred - &target;
        let loss = resid.mapv(|r| r * r).sum() / nb as f64;
        let inv_scale = 1.0 / self.loss_scale;
        if !loss.is_finite() {
            return Err(Error::NonFinite(format!("training loss is {loss}")));
        }
        if !want_grad {
            return Ok((loss, None));
        }
        let gs = resid * (2.0 * inv_scale / nb as f64);
        let gcol = gs.view().insert_axis(Axis(1));

        let ell = model.ell();
        let mut gk = Array2::<f64>::zeros((ell, ell));
        let mut d_phi = Array2::<f64>::zeros(phi.raw_dim());
        let mut d_tilde = tilde.as_ref().map(|t| Array2::<f64>::zeros(t.0.raw_dim()));
        for td in &data {
            let ug = &td.u * &gcol;
            gk += &(ug.t().dot(&td.v) * td.coef);
            if !self.train_nets {
                continue;
            }
            let wu = td.u.dot(w);
            let scaled_wv = &td.wv * &gcol * td.coef;
            let scaled_wu = &wu * &gcol * td.coef;
            // d/d(fac0) = fac1 ⊙ Wv, d/d(fac1) = fac0 ⊙ Wv, and likewise with Wu.
            let grads = [
                &td.fac[1] * &scaled_wv,
                &td.fac[0] * &scaled_wv,
                &td.fac[3] * &scaled_wu,
                &td.fac[2] * &scaled_wu,
            ];
            for (slot, g) in td.f.iter().zip(grads.iter()) {
                let (dst, k) = match *slot {
                    Factor::Phi(k) => (&mut d_phi, k),
                    Factor::Tilde(k) => (d_tilde.as_mut().unwrap(), k),
                    Factor::Ones => continue,
                };
                for (b, s) in batch.iter().enumerate() {
                    let r = rows.row(s, k);
                    let mut dr = dst.row_mut(r);
                    dr += &g.row(b);
                }
            }
        }
        symmetrize(&mut gk);
        let mut grad = Vec::new();
        if self.train_nets {
            grad.extend(model.net.backward(&phi_cache, &d_phi)?.0);
            if let (Some(t), Some((_, cache)), Some(dt)) = (&model.tilde, &tilde, &d_tilde) {
                grad.extend(t.backward(cache, dt)?.0);
            }
        }
        grad.extend(KernelMatrix::upper_grad(gk.view()));
        Ok((loss, Some(grad)))
    }

    fn gather_params(&self) -> Vec<f64> {
        let m = &*self.model;
        let mut p = Vec::new();
        if self.train_nets {
            p.extend_from_slice(m.net.params());
            if let Some(t) = &m.tilde {
                p.extend_from_slice(t.params());
            }
        }
        p.extend_from_slice(m.kernel.upper());
        p
    }

    fn scatter_params(&mut self, p: &[f64]) -> Result<()> {
        let mut off = 0;
        if self.train_nets {
            let n = self.model.net.n_params();
            self.model.net.params_mut().copy_from_slice(&p[..n]);
            off = n;
            if let Some(t) = &mut self.model.tilde {
                let n = t.n_params();
                t.params_mut().copy_from_slice(&p[off..off + n]);
                off += n;
            }
        }
        self.model.kernel.set_upper(&p[off..])
    }

    pub fn full_loss(&self, samples: &[Sample]) -> Result<f64> {
        let mut total = 0.0;
        for chunk in samples.chunks(4096) {
            total += self.batch_eval(chunk, false)?.0 * chunk.len() as f64;
        }
        Ok(total / samples.len() as f64)
    }

    pub fn run(
        &mut self,
        samples: &[Sample],
        epochs: usize,
        batch_size: usize,
        base_lr: f64,
        seed: u64,
    ) -> Result<Outcome> {
        if samples.is_empty() {
            return Err(Error::Invalid("no training entries".into()));
        }
        let batch_size = batch_size.clamp(1, samples.len());
        let per_epoch = samples.len().div_ceil(batch_size);
        let horizon = (epochs * per_epoch) as u64;
        let mut params = self.gather_params();
        let mut adam = AdamState::new(params.len(), base_lr, horizon);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x005e_ed0f_ba7c);
        let initial_loss = self.full_loss(samples)?;
        let mut order: Vec<usize> = (0..samples.len()).collect();
        let mut epoch_losses = Vec::with_capacity(epochs);
        let mut batch = Vec::with_capacity(batch_size);
        for epoch in 0..epochs {
            order.shuffle(&mut rng);
            let mut acc = 0.0;
            for chunk in order.chunks(batch_size) {
                batch.clear();
                batch.extend(chunk.iter().map(|&i| samples[i]));
                let (loss, grad) = self.batch_eval(&batch, true).map_err(|e| match e {
                    Error::NonFinite(m) => {
                        Error::NonFinite(format!("{m} at epoch {epoch}, step {}", adam.step_count() + 1))
                    }
                    other => other,
                })?;
                acc += loss * batch.len() as f64;
                adam.step(&mut params, &grad.unwrap())?;
                self.scatter_params(&params)?;
            }
            epoch_losses.push(acc / samples.len() as f64);
        }
        let final_loss = self.full_loss(samples)?;
        Ok(Outcome {
            initial_loss,
            final_loss,
            epoch_losses,
            steps: adam.step_count(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn_core::OrbitalNet;
    use crate::training_pipeline::GeomNorm;
    use rand::Rng;

    fn model(head: HeadKind, rng: &mut ChaCha8Rng) -> Model {
        let ell = 5;
        let net = OrbitalNet::new(3, &[6], ell, 1).unwrap();
        let tilde = (head.n_nets() == 2).then(|| OrbitalNet::new(3, &[6], ell, 2).unwrap());
        let upper: Vec<f64> = (0..ell * (ell + 1) / 2).map(|_| rng.random_range(-1.0..1.0)).collect();
        let kernel = KernelMatrix::from_upper(ell, &upper).unwrap();
        Model::new(head, net, tilde, kernel, GeomNorm::fit(&[1.0, 2.0]).unwrap()).unwrap()
    }

    fn samples(head: HeadKind, rng: &mut ChaCha8Rng) -> Vec<Sample> {
        (0..12)
            .map(|k| {
                let mut idx = [0; 4];
                let n = if head.is_two_body() { 4 } else { 2 };
                for slot in idx.iter_mut().take(n) {
                    *slot = rng.random_range(0..3);
                }
                Sample {
                    point: k % 2,
                    idx,
                    target: rng.random_range(-1.0..1.0),
                }
            })
            .collect()
    }

    #[test]
    fn batch_gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for head in HeadKind::ALL {
            let mut m = model(head, &mut rng);
            let batch = samples(head, &mut rng);
            let mut tr = Trainer {
                model: &mut m,
                rnorm: vec![-1.0, 1.0],
                train_nets: true,
                loss_scale: 1.0,
            };
            let p0 = tr.gather_params();
            let (_, g) = tr.batch_eval(&batch, true).unwrap();
            let g = g.unwrap();
            assert_eq!(g.len(), p0.len());
            let h = 1e-5;
            for k in (0..p0.len()).step_by(3) {
                let mut p = p0.clone();
                p[k] += h;
                tr.scatter_params(&p).unwrap();
                let fp = tr.batch_eval(&batch, false).unwrap().0;
                p[k] -= 2.0 * h;
                tr.scatter_params(&p).unwrap();
                let fm = tr.batch_eval(&batch, false).unwrap().0;
                let fd = (fp - fm) / (2.0 * h);
                let rel = (g[k] - fd).abs() / g[k].abs().max(fd.abs()).max(1e-8);
                assert!(rel < 1e-5, "{head} param {k}: {} vs {fd}", g[k]);
            }
            tr.scatter_params(&p0).unwrap();
        }
    }

    #[test]
    fn loss_scale_divides_gradient_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut m = model(HeadKind::BareTwoBody, &mut rng);
        let batch = samples(HeadKind::BareTwoBody, &mut rng);
        let mut tr = Trainer {
            model: &mut m,
            rnorm: vec![-1.0, 1.0],
            train_nets: false,
            loss_scale: 1.0,
        };
        let (l1, g1) = tr.batch_eval(&batch, true).unwrap();
        tr.loss_scale = 4.0;
        let (l4, g4) = tr.batch_eval(&batch, true).unwrap();
        assert_eq!(l1, l4);
        for (a, b) in g1.unwrap().iter().zip(g4.unwrap()) {
            assert!((a / 4.0 - b).abs() <= 1e-15 * a.abs().max(1.0));
        }
    }
}
