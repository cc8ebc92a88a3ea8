//! Stage-1 training on bare tensors, stage-2 fine-tuning on effective
//! tensors, and per-geometry MAE evaluation.

mod model;
mod train;

pub use model::{GeomNorm, Model};

use std::fmt;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::factorized_interactions::{HeadKind, KernelMatrix};
use crate::io_util::{fmt_f64, CsvTable};
use crate::nn_core::OrbitalNet;
use crate::tensor_store::{GeometrySeries, Kind, TensorSet};
use train::{Sample, Trainer};

/// Geometries closer than this are treated as the same reference point.
pub const GEOMETRY_MATCH_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub base_lr: f64,
    pub seed: u64,
    pub stage: HeadKind,
    pub freeze_orbitals: bool,
    pub hidden: Vec<usize>,
    pub ell: usize,
}

impl TrainConfig {
    /// Desk-scale defaults: ℓ = 32, two hidden layers of 64.
    pub fn desk(stage: HeadKind) -> Self {
        TrainConfig {
            epochs: 2000,
            batch_size: 256,
            base_lr: 1e-3,
            seed: 0,
            stage,
            freeze_orbitals: false,
            hidden: vec![64, 64],
            ell: 32,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Invalid("epochs and batch_size must be at least 1".into()));
        }
        if !(self.base_lr > 0.0 && self.base_lr.is_finite()) {
            return Err(Error::Invalid(format!(
                "base_lr must be positive, got {}",
                self.base_lr
            )));
        }
        if self.ell == 0 || self.hidden.contains(&0) {
            return Err(Error::Invalid("layer widths must be positive".into()));
        }
        Ok(())
    }

    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let hidden: Vec<String> = self.hidden.iter().map(|h| h.to_string()).collect();
        vec![
            ("stage".into(), self.stage.to_string()),
            ("epochs".into(), self.epochs.to_string()),
            ("batch_size".into(), self.batch_size.to_string()),
            ("base_lr".into(), fmt_f64(self.base_lr)),
            ("seed".into(), self.seed.to_string()),
            ("freeze_orbitals".into(), self.freeze_orbitals.to_string()),
            ("hidden".into(), hidden.join(",")),
            ("ell".into(), self.ell.to_string()),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

/// MAE at one geometry over the nonsymmetric unit (`mae`) and over the full
/// expanded tensor (`mae_full`).
#[derive(Clone, Debug, PartialEq)]
pub struct GeomMae {
    pub geometry: f64,
    pub mae: f64,
    pub mae_full: f64,
    pub split: Split,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitReport {
    pub config: TrainConfig,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub steps: u64,
    pub epoch_losses: Vec<f64>,
    pub per_geometry: Vec<GeomMae>,
    /// Kept out of [`FitReport::render`] so reports compare bit-for-bit.
    pub wall_time_s: f64,
}

impl FitReport {
    pub fn mean_mae(&self, split: Split) -> Option<f64> {
        let v: Vec<f64> = self
            .per_geometry
            .iter()
            .filter(|g| g.split == split)
            .map(|g| g.mae)
            .collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    pub fn max_mae(&self, split: Split) -> Option<f64> {
        self.per_geometry
            .iter()
            .filter(|g| g.split == split)
            .map(|g| g.mae)
            .fold(None, |a, m| Some(a.map_or(m, |a: f64| a.max(m))))
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.config.to_pairs() {
            out.push_str(&format!("{k}={v}\n"));
        }
        out.push_str(&format!("steps={}\n", self.steps));
        out.push_str(&format!("initial_loss={}\n", fmt_f64(self.initial_loss)));
        out.push_str(&format!("final_loss={}\n", fmt_f64(self.final_loss)));
        for split in [Split::Train, Split::Test] {
            if let Some(m) = self.mean_mae(split) {
                out.push_str(&format!("mean_mae_{split}={}\n", fmt_f64(m)));
            }
            let full: Vec<f64> = self
                .per_geometry
                .iter()
                .filter(|g| g.split == split)
                .map(|g| g.mae_full)
                .collect();
            if !full.is_empty() {
                out.push_str(&format!(
                    "mean_mae_full_{split}={}\n",
                    fmt_f64(full.iter().sum::<f64>() / full.len() as f64)
                ));
            }
        }
        out
    }

    /// Columns `R,mae,split`.
    pub fn mae_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(["R", "mae", "split"]);
        for g in &self.per_geometry {
            t.push([fmt_f64(g.geometry), fmt_f64(g.mae), g.split.to_string()]);
        }
        t
    }

    /// Columns `epoch,loss`.
    pub fn loss_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(["epoch", "loss"]);
        for (i, l) in self.epoch_losses.iter().enumerate() {
            t.push([(i + 1).to_string(), fmt_f64(*l)]);
        }
        t
    }
}

fn mean_square(samples: &[Sample]) -> f64 {
    let m = samples.iter().map(|s| s.target * s.target).sum::<f64>() / samples.len().max(1) as f64;
    if m > 0.0 {
        m
    } else {
        1.0
    }
}

fn body_samples(head: HeadKind, point: usize, set: &TensorSet) -> Vec<Sample> {
    if head.is_two_body() {
        set.nonsymmetric_unit()
            .into_iter()
            .map(|(idx, target)| Sample { point, idx, target })
            .collect()
    } else {
        set.one_body_unit()
            .into_iter()
            .map(|([p, q], target)| Sample {
                point,
                idx: [p, q, 0, 0],
                target,
            })
            .collect()
    }
}

/// Stage 1: fits a fresh net and kernel to every bare set of the series.
pub fn train_bare(series: &GeometrySeries, cfg: &TrainConfig) -> Result<(Model, FitReport)> {
    cfg.validate()?;
    if cfg.stage.is_effective() {
        return Err(Error::Invalid(format!(
            "train_bare needs a bare stage, got {}",
            cfg.stage
        )));
    }
    let sets = series.sets(Kind::Bare);
    if sets.is_empty() {
        return Err(Error::Invalid(format!(
            "series '{}' has no bare tensors",
            series.system_name()
        )));
    }
    let start = Instant::now();
    let geoms: Vec<f64> = sets.iter().map(|s| s.geometry()).collect();
    let norm = GeomNorm::fit(&geoms)?;
    let net = OrbitalNet::new(series.n_orb(), &cfg.hidden, cfg.ell, cfg.seed)?;
    // Identity start: every latent channel contributes with unit weight.
    let kernel = KernelMatrix::identity(cfg.ell);
    let mut model = Model::new(cfg.stage, net, None, kernel, norm)?;
    let samples: Vec<Sample> = sets
        .iter()
        .enumerate()
        .flat_map(|(i, s)| body_samples(cfg.stage, i, s))
        .collect();
    let rnorm = geoms.iter().map(|&r| norm.apply(r)).collect();
    let outcome = Trainer {
        model: &mut model,
        rnorm,
        train_nets: true,
        loss_scale: mean_square(&samples),
    }
    .run(&samples, cfg.epochs, cfg.batch_size, cfg.base_lr, cfg.seed)?;
    let per_geometry = evaluate_mae(&model, series, &geoms)?;
    let report = FitReport {
        config: cfg.clone(),
        initial_loss: outcome.initial_loss,
        final_loss: outcome.final_loss,
        steps: outcome.steps,
        epoch_losses: outcome.epoch_losses,
        per_geometry,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    Ok((model, report))
}

/// Effective head initialized from a stage-1 model: both nets copy θ and the
/// kernel copies W^B (or M^B), so the initial prediction equals the bare one.
pub fn init_effective(stage1: &Model, head: HeadKind) -> Result<Model> {
    if stage1.head.is_effective() || !head.is_effective() || stage1.head.is_two_body() != head.is_two_body() {
        return Err(Error::Invalid(format!(
            "cannot fine-tune a {} model into a {head} head",
            stage1.head
        )));
    }
    let tilde = (head.n_nets() == 2).then(|| stage1.net.clone());
    Model::new(head, stage1.net.clone(), tilde, stage1.kernel.clone(), stage1.norm)
}

/// Stage 2: fine-tunes on the effective sets at the reference geometries.
/// All other effective sets in the series are reported as test geometries.
pub fn finetune_effective(
    series: &GeometrySeries,
    stage1: &Model,
    refs: &[f64],
    cfg: &TrainConfig,
) -> Result<(Model, FitReport)> {
    cfg.validate()?;
    if !cfg.stage.is_effective() {
        return Err(Error::Invalid(format!(
            "finetune needs an effective stage, got {}",
            cfg.stage
        )));
    }
    if stage1.n_orb() != series.n_orb() {
        return Err(Error::Shape(format!(
            "model n_orb {} vs series n_orb {}",
            stage1.n_orb(),
            series.n_orb()
        )));
    }
    if refs.is_empty() {
        return Err(Error::Invalid("no reference geometries".into()));
    }
    let start = Instant::now();
    let mut model = init_effective(stage1, cfg.stage)?;
    let mut train_geoms = Vec::new();
    let mut samples = Vec::new();
    for (i, &r) in refs.iter().enumerate() {
        let set = series
            .find(r, GEOMETRY_MATCH_TOL)
            .and_then(|k| series.points()[k].effective.as_ref())
            .ok_or_else(|| Error::Invalid(format!("no effective tensors at reference geometry {r}")))?;
        train_geoms.push(set.geometry());
        samples.extend(body_samples(cfg.stage, i, set));
    }
    let rnorm = train_geoms.iter().map(|&r| model.norm.apply(r)).collect();
    let outcome = Trainer {
        model: &mut model,
        rnorm,
        train_nets: !cfg.freeze_orbitals,
        loss_scale: mean_square(&samples),
    }
    .run(&samples, cfg.epochs, cfg.batch_size, cfg.base_lr, cfg.seed)?;
    let per_geometry = evaluate_mae(&model, series, &train_geoms)?;
    let report = FitReport {
        config: cfg.clone(),
        initial_loss: outcome.initial_loss,
        final_loss: outcome.final_loss,
        steps: outcome.steps,
        epoch_losses: outcome.epoch_losses,
        per_geometry,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    Ok((model, report))
}

/// MAE of the model's body against every set of the matching kind.
/// Geometries listed in `train_geoms` are labelled train, the rest test.
pub fn evaluate_mae(model: &Model, series: &GeometrySeries, train_geoms: &[f64]) -> Result<Vec<GeomMae>> {
    if model.n_orb() != series.n_orb() {
        return Err(Error::Shape(format!(
            "model n_orb {} vs series n_orb {}",
            model.n_orb(),
            series.n_orb()
        )));
    }
    let mut out = Vec::new();
    for set in series.sets(model.kind()) {
        let r = set.geometry();
        let pred = model.predict_set(set.system(), r)?;
        let (mae, mae_full) = set_mae(model.head, &pred, set);
        let split = if train_geoms.iter().any(|&t| (t - r).abs() <= GEOMETRY_MATCH_TOL) {
            Split::Train
        } else {
            Split::Test
        };
        out.push(GeomMae {
            geometry: r,
            mae,
            mae_full,
            split,
        });
    }
    Ok(out)
}

/// (unit MAE, full-tensor MAE) of the head's body.
pub fn set_mae(head: HeadKind, pred: &TensorSet, reference: &TensorSet) -> (f64, f64) {
    let mean_abs = |it: &mut dyn Iterator<Item = f64>| {
        let (s, n) = it.fold((0.0, 0usize), |(s, n), d| (s + d.abs(), n + 1));
        s / n.max(1) as f64
    };
    if head.is_two_body() {
        let unit = mean_abs(&mut reference.nonsymmetric_unit().into_iter().map(|(t, v)| pred.two(t) - v));
        let full = mean_abs(
            &mut pred
                .two_body()
                .iter()
                .zip(reference.two_body().iter())
                .map(|(a, b)| a - b),
        );
        (unit, full)
    } else {
        let unit = mean_abs(
            &mut reference
                .one_body_unit()
                .into_iter()
                .map(|([p, q], v)| pred.one(p, q) - v),
        );
        let full = mean_abs(
            &mut pred
                .one_body()
                .iter()
                .zip(reference.one_body().iter())
                .map(|(a, b)| a - b),
        );
        (unit, full)
    }
}
