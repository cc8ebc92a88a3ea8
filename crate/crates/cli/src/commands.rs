use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use ndarray::Array2;
use vnet_core::factorized_interactions::HeadKind;
use vnet_core::io_util::{fmt_f64, read_csv, write_atomic, CsvTable};
use vnet_core::nn_core::Checkpoint;
use vnet_core::spectral_analysis::{
    align_eigensystems, differences, differences_csv, eig_sym, eigen_differences, matrix_csv, project_kernel,
    AlignmentReport, EigenDiff, FLOOR_REL,
};
use vnet_core::suzuki_lab::{convergence_csv, log_log_slope, seeded_sweep, sweep_csv, trials_csv, verify_trials};
use vnet_core::synth_gen::{plant_series, preset, Preset, Profile};
use vnet_core::tan_model::{curve_csv, fit_tan, tan_report, TanFit};
use vnet_core::tensor_store::{load_series_dir, save_series_dir, GeometrySeries};
use vnet_core::training_pipeline::{evaluate_mae, finetune_effective, train_bare, Model, Split, TrainConfig};

use crate::manifest::RunManifest;
use crate::settings::Settings;
use crate::{Command, Common, TrainFlags};

/// One command invocation: settings plus the files it touches.
struct Run {
    name: &'static str,
    s: Settings,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    start: Instant,
}

impl Run {
    fn new(name: &'static str, common: &Common) -> Result<Self> {
        let mut s = Settings::new(common.config.as_deref())?;
        s.flag("seed", common.seed);
        s.flag("profile", common.profile.as_ref());
        s.flag("workdir", common.workdir.as_ref().map(|p| p.display()));
        s.flag("out", common.out.as_ref().map(|p| p.display()));
        let mut inputs = Vec::new();
        if let Some(c) = &common.config {
            inputs.push(c.clone());
        }
        Ok(Run {
            name,
            s,
            inputs,
            outputs: Vec::new(),
            start: Instant::now(),
        })
    }

    fn seed(&mut self) -> Result<u64> {
        self.s.get("seed", 0u64)
    }

    fn profile(&mut self) -> Result<Profile> {
        Ok(self.s.text("profile", Profile::Desk).parse::<Profile>()?)
    }

    fn workdir(&mut self) -> PathBuf {
        PathBuf::from(self.s.text("workdir", "vnet-work"))
    }

    fn system(&mut self) -> Result<&'static Preset> {
        let name = self.s.text("system", "H4");
        Ok(preset(&name)?)
    }

    fn data_dir(&mut self, p: &Preset) -> PathBuf {
        let default = self.workdir().join(p.name);
        PathBuf::from(self.s.text("data", default.display()))
    }

    fn out_dir(&mut self, default: &Path) -> PathBuf {
        PathBuf::from(self.s.text("out", default.display()))
    }

    fn body(&mut self) -> Result<u8> {
        let b = self.s.get("body", 2u8)?;
        if b != 1 && b != 2 {
            bail!("--body must be 1 or 2, got {b}");
        }
        Ok(b)
    }

    fn write_text(&mut self, path: PathBuf, text: &str) -> Result<()> {
        write_atomic(&path, text.as_bytes())?;
        self.outputs.push(path);
        Ok(())
    }

    fn write_csv(&mut self, path: PathBuf, t: &CsvTable) -> Result<()> {
        t.write(&path)?;
        self.outputs.push(path);
        Ok(())
    }

    fn write_checkpoint(&mut self, path: PathBuf, ck: &Checkpoint) -> Result<()> {
        ck.save(&path)?;
        self.outputs.push(path);
        Ok(())
    }

    fn load_model(&mut self, path: PathBuf) -> Result<Model> {
        let ck = Checkpoint::load(&path).with_context(|| format!("loading {}", path.display()))?;
        self.inputs.push(path);
        Ok(Model::from_checkpoint(&ck)?)
    }

    fn load_series(&mut self, data: &Path) -> Result<GeometrySeries> {
        let dir = data.join("series");
        let s = load_series_dir(&dir).with_context(|| format!("loading series from {}", dir.display()))?;
        self.inputs.push(dir);
        Ok(s)
    }

    fn finish(self, manifest_dir: &Path) -> Result<()> {
        self.s.check_unused()?;
        let m = RunManifest {
            subcommand: self.name.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            settings: self.s.resolved().clone(),
            inputs: self.inputs,
            outputs: self.outputs,
            wall_time_s: self.start.elapsed().as_secs_f64(),
        };
        m.write(manifest_dir)?;
        Ok(())
    }
}

fn head_for(body: u8, effective: bool) -> HeadKind {
    match (body, effective) {
        (1, false) => HeadKind::BareOneBody,
        (1, true) => HeadKind::EffOneBody,
        (_, false) => HeadKind::BareTwoBody,
        (_, true) => HeadKind::EffTwoBody,
    }
}

fn body_name(body: u8) -> &'static str {
    if body == 1 {
        "one-body"
    } else {
        "two-body"
    }
}

fn apply_train_flags(run: &mut Run, flags: &TrainFlags, mut cfg: TrainConfig) -> Result<TrainConfig> {
    run.s.flag("epochs", flags.epochs);
    run.s.flag("batch_size", flags.batch_size);
    run.s.flag("base_lr", flags.lr);
    run.s.flag("hidden", flags.hidden.as_ref());
    run.s.flag("ell", flags.ell);
    cfg.epochs = run.s.get("epochs", cfg.epochs)?;
    cfg.batch_size = run.s.get("batch_size", cfg.batch_size)?;
    cfg.base_lr = run.s.get("base_lr", cfg.base_lr)?;
    cfg.hidden = run.s.list("hidden", &cfg.hidden)?;
    cfg.ell = run.s.get("ell", cfg.ell)?;
    cfg.validate()?;
    Ok(cfg)
}

fn write_fit_outputs(
    run: &mut Run,
    dir: &Path,
    head: HeadKind,
    model: &Model,
    report: &vnet_core::training_pipeline::FitReport,
) -> Result<()> {
    let stem = head.as_str();
    run.write_checkpoint(dir.join(format!("{stem}.ckpt")), &model.to_checkpoint(report.steps))?;
    run.write_text(dir.join(format!("{stem}.report.txt")), &report.render())?;
    run.write_csv(dir.join(format!("{stem}.mae.csv")), &report.mae_csv())?;
    run.write_csv(dir.join(format!("{stem}.loss.csv")), &report.loss_csv())?;
    for split in [Split::Train, Split::Test] {
        if let Some(m) = report.mean_mae(split) {
            println!("{stem}: mean {split} MAE {m:.3e}");
        }
    }
    Ok(())
}

struct Spectrum {
    align: AlignmentReport,
    diffs: Vec<EigenDiff>,
    projected: Array2<f64>,
}

fn spectrum(bare: &Model, eff: &Model) -> Result<Spectrum> {
    if bare.head.is_effective() || !eff.head.is_effective() || bare.head.is_two_body() != eff.head.is_two_body() {
        bail!(
            "need a bare and an effective model of the same body, got {} and {}",
            bare.head,
            eff.head
        );
    }
    let eb = eig_sym(&bare.kernel)?;
    let ed = eig_sym(&eff.kernel)?;
    let align = align_eigensystems(&eb, &ed)?;
    let diffs = eigen_differences(&align);
    let projected = project_kernel(&eff.kernel, eb.vectors.view())?;
    Ok(Spectrum {
        align,
        diffs,
        projected,
    })
}

fn spectrum_summary(sp: &Spectrum) -> String {
    let flagged = sp.diffs.iter().filter(|d| d.flagged()).count();
    format!(
        "ordering=descending-bare\nfloor_rel={}\nflagged={flagged}\nmax_off_diagonal={}\nscore={}\n",
        fmt_f64(FLOOR_REL),
        fmt_f64(sp.align.max_off_diagonal()),
        fmt_f64(sp.align.score),
    )
}

pub(crate) fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Synth {
            common,
            system,
            plant,
            noise,
        } => {
            let mut run = Run::new("synth", &common)?;
            let plant_name = plant.map(|p| {
                let lower = p.to_ascii_lowercase();
                lower.strip_prefix("default-").map(str::to_string).unwrap_or(lower)
            });
            if let (Some(a), Some(b)) = (&plant_name, &system) {
                if !a.eq_ignore_ascii_case(b) {
                    bail!("--plant {a} and --system {b} disagree");
                }
            }
            run.s.flag("system", plant_name.or(system));
            run.s.flag("noise", noise);
            let p = run.system()?;
            let profile = run.profile()?;
            let seed = run.seed()?;
            let mut spec = p.plant_spec(profile, seed);
            spec.noise = run.s.get("noise", 0.0f64)?;
            let default = run.workdir().join(p.name);
            let out = run.out_dir(&default);
            let (series, plant) = plant_series(&spec)?;
            let sdir = out.join("series");
            save_series_dir(&sdir, &series)?;
            run.outputs.push(sdir);
            run.write_checkpoint(out.join("plant.ckpt"), &plant.to_checkpoint())?;
            println!(
                "{}: {} geometries, n_orb {}, ℓ {}",
                p.name,
                series.points().len(),
                series.n_orb(),
                spec.ell
            );
            run.finish(&out)
        }
        Command::TrainBare {
            common,
            system,
            body,
            data,
            train,
        } => {
            let mut run = Run::new("train-bare", &common)?;
            run.s.flag("system", system);
            run.s.flag("body", body);
            run.s.flag("data", data.as_ref().map(|p| p.display()));
            let p = run.system()?;
            let body = run.body()?;
            let profile = run.profile()?;
            let seed = run.seed()?;
            let head = head_for(body, false);
            let cfg = apply_train_flags(&mut run, &train, p.train_config(head, profile, seed))?;
            let data = run.data_dir(p);
            let out = run.out_dir(&data);
            let series = run.load_series(&data)?;
            let (model, report) = train_bare(&series, &cfg)?;
            write_fit_outputs(&mut run, &out, head, &model, &report)?;
            run.finish(&out)
        }
        Command::Finetune {
            common,
            system,
            body,
            data,
            model,
            refs,
            freeze_orbitals,
            train,
        } => {
            let mut run = Run::new("finetune", &common)?;
            run.s.flag("system", system);
            run.s.flag("body", body);
            run.s.flag("data", data.as_ref().map(|p| p.display()));
            run.s.flag("model", model.as_ref().map(|p| p.display()));
            run.s.flag("refs", refs);
            run.s.flag("freeze_orbitals", freeze_orbitals.then_some(true));
            let p = run.system()?;
            let body = run.body()?;
            let profile = run.profile()?;
            let seed = run.seed()?;
            let head = head_for(body, true);
            let mut cfg = apply_train_flags(&mut run, &train, p.train_config(head, profile, seed))?;
            cfg.freeze_orbitals = run.s.get("freeze_orbitals", false)?;
            let data = run.data_dir(p);
            let out = run.out_dir(&data);
            let (_, default_refs) = p.grid(profile);
            let refs: Vec<f64> = run.s.list("refs", &default_refs)?;
            let mpath = PathBuf::from(run.s.text(
                "model",
                data.join(format!("{}.ckpt", head_for(body, false).as_str())).display(),
            ));
            let stage1 = run.load_model(mpath)?;
            let series = run.load_series(&data)?;
            let (model, report) = finetune_effective(&series, &stage1, &refs, &cfg)?;
            write_fit_outputs(&mut run, &out, head, &model, &report)?;
            run.finish(&out)
        }
        Command::Eval {
            common,
            system,
            body,
            data,
            model,
            refs,
        } => {
            let mut run = Run::new("eval", &common)?;
            run.s.flag("system", system);
            run.s.flag("body", body);
            run.s.flag("data", data.as_ref().map(|p| p.display()));
            run.s.flag("model", model.as_ref().map(|p| p.display()));
            run.s.flag("refs", refs);
            let p = run.system()?;
            let body = run.body()?;
            let profile = run.profile()?;
            let data = run.data_dir(p);
            let out = run.out_dir(&data);
            let mpath = PathBuf::from(run.s.text(
                "model",
                data.join(format!("{}.ckpt", head_for(body, true).as_str())).display(),
            ));
            let m = run.load_model(mpath)?;
            let series = run.load_series(&data)?;
            let train: Vec<f64> = if m.head.is_effective() {
                let (_, default_refs) = p.grid(profile);
                run.s.list("refs", &default_refs)?
            } else {
                series.geometries()
            };
            let per = evaluate_mae(&m, &series, &train)?;
            let mut t = CsvTable::new(["R", "mae", "split"]);
            let mut summary = String::new();
            for g in &per {
                t.push([fmt_f64(g.geometry), fmt_f64(g.mae), g.split.to_string()]);
            }
            for split in [Split::Train, Split::Test] {
                let v: Vec<f64> = per.iter().filter(|g| g.split == split).map(|g| g.mae).collect();
                if !v.is_empty() {
                    let mean = v.iter().sum::<f64>() / v.len() as f64;
                    summary.push_str(&format!("mean_mae_{split}={}\n", fmt_f64(mean)));
                    println!("{}: mean {split} MAE {mean:.3e}", m.head);
                }
            }
            let stem = m.head.as_str();
            run.write_csv(out.join(format!("{stem}.eval.mae.csv")), &t)?;
            run.write_text(out.join(format!("{stem}.eval.txt")), &summary)?;
            run.finish(&out)
        }
        Command::AnalyzeSpectrum {
            common,
            system,
            body,
            data,
            bare,
            eff,
        } => {
            let mut run = Run::new("analyze-spectrum", &common)?;
            run.s.flag("system", system);
            run.s.flag("body", body);
            run.s.flag("data", data.as_ref().map(|p| p.display()));
            run.s.flag("bare", bare.as_ref().map(|p| p.display()));
            run.s.flag("eff", eff.as_ref().map(|p| p.display()));
            let p = run.system()?;
            let body = run.body()?;
            let data = run.data_dir(p);
            let out = run.out_dir(&data);
            let bpath = run.s.text(
                "bare",
                data.join(format!("{}.ckpt", head_for(body, false).as_str())).display(),
            );
            let epath = run.s.text(
                "eff",
                data.join(format!("{}.ckpt", head_for(body, true).as_str())).display(),
            );
            let bm = run.load_model(bpath.into())?;
            let em = run.load_model(epath.into())?;
            let sp = spectrum(&bm, &em)?;
            let tag = format!("spectrum-{body}");
            run.write_csv(out.join(format!("{tag}.eigen.csv")), &differences_csv(&sp.diffs))?;
            run.write_csv(out.join(format!("{tag}.overlap.csv")), &sp.align.overlap_csv())?;
            run.write_csv(
                out.join(format!("{tag}.projected.csv")),
                &matrix_csv(sp.projected.view()),
            )?;
            run.write_text(out.join(format!("{tag}.txt")), &spectrum_summary(&sp))?;
            println!("max off-diagonal overlap {:.3e}", sp.align.max_off_diagonal());
            run.finish(&out)
        }
        Command::FitTan {
            common,
            system,
            body,
            data,
            eigenpairs,
        } => {
            let mut run = Run::new("fit-tan", &common)?;
            run.s.flag("system", system);
            run.s.flag("body", body);
            run.s.flag("data", data.as_ref().map(|p| p.display()));
            run.s.flag("eigenpairs", eigenpairs.as_ref().map(|p| p.display()));
            let p = run.system()?;
            let body = run.body()?;
            let data = run.data_dir(p);
            let epath = PathBuf::from(
                run.s
                    .text("eigenpairs", data.join(format!("spectrum-{body}.eigen.csv")).display()),
            );
            let out = PathBuf::from(run.s.text("out", data.join(format!("tan-{body}.curve.csv")).display()));
            let (eps_b, eps_d) = read_eigenpairs(&epath)?;
            run.inputs.push(epath);
            let diffs = differences(&eps_b, &eps_d);
            let fit = fit_tan(&diffs)?;
            let dir = out.parent().map(Path::to_path_buf).unwrap_or_default();
            run.write_csv(out.clone(), &curve_csv(&fit, &diffs))?;
            let rows = vec![(p.name.to_string(), body_name(body).to_string(), fit.clone())];
            run.write_csv(dir.join(format!("tan-{body}.fit.csv")), &tan_report(&rows))?;
            print_fit(&fit);
            run.finish(&dir)
        }
        Command::SuzukiVerify {
            common,
            dim,
            rdim,
            coupling,
            trials,
            nmax,
            sweep,
            sweep_trials,
        } => {
            let mut run = Run::new("suzuki-verify", &common)?;
            run.s.flag("dim", dim);
            run.s.flag("rdim", rdim);
            run.s.flag("coupling", coupling);
            run.s.flag("trials", trials);
            run.s.flag("nmax", nmax);
            run.s.flag("sweep", sweep);
            run.s.flag("sweep_trials", sweep_trials);
            let seed = run.seed()?;
            let dim = run.s.get("dim", 10usize)?;
            let rdim = run.s.get("rdim", 3usize)?;
            let coupling = run.s.get("coupling", 0.05f64)?;
            let trials = run.s.get("trials", 100usize)?;
            let nmax = run.s.get("nmax", 12usize)?;
            let couplings: Vec<f64> = run.s.list("sweep", &[0.01, 0.02, 0.05, 0.1, 0.2, 0.5])?;
            let sweep_trials = run.s.get("sweep_trials", 10usize)?;
            if rdim == 0 || rdim >= dim {
                bail!("--rdim must be in 1..{dim}");
            }
            let default = run.workdir().join("suzuki");
            let out = run.out_dir(&default);
            let (rows, curve) = verify_trials(dim, rdim, coupling, trials, nmax, seed)?;
            let sweep_rows = seeded_sweep(dim, rdim, &couplings, sweep_trials, seed.wrapping_add(1))?;
            run.write_csv(out.join("trials.csv"), &trials_csv(&rows))?;
            run.write_csv(out.join("convergence.csv"), &convergence_csv(&curve))?;
            run.write_csv(out.join("sweep.csv"), &sweep_csv(&sweep_rows))?;
            let worst = rows.iter().map(|r| r.rel_frobenius).fold(0.0, f64::max);
            let slope = log_log_slope(&sweep_rows.iter().map(|r| (r.coupling, r.mean_rel)).collect::<Vec<_>>());
            let mut summary = format!("trials={}\nmax_rel_frobenius={}\n", rows.len(), fmt_f64(worst));
            summary.push_str(&format!(
                "max_decoupling={}\n",
                fmt_f64(rows.iter().map(|r| r.decoupling).fold(0.0, f64::max))
            ));
            summary.push_str(&format!(
                "sweep_log_log_slope={}\n",
                slope.map(fmt_f64).unwrap_or_else(|| "nan".into())
            ));
            run.write_text(out.join("summary.txt"), &summary)?;
            println!("{} trials, max relative mismatch {worst:.3e}", rows.len());
            run.finish(&out)
        }
        Command::Report { common, system, data } => {
            let mut run = Run::new("report", &common)?;
            run.s.flag("system", system);
            run.s.flag("data", data.as_ref().map(|p| p.display()));
            let p = run.system()?;
            let data = run.data_dir(p);
            let out = run.out_dir(&data.join("report"));
            let mut fits = Vec::new();
            for body in [1u8, 2] {
                for eff in [false, true] {
                    let stem = head_for(body, eff).as_str();
                    let src = data.join(format!("{stem}.mae.csv"));
                    if src.exists() {
                        let text =
                            std::fs::read_to_string(&src).with_context(|| format!("reading {}", src.display()))?;
                        run.inputs.push(src);
                        run.write_text(out.join(format!("mae-{stem}.csv")), &text)?;
                    }
                }
                let bpath = data.join(format!("{}.ckpt", head_for(body, false).as_str()));
                let epath = data.join(format!("{}.ckpt", head_for(body, true).as_str()));
                if !(bpath.exists() && epath.exists()) {
                    continue;
                }
                let bm = run.load_model(bpath)?;
                let em = run.load_model(epath)?;
                let sp = spectrum(&bm, &em)?;
                run.write_csv(out.join(format!("overlap-{body}.csv")), &sp.align.overlap_csv())?;
                run.write_csv(out.join(format!("eigen-{body}.csv")), &differences_csv(&sp.diffs))?;
                run.write_text(out.join(format!("spectrum-{body}.txt")), &spectrum_summary(&sp))?;
                let fit = fit_tan(&sp.diffs)?;
                run.write_csv(out.join(format!("tan-{body}.curve.csv")), &curve_csv(&fit, &sp.diffs))?;
                fits.push((p.name.to_string(), body_name(body).to_string(), fit));
            }
            if run.outputs.is_empty() {
                bail!(
                    "nothing to report in {} (run train-bare and finetune first)",
                    data.display()
                );
            }
            if !fits.is_empty() {
                run.write_csv(out.join("tan-fit.csv"), &tan_report(&fits))?;
                for (_, _, f) in &fits {
                    print_fit(f);
                }
            }
            run.finish(&out)
        }
    }
}

fn print_fit(fit: &TanFit) {
    println!(
        "tan fit: rate {:.6e} amplitude {:.6e} center {:.4} residual {:.3e}",
        fit.rate, fit.amplitude, fit.center, fit.residual
    );
}

/// Reads the `eps_B` and `eps_D` columns of an eigenpair table.
fn read_eigenpairs(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let (header, rows) = read_csv(path)?;
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| anyhow!("{} has no '{name}' column", path.display()))
    };
    let (cb, cd) = (col("eps_B")?, col("eps_D")?);
    let mut b = Vec::with_capacity(rows.len());
    let mut d = Vec::with_capacity(rows.len());
    for (n, r) in rows.iter().enumerate() {
        let get = |c: usize| -> Result<f64> {
            r.get(c)
                .ok_or_else(|| anyhow!("{} row {}: missing column", path.display(), n + 2))?
                .parse::<f64>()
                .map_err(|e| anyhow!("{} row {}: {e}", path.display(), n + 2))
        };
        b.push(get(cb)?);
        d.push(get(cd)?);
    }
    if b.is_empty() {
        bail!("{} has no rows", path.display());
    }
    Ok((b, d))
}
