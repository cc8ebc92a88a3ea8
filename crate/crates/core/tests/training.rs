use vnet_core::factorized_interactions::{HeadKind, KernelMatrix};
use vnet_core::nn_core::OrbitalNet;
use vnet_core::synth_gen::{plant_series, preset, PlantSpec, Profile};
use vnet_core::tensor_store::{GeometrySeries, Kind};
use vnet_core::training_pipeline::*;

fn small_series() -> (GeometrySeries, Vec<f64>) {
    let p = preset("H4").unwrap();
    let mut spec: PlantSpec = p.plant_spec(Profile::Desk, 3);
    spec.ell = 8;
    spec.geometries = spec.geometries.iter().step_by(6).copied().collect();
    let (series, _) = plant_series(&spec).unwrap();
    let refs = vec![spec.geometries[2], spec.geometries[7]];
    (series, refs)
}

fn small_config(stage: HeadKind) -> TrainConfig {
    TrainConfig {
        epochs: 30,
        batch_size: 32,
        hidden: vec![12, 12],
        ell: 8,
        seed: 5,
        ..TrainConfig::desk(stage)
    }
}

#[test]
fn stage1_loss_decreases() {
    let (series, _) = small_series();
    for head in [HeadKind::BareTwoBody, HeadKind::BareOneBody] {
        let (_, rep) = train_bare(&series, &small_config(head)).unwrap();
        assert!(
            rep.final_loss < rep.initial_loss,
            "{head}: {} -> {}",
            rep.initial_loss,
            rep.final_loss
        );
        assert_eq!(rep.epoch_losses.len(), 30);
        assert!(rep.per_geometry.iter().all(|g| g.split == Split::Train));
    }
}

#[test]
fn effective_start_reproduces_bare_predictions() {
    let (series, refs) = small_series();
    for (bare, eff) in [
        (HeadKind::BareTwoBody, HeadKind::EffTwoBody),
        (HeadKind::BareOneBody, HeadKind::EffOneBody),
    ] {
        let (m1, _) = train_bare(&series, &small_config(bare)).unwrap();
        let m2 = init_effective(&m1, eff).unwrap();
        for &r in &series.geometries() {
            let a = m1.predict_set("H4", r).unwrap();
            let b = m2.predict_set("H4", r).unwrap();
            assert_eq!(a.two_body(), b.two_body());
            assert_eq!(a.one_body(), b.one_body());
        }
        // The first stage-2 loss is the bare model's loss on effective targets.
        let (_, rep) = finetune_effective(&series, &m1, &refs, &small_config(eff)).unwrap();
        let mut expect = 0.0;
        let mut n = 0;
        for &r in &refs {
            let k = series.find(r, GEOMETRY_MATCH_TOL).unwrap();
            let target = series.points()[k].effective.as_ref().unwrap();
            let pred = m1.predict_set("H4", r).unwrap();
            if eff.is_two_body() {
                for (idx, v) in target.nonsymmetric_unit() {
                    expect += (pred.two(idx) - v).powi(2);
                    n += 1;
                }
            } else {
                for ([p, q], v) in target.one_body_unit() {
                    expect += (pred.one(p, q) - v).powi(2);
                    n += 1;
                }
            }
        }
        expect /= n as f64;
        assert!((rep.initial_loss - expect).abs() <= 1e-12 * expect.max(1.0), "{eff}");
        let train = rep.per_geometry.iter().filter(|g| g.split == Split::Train).count();
        assert_eq!(train, refs.len());
    }
}

#[test]
fn training_is_bit_reproducible() {
    let (series, refs) = small_series();
    let cfg = small_config(HeadKind::BareTwoBody);
    let (a, ra) = train_bare(&series, &cfg).unwrap();
    let (b, rb) = train_bare(&series, &cfg).unwrap();
    assert_eq!(ra.render(), rb.render());
    assert_eq!(a.to_checkpoint(0).render(), b.to_checkpoint(0).render());
    let cfg2 = small_config(HeadKind::EffTwoBody);
    let (_, fa) = finetune_effective(&series, &a, &refs, &cfg2).unwrap();
    let (_, fb) = finetune_effective(&series, &b, &refs, &cfg2).unwrap();
    assert_eq!(fa.render(), fb.render());
    assert_eq!(fa.mae_csv().render(), fb.mae_csv().render());
}

#[test]
fn zero_model_mae_is_mean_absolute_entry() {
    let (series, _) = small_series();
    let norm = GeomNorm::fit(&series.geometries()).unwrap();
    let net = OrbitalNet::zeros(4, &[5], 8).unwrap();
    let model = Model::new(HeadKind::BareTwoBody, net, None, KernelMatrix::identity(8), norm).unwrap();
    let maes = evaluate_mae(&model, &series, &[]).unwrap();
    for (g, set) in maes.iter().zip(series.sets(Kind::Bare)) {
        let unit = set.nonsymmetric_unit();
        let mean = unit.iter().map(|(_, v)| v.abs()).sum::<f64>() / unit.len() as f64;
        assert!((g.mae - mean).abs() < 1e-15);
        assert_eq!(g.split, Split::Test);
    }
}
