use proptest::prelude::*;
use randnet_core::cv::{
    fit_fold, run_ablation, run_cv, stratified_folds, ExperimentConfig, FoldPlan,
};
use randnet_core::data_io::FeatureDataset;
use randnet_core::ensemble::member_seed;
use randnet_core::linalg::Matrix;
use randnet_core::metrics;
use randnet_core::pipeline::{Head, Mode};
use randnet_core::rnn::{LabelEncoding, Variant};
use randnet_core::seed;
use randnet_core::synth;

fn enc2() -> LabelEncoding {
    LabelEncoding::new(vec!["mdr".into(), "ds".into()]).unwrap()
}

fn accuracy(a: &[usize], b: &[usize]) -> f64 {
    a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / a.len() as f64
}

fn check_plan(plan: &FoldPlan, labels: &[usize], classes: usize) {
    let k = plan.k;
    let sizes = plan.fold_sizes();
    assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    for c in 0..classes {
        let mut per = vec![0usize; k];
        for (i, &l) in labels.iter().enumerate() {
            if l == c {
                per[plan.assignments[i]] += 1;
            }
        }
        assert!(
            per.iter().max().unwrap() - per.iter().min().unwrap() <= 1,
            "class {c}: {per:?}"
        );
    }
    let mut tested = vec![0usize; labels.len()];
    for f in 0..k {
        let train = plan.train_indices(f);
        let test = plan.test_indices(f);
        assert_eq!(train.len() + test.len(), labels.len());
        let mut in_test = vec![false; labels.len()];
        for &i in &test {
            in_test[i] = true;
            tested[i] += 1;
        }
        assert!(train.iter().all(|&i| !in_test[i]));
    }
    assert!(tested.iter().all(|&t| t == 1));
}

#[test]
fn large_manifest_stratification() {
    // 7205 of class 0 and 6920 of class 1, interleaved deterministically
    let mut labels: Vec<usize> = (0..14_125).map(|i| usize::from(i >= 7205)).collect();
    labels.rotate_left(3001);
    let plan = stratified_folds(&labels, &enc2(), 5, 2024).unwrap();
    assert_eq!(plan.fold_sizes(), vec![2825; 5]);
    check_plan(&plan, &labels, 2);
}

proptest! {
    #[test]
    fn stratification_laws(labels in prop::collection::vec(0usize..3, 30..300), k in 2usize..7, seed in any::<u64>()) {
        let enc = LabelEncoding::new(vec!["a".into(), "b".into(), "c".into()]).unwrap();
        let counts: Vec<usize> = (0..3).map(|c| labels.iter().filter(|&&l| l == c).count()).collect();
        let result = stratified_folds(&labels, &enc, k, seed);
        if counts.iter().any(|&n| n < k) {
            prop_assert!(result.is_err());
        } else {
            let plan = result.unwrap();
            check_plan(&plan, &labels, 3);
            prop_assert_eq!(plan, stratified_folds(&labels, &enc, k, seed).unwrap());
        }
    }
}

#[test]
fn scaler_uses_training_rows_only() {
    let ds = synth::blobs(60, 4, 2.0, 8).unwrap();
    let cfg = ExperimentConfig {
        model: randnet_core::rnn::ModelConfig {
            hidden_nodes: 10,
            ..Default::default()
        },
        mode: Mode::ElmOnly,
        ..ExperimentConfig::default()
    };
    let plan = stratified_folds(&ds.labels, &ds.encoding, 5, seed::fold_plan_seed(0)).unwrap();
    for fold in 0..5 {
        let p = fit_fold(&ds, &cfg, &plan, fold).unwrap();
        let train = plan.train_indices(fold);
        let n = train.len() as f64;
        for j in 0..4 {
            let mean = train.iter().map(|&i| ds.x.get(i, j)).sum::<f64>() / n;
            let var = train
                .iter()
                .map(|&i| (ds.x.get(i, j) - mean).powi(2))
                .sum::<f64>()
                / n;
            assert!((p.scaler.mean[j] - mean).abs() < 1e-12);
            assert!((p.scaler.std[j] - var.sqrt()).abs() < 1e-12);
        }
    }
}

#[test]
fn test_rows_do_not_affect_their_fold() {
    let ds = synth::blobs(60, 4, 2.0, 8).unwrap();
    let cfg = ExperimentConfig {
        model: randnet_core::rnn::ModelConfig {
            hidden_nodes: 10,
            ..Default::default()
        },
        ..ExperimentConfig::default()
    };
    let plan = stratified_folds(&ds.labels, &ds.encoding, 5, seed::fold_plan_seed(0)).unwrap();
    let test = plan.test_indices(2);
    let mut poisoned = ds.clone();
    poisoned.x = Matrix::from_fn(60, 4, |i, j| {
        if test.contains(&i) {
            1e6
        } else {
            ds.x.get(i, j)
        }
    });
    assert_eq!(
        fit_fold(&ds, &cfg, &plan, 2).unwrap(),
        fit_fold(&poisoned, &cfg, &plan, 2).unwrap()
    );
}

/// Independent baseline: class means of the training rows, nearest mean wins.
fn nearest_centroid_cv(ds: &FeatureDataset, plan: &FoldPlan) -> f64 {
    let d = ds.n_features();
    let mut correct = 0;
    for f in 0..plan.k {
        let mut sums = vec![vec![0.0; d]; 2];
        let mut counts = [0.0; 2];
        for i in plan.train_indices(f) {
            counts[ds.labels[i]] += 1.0;
            for j in 0..d {
                sums[ds.labels[i]][j] += ds.x.get(i, j);
            }
        }
        for i in plan.test_indices(f) {
            let dist = |c: usize| {
                (0..d)
                    .map(|j| (ds.x.get(i, j) - sums[c][j] / counts[c]).powi(2))
                    .sum::<f64>()
            };
            let pred = usize::from(dist(1) < dist(0));
            correct += usize::from(pred == ds.labels[i]);
        }
    }
    correct as f64 / ds.n_samples() as f64
}

fn blobs_cv(h: usize, mode: Mode) -> randnet_core::cv::CvResult {
    let ds = synth::blobs(400, 20, 4.0, 1).unwrap();
    let cfg = ExperimentConfig {
        master_seed: 7,
        mode,
        model: randnet_core::rnn::ModelConfig {
            hidden_nodes: h,
            ..Default::default()
        },
        ..ExperimentConfig::default()
    };
    run_cv(&ds, &cfg).unwrap()
}

#[test]
fn separated_blobs_cross_validate_well_away_from_threshold() {
    let ds = synth::blobs(400, 20, 4.0, 1).unwrap();
    for h in [50, 1600] {
        let r = blobs_cv(h, Mode::Ensemble);
        let oracle = nearest_centroid_cv(&ds, &r.plan);
        assert!(oracle >= 0.95, "nearest-centroid oracle {oracle}");
        let acc = r.aggregate.accuracy.unwrap();
        assert!(acc >= 0.95, "H={h}: ensemble {acc}, oracle {oracle}");
        // out-of-fold predictions agree with per-fold confusion tallies
        let pooled = accuracy(&r.predictions, &r.labels);
        let tallied: u64 = r
            .folds
            .iter()
            .map(|f| f.confusion.tp + f.confusion.tn)
            .sum();
        assert_eq!((pooled * 400.0).round() as u64, tallied);
    }
}

/// With 320 training rows per fold, H = 400 sits just past the interpolation
/// threshold, where min-norm members are noisy; the vote still beats each one.
#[test]
fn vote_beats_members_near_threshold() {
    let ens = blobs_cv(400, Mode::Ensemble).aggregate.accuracy.unwrap();
    for mode in [Mode::ElmOnly, Mode::RvflOnly, Mode::SnnOnly] {
        let single = blobs_cv(400, mode).aggregate.accuracy.unwrap();
        assert!(ens > single, "{mode}: {single} vs ensemble {ens}");
    }
}

#[test]
fn shuffled_labels_are_at_chance() {
    let mut ds = synth::blobs(400, 20, 4.0, 1).unwrap();
    synth::shuffle_labels(&mut ds, 1);
    let r = run_cv(&ds, &ExperimentConfig::default()).unwrap();
    let acc = r.aggregate.accuracy.unwrap();
    assert!((0.40..=0.60).contains(&acc), "{acc}");
}

#[test]
fn elm_only_matches_ensemble_member() {
    let ds = synth::blobs(100, 6, 2.0, 4).unwrap();
    let base = ExperimentConfig {
        model: randnet_core::rnn::ModelConfig {
            hidden_nodes: 30,
            ..Default::default()
        },
        master_seed: 3,
        ..ExperimentConfig::default()
    };
    let elm_cfg = ExperimentConfig {
        mode: Mode::ElmOnly,
        ..base
    };
    let plan = stratified_folds(&ds.labels, &ds.encoding, 5, seed::fold_plan_seed(3)).unwrap();
    let elm_run = run_cv(&ds, &elm_cfg).unwrap();
    for fold in 0..5 {
        let ens = fit_fold(&ds, &base, &plan, fold).unwrap();
        let single = fit_fold(&ds, &elm_cfg, &plan, fold).unwrap();
        let Head::Ensemble(e) = &ens.head else {
            panic!()
        };
        let Head::Single { model, .. } = &single.head else {
            panic!()
        };
        assert_eq!(e.member(Variant::Elm), model);
        assert_eq!(
            model.seed(),
            member_seed(seed::fold_model_seed(3, fold), Variant::Elm)
        );
        let test = plan.test_indices(fold);
        let xs = ds.x.select_rows(&test).unwrap();
        let via_ensemble = e
            .member(Variant::Elm)
            .predict_labels(&randnet_core::pipeline::apply_scaler(&ens.scaler, &xs).unwrap())
            .unwrap();
        let via_run: Vec<usize> = test.iter().map(|&i| elm_run.predictions[i]).collect();
        assert_eq!(via_ensemble, via_run);
    }
}

#[test]
fn ablation_rows_recombine_and_repeat() {
    let ds = synth::blobs(120, 8, 1.5, 6).unwrap();
    let base = ExperimentConfig {
        model: randnet_core::rnn::ModelConfig {
            hidden_nodes: 40,
            ..Default::default()
        },
        master_seed: 11,
        ..ExperimentConfig::default()
    };
    let a = run_ablation(&ds, &base).unwrap();
    let modes: Vec<Mode> = a.rows.iter().map(|(m, _)| *m).collect();
    assert_eq!(
        modes,
        vec![Mode::ElmOnly, Mode::RvflOnly, Mode::SnnOnly, Mode::Ensemble]
    );
    assert_eq!(
        a.recombined_ensemble().unwrap(),
        a.get(Mode::Ensemble).unwrap().predictions
    );
    let b = run_ablation(&ds, &base).unwrap();
    for ((_, x), (_, y)) in a.rows.iter().zip(&b.rows) {
        assert_eq!(x.predictions, y.predictions);
        assert_eq!(
            x.folds.iter().map(|f| f.confusion).collect::<Vec<_>>(),
            y.folds.iter().map(|f| f.confusion).collect::<Vec<_>>()
        );
    }
}

#[test]
fn aggregate_is_mean_of_folds() {
    let ds = synth::blobs(90, 5, 2.0, 2).unwrap();
    let cfg = ExperimentConfig {
        model: randnet_core::rnn::ModelConfig {
            hidden_nodes: 20,
            ..Default::default()
        },
        ..ExperimentConfig::default()
    };
    let r = run_cv(&ds, &cfg).unwrap();
    let mean = r
        .folds
        .iter()
        .map(|f| f.metrics.accuracy.unwrap())
        .sum::<f64>()
        / 5.0;
    assert!((r.aggregate.accuracy.unwrap() - mean).abs() < 1e-15);
    let again =
        metrics::aggregate_folds(&r.folds.iter().map(|f| f.metrics).collect::<Vec<_>>()).unwrap();
    assert_eq!(again, r.aggregate);
}

#[test]
fn infeasible_fold_count_is_reported() {
    let ds = synth::blobs(20, 3, 2.0, 2).unwrap();
    let cfg = ExperimentConfig {
        folds: 11,
        ..ExperimentConfig::default()
    };
    // ten per class cannot fill eleven folds
    assert!(matches!(
        run_cv(&ds, &cfg),
        Err(randnet_core::Error::InfeasibleStratification {
            count: 10,
            folds: 11,
            ..
        })
    ));
}
