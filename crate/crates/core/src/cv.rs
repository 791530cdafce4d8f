//! Stratified k-fold cross-validation and the single-member/ensemble ablation.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data_io::FeatureDataset;
use crate::ensemble;
use crate::error::{Error, Result};
use crate::exec;
use crate::metrics::{self, ConfusionMatrix, MetricsReport};
use crate::pipeline::{Mode, Pipeline};
use crate::rnn::{LabelEncoding, ModelConfig};
use crate::seed;

pub const DEFAULT_FOLDS: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    /// Test fold of each sample.
    pub assignments: Vec<usize>,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Shuffles each class with a seeded stream, then deals the classes one after
/// another round-robin over the folds, continuing the rotation across class
/// boundaries. Every class and the whole dataset end up split as evenly as
/// possible (sizes differ by at most one).
pub fn stratified_folds(
    labels: &[usize],
    encoding: &LabelEncoding,
    k: usize,
    seed: u64,
) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::contract(format!("need k ≥ 2 folds, got {k}")));
    }
    encoding.check_labels(labels)?;
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); encoding.class_count()];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l].push(i);
    }
    for (c, members) in by_class.iter().enumerate() {
        if members.len() < k {
            return Err(Error::InfeasibleStratification {
                class: encoding.class_names()[c].clone(),
                count: members.len(),
                folds: k,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = vec![0; labels.len()];
    let mut next = 0usize;
    for members in &mut by_class {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            assignments[i] = next % k;
            next += 1;
        }
    }
    Ok(FoldPlan {
        k,
        seed,
        assignments,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub folds: usize,
    pub model: ModelConfig,
    pub mode: Mode,
    pub scale: bool,
    pub master_seed: u64,
    pub positive_class: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            folds: DEFAULT_FOLDS,
            model: ModelConfig::default(),
            mode: Mode::Ensemble,
            scale: true,
            master_seed: 0,
            positive_class: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self, class_count: usize) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::contract(format!(
                "need k ≥ 2 folds, got {}",
                self.folds
            )));
        }
        if self.positive_class >= class_count {
            return Err(Error::contract(format!(
                "positive class {} outside 0..{class_count}",
                self.positive_class
            )));
        }
        self.model.validate()
    }
}

/// Wall-clock milliseconds spent in each phase of one fold.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub fit_ms: f64,
    pub predict_ms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FoldResult {
    /// Zero-based fold index.
    pub fold: usize,
    pub model_seed: u64,
    pub train_size: usize,
    pub test_size: usize,
    pub confusion: ConfusionMatrix,
    pub metrics: MetricsReport,
    pub timings: PhaseTimings,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CvResult {
    pub config: ExperimentConfig,
    pub encoding: LabelEncoding,
    pub plan: FoldPlan,
    pub folds: Vec<FoldResult>,
    pub aggregate: MetricsReport,
    /// Out-of-fold prediction for every sample, in dataset order.
    pub predictions: Vec<usize>,
    pub labels: Vec<usize>,
    pub total_ms: f64,
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Runs one k-fold experiment. Folds execute concurrently under the `parallel`
/// feature; each fold's seed depends only on `(master_seed, fold)`, so the
/// result is the same either way.
pub fn run_cv(dataset: &FeatureDataset, cfg: &ExperimentConfig) -> Result<CvResult> {
    let start = Instant::now();
    if dataset.n_samples() == 0 {
        return Err(Error::contract("empty dataset"));
    }
    cfg.validate(dataset.encoding.class_count())?;
    let plan = stratified_folds(
        &dataset.labels,
        &dataset.encoding,
        cfg.folds,
        seed::fold_plan_seed(cfg.master_seed),
    )?;

    let outcomes = exec::map_indices(cfg.folds, |fold| {
        run_fold(dataset, cfg, &plan, fold).map_err(|e| Error::Fold {
            fold,
            source: Box::new(e),
        })
    });

    let mut predictions = vec![usize::MAX; dataset.n_samples()];
    let mut folds = Vec::with_capacity(cfg.folds);
    for outcome in outcomes {
        let (result, test_idx, preds) = outcome?;
        for (&i, &p) in test_idx.iter().zip(&preds) {
            predictions[i] = p;
        }
        folds.push(result);
    }
    debug_assert!(predictions.iter().all(|&p| p != usize::MAX));
    let aggregate = metrics::aggregate_folds(&folds.iter().map(|f| f.metrics).collect::<Vec<_>>())?;
    Ok(CvResult {
        config: *cfg,
        encoding: dataset.encoding.clone(),
        plan,
        folds,
        aggregate,
        predictions,
        labels: dataset.labels.clone(),
        total_ms: elapsed_ms(start),
    })
}

/// Fits the scaler and head of `fold` on that fold's training rows only.
pub fn fit_fold(
    dataset: &FeatureDataset,
    cfg: &ExperimentConfig,
    plan: &FoldPlan,
    fold: usize,
) -> Result<Pipeline> {
    let train_idx = plan.train_indices(fold);
    let x_train = dataset.x.select_rows(&train_idx)?;
    let y_train: Vec<usize> = train_idx.iter().map(|&i| dataset.labels[i]).collect();
    Pipeline::fit(
        &x_train,
        &y_train,
        &dataset.encoding,
        cfg.mode,
        &cfg.model,
        cfg.scale,
        seed::fold_model_seed(cfg.master_seed, fold),
    )
}

fn run_fold(
    dataset: &FeatureDataset,
    cfg: &ExperimentConfig,
    plan: &FoldPlan,
    fold: usize,
) -> Result<(FoldResult, Vec<usize>, Vec<usize>)> {
    let train_idx = plan.train_indices(fold);
    let test_idx = plan.test_indices(fold);
    let x_test = dataset.x.select_rows(&test_idx)?;
    let y_test: Vec<usize> = test_idx.iter().map(|&i| dataset.labels[i]).collect();
    let model_seed = seed::fold_model_seed(cfg.master_seed, fold);

    let t = Instant::now();
    let pipeline = fit_fold(dataset, cfg, plan, fold)?;
    let fit_ms = elapsed_ms(t);

    let t = Instant::now();
    let preds = pipeline.predict(&x_test)?;
    let predict_ms = elapsed_ms(t);

    let confusion = metrics::confusion(&y_test, &preds, cfg.positive_class)?;
    let result = FoldResult {
        fold,
        model_seed,
        train_size: train_idx.len(),
        test_size: test_idx.len(),
        confusion,
        metrics: metrics::compute_metrics(&confusion),
        timings: PhaseTimings { fit_ms, predict_ms },
    };
    Ok((result, test_idx, preds))
}

#[derive(Clone, Debug, PartialEq)]
pub struct AblationResult {
    pub rows: Vec<(Mode, CvResult)>,
}

impl AblationResult {
    pub fn get(&self, mode: Mode) -> Option<&CvResult> {
        self.rows.iter().find(|(m, _)| *m == mode).map(|(_, r)| r)
    }

    /// Majority vote of the three single-member runs' out-of-fold predictions.
    /// Equals the ensemble row's predictions, since all runs share seeds.
    pub fn recombined_ensemble(&self) -> Result<Vec<usize>> {
        let get = |m| {
            self.get(m)
                .map(|r| r.predictions.as_slice())
                .ok_or_else(|| Error::contract(format!("ablation is missing the {m} row")))
        };
        ensemble::majority_vote([
            get(Mode::ElmOnly)?,
            get(Mode::RvflOnly)?,
            get(Mode::SnnOnly)?,
        ])
    }
}

/// The four runs `elm_only`, `rvfl_only`, `snn_only`, `ensemble` under one master seed.
pub fn run_ablation(dataset: &FeatureDataset, base: &ExperimentConfig) -> Result<AblationResult> {
    let rows = Mode::ALL
        .iter()
        .map(|&mode| {
            let cfg = ExperimentConfig { mode, ..*base };
            run_cv(dataset, &cfg).map(|r| (mode, r))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AblationResult { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn enc() -> LabelEncoding {
        LabelEncoding::new(vec!["a".into(), "b".into()]).unwrap()
    }

    #[test]
    fn ten_samples_five_folds_one_per_class() {
        let labels = [0, 1, 0, 1, 0, 1, 0, 1, 0, 1];
        let plan = stratified_folds(&labels, &enc(), 5, 3).unwrap();
        for f in 0..5 {
            let test = plan.test_indices(f);
            assert_eq!(test.len(), 2);
            let ones = test.iter().filter(|&&i| labels[i] == 1).count();
            assert_eq!(ones, 1);
        }
        assert_eq!(plan, stratified_folds(&labels, &enc(), 5, 3).unwrap());
    }

    #[test]
    fn too_small_class_is_infeasible() {
        let labels = [0, 0, 0, 0, 0, 1, 1, 1];
        assert!(matches!(
            stratified_folds(&labels, &enc(), 5, 0),
            Err(Error::InfeasibleStratification {
                count: 3,
                folds: 5,
                ..
            })
        ));
        assert!(stratified_folds(&labels, &enc(), 1, 0).is_err());
    }

    #[test]
    fn train_and_test_partition() {
        let labels: Vec<usize> = (0..23).map(|i| (i * 7 % 3 == 0) as usize).collect();
        let plan = stratified_folds(&labels, &enc(), 4, 11).unwrap();
        for f in 0..4 {
            let mut all = plan.train_indices(f);
            let test = plan.test_indices(f);
            assert!(test.iter().all(|i| !all.contains(i)));
            all.extend(test);
            all.sort_unstable();
            assert_eq!(all, (0..23).collect::<Vec<_>>());
        }
    }
}
