//! JSON and text renderings of cross-validation results.
//!
//! Key order is fixed by the struct definitions below, numbers are written at
//! full precision, and each score also carries a 4-decimal `display` string.
//! Wall-clock timings are opt-in: without them a report is a pure function of
//! the dataset and configuration, so reruns are byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cv::{AblationResult, CvResult, PhaseTimings};
use crate::error::{Error, Result};
use crate::metrics::{MetricsReport, METRIC_NAMES};
use crate::rnn::{Activation, Variant, WeightDistribution};
use crate::seed;

pub const CV_REPORT_FORMAT: &str = "randnet-cv-report/1";
pub const ABLATION_REPORT_FORMAT: &str = "randnet-ablation-report/1";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ReportOptions {
    pub include_timings: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub value: f64,
    pub display: String,
}

impl MetricValue {
    fn new(v: Option<f64>) -> Option<Self> {
        v.map(|value| Self {
            value,
            display: format!("{value:.4}"),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsEntry {
    pub accuracy: Option<MetricValue>,
    pub specificity: Option<MetricValue>,
    pub precision: Option<MetricValue>,
    pub sensitivity: Option<MetricValue>,
    pub f1: Option<MetricValue>,
}

impl From<&MetricsReport> for MetricsEntry {
    fn from(m: &MetricsReport) -> Self {
        Self {
            accuracy: MetricValue::new(m.accuracy),
            specificity: MetricValue::new(m.specificity),
            precision: MetricValue::new(m.precision),
            sensitivity: MetricValue::new(m.sensitivity),
            f1: MetricValue::new(m.f1),
        }
    }
}

impl MetricsEntry {
    pub fn to_report(&self) -> MetricsReport {
        let v = |m: &Option<MetricValue>| m.as_ref().map(|m| m.value);
        MetricsReport {
            accuracy: v(&self.accuracy),
            sensitivity: v(&self.sensitivity),
            precision: v(&self.precision),
            specificity: v(&self.specificity),
            f1: v(&self.f1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub folds: usize,
    pub mode: String,
    pub hidden_nodes: usize,
    pub activation: Activation,
    pub distribution: WeightDistribution,
    pub ridge_lambda: f64,
    pub scale: bool,
    pub n_samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedProvenance {
    pub master: u64,
    pub fold_plan: u64,
    pub fold_models: Vec<u64>,
    /// Added to a fold's model seed to get each member's layer seed.
    pub member_offsets: MemberOffsets,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberOffsets {
    pub elm: u64,
    pub rvfl: u64,
    pub snn: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfusionEntry {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldEntry {
    pub name: String,
    pub model_seed: u64,
    pub train_size: usize,
    pub test_size: usize,
    pub confusion: ConfusionEntry,
    pub metrics: MetricsEntry,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingEntry {
    pub total_ms: f64,
    pub folds: Vec<PhaseTimings>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub format: String,
    pub config: ConfigEcho,
    pub seeds: SeedProvenance,
    pub class_names: Vec<String>,
    pub positive_class: String,
    pub folds: Vec<FoldEntry>,
    pub aggregate: MetricsEntry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<TimingEntry>,
}

impl CvReport {
    pub fn from_result(r: &CvResult, opts: ReportOptions) -> Self {
        let c = &r.config;
        Self {
            format: CV_REPORT_FORMAT.to_string(),
            config: ConfigEcho {
                folds: c.folds,
                mode: c.mode.to_string(),
                hidden_nodes: c.model.hidden_nodes,
                activation: c.model.activation,
                distribution: c.model.distribution,
                ridge_lambda: c.model.ridge_lambda,
                scale: c.scale,
                n_samples: r.labels.len(),
            },
            seeds: SeedProvenance {
                master: c.master_seed,
                fold_plan: seed::fold_plan_seed(c.master_seed),
                fold_models: r.folds.iter().map(|f| f.model_seed).collect(),
                member_offsets: MemberOffsets {
                    elm: Variant::Elm.seed_offset(),
                    rvfl: Variant::Rvfl.seed_offset(),
                    snn: Variant::Snn.seed_offset(),
                },
            },
            class_names: r.encoding.class_names().to_vec(),
            positive_class: r.encoding.class_names()[c.positive_class].clone(),
            folds: r
                .folds
                .iter()
                .map(|f| FoldEntry {
                    name: format!("Fold{}", f.fold + 1),
                    model_seed: f.model_seed,
                    train_size: f.train_size,
                    test_size: f.test_size,
                    confusion: ConfusionEntry {
                        tp: f.confusion.tp,
                        tn: f.confusion.tn,
                        fp: f.confusion.fp,
                        fn_: f.confusion.fn_,
                    },
                    metrics: MetricsEntry::from(&f.metrics),
                })
                .collect(),
            aggregate: MetricsEntry::from(&r.aggregate),
            timings: opts.include_timings.then(|| TimingEntry {
                total_ms: r.total_ms,
                folds: r.folds.iter().map(|f| f.timings).collect(),
            }),
        }
    }

    pub fn grid(&self) -> String {
        let mut rows: Vec<(String, MetricsReport)> = self
            .folds
            .iter()
            .map(|f| (f.name.clone(), f.metrics.to_report()))
            .collect();
        rows.push(("Average".into(), self.aggregate.to_report()));
        format_grid(&rows)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub mode: String,
    pub report: CvReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub format: String,
    pub rows: Vec<AblationRow>,
}

impl AblationReport {
    pub fn from_result(a: &AblationResult, opts: ReportOptions) -> Self {
        Self {
            format: ABLATION_REPORT_FORMAT.to_string(),
            rows: a
                .rows
                .iter()
                .map(|(mode, r)| AblationRow {
                    mode: mode.to_string(),
                    report: CvReport::from_result(r, opts),
                })
                .collect(),
        }
    }

    pub fn grid(&self) -> String {
        let rows: Vec<(String, MetricsReport)> = self
            .rows
            .iter()
            .map(|r| (r.mode.clone(), r.report.aggregate.to_report()))
            .collect();
        format_grid(&rows)
    }
}

/// Fixed-width table: one labelled row per entry, four decimals, `n/a` for undefined.
pub fn format_grid(rows: &[(String, MetricsReport)]) -> String {
    let label_w = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0).max(8);
    let mut out = String::new();
    let _ = write!(out, "{:<label_w$}", "");
    for name in METRIC_NAMES {
        let _ = write!(out, "  {name:>11}");
    }
    out.push('\n');
    for (label, m) in rows {
        let _ = write!(out, "{label:<label_w$}");
        for v in m.in_display_order() {
            match v {
                Some(v) => {
                    let _ = write!(out, "  {v:>11.4}");
                }
                None => {
                    let _ = write!(out, "  {:>11}", "n/a");
                }
            }
        }
        out.push('\n');
    }
    out
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_report_json(result: &CvResult, path: &Path, opts: ReportOptions) -> Result<()> {
    write_json(&CvReport::from_result(result, opts), path)
}

pub fn write_ablation_json(
    result: &AblationResult,
    path: &Path,
    opts: ReportOptions,
) -> Result<()> {
    write_json(&AblationReport::from_result(result, opts), path)
}

/// `index,fold,true,predicted` with class names, one row per sample.
pub fn write_predictions_csv(result: &CvResult, path: &Path) -> Result<()> {
    let names = result.encoding.class_names();
    let mut out = String::from("index,fold,true,predicted\n");
    for (i, (&t, &p)) in result.labels.iter().zip(&result.predictions).enumerate() {
        let _ = writeln!(
            out,
            "{i},{},{},{}",
            result.plan.assignments[i] + 1,
            names[t],
            names[p]
        );
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// `index,fold,true,<mode>…`: every run's out-of-fold prediction side by side.
pub fn write_ablation_predictions_csv(result: &AblationResult, path: &Path) -> Result<()> {
    let Some((_, first)) = result.rows.first() else {
        return Err(Error::contract("empty ablation"));
    };
    let names = first.encoding.class_names();
    let mut out = String::from("index,fold,true");
    for (mode, _) in &result.rows {
        let _ = write!(out, ",{mode}");
    }
    out.push('\n');
    for (i, &t) in first.labels.iter().enumerate() {
        let _ = write!(out, "{i},{},{}", first.plan.assignments[i] + 1, names[t]);
        for (_, r) in &result.rows {
            let _ = write!(out, ",{}", names[r.predictions[i]]);
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
