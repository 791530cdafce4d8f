//! `randnet`: train, evaluate and apply randomized-network classifiers on
//! feature files.

mod extract;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use randnet_core::cv::{self, ExperimentConfig};
use randnet_core::data_io::{self, DatasetFormat, FeatureDataset};
use randnet_core::metrics;
use randnet_core::pipeline::{Mode, Pipeline};
use randnet_core::report::{self, MetricsEntry, ReportOptions};
use randnet_core::rnn::{Activation, LabelEncoding, ModelConfig, WeightDistribution};
use randnet_core::synth;

#[derive(Parser)]
#[command(
    name = "randnet",
    version,
    about = "Closed-form randomized neural network classifiers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded synthetic two-class dataset.
    Synth(SynthArgs),
    /// Fit a classifier on a whole dataset and save it as JSON.
    Train(TrainArgs),
    /// Label a dataset with a saved classifier.
    Predict(PredictArgs),
    /// Stratified k-fold cross-validation of one head.
    Cv(CvArgs),
    /// Cross-validate elm_only, rvfl_only, snn_only and ensemble under one seed.
    Ablate(AblateArgs),
    /// Run the external image feature extractor.
    Extract(extract::ExtractArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Hidden nodes H.
    #[arg(long, default_value_t = 400, value_parser = clap::value_parser!(u64).range(1..))]
    hidden: u64,
    /// Hidden activation: sigmoid, tanh or relu.
    #[arg(long, default_value = "sigmoid", value_parser = parse_activation)]
    activation: Activation,
    /// Hidden weight and bias distribution: uniform (on [-1, 1]) or gaussian (N(0, 1)).
    #[arg(long, default_value = "uniform", value_parser = parse_distribution)]
    dist: WeightDistribution,
    /// Ridge term λ added to the least-squares solve; 0 is the plain pseudo-inverse.
    #[arg(long, default_value_t = 0.0, value_parser = parse_ridge)]
    ridge: f64,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ModelArgs {
    fn config(&self) -> ModelConfig {
        ModelConfig {
            hidden_nodes: self.hidden as usize,
            activation: self.activation,
            distribution: self.dist,
            seed: self.seed,
            ridge_lambda: self.ridge,
        }
    }
}

#[derive(Args)]
struct ExperimentArgs {
    /// Feature file (`.csv`, or the binary format).
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    /// Number of folds k.
    #[arg(long, default_value_t = 5, value_parser = parse_folds)]
    folds: usize,
    /// Skip per-fold feature standardization.
    #[arg(long)]
    no_scale: bool,
    /// Class scored as positive (default: the first class of the dataset).
    #[arg(long)]
    positive: Option<String>,
    /// Include wall-clock timings in the JSON report (makes it run-dependent).
    #[arg(long)]
    timings: bool,
    /// Also write out-of-fold predictions as CSV.
    #[arg(long)]
    predictions: Option<PathBuf>,
    /// JSON report path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CvArgs {
    #[command(flatten)]
    exp: ExperimentArgs,
    /// Head: ensemble, elm_only, rvfl_only or snn_only.
    #[arg(long, default_value = "ensemble", value_parser = parse_mode)]
    mode: Mode,
}

#[derive(Args)]
struct AblateArgs {
    #[command(flatten)]
    exp: ExperimentArgs,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    /// Model output path.
    #[arg(long)]
    out: PathBuf,
    /// Head: ensemble, elm_only, rvfl_only or snn_only.
    #[arg(long, default_value = "ensemble", value_parser = parse_mode)]
    mode: Mode,
    #[arg(long)]
    no_scale: bool,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Predictions CSV path (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the metrics as JSON here when the dataset's labels are known to the model.
    #[arg(long)]
    metrics: Option<PathBuf>,
    #[arg(long)]
    positive: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    Blobs,
    Xor,
}

#[derive(Clone, Copy, ValueEnum)]
enum FileFormat {
    Csv,
    Binary,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum, default_value = "blobs")]
    kind: SynthKind,
    #[arg(long, default_value_t = 400, value_parser = clap::value_parser!(u64).range(2..))]
    n: u64,
    /// Feature dimension (blobs only; xor is always 2-D).
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    dim: u64,
    /// Distance between the two blob means; the Bayes error is Φ(−sep/2).
    #[arg(long, default_value_t = 4.0, value_parser = parse_nonnegative)]
    sep: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Permute the labels, leaving no signal.
    #[arg(long)]
    shuffle_labels: bool,
    /// Output format (default: from the extension, `.csv` or binary).
    #[arg(long, value_enum)]
    format: Option<FileFormat>,
    #[arg(long)]
    out: PathBuf,
}

fn parse_activation(s: &str) -> Result<Activation, String> {
    s.parse()
}

fn parse_distribution(s: &str) -> Result<WeightDistribution, String> {
    s.parse()
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse()
}

fn parse_nonnegative(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("expected a finite value ≥ 0, got {s}"))
    }
}

fn parse_folds(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(k) if k >= 2 => Ok(k),
        Ok(k) => Err(format!("need at least 2 folds, got {k}")),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_ridge(s: &str) -> Result<f64, String> {
    parse_nonnegative(s)
}

fn load(path: &Path) -> Result<FeatureDataset> {
    Ok(data_io::load_dataset(path)?)
}

fn resolve_positive(enc: &LabelEncoding, name: Option<&str>) -> Result<usize> {
    match name {
        None => Ok(0),
        Some(n) => enc.index_of(n).with_context(|| {
            format!(
                "unknown positive class `{n}` (classes: {})",
                enc.class_names().join(", ")
            )
        }),
    }
}

fn experiment(a: &ExperimentArgs, ds: &FeatureDataset, mode: Mode) -> Result<ExperimentConfig> {
    Ok(ExperimentConfig {
        folds: a.folds,
        model: a.model.config(),
        mode,
        scale: !a.no_scale,
        master_seed: a.model.seed,
        positive_class: resolve_positive(&ds.encoding, a.positive.as_deref())?,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn cmd_synth(a: &SynthArgs) -> Result<()> {
    let mut ds = match a.kind {
        SynthKind::Blobs => synth::blobs(a.n as usize, a.dim as usize, a.sep, a.seed)?,
        SynthKind::Xor => synth::xor(a.n as usize, a.seed)?,
    };
    if a.shuffle_labels {
        synth::shuffle_labels(&mut ds, a.seed);
    }
    let format = match a.format {
        Some(FileFormat::Csv) => DatasetFormat::Csv,
        Some(FileFormat::Binary) => DatasetFormat::Binary,
        None => DatasetFormat::from_path(&a.out),
    };
    data_io::save_dataset(&a.out, &ds, format)?;
    eprintln!(
        "wrote {} samples × {} features to {}",
        ds.n_samples(),
        ds.n_features(),
        a.out.display()
    );
    Ok(())
}

fn cmd_train(a: &TrainArgs) -> Result<()> {
    let ds = load(&a.data)?;
    let cfg = a.model.config();
    let p = Pipeline::fit(
        &ds.x,
        &ds.labels,
        &ds.encoding,
        a.mode,
        &cfg,
        !a.no_scale,
        a.model.seed,
    )?;
    let mut text = p.to_json()?;
    text.push('\n');
    write_text(&a.out, &text)?;
    eprintln!(
        "trained {} on {} samples; model written to {}",
        a.mode,
        ds.n_samples(),
        a.out.display()
    );
    Ok(())
}

fn cmd_predict(a: &PredictArgs) -> Result<()> {
    let text = fs::read_to_string(&a.model)
        .with_context(|| format!("cannot read model {}", a.model.display()))?;
    let p = Pipeline::from_json(&text)
        .with_context(|| format!("cannot load model {}", a.model.display()))?;
    let ds = load(&a.data)?;
    let preds = p
        .predict(&ds.x)
        .with_context(|| format!("cannot apply model to {}", a.data.display()))?;
    let enc = p.encoding();
    let names = enc.class_names();

    // Ground truth counts only if every dataset class is one the model knows.
    let truth: Option<Vec<usize>> = ds
        .encoding
        .class_names()
        .iter()
        .map(|n| enc.index_of(n))
        .collect::<Option<Vec<_>>>()
        .map(|map| ds.labels.iter().map(|&l| map[l]).collect());

    let mut csv = String::from(if truth.is_some() {
        "index,true,predicted\n"
    } else {
        "index,predicted\n"
    });
    for (i, &p) in preds.iter().enumerate() {
        match &truth {
            Some(t) => csv.push_str(&format!("{i},{},{}\n", names[t[i]], names[p])),
            None => csv.push_str(&format!("{i},{}\n", names[p])),
        }
    }
    match &a.out {
        Some(path) => write_text(path, &csv)?,
        None => print!("{csv}"),
    }

    match truth {
        Some(t) => {
            let pos = resolve_positive(enc, a.positive.as_deref())?;
            let m = metrics::compute_metrics(&metrics::confusion(&t, &preds, pos)?);
            eprint!("{}", report::format_grid(&[("Result".to_string(), m)]));
            if let Some(path) = &a.metrics {
                let mut json = serde_json::to_string_pretty(&MetricsEntry::from(&m))?;
                json.push('\n');
                write_text(path, &json)?;
            }
        }
        None => {
            eprintln!("dataset classes are not all known to the model; no metrics computed");
            if a.metrics.is_some() {
                bail!(
                    "--metrics requested but {} has labels the model does not know",
                    a.data.display()
                );
            }
        }
    }
    Ok(())
}

fn cmd_cv(a: &CvArgs) -> Result<()> {
    let ds = load(&a.exp.data)?;
    let cfg = experiment(&a.exp, &ds, a.mode)?;
    let result = cv::run_cv(&ds, &cfg)?;
    let opts = ReportOptions {
        include_timings: a.exp.timings,
    };
    print!("{}", report::CvReport::from_result(&result, opts).grid());
    if let Some(out) = &a.exp.out {
        report::write_report_json(&result, out, opts)?;
        eprintln!("report written to {}", out.display());
    }
    if let Some(p) = &a.exp.predictions {
        report::write_predictions_csv(&result, p)?;
    }
    Ok(())
}

fn cmd_ablate(a: &AblateArgs) -> Result<()> {
    let ds = load(&a.exp.data)?;
    let cfg = experiment(&a.exp, &ds, Mode::Ensemble)?;
    let result = cv::run_ablation(&ds, &cfg)?;
    let opts = ReportOptions {
        include_timings: a.exp.timings,
    };
    print!(
        "{}",
        report::AblationReport::from_result(&result, opts).grid()
    );
    if let Some(out) = &a.exp.out {
        report::write_ablation_json(&result, out, opts)?;
        eprintln!("report written to {}", out.display());
    }
    if let Some(p) = &a.exp.predictions {
        report::write_ablation_predictions_csv(&result, p)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Train(a) => cmd_train(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Cv(a) => cmd_cv(a),
        Command::Ablate(a) => cmd_ablate(a),
        Command::Extract(a) => extract::run(a).map_err(Into::into),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
