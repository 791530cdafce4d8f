//! Feature scaling plus a trained head, the unit that `train`/`predict` persist
//! and that each cross-validation fold fits.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ensemble::{self, EnsembleModel};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rnn::{self, LabelEncoding, ModelConfig, RnnModel, Variant};

pub const MODEL_FORMAT: &str = "randnet-model/1";

/// Per-feature standardization fitted on training rows only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub enabled: bool,
    pub mean: Vec<f64>,
    /// Population standard deviation; `0.0` marks a constant feature, which maps to 0.
    pub std: Vec<f64>,
}

impl Scaler {
    pub fn disabled() -> Self {
        Self {
            enabled: false,
            mean: Vec::new(),
            std: Vec::new(),
        }
    }
}

pub fn fit_scaler(x_train: &Matrix) -> Result<Scaler> {
    let (rows, cols) = x_train.shape();
    if rows < 2 {
        return Err(Error::contract(format!(
            "scaler needs ≥ 2 rows, got {rows}"
        )));
    }
    let mut mean = vec![0.0; cols];
    for i in 0..rows {
        for (m, v) in mean.iter_mut().zip(x_train.row(i)) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= rows as f64;
    }
    let mut var = vec![0.0; cols];
    let mut constant = vec![true; cols];
    let first = x_train.row(0);
    for i in 0..rows {
        for (j, v) in x_train.row(i).iter().enumerate() {
            let d = v - mean[j];
            var[j] += d * d;
            constant[j] &= *v == first[j];
        }
    }
    let std = var
        .iter()
        .zip(&constant)
        .map(|(&v, &c)| if c { 0.0 } else { (v / rows as f64).sqrt() })
        .collect();
    Ok(Scaler {
        enabled: true,
        mean,
        std,
    })
}

pub fn apply_scaler(scaler: &Scaler, x: &Matrix) -> Result<Matrix> {
    if !scaler.enabled {
        return Ok(x.clone());
    }
    if x.cols() != scaler.mean.len() {
        return Err(Error::contract(format!(
            "scaler fitted on {} features, got {}",
            scaler.mean.len(),
            x.cols()
        )));
    }
    let mut values = Vec::with_capacity(x.rows() * x.cols());
    for i in 0..x.rows() {
        for ((v, m), s) in x.row(i).iter().zip(&scaler.mean).zip(&scaler.std) {
            values.push(if *s > 0.0 { (v - m) / s } else { 0.0 });
        }
    }
    Matrix::new(x.rows(), x.cols(), values)
}

/// Which head to train: the full ensemble or one member alone.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Ensemble,
    ElmOnly,
    RvflOnly,
    SnnOnly,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::ElmOnly, Mode::RvflOnly, Mode::SnnOnly, Mode::Ensemble];

    pub fn single_variant(self) -> Option<Variant> {
        match self {
            Mode::Ensemble => None,
            Mode::ElmOnly => Some(Variant::Elm),
            Mode::RvflOnly => Some(Variant::Rvfl),
            Mode::SnnOnly => Some(Variant::Snn),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Ensemble => "ensemble",
            Mode::ElmOnly => "elm_only",
            Mode::RvflOnly => "rvfl_only",
            Mode::SnnOnly => "snn_only",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ensemble" => Ok(Mode::Ensemble),
            "elm" | "elm_only" => Ok(Mode::ElmOnly),
            "rvfl" | "rvfl_only" => Ok(Mode::RvflOnly),
            "snn" | "snn_only" => Ok(Mode::SnnOnly),
            other => Err(format!(
                "unknown mode `{other}` (ensemble|elm_only|rvfl_only|snn_only)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum Head {
    Ensemble(EnsembleModel),
    Single {
        class_names: LabelEncoding,
        model: RnnModel,
    },
}

impl Head {
    pub fn encoding(&self) -> &LabelEncoding {
        match self {
            Head::Ensemble(e) => e.encoding(),
            Head::Single { class_names, .. } => class_names,
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Head::Ensemble(e) => e.input_dim(),
            Head::Single { model, .. } => model.input_dim(),
        }
    }
}

/// A persisted, ready-to-predict classifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pipeline {
    pub format: String,
    pub mode: Mode,
    pub scaler: Scaler,
    pub head: Head,
}

impl Pipeline {
    /// Fits the scaler (if requested) and trains the head. A single-member mode
    /// uses exactly the seed that member would get inside an ensemble trained
    /// with the same `seed`, so ablation runs line up with ensemble runs.
    pub fn fit(
        x: &Matrix,
        labels: &[usize],
        encoding: &LabelEncoding,
        mode: Mode,
        cfg: &ModelConfig,
        scale: bool,
        seed: u64,
    ) -> Result<Self> {
        let scaler = if scale {
            fit_scaler(x)?
        } else {
            Scaler::disabled()
        };
        let xs = apply_scaler(&scaler, x)?;
        let head = match mode.single_variant() {
            None => Head::Ensemble(ensemble::ensemble_train(&xs, labels, encoding, cfg, seed)?),
            Some(v) => {
                encoding.check_labels(labels)?;
                let targets = rnn::encode_onehot(labels, encoding.class_count())?;
                let model = rnn::train(
                    v,
                    &xs,
                    &targets,
                    &cfg.with_seed(ensemble::member_seed(seed, v)),
                )?;
                Head::Single {
                    class_names: encoding.clone(),
                    model,
                }
            }
        };
        Ok(Self {
            format: MODEL_FORMAT.to_string(),
            mode,
            scaler,
            head,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.head.input_dim()
    }

    pub fn encoding(&self) -> &LabelEncoding {
        self.head.encoding()
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        if x.cols() != self.input_dim() {
            return Err(Error::contract(format!(
                "model expects {} features, got {}",
                self.input_dim(),
                x.cols()
            )));
        }
        let xs = apply_scaler(&self.scaler, x)?;
        match &self.head {
            Head::Ensemble(e) => e.predict(&xs),
            Head::Single { model, .. } => model.predict_labels(&xs),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(s)?;
        if p.format != MODEL_FORMAT {
            return Err(Error::InvalidModel(format!(
                "unsupported model format `{}` (expected `{MODEL_FORMAT}`)",
                p.format
            )));
        }
        let consistent = match (&p.head, p.mode.single_variant()) {
            (Head::Ensemble(_), None) => true,
            (Head::Single { model, class_names }, Some(v)) => {
                model.variant() == v && model.class_count() == class_names.class_count()
            }
            _ => false,
        };
        if !consistent {
            return Err(Error::InvalidModel(format!(
                "mode `{}` does not match the stored head",
                p.mode
            )));
        }
        if p.scaler.enabled
            && (p.scaler.mean.len() != p.input_dim() || p.scaler.std.len() != p.input_dim())
        {
            return Err(Error::InvalidModel(
                "scaler width does not match model".into(),
            ));
        }
        Ok(p)
    }
}
