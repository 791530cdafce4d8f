//! Single-hidden-layer randomized networks: ELM, RVFL and SNN.
//!
//! All three share a random, fixed hidden layer `g(W x + b)`; only the output
//! weights are learned, in closed form, by a minimum-norm least-squares solve.
//!
//! - ELM reads the hidden activations `M` alone.
//! - RVFL reads `[X | M]` (input features first, hidden activations second).
//! - SNN reads `[M | 1]`; the last solved row is the output bias.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::linalg::{self, Matrix, SolveOptions};

/// Hidden width used when none is given.
pub const DEFAULT_HIDDEN_NODES: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Elm,
    Rvfl,
    Snn,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Elm, Variant::Rvfl, Variant::Snn];

    /// Offset added to an ensemble's master seed to get this member's seed.
    pub fn seed_offset(self) -> u64 {
        match self {
            Variant::Elm => 0,
            Variant::Rvfl => 1,
            Variant::Snn => 2,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Elm => "elm",
            Variant::Rvfl => "rvfl",
            Variant::Snn => "snn",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Sigmoid,
    Tanh,
    Relu,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
        }
    }
}

impl FromStr for Activation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "sigmoid" => Ok(Activation::Sigmoid),
            "tanh" => Ok(Activation::Tanh),
            "relu" => Ok(Activation::Relu),
            other => Err(format!("unknown activation `{other}` (sigmoid|tanh|relu)")),
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
            Activation::Relu => "relu",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightDistribution {
    /// Uniform on `[-1, 1)`.
    #[default]
    UniformPm1,
    /// Standard normal.
    Gaussian01,
}

impl FromStr for WeightDistribution {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "uniform" | "uniform_pm1" => Ok(WeightDistribution::UniformPm1),
            "gaussian" | "gaussian01" => Ok(WeightDistribution::Gaussian01),
            other => Err(format!("unknown distribution `{other}` (uniform|gaussian)")),
        }
    }
}

impl fmt::Display for WeightDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightDistribution::UniformPm1 => "uniform_pm1",
            WeightDistribution::Gaussian01 => "gaussian01",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub hidden_nodes: usize,
    pub activation: Activation,
    pub distribution: WeightDistribution,
    pub seed: u64,
    pub ridge_lambda: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            hidden_nodes: DEFAULT_HIDDEN_NODES,
            activation: Activation::default(),
            distribution: WeightDistribution::default(),
            seed: 0,
            ridge_lambda: 0.0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_nodes == 0 {
            return Err(Error::contract("hidden_nodes must be ≥ 1"));
        }
        if !(self.ridge_lambda >= 0.0 && self.ridge_lambda.is_finite()) {
            return Err(Error::contract(format!(
                "ridge_lambda must be finite and ≥ 0, got {}",
                self.ridge_lambda
            )));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// The fixed random input-to-hidden map: `weights` is `H × n`, `biases` has length `H`.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomLayer {
    pub weights: Matrix,
    pub biases: Vec<f64>,
    pub seed: u64,
    pub distribution: WeightDistribution,
}

impl RandomLayer {
    pub fn input_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn hidden_nodes(&self) -> usize {
        self.weights.rows()
    }

    /// CRC-32 over the little-endian bytes of `weights` then `biases`.
    pub fn digest(&self) -> u32 {
        let mut h = crc32fast::Hasher::new();
        for v in self.weights.as_slice().iter().chain(&self.biases) {
            h.update(&v.to_le_bytes());
        }
        h.finalize()
    }
}

/// Draws `W` (row-major, `H × n`) then `b` from a ChaCha8 stream seeded with `cfg.seed`.
pub fn init_random_layer(input_dim: usize, cfg: &ModelConfig) -> Result<RandomLayer> {
    if input_dim == 0 {
        return Err(Error::contract("input dimension must be ≥ 1"));
    }
    cfg.validate()?;
    let h = cfg.hidden_nodes;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let draw = |rng: &mut ChaCha8Rng| match cfg.distribution {
        WeightDistribution::UniformPm1 => rng.random_range(-1.0..1.0),
        WeightDistribution::Gaussian01 => rng.sample::<f64, _>(StandardNormal),
    };
    let weights: Vec<f64> = (0..h * input_dim).map(|_| draw(&mut rng)).collect();
    let biases: Vec<f64> = (0..h).map(|_| draw(&mut rng)).collect();
    Ok(RandomLayer {
        weights: Matrix::new(h, input_dim, weights)?,
        biases,
        seed: cfg.seed,
        distribution: cfg.distribution,
    })
}

/// `M[i, j] = g(w_j · x_i + b_j)`, shape `N × H`.
pub fn hidden_map(x: &Matrix, layer: &RandomLayer, activation: Activation) -> Result<Matrix> {
    if x.cols() != layer.input_dim() {
        return Err(Error::contract(format!(
            "expected {} input features, got {}",
            layer.input_dim(),
            x.cols()
        )));
    }
    let mut m = x.matmul_transpose(&layer.weights)?.into_values();
    let h = layer.hidden_nodes();
    exec::for_each_row_mut(&mut m, h, |_, row| {
        for (v, b) in row.iter_mut().zip(&layer.biases) {
            *v = activation.apply(*v + b);
        }
    });
    Matrix::new(x.rows(), h, m).map_err(|e| Error::Numerical(format!("hidden map: {e}")))
}

/// Ordered, distinct class names; label `i` means `class_names[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct LabelEncoding {
    class_names: Vec<String>,
}

impl LabelEncoding {
    pub fn new(class_names: Vec<String>) -> Result<Self> {
        if class_names.len() < 2 {
            return Err(Error::contract(format!(
                "need at least two classes, got {}",
                class_names.len()
            )));
        }
        for (i, name) in class_names.iter().enumerate() {
            if class_names[..i].contains(name) {
                return Err(Error::contract(format!("duplicate class name `{name}`")));
            }
        }
        Ok(Self { class_names })
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn name(&self, index: usize) -> Option<&str> {
        self.class_names.get(index).map(String::as_str)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.class_names.iter().position(|n| n == name)
    }

    pub fn check_labels(&self, labels: &[usize]) -> Result<()> {
        match labels.iter().position(|&l| l >= self.class_count()) {
            Some(i) => Err(Error::contract(format!(
                "label {} at position {i} is outside 0..{}",
                labels[i],
                self.class_count()
            ))),
            None => Ok(()),
        }
    }
}

impl TryFrom<Vec<String>> for LabelEncoding {
    type Error = Error;

    fn try_from(v: Vec<String>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<LabelEncoding> for Vec<String> {
    fn from(e: LabelEncoding) -> Self {
        e.class_names
    }
}

/// One-hot target matrix `N × m`.
pub fn encode_onehot(labels: &[usize], class_count: usize) -> Result<Matrix> {
    let mut values = vec![0.0; labels.len() * class_count];
    for (i, &l) in labels.iter().enumerate() {
        if l >= class_count {
            return Err(Error::contract(format!(
                "label {l} at position {i} is outside 0..{class_count}"
            )));
        }
        values[i * class_count + l] = 1.0;
    }
    Matrix::new(labels.len(), class_count, values)
}

/// A trained randomized network. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct RnnModel {
    variant: Variant,
    layer: RandomLayer,
    activation: Activation,
    output_weights: Matrix,
    output_bias: Option<Vec<f64>>,
    ridge_lambda: f64,
}

impl RnnModel {
    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn layer(&self) -> &RandomLayer {
        &self.layer
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    /// `p`: `H × m` for ELM and SNN, `(n + H) × m` for RVFL.
    pub fn output_weights(&self) -> &Matrix {
        &self.output_weights
    }

    /// `e`: the SNN output bias; `None` for ELM and RVFL.
    pub fn output_bias(&self) -> Option<&[f64]> {
        self.output_bias.as_deref()
    }

    pub fn input_dim(&self) -> usize {
        self.layer.input_dim()
    }

    pub fn hidden_nodes(&self) -> usize {
        self.layer.hidden_nodes()
    }

    pub fn class_count(&self) -> usize {
        self.output_weights.cols()
    }

    pub fn seed(&self) -> u64 {
        self.layer.seed
    }

    fn check_shapes(&self) -> Result<()> {
        let (n, h) = (self.input_dim(), self.hidden_nodes());
        let expected_rows = match self.variant {
            Variant::Rvfl => n + h,
            Variant::Elm | Variant::Snn => h,
        };
        if self.output_weights.rows() != expected_rows {
            return Err(Error::InvalidModel(format!(
                "{} output weights have {} rows, expected {expected_rows}",
                self.variant,
                self.output_weights.rows()
            )));
        }
        match (&self.output_bias, self.variant) {
            (Some(e), Variant::Snn) if e.len() == self.class_count() => Ok(()),
            (None, Variant::Elm | Variant::Rvfl) => Ok(()),
            _ => Err(Error::InvalidModel(format!(
                "{} output bias presence/length is inconsistent",
                self.variant
            ))),
        }
    }

    /// Raw output-layer scores, `N × m`.
    pub fn predict_scores(&self, x: &Matrix) -> Result<Matrix> {
        let hidden = hidden_map(x, &self.layer, self.activation)?;
        match self.variant {
            Variant::Elm => hidden.matmul(&self.output_weights),
            Variant::Rvfl => x.hstack(&hidden)?.matmul(&self.output_weights),
            Variant::Snn => {
                let mut scores = hidden.matmul(&self.output_weights)?.into_values();
                let bias = self.output_bias.as_deref().unwrap_or_default();
                for row in scores.chunks_mut(bias.len().max(1)) {
                    for (s, e) in row.iter_mut().zip(bias) {
                        *s += e;
                    }
                }
                Matrix::new(x.rows(), self.class_count(), scores)
            }
        }
    }

    pub fn predict_labels(&self, x: &Matrix) -> Result<Vec<usize>> {
        Ok(argmax_rows(&self.predict_scores(x)?))
    }
}

/// Per-row argmax; ties go to the lowest column index.
pub fn argmax_rows(scores: &Matrix) -> Vec<usize> {
    (0..scores.rows())
        .map(|i| {
            let row = scores.row(i);
            let mut best = 0;
            for (j, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

/// Trains any variant on `x` (`N × n`) against one-hot targets (`N × m`).
pub fn train(
    variant: Variant,
    x: &Matrix,
    targets: &Matrix,
    cfg: &ModelConfig,
) -> Result<RnnModel> {
    if x.rows() != targets.rows() {
        return Err(Error::contract(format!(
            "{} samples but {} target rows",
            x.rows(),
            targets.rows()
        )));
    }
    if x.is_empty() || targets.cols() == 0 {
        return Err(Error::contract(
            "training needs at least one sample, feature and class",
        ));
    }
    let layer = init_random_layer(x.cols(), cfg)?;
    let hidden = hidden_map(x, &layer, cfg.activation)?;
    let opts = SolveOptions {
        rank_tol: 0.0,
        ridge: cfg.ridge_lambda,
    };
    let (output_weights, output_bias) = match variant {
        Variant::Elm => (linalg::solve_least_squares(&hidden, targets, &opts)?, None),
        Variant::Rvfl => {
            let design = x.hstack(&hidden)?;
            (linalg::solve_least_squares(&design, targets, &opts)?, None)
        }
        Variant::Snn => {
            let ones = Matrix::new(x.rows(), 1, vec![1.0; x.rows()])?;
            let design = hidden.hstack(&ones)?;
            let joint = linalg::solve_least_squares(&design, targets, &opts)?;
            let h = layer.hidden_nodes();
            let m = targets.cols();
            let mut values = joint.into_values();
            let bias = values.split_off(h * m);
            (Matrix::new(h, m, values)?, Some(bias))
        }
    };
    let model = RnnModel {
        variant,
        layer,
        activation: cfg.activation,
        output_weights,
        output_bias,
        ridge_lambda: cfg.ridge_lambda,
    };
    model.check_shapes()?;
    Ok(model)
}

pub fn train_elm(x: &Matrix, targets: &Matrix, cfg: &ModelConfig) -> Result<RnnModel> {
    train(Variant::Elm, x, targets, cfg)
}

pub fn train_rvfl(x: &Matrix, targets: &Matrix, cfg: &ModelConfig) -> Result<RnnModel> {
    train(Variant::Rvfl, x, targets, cfg)
}

pub fn train_snn(x: &Matrix, targets: &Matrix, cfg: &ModelConfig) -> Result<RnnModel> {
    train(Variant::Snn, x, targets, cfg)
}

/// On-disk form of an [`RnnModel`]. The random layer is stored as its
/// generating parameters plus a digest, and regenerated on load.
#[derive(Serialize, Deserialize)]
struct RnnModelRecord {
    variant: Variant,
    seed: u64,
    distribution: WeightDistribution,
    activation: Activation,
    input_dim: usize,
    hidden_nodes: usize,
    class_count: usize,
    ridge_lambda: f64,
    layer_crc32: u32,
    output_weights: Matrix,
    output_bias: Option<Vec<f64>>,
}

impl Serialize for RnnModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RnnModelRecord {
            variant: self.variant,
            seed: self.layer.seed,
            distribution: self.layer.distribution,
            activation: self.activation,
            input_dim: self.input_dim(),
            hidden_nodes: self.hidden_nodes(),
            class_count: self.class_count(),
            ridge_lambda: self.ridge_lambda,
            layer_crc32: self.layer.digest(),
            output_weights: self.output_weights.clone(),
            output_bias: self.output_bias.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RnnModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = RnnModelRecord::deserialize(d)?;
        RnnModel::try_from(rec).map_err(serde::de::Error::custom)
    }
}

impl TryFrom<RnnModelRecord> for RnnModel {
    type Error = Error;

    fn try_from(rec: RnnModelRecord) -> Result<Self> {
        let cfg = ModelConfig {
            hidden_nodes: rec.hidden_nodes,
            activation: rec.activation,
            distribution: rec.distribution,
            seed: rec.seed,
            ridge_lambda: rec.ridge_lambda,
        };
        let layer = init_random_layer(rec.input_dim, &cfg)?;
        if layer.digest() != rec.layer_crc32 {
            return Err(Error::InvalidModel(format!(
                "regenerated random layer digest {:#010x} does not match stored {:#010x}",
                layer.digest(),
                rec.layer_crc32
            )));
        }
        if rec.output_weights.cols() != rec.class_count {
            return Err(Error::InvalidModel(format!(
                "output weights have {} columns, expected {}",
                rec.output_weights.cols(),
                rec.class_count
            )));
        }
        if let Some(e) = &rec.output_bias {
            if e.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidModel("non-finite output bias".into()));
            }
        }
        let model = RnnModel {
            variant: rec.variant,
            layer,
            activation: rec.activation,
            output_weights: rec.output_weights,
            output_bias: rec.output_bias,
            ridge_lambda: rec.ridge_lambda,
        };
        model.check_shapes()?;
        Ok(model)
    }
}

/// A single trained network together with its class names.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub class_names: LabelEncoding,
    pub model: RnnModel,
}

impl ModelDocument {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(s)?;
        if doc.model.class_count() != doc.class_names.class_count() {
            return Err(Error::InvalidModel(format!(
                "model has {} outputs but {} class names",
                doc.model.class_count(),
                doc.class_names.class_count()
            )));
        }
        Ok(doc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xor() -> (Matrix, Vec<usize>) {
        let x = Matrix::from_rows(&[
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
        ])
        .unwrap();
        (x, vec![0, 1, 1, 0])
    }

    fn cfg(h: usize, seed: u64) -> ModelConfig {
        ModelConfig {
            hidden_nodes: h,
            seed,
            ..ModelConfig::default()
        }
    }

    #[test]
    fn layer_is_deterministic_and_bounded() {
        let c = cfg(30, 9);
        let a = init_random_layer(7, &c).unwrap();
        let b = init_random_layer(7, &c).unwrap();
        assert_eq!(a, b);
        assert!(a
            .weights
            .as_slice()
            .iter()
            .chain(&a.biases)
            .all(|v| (-1.0..=1.0).contains(v)));
        let other = init_random_layer(7, &cfg(30, 10)).unwrap();
        assert_ne!(a.weights, other.weights);
    }

    #[test]
    fn uniform_layer_mean_is_near_zero() {
        // 100 × 99 weights + 100 biases = 10^4 draws.
        let l = init_random_layer(99, &cfg(100, 3)).unwrap();
        let all: Vec<f64> = l
            .weights
            .as_slice()
            .iter()
            .chain(&l.biases)
            .copied()
            .collect();
        assert_eq!(all.len(), 10_000);
        let mean = all.iter().sum::<f64>() / all.len() as f64;
        assert!(mean.abs() < 0.05, "mean {mean}");
    }

    #[test]
    fn gaussian_layer_has_unit_scale() {
        let c = ModelConfig {
            distribution: WeightDistribution::Gaussian01,
            ..cfg(100, 5)
        };
        let l = init_random_layer(99, &c).unwrap();
        let v = l.weights.as_slice();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64;
        assert!(mean.abs() < 0.05 && (var - 1.0).abs() < 0.1, "{mean} {var}");
    }

    #[test]
    fn zero_input_dim_rejected() {
        assert!(init_random_layer(0, &cfg(3, 0)).is_err());
        assert!(init_random_layer(3, &cfg(0, 0)).is_err());
    }

    fn zero_layer(n: usize, h: usize) -> RandomLayer {
        RandomLayer {
            weights: Matrix::zeros(h, n),
            biases: vec![0.0; h],
            seed: 0,
            distribution: WeightDistribution::UniformPm1,
        }
    }

    #[test]
    fn hidden_map_at_zero_weights() {
        let x = Matrix::from_fn(3, 2, |i, j| (i + j) as f64);
        let m = hidden_map(&x, &zero_layer(2, 4), Activation::Sigmoid).unwrap();
        assert!(m.as_slice().iter().all(|&v| v == 0.5));
        let m = hidden_map(&x, &zero_layer(2, 4), Activation::Tanh).unwrap();
        assert!(m.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn hidden_map_matches_scalar_sigmoid() {
        let layer = RandomLayer {
            weights: Matrix::from_rows(&[vec![0.5, -1.0, 2.0], vec![-0.25, 0.75, 0.1]]).unwrap(),
            biases: vec![0.3, -0.2],
            seed: 0,
            distribution: WeightDistribution::UniformPm1,
        };
        let x = Matrix::from_rows(&[vec![1.0, 2.0, -0.5]]).unwrap();
        let m = hidden_map(&x, &layer, Activation::Sigmoid).unwrap();
        let z0: f64 = 0.5 * 1.0 - 1.0 * 2.0 + 2.0 * -0.5 + 0.3;
        let z1: f64 = -0.25 * 1.0 + 0.75 * 2.0 + 0.1 * -0.5 - 0.2;
        assert!((m.get(0, 0) - 1.0 / (1.0 + (-z0).exp())).abs() < 1e-15);
        assert!((m.get(0, 1) - 1.0 / (1.0 + (-z1).exp())).abs() < 1e-15);
    }

    #[test]
    fn hidden_map_rejects_width_mismatch() {
        let x = Matrix::zeros(2, 3);
        assert!(matches!(
            hidden_map(&x, &zero_layer(2, 4), Activation::Relu),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn onehot_examples() {
        let y = encode_onehot(&[0, 1], 2).unwrap();
        assert_eq!(y.as_slice(), &[1.0, 0.0, 0.0, 1.0]);
        let y = encode_onehot(&[1, 1, 1], 3).unwrap();
        for i in 0..3 {
            assert_eq!(y.row(i), &[0.0, 1.0, 0.0]);
        }
        assert!(encode_onehot(&[2], 2).is_err());
    }

    #[test]
    fn label_encoding_invariants() {
        assert!(LabelEncoding::new(vec!["a".into()]).is_err());
        assert!(LabelEncoding::new(vec!["a".into(), "a".into()]).is_err());
        let e = LabelEncoding::new(vec!["mdr".into(), "ds".into()]).unwrap();
        assert_eq!(e.index_of("ds"), Some(1));
        assert!(e.check_labels(&[0, 1, 2]).is_err());
    }

    #[test]
    fn all_variants_fit_xor() {
        let (x, labels) = xor();
        let y = encode_onehot(&labels, 2).unwrap();
        for v in Variant::ALL {
            let m = train(v, &x, &y, &cfg(50, 1)).unwrap();
            assert_eq!(m.predict_labels(&x).unwrap(), labels, "{v}");
        }
    }

    #[test]
    fn dimension_laws() {
        let x = Matrix::from_fn(6, 3, |i, j| ((i * 7 + j * 3) % 5) as f64 / 5.0);
        let y = encode_onehot(&[0, 1, 0, 1, 0, 1], 2).unwrap();
        let elm = train_elm(&x, &y, &cfg(400, 2)).unwrap();
        assert_eq!(elm.output_weights().shape(), (400, 2));
        assert!(elm.output_bias().is_none());
        let rvfl = train_rvfl(&x, &y, &cfg(400, 2)).unwrap();
        assert_eq!(rvfl.output_weights().shape(), (403, 2));
        assert!(rvfl.output_bias().is_none());
        let snn = train_snn(&x, &y, &cfg(400, 2)).unwrap();
        assert_eq!(snn.output_weights().shape(), (400, 2));
        assert_eq!(snn.output_bias().unwrap().len(), 2);
    }

    #[test]
    fn single_class_targets_reproduced() {
        let x = Matrix::from_fn(8, 2, |i, j| (i as f64).sin() + j as f64);
        let y = encode_onehot(&[1; 8], 2).unwrap();
        for v in Variant::ALL {
            let m = train(v, &x, &y, &cfg(20, 4)).unwrap();
            assert_eq!(m.predict_labels(&x).unwrap(), vec![1; 8]);
        }
    }

    #[test]
    fn snn_bias_absorbs_constant_target() {
        let x = Matrix::from_fn(10, 3, |i, j| ((i + 1) * (j + 2)) as f64 / 7.0);
        let c = [0.25, -1.5];
        let y = Matrix::from_fn(10, 2, |_, j| c[j]);
        let m = train_snn(&x, &y, &cfg(5, 8)).unwrap();
        let s = m.predict_scores(&x).unwrap();
        for i in 0..10 {
            assert!((s.get(i, 0) - c[0]).abs() < 1e-6);
            assert!((s.get(i, 1) - c[1]).abs() < 1e-6);
        }
    }

    #[test]
    fn snn_and_elm_share_layer_from_seed() {
        let (x, labels) = xor();
        let y = encode_onehot(&labels, 2).unwrap();
        let elm = train_elm(&x, &y, &cfg(50, 17)).unwrap();
        let snn = train_snn(&x, &y, &cfg(50, 17)).unwrap();
        assert_eq!(elm.layer(), snn.layer());
        assert_ne!(elm.output_weights(), snn.output_weights());
    }

    #[test]
    fn argmax_tie_breaks_low() {
        let s = Matrix::from_rows(&[vec![0.9, 0.1], vec![0.5, 0.5], vec![0.1, 0.3]]).unwrap();
        assert_eq!(argmax_rows(&s), vec![0, 0, 1]);
    }

    #[test]
    fn prediction_width_mismatch_errors() {
        let (x, labels) = xor();
        let y = encode_onehot(&labels, 2).unwrap();
        let m = train_elm(&x, &y, &cfg(10, 1)).unwrap();
        assert!(m.predict_scores(&Matrix::zeros(1, 3)).is_err());
    }

    #[test]
    fn duplicated_sample_gives_identical_rows() {
        let (x, labels) = xor();
        let y = encode_onehot(&labels, 2).unwrap();
        let m = train_rvfl(&x, &y, &cfg(10, 1)).unwrap();
        let dup = Matrix::from_fn(5, 2, |_, j| [0.3, 0.7][j]);
        let s = m.predict_scores(&dup).unwrap();
        for i in 1..5 {
            assert_eq!(s.row(i), s.row(0));
        }
    }

    #[test]
    fn model_document_round_trip_is_lossless() {
        let (x, labels) = xor();
        let y = encode_onehot(&labels, 2).unwrap();
        let enc = LabelEncoding::new(vec!["even".into(), "odd".into()]).unwrap();
        for v in Variant::ALL {
            let doc = ModelDocument {
                class_names: enc.clone(),
                model: train(v, &x, &y, &cfg(12, 99)).unwrap(),
            };
            let text = doc.to_json().unwrap();
            let back = ModelDocument::from_json(&text).unwrap();
            assert_eq!(back, doc);
            assert_eq!(back.to_json().unwrap(), text);
        }
    }

    #[test]
    fn tampered_layer_digest_rejected() {
        let (x, labels) = xor();
        let y = encode_onehot(&labels, 2).unwrap();
        let doc = ModelDocument {
            class_names: LabelEncoding::new(vec!["a".into(), "b".into()]).unwrap(),
            model: train_elm(&x, &y, &cfg(4, 1)).unwrap(),
        };
        let mut v: serde_json::Value = serde_json::from_str(&doc.to_json().unwrap()).unwrap();
        v["model"]["seed"] = serde_json::json!(2);
        assert!(ModelDocument::from_json(&v.to_string()).is_err());
    }
}
