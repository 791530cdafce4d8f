//! Seeded toy datasets for smoke tests and benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::data_io::FeatureDataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rnn::LabelEncoding;

/// Class names of [`blobs`]: label 0 is the positive class by default.
pub const BLOB_CLASSES: [&str; 2] = ["mdr", "ds"];
pub const XOR_CLASSES: [&str; 2] = ["even", "odd"];
/// Standard deviation of the jitter applied to XOR samples past the first four.
pub const XOR_JITTER: f64 = 0.1;

/// Two isotropic unit-variance Gaussian classes in `dim` dimensions whose means
/// sit at `±sep/2` along the diagonal `(1, …, 1)/√dim`, so the distance between
/// the means is exactly `sep`. Sample `i` belongs to class `i mod 2`.
///
/// The Bayes error of this construction is `Φ(−sep/2)` (about 2.3% at `sep = 4`).
pub fn blobs(n: usize, dim: usize, sep: f64, seed: u64) -> Result<FeatureDataset> {
    if n < 2 || dim == 0 {
        return Err(Error::contract(format!(
            "blobs need n ≥ 2 and dim ≥ 1 (got n={n}, dim={dim})"
        )));
    }
    if !(sep.is_finite() && sep >= 0.0) {
        return Err(Error::contract(format!(
            "separation must be finite and ≥ 0, got {sep}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offset = sep / 2.0 / (dim as f64).sqrt();
    let mut values = Vec::with_capacity(n * dim);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % 2;
        let shift = if class == 0 { offset } else { -offset };
        for _ in 0..dim {
            let z: f64 = rng.sample(StandardNormal);
            values.push(z + shift);
        }
        labels.push(class);
    }
    FeatureDataset::new(
        Matrix::new(n, dim, values)?,
        labels,
        LabelEncoding::new(BLOB_CLASSES.map(String::from).to_vec())?,
    )
}

/// XOR on the unit square. The first four samples are the exact corners
/// `(0,0), (0,1), (1,0), (1,1)`; later samples cycle through the corners with
/// Gaussian jitter of standard deviation [`XOR_JITTER`]. Label is the parity of
/// the corner (`even` for (0,0) and (1,1)).
pub fn xor(n: usize, seed: u64) -> Result<FeatureDataset> {
    if n < 4 {
        return Err(Error::contract(format!("xor needs n ≥ 4, got {n}")));
    }
    const CORNERS: [[f64; 2]; 4] = [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = CORNERS[i % 4];
        for v in c {
            let jitter = if i < 4 {
                0.0
            } else {
                XOR_JITTER * rng.sample::<f64, _>(StandardNormal)
            };
            values.push(v + jitter);
        }
        labels.push(((c[0] + c[1]) as usize) % 2);
    }
    FeatureDataset::new(
        Matrix::new(n, 2, values)?,
        labels,
        LabelEncoding::new(XOR_CLASSES.map(String::from).to_vec())?,
    )
}

/// Randomly permutes the labels, destroying any feature/label relationship
/// while keeping class sizes.
pub fn shuffle_labels(ds: &mut FeatureDataset, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5eed_5eed_5eed);
    ds.labels.shuffle(&mut rng);
}
