//! Three-member ensemble (one ELM, one RVFL, one SNN) combined by hard majority vote.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::linalg::Matrix;
use crate::rnn::{self, LabelEncoding, ModelConfig, RnnModel, Variant};

/// Members are stored in [`Variant::ALL`] order. Member `i` was trained with
/// seed `master_seed + i` (wrapping).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleModel {
    master_seed: u64,
    class_names: LabelEncoding,
    members: [RnnModel; 3],
}

#[derive(Deserialize)]
struct EnsembleRecord {
    master_seed: u64,
    class_names: LabelEncoding,
    members: [RnnModel; 3],
}

impl<'de> Deserialize<'de> for EnsembleModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = EnsembleRecord::deserialize(d)?;
        EnsembleModel::from_members(r.master_seed, r.class_names, r.members)
            .map_err(serde::de::Error::custom)
    }
}

pub fn member_seed(master_seed: u64, variant: Variant) -> u64 {
    master_seed.wrapping_add(variant.seed_offset())
}

impl EnsembleModel {
    /// Assembles an ensemble from already-trained members, checking that there is
    /// exactly one per variant in canonical order and that all shapes agree.
    pub fn from_members(
        master_seed: u64,
        class_names: LabelEncoding,
        members: [RnnModel; 3],
    ) -> Result<Self> {
        for (m, v) in members.iter().zip(Variant::ALL) {
            if m.variant() != v {
                return Err(Error::InvalidModel(format!(
                    "member slot for {v} holds a {} model",
                    m.variant()
                )));
            }
        }
        let (n, c) = (members[0].input_dim(), members[0].class_count());
        if members
            .iter()
            .any(|m| m.input_dim() != n || m.class_count() != c)
        {
            return Err(Error::InvalidModel(
                "ensemble members disagree on input width or class count".into(),
            ));
        }
        if c != class_names.class_count() {
            return Err(Error::InvalidModel(format!(
                "members have {c} outputs but {} class names",
                class_names.class_count()
            )));
        }
        Ok(Self {
            master_seed,
            class_names,
            members,
        })
    }

    pub fn members(&self) -> &[RnnModel; 3] {
        &self.members
    }

    pub fn member(&self, v: Variant) -> &RnnModel {
        &self.members[v.seed_offset() as usize]
    }

    pub fn member_seeds(&self) -> [u64; 3] {
        Variant::ALL.map(|v| member_seed(self.master_seed, v))
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn encoding(&self) -> &LabelEncoding {
        &self.class_names
    }

    pub fn input_dim(&self) -> usize {
        self.members[0].input_dim()
    }

    pub fn member_predictions(&self, x: &Matrix) -> Result<[Vec<usize>; 3]> {
        let (elm, (rvfl, snn)) = exec::join(
            || self.members[0].predict_labels(x),
            || {
                exec::join(
                    || self.members[1].predict_labels(x),
                    || self.members[2].predict_labels(x),
                )
            },
        );
        Ok([elm?, rvfl?, snn?])
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        let [a, b, c] = self.member_predictions(x)?;
        majority_vote([&a, &b, &c])
    }
}

/// Trains the three members on the same data. The trainings run concurrently
/// when the `parallel` feature is on; results are placed by variant.
pub fn ensemble_train(
    x: &Matrix,
    labels: &[usize],
    encoding: &LabelEncoding,
    cfg: &ModelConfig,
    master_seed: u64,
) -> Result<EnsembleModel> {
    if x.rows() == 0 {
        return Err(Error::contract("cannot train an ensemble on zero samples"));
    }
    encoding.check_labels(labels)?;
    let targets = rnn::encode_onehot(labels, encoding.class_count())?;
    let fit = |v: Variant| rnn::train(v, x, &targets, &cfg.with_seed(member_seed(master_seed, v)));
    let (elm, (rvfl, snn)) = exec::join(
        || fit(Variant::Elm),
        || exec::join(|| fit(Variant::Rvfl), || fit(Variant::Snn)),
    );
    EnsembleModel::from_members(master_seed, encoding.clone(), [elm?, rvfl?, snn?])
}

/// Per-position label with at least two of three votes. When all three differ,
/// the smallest label wins.
pub fn majority_vote(votes: [&[usize]; 3]) -> Result<Vec<usize>> {
    let [a, b, c] = votes;
    if a.len() != b.len() || a.len() != c.len() {
        return Err(Error::contract(format!(
            "vote lists differ in length: {}, {}, {}",
            a.len(),
            b.len(),
            c.len()
        )));
    }
    Ok(a.iter()
        .zip(b)
        .zip(c)
        .map(|((&x, &y), &z)| vote3(x, y, z))
        .collect())
}

#[inline]
fn vote3(x: usize, y: usize, z: usize) -> usize {
    if x == y || x == z {
        x
    } else if y == z {
        y
    } else {
        x.min(y).min(z)
    }
}
