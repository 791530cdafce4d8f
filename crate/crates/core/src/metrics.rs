//! Binary confusion counts and the five scores reported per fold:
//! accuracy, sensitivity, precision, specificity and F1.
//!
//! A score whose denominator is zero is `None` rather than `0.0` or `NaN`, so it
//! cannot silently drag down a fold average.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub positive_class: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    /// The same predictions scored with the roles of the two classes exchanged.
    pub fn swapped(&self, new_positive: usize) -> Self {
        Self {
            tp: self.tn,
            tn: self.tp,
            fp: self.fn_,
            fn_: self.fp,
            positive_class: new_positive,
        }
    }
}

/// Tallies predictions against truth, treating `positive_class` as positive and
/// every other label as negative.
pub fn confusion(
    y_true: &[usize],
    y_pred: &[usize],
    positive_class: usize,
) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::contract(format!(
            "{} true labels vs {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    let mut c = ConfusionMatrix {
        positive_class,
        ..ConfusionMatrix::default()
    };
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t == positive_class, p == positive_class) {
            (true, true) => c.tp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fp += 1,
            (true, false) => c.fn_ += 1,
        }
    }
    Ok(c)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: Option<f64>,
    pub sensitivity: Option<f64>,
    pub precision: Option<f64>,
    pub specificity: Option<f64>,
    pub f1: Option<f64>,
}

/// Column order of the printed report grid.
pub const METRIC_NAMES: [&str; 5] = [
    "Accuracy",
    "Specificity",
    "Precision",
    "Sensitivity",
    "F1-score",
];

impl MetricsReport {
    /// Values in [`METRIC_NAMES`] order.
    pub fn in_display_order(&self) -> [Option<f64>; 5] {
        [
            self.accuracy,
            self.specificity,
            self.precision,
            self.sensitivity,
            self.f1,
        ]
    }

    fn fields(&self) -> [Option<f64>; 5] {
        [
            self.accuracy,
            self.sensitivity,
            self.precision,
            self.specificity,
            self.f1,
        ]
    }

    fn from_fields(f: [Option<f64>; 5]) -> Self {
        Self {
            accuracy: f[0],
            sensitivity: f[1],
            precision: f[2],
            specificity: f[3],
            f1: f[4],
        }
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn compute_metrics(c: &ConfusionMatrix) -> MetricsReport {
    MetricsReport {
        accuracy: ratio(c.tp + c.tn, c.total()),
        sensitivity: ratio(c.tp, c.tp + c.fn_),
        precision: ratio(c.tp, c.tp + c.fp),
        specificity: ratio(c.tn, c.tn + c.fp),
        f1: ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn_),
    }
}

/// Unweighted mean of each score across folds. Every fold must have the same
/// set of defined scores.
pub fn aggregate_folds(reports: &[MetricsReport]) -> Result<MetricsReport> {
    let first = reports
        .first()
        .ok_or_else(|| Error::contract("cannot aggregate zero fold reports"))?;
    let pattern = first.fields().map(|v| v.is_some());
    if let Some(i) = reports
        .iter()
        .position(|r| r.fields().map(|v| v.is_some()) != pattern)
    {
        return Err(Error::contract(format!(
            "fold {i} has a different set of defined metrics than fold 0"
        )));
    }
    let k = reports.len() as f64;
    let mut out = [None; 5];
    for (idx, (o, defined)) in out.iter_mut().zip(pattern).enumerate() {
        if defined {
            let sum: f64 = reports.iter().map(|r| r.fields()[idx].unwrap_or(0.0)).sum();
            *o = Some(sum / k);
        }
    }
    Ok(MetricsReport::from_fields(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_split() {
        let t = [1, 1, 1, 1, 1, 0, 0, 0, 0, 0];
        let c = confusion(&t, &t, 1).unwrap();
        assert_eq!((c.tp, c.tn, c.fp, c.fn_), (5, 5, 0, 0));
    }

    #[test]
    fn all_positive_predictions() {
        let t = [1, 1, 1, 0, 0, 0, 0, 0, 0, 0];
        let c = confusion(&t, &[1; 10], 1).unwrap();
        assert_eq!((c.tp, c.tn, c.fp, c.fn_), (3, 0, 7, 0));
    }

    #[test]
    fn length_mismatch() {
        assert!(confusion(&[0, 1], &[0], 0).is_err());
    }

    #[test]
    fn all_ones() {
        let c = ConfusionMatrix {
            tp: 50,
            tn: 50,
            ..Default::default()
        };
        let m = compute_metrics(&c);
        assert_eq!(m.in_display_order(), [Some(1.0); 5]);
    }

    #[test]
    fn zero_denominator_is_undefined() {
        let c = ConfusionMatrix {
            tp: 0,
            fp: 0,
            fn_: 5,
            tn: 5,
            positive_class: 0,
        };
        let m = compute_metrics(&c);
        assert_eq!(m.precision, None);
        assert_eq!(m.sensitivity, Some(0.0));
        assert_eq!(m.specificity, Some(1.0));
        assert_eq!(m.accuracy, Some(0.5));
        assert_eq!(m.f1, Some(0.0));
    }

    #[test]
    fn aggregate_identical_and_empty() {
        let r = compute_metrics(&ConfusionMatrix {
            tp: 3,
            tn: 4,
            fp: 1,
            fn_: 2,
            positive_class: 0,
        });
        let agg = aggregate_folds(&[r; 5]).unwrap();
        for (a, b) in agg.fields().iter().zip(r.fields()) {
            assert!((a.unwrap() - b.unwrap()).abs() < 1e-15);
        }
        assert!(aggregate_folds(&[]).is_err());
    }

    #[test]
    fn aggregate_rejects_mixed_definedness() {
        let a = MetricsReport {
            precision: None,
            ..MetricsReport::from_fields([Some(0.5); 5])
        };
        let b = MetricsReport::from_fields([Some(0.5); 5]);
        assert!(aggregate_folds(&[a, b]).is_err());
        let both = aggregate_folds(&[a, a]).unwrap();
        assert_eq!(both.precision, None);
    }

    #[test]
    fn swapping_positive_class() {
        let c = ConfusionMatrix {
            tp: 7,
            tn: 11,
            fp: 3,
            fn_: 2,
            positive_class: 1,
        };
        let m = compute_metrics(&c);
        let s = compute_metrics(&c.swapped(0));
        assert_eq!(m.sensitivity, s.specificity);
        assert_eq!(m.specificity, s.sensitivity);
        assert_eq!(s.precision, Some(11.0 / 13.0));
    }
}
