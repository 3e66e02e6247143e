use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub f1_per_class: Vec<f64>,
    pub macro_f1: f64,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<u64>>,
    pub samples: u64,
}

/// Accuracy, per-class F1 and the confusion matrix.
///
/// F1 is `2PR / (P + R)`, taken as 0 when `P + R = 0`.
pub fn compute_metrics(predictions: &[usize], labels: &[usize], n_classes: usize) -> Result<Metrics> {
    if predictions.is_empty() {
        return Err(Error::EmptyInput("predictions"));
    }
    if predictions.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            what: "labels",
            expected: predictions.len(),
            got: labels.len(),
        });
    }
    let mut confusion = vec![vec![0u64; n_classes]; n_classes];
    for (&p, &l) in predictions.iter().zip(labels) {
        if p >= n_classes || l >= n_classes {
            return Err(Error::InvalidArgument(format!(
                "class index {} out of range for {n_classes} classes",
                p.max(l)
            )));
        }
        confusion[l][p] += 1;
    }
    let total = predictions.len() as u64;
    let correct: u64 = (0..n_classes).map(|c| confusion[c][c]).sum();
    let f1_per_class: Vec<f64> = (0..n_classes)
        .map(|c| {
            let tp = confusion[c][c] as f64;
            let predicted: u64 = confusion.iter().map(|row| row[c]).sum();
            let actual: u64 = confusion[c].iter().sum();
            let precision = if predicted == 0 { 0.0 } else { tp / predicted as f64 };
            let recall = if actual == 0 { 0.0 } else { tp / actual as f64 };
            if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            }
        })
        .collect();
    let macro_f1 = f1_per_class.iter().sum::<f64>() / n_classes.max(1) as f64;
    Ok(Metrics {
        accuracy: correct as f64 / total as f64,
        f1_per_class,
        macro_f1,
        confusion,
        samples: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_correct() {
        let m = compute_metrics(&[0, 1, 2, 1], &[0, 1, 2, 1], 3).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.f1_per_class, vec![1.0; 3]);
    }

    #[test]
    fn constant_predictor_on_balanced_pair() {
        let m = compute_metrics(&[0, 0, 0, 0], &[0, 0, 1, 1], 2).unwrap();
        assert_eq!(m.accuracy, 0.5);
        assert!((m.f1_per_class[0] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.f1_per_class[1], 0.0);
        assert_eq!(m.confusion, vec![vec![2, 0], vec![2, 0]]);
    }

    #[test]
    fn order_invariant() {
        let p = [0, 1, 1, 2, 0, 2, 1];
        let l = [0, 1, 2, 2, 1, 2, 1];
        let a = compute_metrics(&p, &l, 3).unwrap();
        let mut idx: Vec<usize> = (0..p.len()).rev().collect();
        idx.swap(1, 4);
        let pp: Vec<_> = idx.iter().map(|&i| p[i]).collect();
        let ll: Vec<_> = idx.iter().map(|&i| l[i]).collect();
        assert_eq!(a, compute_metrics(&pp, &ll, 3).unwrap());
    }

    #[test]
    fn row_sums_are_class_counts() {
        let m = compute_metrics(&[1, 1, 0, 2], &[0, 1, 1, 1], 3).unwrap();
        assert_eq!(m.confusion[0].iter().sum::<u64>(), 1);
        assert_eq!(m.confusion[1].iter().sum::<u64>(), 3);
    }

    #[test]
    fn errors() {
        assert!(matches!(compute_metrics(&[], &[], 2), Err(Error::EmptyInput(_))));
        assert!(compute_metrics(&[0], &[0, 1], 2).is_err());
        assert!(compute_metrics(&[3], &[0], 2).is_err());
    }
}
