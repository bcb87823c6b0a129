//! Support recovery scores.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ScoError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
}

/// Compares an estimated support against the truth. Accuracy and recall are
/// both |S* ∩ Ŝ| / |S*|; precision is |S* ∩ Ŝ| / |Ŝ|, zero for an empty
/// estimate.
pub fn support_metrics(truth: &[usize], estimate: &[usize], p: usize) -> Result<Metrics> {
    if truth.is_empty() {
        return Err(ScoError::EmptyTruth);
    }
    let mut in_truth = vec![false; p];
    for &j in truth {
        *in_truth
            .get_mut(j)
            .ok_or_else(|| ScoError::Data(format!("true support index {j} out of range for p = {p}")))? = true;
    }
    let mut seen = vec![false; p];
    let mut hits = 0usize;
    let mut size = 0usize;
    for &j in estimate {
        if j >= p {
            return Err(ScoError::Data(format!("estimated support index {j} out of range for p = {p}")));
        }
        if !seen[j] {
            seen[j] = true;
            size += 1;
            hits += in_truth[j] as usize;
        }
    }
    let n_true = in_truth.iter().filter(|&&b| b).count();
    let recall = hits as f64 / n_true as f64;
    let precision = if size == 0 { 0.0 } else { hits as f64 / size as f64 };
    let f1 = if recall == 0.0 || precision == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(Metrics {
        accuracy: recall,
        recall,
        precision,
        f1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let m = support_metrics(&[1, 2, 3], &[2, 3, 4], 10).unwrap();
        assert_eq!(m.accuracy, 2.0 / 3.0);
        assert_eq!(m.precision, 2.0 / 3.0);
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-15);

        let m = support_metrics(&[1, 2, 3], &[1, 2, 3], 10).unwrap();
        assert_eq!((m.accuracy, m.recall, m.precision, m.f1), (1.0, 1.0, 1.0, 1.0));

        let m = support_metrics(&[1, 2, 3], &[], 10).unwrap();
        assert_eq!((m.recall, m.precision, m.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn empty_truth_is_an_error() {
        assert!(matches!(support_metrics(&[], &[1], 5), Err(ScoError::EmptyTruth)));
        assert!(support_metrics(&[7], &[1], 5).is_err());
    }

    proptest! {
        #[test]
        fn scores_are_bounded(
            truth in proptest::collection::btree_set(0usize..30, 1..10),
            est in proptest::collection::btree_set(0usize..30, 0..10),
        ) {
            let t: Vec<usize> = truth.into_iter().collect();
            let e: Vec<usize> = est.into_iter().collect();
            let m = support_metrics(&t, &e, 30).unwrap();
            for v in [m.accuracy, m.recall, m.precision, m.f1] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            if m.precision > 0.0 && m.recall > 0.0 {
                let h = 2.0 / (1.0 / m.precision + 1.0 / m.recall);
                prop_assert!((m.f1 - h).abs() < 1e-12);
            }
        }
    }
}
