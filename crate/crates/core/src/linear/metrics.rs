use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Positive-class precision, recall and F1 with the confusion counts behind
/// them. Undefined ratios are reported as 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl Metrics {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total() as f64
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn compute_metrics(predictions: &[bool], gold: &[bool]) -> Result<Metrics> {
    if predictions.len() != gold.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: gold.len(),
        });
    }
    if gold.is_empty() {
        return Err(Error::InsufficientData("no items to evaluate".into()));
    }
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for (&p, &g) in predictions.iter().zip(gold) {
        match (p, g) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(Metrics {
        precision,
        recall,
        f1,
        tp,
        fp,
        fn_,
        tn,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_predictions() {
        let gold = [true, false, true, false];
        let m = compute_metrics(&gold, &gold).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn all_positive_predictor() {
        let gold: Vec<bool> = (0..1000).map(|i| i < 444).collect();
        let m = compute_metrics(&vec![true; 1000], &gold).unwrap();
        assert_eq!(m.precision, 0.444);
        assert_eq!(m.recall, 1.0);
        assert!((m.f1 - 2.0 * 0.444 / 1.444).abs() < 1e-12);
    }

    #[test]
    fn all_negative_predictor() {
        let gold = [true, false, true];
        let m = compute_metrics(&[false; 3], &gold).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
        assert_eq!(m.total(), 3);
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(
            compute_metrics(&[true], &[true, false]),
            Err(Error::LengthMismatch { left: 1, right: 2 })
        ));
        assert!(compute_metrics(&[], &[]).is_err());
    }

    proptest! {
        #[test]
        fn matches_confusion_matrix_oracle(pairs in proptest::collection::vec((any::<bool>(), any::<bool>()), 1..200)) {
            let (pred, gold): (Vec<bool>, Vec<bool>) = pairs.iter().copied().unzip();
            let m = compute_metrics(&pred, &gold).unwrap();
            // oracle: 2x2 table indexed by (pred, gold)
            let mut table = [[0usize; 2]; 2];
            for (p, g) in &pairs {
                table[*p as usize][*g as usize] += 1;
            }
            prop_assert_eq!(m.tp, table[1][1]);
            prop_assert_eq!(m.fp, table[1][0]);
            prop_assert_eq!(m.fn_, table[0][1]);
            prop_assert_eq!(m.tn, table[0][0]);
            prop_assert_eq!(m.total(), pairs.len());
            let p = if table[1][1] + table[1][0] == 0 { 0.0 } else { table[1][1] as f64 / (table[1][1] + table[1][0]) as f64 };
            let r = if table[1][1] + table[0][1] == 0 { 0.0 } else { table[1][1] as f64 / (table[1][1] + table[0][1]) as f64 };
            let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
            prop_assert_eq!(m.precision, p);
            prop_assert_eq!(m.recall, r);
            prop_assert!((m.f1 - f).abs() < 1e-15);
        }
    }
}
