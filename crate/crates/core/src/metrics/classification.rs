use serde::{Deserialize, Serialize};

use crate::classes::{ClassSet, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::io::PredictionSet;

/// Argmax confusion counts, rows = true class, columns = predicted class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn from_predictions(preds: &PredictionSet) -> Self {
        let mut counts = vec![vec![0u64; NUM_CLASSES]; NUM_CLASSES];
        for r in &preds.records {
            counts[r.true_label][r.argmax()] += 1;
        }
        ConfusionMatrix { counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn support(&self, class: usize) -> u64 {
        self.counts[class].iter().sum()
    }

    pub fn predicted(&self, class: usize) -> u64 {
        self.counts.iter().map(|row| row[class]).sum()
    }

    /// Each row divided by its sum; rows with no frames stay all-zero.
    pub fn row_normalized(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|row| {
                let sum: u64 = row.iter().sum();
                row.iter()
                    .map(|&c| if sum == 0 { 0.0 } else { c as f64 / sum as f64 })
                    .collect()
            })
            .collect()
    }

    pub fn precision(&self, class: usize) -> f64 {
        ratio(self.counts[class][class], self.predicted(class))
    }

    pub fn recall(&self, class: usize) -> f64 {
        ratio(self.counts[class][class], self.support(class))
    }

    /// Harmonic mean of precision and recall, 0 when both are 0.
    pub fn f1(&self, class: usize) -> f64 {
        let (p, r) = (self.precision(class), self.recall(class));
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    pub fn accuracy(&self) -> f64 {
        ratio(
            (0..NUM_CLASSES).map(|c| self.counts[c][c]).sum(),
            self.total(),
        )
    }

    /// Mean F1 over classes in `classes` that have at least one true frame.
    pub fn macro_f1(&self, classes: &ClassSet) -> Option<f64> {
        let supported: Vec<usize> = classes.iter().filter(|&c| self.support(c) > 0).collect();
        if supported.is_empty() {
            return None;
        }
        Some(supported.iter().map(|&c| self.f1(c)).sum::<f64>() / supported.len() as f64)
    }

    /// Support-weighted mean F1 over all classes.
    pub fn weighted_f1(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        (0..NUM_CLASSES)
            .map(|c| self.f1(c) * self.support(c) as f64)
            .sum::<f64>()
            / total as f64
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Mean negative log-probability of the true class (softmax applied to logits).
pub fn cross_entropy(preds: &PredictionSet) -> Result<f64> {
    if preds.is_empty() {
        return Err(Error::InvalidArgument("no predictions".into()));
    }
    let total: f64 = preds
        .records
        .iter()
        .map(|r| -r.log_probability(preds.score_kind, r.true_label))
        .sum();
    Ok(total / preds.len() as f64)
}

/// Inverse-frequency weights `w_c = N / (C * n_c)`.
///
/// `C` counts only classes with `n_c > 0`; empty classes get `None`.
pub fn class_weights(counts: &[usize]) -> Vec<Option<f64>> {
    let total: usize = counts.iter().sum();
    let present = counts.iter().filter(|&&n| n > 0).count();
    counts
        .iter()
        .map(|&n| (n > 0).then(|| total as f64 / (present as f64 * n as f64)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedCell {
    pub true_class: usize,
    pub predicted_class: usize,
    pub value: f64,
}

/// Cells worth labelling on a row-normalized heatmap: every diagonal cell plus
/// off-diagonal cells with value `>= threshold` (non-zero cells only).
pub fn annotate_confusion(normalized: &[Vec<f64>], threshold: f64) -> Vec<AnnotatedCell> {
    let mut out = Vec::new();
    for (i, row) in normalized.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if i == j || (v > 0.0 && v >= threshold) {
                out.push(AnnotatedCell {
                    true_class: i,
                    predicted_class: j,
                    value: v,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{PredictionRecord, ScoreKind};

    fn record(id: usize, label: usize, predicted: usize) -> PredictionRecord {
        let mut scores = [0.0; NUM_CLASSES];
        scores[predicted] = 5.0;
        PredictionRecord {
            frame_id: format!("f{id}"),
            video_id: "v".into(),
            true_label: label,
            scores,
        }
    }

    fn set(pairs: &[(usize, usize)]) -> PredictionSet {
        let records = pairs
            .iter()
            .enumerate()
            .map(|(i, &(t, p))| record(i, t, p))
            .collect();
        PredictionSet::new(records, ScoreKind::Logits).unwrap()
    }

    #[test]
    fn perfect_predictions() {
        let cm = ConfusionMatrix::from_predictions(&set(&[(0, 0), (3, 3), (3, 3), (9, 9)]));
        assert_eq!(cm.accuracy(), 1.0);
        for i in 0..NUM_CLASSES {
            for j in 0..NUM_CLASSES {
                if i != j {
                    assert_eq!(cm.counts[i][j], 0);
                }
            }
        }
        assert_eq!(cm.weighted_f1(), 1.0);
    }

    #[test]
    fn two_class_f1_by_hand() {
        // class 1: 3 true, 2 predicted correctly, 1 called class 2
        // class 2: 2 true, 1 correct, 1 called class 1
        let cm = ConfusionMatrix::from_predictions(&set(&[(1, 1), (1, 1), (1, 2), (2, 2), (2, 1)]));
        // class 1: tp 2, fp 1, fn 1 -> P = R = 2/3
        assert!((cm.f1(1) - 2.0 / 3.0).abs() < 1e-15);
        // class 2: tp 1, fp 1, fn 1 -> P = R = 1/2
        assert!((cm.f1(2) - 0.5).abs() < 1e-15);
        let both = ClassSet::from_indices([1, 2, 7]);
        assert!((cm.macro_f1(&both).unwrap() - (2.0 / 3.0 + 0.5) / 2.0).abs() < 1e-15);
        assert!((cm.weighted_f1() - (3.0 * 2.0 / 3.0 + 2.0 * 0.5) / 5.0).abs() < 1e-15);
        assert!((cm.accuracy() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn normalized_rows_and_recall() {
        let cm = ConfusionMatrix::from_predictions(&set(&[(1, 1), (1, 2), (1, 1), (4, 4)]));
        let n = cm.row_normalized();
        for (c, row) in n.iter().enumerate() {
            let s: f64 = row.iter().sum();
            assert!(s == 0.0 || (s - 1.0).abs() < 1e-9);
            assert_eq!(row[c], cm.recall(c));
        }
    }

    #[test]
    fn uniform_cross_entropy_is_ln_14() {
        let records = (0..5)
            .map(|i| PredictionRecord {
                frame_id: format!("f{i}"),
                video_id: "v".into(),
                true_label: i,
                scores: [1.0 / 14.0; NUM_CLASSES],
            })
            .collect();
        let probs = PredictionSet::new(records, ScoreKind::Probabilities).unwrap();
        assert!((cross_entropy(&probs).unwrap() - 14f64.ln()).abs() < 1e-12);
        let logits = PredictionSet {
            score_kind: ScoreKind::Logits,
            ..probs
        };
        assert!((cross_entropy(&logits).unwrap() - 14f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn class_weight_examples() {
        let w = class_weights(&[10, 30, 50, 10]);
        assert!((w[0].unwrap() - 2.5).abs() < 1e-15);
        assert!(class_weights(&[7, 7, 7]).iter().all(|w| *w == Some(1.0)));
        let w = class_weights(&[90, 10, 0]);
        assert!((w[0].unwrap() - 0.5556).abs() < 1e-4);
        assert!((w[1].unwrap() - 5.0).abs() < 1e-12);
        assert_eq!(w[2], None);
    }

    #[test]
    fn annotation_rules() {
        let eye: Vec<Vec<f64>> = (0..3)
            .map(|i| (0..3).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let a = annotate_confusion(&eye, 0.10);
        assert_eq!(a.len(), 3);
        assert!(a.iter().all(|c| c.true_class == c.predicted_class));

        let m = vec![
            vec![0.85, 0.15, 0.0],
            vec![0.05, 0.95, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let off: Vec<_> = annotate_confusion(&m, 0.10)
            .into_iter()
            .filter(|c| c.true_class != c.predicted_class)
            .collect();
        assert_eq!(off.len(), 1);
        assert_eq!((off[0].true_class, off[0].predicted_class), (0, 1));

        let all = annotate_confusion(&m, 0.0);
        assert_eq!(all.len(), 3 + 2);
    }
}
