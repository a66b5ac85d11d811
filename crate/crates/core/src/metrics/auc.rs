use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn order<T: Scalar>(a: &T, b: &T) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

/// 1-based ranks with ties given the mean of the ranks they span.
pub fn midranks<T: Scalar>(values: &[T]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| order(&values[a], &values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && values[idx[j]] == values[idx[i]] {
            j += 1;
        }
        // ranks i+1 ..= j share their mean
        let mid = (i + 1 + j) as f64 / 2.0;
        for &k in &idx[i..j] {
            ranks[k] = mid;
        }
        i = j;
    }
    ranks
}

/// Mann-Whitney AUC from midranks: P(pos > neg) + 0.5 P(pos = neg).
///
/// Errors with [`Error::Undefined`] when either class is absent.
pub fn auc_ovr<T: Scalar>(scores: &[T], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::shape(scores.len(), labels.len()));
    }
    let m = labels.iter().filter(|&&l| l).count();
    let n = labels.len() - m;
    if m == 0 || n == 0 {
        return Err(Error::Undefined(format!(
            "AUC needs positives and negatives (got {m} positive, {n} negative)"
        )));
    }
    let ranks = midranks(scores);
    let rank_sum: f64 = ranks
        .iter()
        .zip(labels)
        .filter(|(_, &l)| l)
        .map(|(r, _)| r)
        .sum();
    let u = rank_sum - (m * (m + 1)) as f64 / 2.0;
    Ok(u / (m as f64 * n as f64))
}

/// [`auc_ovr`] for separate positive and negative score lists.
pub fn auc_pos_neg<T: Scalar>(pos: &[T], neg: &[T]) -> Result<f64> {
    let scores: Vec<T> = pos.iter().chain(neg).copied().collect();
    let labels: Vec<bool> = std::iter::repeat_n(true, pos.len())
        .chain(std::iter::repeat_n(false, neg.len()))
        .collect();
    auc_ovr(&scores, &labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midranks_with_ties() {
        assert_eq!(midranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
        assert_eq!(midranks(&[5.0f32; 3]), vec![2.0; 3]);
    }

    #[test]
    fn four_pair_example() {
        let auc = auc_pos_neg(&[0.9, 0.8], &[0.85, 0.7]).unwrap();
        assert_eq!(auc, 0.75);
    }

    #[test]
    fn all_ties_is_half() {
        assert_eq!(
            auc_ovr(&[0.3; 6], &[true, false, true, false, false, true]).unwrap(),
            0.5
        );
    }

    #[test]
    fn separated_is_one() {
        assert_eq!(auc_pos_neg(&[5.0, 6.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(auc_pos_neg(&[1.0], &[2.0]).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_is_undefined() {
        assert!(matches!(
            auc_ovr(&[0.1, 0.2], &[true, true]),
            Err(Error::Undefined(_))
        ));
        assert!(matches!(auc_ovr::<f64>(&[], &[]), Err(Error::Undefined(_))));
        assert!(auc_ovr(&[0.1], &[true, false]).is_err());
    }
}
