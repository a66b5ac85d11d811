use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::auc::auc_ovr;
use crate::error::Result;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Scores `>= threshold` are called positive; `+inf` for the origin.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

impl RocCurve {
    /// Trapezoidal area under the polyline.
    pub fn trapezoid_area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
            .sum()
    }
}

/// Threshold sweep over the distinct scores, highest first.
///
/// Tied scores move both rates at once, giving a diagonal segment, so the
/// trapezoidal area equals the midrank AUC.
pub fn roc_curve<T: Scalar>(scores: &[T], labels: &[bool]) -> Result<RocCurve> {
    let auc = auc_ovr(scores, labels)?;
    let m = labels.iter().filter(|&&l| l).count() as f64;
    let n = labels.len() as f64 - m;
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(Ordering::Equal));
    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: f64::INFINITY,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < idx.len() {
        let s = scores[idx[i]];
        while i < idx.len() && scores[idx[i]] == s {
            if labels[idx[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            fpr: fp as f64 / n,
            tpr: tp as f64 / m,
            threshold: s.as_f64(),
        });
    }
    Ok(RocCurve { points, auc })
}

/// Macro-average ROC: each curve's TPR is linearly interpolated onto the union of
/// all FPR breakpoints and the results are averaged. Returns `(fpr, tpr)` pairs.
pub fn macro_average_roc(curves: &[RocCurve]) -> Vec<(f64, f64)> {
    if curves.is_empty() {
        return Vec::new();
    }
    let mut grid: Vec<f64> = curves
        .iter()
        .flat_map(|c| c.points.iter().map(|p| p.fpr))
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid.into_iter()
        .map(|x| {
            let mean =
                curves.iter().map(|c| interpolate_tpr(c, x)).sum::<f64>() / curves.len() as f64;
            (x, mean)
        })
        .collect()
}

/// Highest TPR reached at `fpr`, interpolating linearly between breakpoints.
fn interpolate_tpr(curve: &RocCurve, fpr: f64) -> f64 {
    let pts = &curve.points;
    let mut best: f64 = 0.0;
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if fpr < a.fpr || fpr > b.fpr {
            continue;
        }
        let t = if b.fpr > a.fpr {
            a.tpr + (b.tpr - a.tpr) * (fpr - a.fpr) / (b.fpr - a.fpr)
        } else {
            b.tpr
        };
        best = best.max(t);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_pair_curve() {
        let c = roc_curve(&[0.9, 0.1], &[true, false]).unwrap();
        let pts: Vec<(f64, f64)> = c.points.iter().map(|p| (p.fpr, p.tpr)).collect();
        assert_eq!(pts, vec![(0.0, 0.0), (0.0, 1.0), (1.0, 1.0)]);
        assert_eq!(c.auc, 1.0);
    }

    #[test]
    fn separated_passes_through_top_left() {
        let c = roc_curve(
            &[0.9, 0.8, 0.3, 0.2, 0.1],
            &[true, true, false, false, false],
        )
        .unwrap();
        assert!(c.points.iter().any(|p| p.fpr == 0.0 && p.tpr == 1.0));
    }

    #[test]
    fn curve_is_monotone_and_anchored() {
        let scores = [0.4, 0.4, 0.2, 0.9, 0.4, 0.1, 0.7];
        let labels = [true, false, false, true, true, false, false];
        let c = roc_curve(&scores, &labels).unwrap();
        assert_eq!((c.points[0].fpr, c.points[0].tpr), (0.0, 0.0));
        let last = c.points.last().unwrap();
        assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
        for w in c.points.windows(2) {
            assert!(w[1].fpr >= w[0].fpr && w[1].tpr >= w[0].tpr);
        }
        assert!((c.trapezoid_area() - c.auc).abs() < 1e-12);
    }

    #[test]
    fn macro_average_of_identical_curves_is_that_curve() {
        let c = roc_curve(&[0.9, 0.5, 0.4, 0.1], &[true, false, true, false]).unwrap();
        let avg = macro_average_roc(&[c.clone(), c.clone()]);
        for p in &c.points {
            let (_, t) = avg.iter().find(|(f, _)| *f == p.fpr).unwrap();
            assert!(*t >= p.tpr - 1e-12);
        }
        assert_eq!(avg.last(), Some(&(1.0, 1.0)));
    }
}
