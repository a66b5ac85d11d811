//! Paired DeLong test for two correlated AUCs, using the midrank formulation
//! so each arm costs a few sorts instead of an O(mn) pair scan.

use serde::{Deserialize, Serialize};

use super::normal_two_sided_p;
use crate::error::{Error, Result};
use crate::metrics::midranks;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedTestResult {
    pub auc_a: f64,
    pub auc_b: f64,
    /// `auc_b - auc_a`.
    pub delta: f64,
    pub variance: f64,
    pub z: f64,
    pub p_two_sided: f64,
    pub p_bonferroni: Option<f64>,
    /// Set when the variance is zero but the AUCs differ.
    pub degenerate: bool,
}

impl PairedTestResult {
    pub fn with_bonferroni(mut self, m: usize) -> Self {
        self.p_bonferroni = Some((self.p_two_sided * m as f64).min(1.0));
        self
    }
}

/// Per-arm structural components.
struct Components {
    auc: f64,
    /// One entry per positive.
    v10: Vec<f64>,
    /// One entry per negative.
    v01: Vec<f64>,
}

fn components<T: Scalar>(pos: &[T], neg: &[T]) -> Components {
    let (m, n) = (pos.len(), neg.len());
    let all: Vec<T> = pos.iter().chain(neg).copied().collect();
    let tz = midranks(&all);
    let tx = midranks(pos);
    let ty = midranks(neg);
    let rank_sum: f64 = tz[..m].iter().sum();
    let auc = (rank_sum - (m * (m + 1)) as f64 / 2.0) / (m as f64 * n as f64);
    // For a positive, (combined rank - own-group rank) counts negatives below it.
    let v10 = (0..m).map(|i| (tz[i] - tx[i]) / n as f64).collect();
    let v01 = (0..n)
        .map(|j| 1.0 - (tz[m + j] - ty[j]) / m as f64)
        .collect();
    Components { auc, v10, v01 }
}

/// Sample covariance (divisor `len - 1`); zero for fewer than two samples.
fn covariance(a: &[f64], b: &[f64]) -> f64 {
    let k = a.len();
    if k < 2 {
        return 0.0;
    }
    let ma = a.iter().sum::<f64>() / k as f64;
    let mb = b.iter().sum::<f64>() / k as f64;
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - ma) * (y - mb))
        .sum::<f64>()
        / (k - 1) as f64
}

/// Compares the AUC of `scores_b` against `scores_a` on the same frames.
pub fn delong_paired<T: Scalar>(
    scores_a: &[T],
    scores_b: &[T],
    labels: &[bool],
) -> Result<PairedTestResult> {
    if scores_a.len() != labels.len() || scores_b.len() != labels.len() {
        return Err(Error::shape(
            format!("{} paired scores", labels.len()),
            format!("{} and {}", scores_a.len(), scores_b.len()),
        ));
    }
    let split = |s: &[T]| -> (Vec<T>, Vec<T>) {
        let pos = s
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l)
            .map(|(&v, _)| v)
            .collect();
        let neg = s
            .iter()
            .zip(labels)
            .filter(|(_, &l)| !l)
            .map(|(&v, _)| v)
            .collect();
        (pos, neg)
    };
    let (pa, na) = split(scores_a);
    let (pb, nb) = split(scores_b);
    if pa.is_empty() || na.is_empty() {
        return Err(Error::Undefined(format!(
            "DeLong needs positives and negatives (got {} / {})",
            pa.len(),
            na.len()
        )));
    }
    let ca = components(&pa, &na);
    let cb = components(&pb, &nb);
    let (m, n) = (pa.len() as f64, na.len() as f64);
    let s10 = covariance(&ca.v10, &ca.v10) + covariance(&cb.v10, &cb.v10)
        - 2.0 * covariance(&ca.v10, &cb.v10);
    let s01 = covariance(&ca.v01, &ca.v01) + covariance(&cb.v01, &cb.v01)
        - 2.0 * covariance(&ca.v01, &cb.v01);
    let variance = (s10 / m + s01 / n).max(0.0);
    let delta = cb.auc - ca.auc;

    let (z, p, degenerate) = if delta == 0.0 {
        (0.0, 1.0, false)
    } else if variance == 0.0 {
        (delta.signum() * f64::INFINITY, 0.0, true)
    } else {
        let z = delta / variance.sqrt();
        (z, normal_two_sided_p(z), false)
    };
    Ok(PairedTestResult {
        auc_a: ca.auc,
        auc_b: cb.auc,
        delta,
        variance,
        z,
        p_two_sided: p,
        p_bonferroni: None,
        degenerate,
    })
}
