use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Bonferroni adjustment `min(1, m * p)` for each p-value.
pub fn bonferroni(p_values: &[f64], m: usize) -> Result<Vec<f64>> {
    if m < p_values.len() {
        return Err(Error::InvalidArgument(format!(
            "Bonferroni m = {m} is smaller than the {} tests supplied",
            p_values.len()
        )));
    }
    p_values
        .iter()
        .map(|&p| {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!(
                    "p-value {p} outside [0, 1]"
                )));
            }
            Ok((p * m as f64).min(1.0))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectSize {
    pub d: f64,
    /// Pooled SD was zero; `d` is then 0 or an infinity.
    pub degenerate: bool,
}

/// Standardised mean difference with the pooled sample SD.
pub fn cohens_d<T: Scalar>(group_pos: &[T], group_neg: &[T]) -> Result<EffectSize> {
    let (n1, n0) = (group_pos.len(), group_neg.len());
    if n1 < 2 || n0 < 2 {
        return Err(Error::InvalidArgument(format!(
            "Cohen's d needs at least two samples per group (got {n1} and {n0})"
        )));
    }
    let stats = |g: &[T]| {
        let n = g.len() as f64;
        let mean = g.iter().map(|v| v.as_f64()).sum::<f64>() / n;
        let ss = g.iter().map(|v| (v.as_f64() - mean).powi(2)).sum::<f64>();
        (mean, ss)
    };
    let (m1, ss1) = stats(group_pos);
    let (m0, ss0) = stats(group_neg);
    let pooled = ((ss1 + ss0) / (n1 + n0 - 2) as f64).sqrt();
    let diff = m1 - m0;
    if pooled == 0.0 {
        let d = if diff == 0.0 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        };
        return Ok(EffectSize {
            d,
            degenerate: true,
        });
    }
    Ok(EffectSize {
        d: diff / pooled,
        degenerate: false,
    })
}
