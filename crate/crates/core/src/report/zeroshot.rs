use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::RgbFrame;
use crate::metrics::auc_pos_neg;
use crate::prior::{center_area_mean, compute_prior_maps, PriorParams, PriorVersion};
use crate::scalar::Scalar;
use crate::stats::cohens_d;

/// Share of the frame area used for the per-frame score.
pub const CENTER_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroShotResult {
    pub version: PriorVersion,
    pub n_blood: usize,
    pub n_normal: usize,
    pub auc: f64,
    pub cohens_d: f64,
    pub d_degenerate: bool,
    pub mean_blood: f64,
    pub mean_normal: f64,
}

fn frame_scores<T: Scalar>(
    frames: &[RgbFrame<T>],
    params: &PriorParams,
    version: PriorVersion,
) -> Result<Vec<f64>> {
    frames
        .par_iter()
        .map(|f| {
            let maps = compute_prior_maps(f, params, version)?;
            Ok(center_area_mean(&maps.p_blood, CENTER_FRACTION)?.as_f64())
        })
        .collect()
}

/// How well the centre-area mean of `P_blood` separates blood frames from
/// normal frames, with no training involved.
pub fn zero_shot_separation<T: Scalar>(
    blood: &[RgbFrame<T>],
    normal: &[RgbFrame<T>],
    version: PriorVersion,
    params: &PriorParams,
) -> Result<ZeroShotResult> {
    if blood.is_empty() || normal.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "zero-shot separation needs frames in both sets (got {} blood, {} normal)",
            blood.len(),
            normal.len()
        )));
    }
    let pos = frame_scores(blood, params, version)?;
    let neg = frame_scores(normal, params, version)?;
    let effect = cohens_d(&pos, &neg)?;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(ZeroShotResult {
        version,
        n_blood: pos.len(),
        n_normal: neg.len(),
        auc: auc_pos_neg(&pos, &neg)?,
        cohens_d: effect.d,
        d_degenerate: effect.degenerate,
        mean_blood: mean(&pos),
        mean_normal: mean(&neg),
    })
}
