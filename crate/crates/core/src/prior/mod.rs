//! Analytic hemoglobin / fluence prior.
//!
//! Every map is a pure function of the un-normalized RGB frame and [`PriorParams`],
//! so identical inputs give bit-identical outputs.

mod analytic;
mod fusion;
mod map;
mod teacher;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use analytic::{
    afi_surrogate, blood_probability_v1, blood_probability_v2, effective_length, fluence_at,
    hemoglobin_index, percentile_clip_normalize, percentile_sorted, radial_fluence,
    red_green_index, PercentileMethod,
};
pub use fusion::{
    assemble_five_channel, conv2d, expand_first_conv_weights, map_as_tensor,
    truncate_input_channels, ChannelTensor, ConvWeights,
};
pub use map::ScalarMap;
pub use teacher::{
    adaptive_avg_pool, bce_map_loss, center_area_mean, center_region, distillation_objective,
    BCE_CLAMP,
};

use crate::error::{Error, Result};
use crate::io::RgbFrame;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorVersion {
    /// Per-frame percentile-normalized hemoglobin index.
    V1,
    /// Scale-fixed red-green index.
    V2,
}

impl FromStr for PriorVersion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "v1" => Ok(PriorVersion::V1),
            "v2" => Ok(PriorVersion::V2),
            other => Err(Error::InvalidArgument(format!(
                "unknown prior version {other:?} (expected v1|v2)"
            ))),
        }
    }
}

impl fmt::Display for PriorVersion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PriorVersion::V1 => "v1",
            PriorVersion::V2 => "v2",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PriorParams {
    pub epsilon: f64,
    pub alpha_v1: f64,
    pub alpha_v2: f64,
    pub pivot_v2: f64,
    /// Lower clip percentile, in percent.
    pub clip_lo: f64,
    /// Upper clip percentile, in percent.
    pub clip_hi: f64,
    /// `lambda_eff = lambda_scale * sqrt(H^2 + W^2)`.
    pub lambda_scale: f64,
    pub percentile_method: PercentileMethod,
}

impl Default for PriorParams {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            alpha_v1: 4.0,
            alpha_v2: 6.0,
            pivot_v2: 0.30,
            clip_lo: 1.0,
            clip_hi: 99.0,
            lambda_scale: 0.25,
            percentile_method: PercentileMethod::Linear,
        }
    }
}

impl PriorParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(what.to_string()));
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon must be finite and >= 0");
        }
        if !(self.alpha_v1 > 0.0 && self.alpha_v2 > 0.0) {
            return bad("alpha must be > 0");
        }
        if !(self.clip_lo < self.clip_hi && self.clip_lo >= 0.0 && self.clip_hi <= 100.0) {
            return bad("clip percentiles must satisfy 0 <= clip_lo < clip_hi <= 100");
        }
        if !(self.lambda_scale > 0.0 && self.lambda_scale.is_finite()) {
            return bad("lambda_scale must be > 0");
        }
        if !self.pivot_v2.is_finite() {
            return bad("pivot must be finite");
        }
        Ok(())
    }

    pub fn alpha(&self, version: PriorVersion) -> f64 {
        match version {
            PriorVersion::V1 => self.alpha_v1,
            PriorVersion::V2 => self.alpha_v2,
        }
    }
}

/// All analytic maps for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorMaps<T> {
    /// `H_norm` for v1; the red-green index `H_v2` for v2.
    pub h_norm: ScalarMap<T>,
    pub phi: ScalarMap<T>,
    pub p_blood: ScalarMap<T>,
    pub h_afi_phi: ScalarMap<T>,
    pub version: PriorVersion,
    pub params: PriorParams,
}

pub fn compute_prior_maps<T: Scalar>(
    frame: &RgbFrame<T>,
    params: &PriorParams,
    version: PriorVersion,
) -> Result<PriorMaps<T>> {
    params.validate()?;
    let eps = T::lit(params.epsilon);
    let phi = radial_fluence(frame.width(), frame.height(), params.lambda_scale)?;
    let (h_norm, p_blood) = match version {
        PriorVersion::V1 => {
            let h = hemoglobin_index(frame, eps);
            let h_norm = percentile_clip_normalize(
                &h,
                params.clip_lo,
                params.clip_hi,
                eps,
                params.percentile_method,
            )?;
            let p = blood_probability_v1(&h_norm, &phi, T::lit(params.alpha_v1))?;
            (h_norm, p)
        }
        PriorVersion::V2 => {
            let index = red_green_index(frame, eps);
            let p = blood_probability_v2(
                frame,
                &phi,
                T::lit(params.alpha_v2),
                T::lit(params.pivot_v2),
                eps,
            )?;
            (index, p)
        }
    };
    let h_afi_phi = afi_surrogate(frame, &phi, eps)?;
    Ok(PriorMaps {
        h_norm,
        phi,
        p_blood,
        h_afi_phi,
        version,
        params: *params,
    })
}

/// Maps for a batch of frames, computed in parallel; output order follows input order.
pub fn compute_prior_batch<T: Scalar>(
    frames: &[RgbFrame<T>],
    params: &PriorParams,
    version: PriorVersion,
) -> Result<Vec<PriorMaps<T>>> {
    frames
        .par_iter()
        .map(|f| compute_prior_maps(f, params, version))
        .collect()
}
