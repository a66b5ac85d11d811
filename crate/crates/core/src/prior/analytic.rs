//! Per-pixel analytic quantities derived from an RGB frame.

use serde::{Deserialize, Serialize};

use super::ScalarMap;
use crate::error::{Error, Result};
use crate::io::RgbFrame;
use crate::scalar::{sigmoid, Scalar};

/// How per-frame percentiles are read off the sorted pixel values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PercentileMethod {
    /// Linear interpolation between order statistics at rank `q/100 * (n - 1)`.
    #[default]
    Linear,
    /// Smallest value whose cumulative share is at least `q/100`.
    NearestRank,
}

/// `H = R / (G + B + eps)`.
pub fn hemoglobin_index<T: Scalar>(frame: &RgbFrame<T>, eps: T) -> ScalarMap<T> {
    let values = frame.pixels().map(|[r, g, b]| r / (g + b + eps)).collect();
    ScalarMap::new(frame.width(), frame.height(), values).expect("frame shape")
}

/// Percentile `q` (in percent) of already sorted, non-empty `sorted`.
pub fn percentile_sorted<T: Scalar>(sorted: &[T], q: f64, method: PercentileMethod) -> T {
    let n = sorted.len();
    assert!(n > 0, "percentile of empty slice");
    let q = q.clamp(0.0, 100.0);
    match method {
        PercentileMethod::Linear => {
            let pos = q / 100.0 * (n - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            let frac = T::lit(pos - lo as f64);
            if lo == hi {
                sorted[lo]
            } else {
                sorted[lo] + (sorted[hi] - sorted[lo]) * frac
            }
        }
        PercentileMethod::NearestRank => {
            let rank = ((q / 100.0) * n as f64).ceil() as usize;
            sorted[rank.clamp(1, n) - 1]
        }
    }
}

/// Clips to the `[lo_pct, hi_pct]` per-frame percentiles, then rescales by
/// `(x - p_lo) / (p_hi - p_lo + eps)` into `[0, 1]`.
///
/// A constant map yields all zeros.
pub fn percentile_clip_normalize<T: Scalar>(
    map: &ScalarMap<T>,
    lo_pct: f64,
    hi_pct: f64,
    eps: T,
    method: PercentileMethod,
) -> Result<ScalarMap<T>> {
    if !(0.0..=100.0).contains(&lo_pct) || !(0.0..=100.0).contains(&hi_pct) || lo_pct >= hi_pct {
        return Err(Error::InvalidArgument(format!(
            "percentile bounds must satisfy 0 <= lo < hi <= 100, got {lo_pct}..{hi_pct}"
        )));
    }
    let mut sorted = map.values().to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite map values"));
    let p_lo = percentile_sorted(&sorted, lo_pct, method);
    let p_hi = percentile_sorted(&sorted, hi_pct, method);
    let denom = p_hi - p_lo + eps;
    Ok(map.map(|v| (v.max(p_lo).min(p_hi) - p_lo) / denom))
}

/// Effective attenuation length `lambda_scale * sqrt(H^2 + W^2)`.
pub fn effective_length(width: usize, height: usize, lambda_scale: f64) -> f64 {
    lambda_scale * ((width * width + height * height) as f64).sqrt()
}

/// Fluence `exp(-r / lambda_eff)` at continuous pixel coordinates `(x, y)`.
///
/// Pixel centres sit on integer coordinates; the optical centre is
/// `((W - 1) / 2, (H - 1) / 2)`, so the outer image corner is `(-0.5, -0.5)`.
pub fn fluence_at<T: Scalar>(x: f64, y: f64, width: usize, height: usize, lambda_scale: f64) -> T {
    let xc = (width as f64 - 1.0) / 2.0;
    let yc = (height as f64 - 1.0) / 2.0;
    let r = ((x - xc).powi(2) + (y - yc).powi(2)).sqrt();
    T::lit((-r / effective_length(width, height, lambda_scale)).exp())
}

/// Radial fluence map `Phi(r)`, values in `(0, 1]`.
pub fn radial_fluence<T: Scalar>(
    width: usize,
    height: usize,
    lambda_scale: f64,
) -> Result<ScalarMap<T>> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidArgument(format!(
            "empty frame {width}x{height}"
        )));
    }
    if !(lambda_scale > 0.0 && lambda_scale.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "lambda_scale must be positive, got {lambda_scale}"
        )));
    }
    Ok(ScalarMap::from_fn(width, height, |x, y| {
        fluence_at(x as f64, y as f64, width, height, lambda_scale)
    }))
}

/// v1 prior `sigmoid(alpha * (H_norm - 0.5)) * Phi`.
pub fn blood_probability_v1<T: Scalar>(
    h_norm: &ScalarMap<T>,
    phi: &ScalarMap<T>,
    alpha: T,
) -> Result<ScalarMap<T>> {
    let half = T::lit(0.5);
    h_norm.zip_with(phi, |h, p| sigmoid(alpha * (h - half)) * p)
}

/// Red-green contrast `(R - G) / (R + G + eps)` in `[-1, 1]`.
pub fn red_green_index<T: Scalar>(frame: &RgbFrame<T>, eps: T) -> ScalarMap<T> {
    let values = frame
        .pixels()
        .map(|[r, g, _]| (r - g) / (r + g + eps))
        .collect();
    ScalarMap::new(frame.width(), frame.height(), values).expect("frame shape")
}

/// v2 prior `sigmoid(alpha * (H_v2 - pivot)) * Phi`, with the scale-fixed red-green index.
pub fn blood_probability_v2<T: Scalar>(
    frame: &RgbFrame<T>,
    phi: &ScalarMap<T>,
    alpha: T,
    pivot: T,
    eps: T,
) -> Result<ScalarMap<T>> {
    red_green_index(frame, eps).zip_with(phi, |h, p| sigmoid(alpha * (h - pivot)) * p)
}

/// Autofluorescence surrogate `ln((G + eps) / (B + eps)) * Phi`.
pub fn afi_surrogate<T: Scalar>(
    frame: &RgbFrame<T>,
    phi: &ScalarMap<T>,
    eps: T,
) -> Result<ScalarMap<T>> {
    let raw = ScalarMap::new(
        frame.width(),
        frame.height(),
        frame
            .pixels()
            .map(|[_, g, b]| ((g + eps) / (b + eps)).ln())
            .collect(),
    )?;
    raw.zip_with(phi, |a, p| a * p)
}

impl std::str::FromStr for PercentileMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "linear" => Ok(PercentileMethod::Linear),
            "nearest-rank" | "nearest" => Ok(PercentileMethod::NearestRank),
            other => Err(Error::InvalidArgument(format!(
                "unknown percentile method '{other}'"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-6;

    fn px(rgb: [f64; 3]) -> RgbFrame<f64> {
        RgbFrame::uniform(1, 1, rgb).unwrap()
    }

    #[test]
    fn hemoglobin_gray_and_degenerate() {
        let h = hemoglobin_index(&px([0.5, 0.5, 0.5]), EPS);
        assert!((h.get(0, 0) - 0.5 / (1.0 + 1e-6)).abs() < 1e-15);
        let h = hemoglobin_index(&px([1.0, 0.0, 0.0]), EPS);
        assert!((h.get(0, 0) - 1e6).abs() < 1e-6);
    }

    #[test]
    fn percentile_linear_matches_numpy_convention() {
        let v: Vec<f64> = (0..=10).map(f64::from).collect();
        assert_eq!(percentile_sorted(&v, 0.0, PercentileMethod::Linear), 0.0);
        assert_eq!(percentile_sorted(&v, 100.0, PercentileMethod::Linear), 10.0);
        assert!((percentile_sorted(&v, 25.0, PercentileMethod::Linear) - 2.5).abs() < 1e-12);
        let v = [1.0f64, 2.0, 3.0, 4.0];
        assert!((percentile_sorted(&v, 50.0, PercentileMethod::Linear) - 2.5).abs() < 1e-12);
        assert_eq!(
            percentile_sorted(&v, 50.0, PercentileMethod::NearestRank),
            2.0
        );
        assert_eq!(
            percentile_sorted(&v, 99.0, PercentileMethod::NearestRank),
            4.0
        );
        assert_eq!(
            percentile_sorted(&v, 1.0, PercentileMethod::NearestRank),
            1.0
        );
    }

    #[test]
    fn constant_map_normalizes_to_zero() {
        let m = ScalarMap::filled(7, 5, 3.25f64);
        for method in [PercentileMethod::Linear, PercentileMethod::NearestRank] {
            let n = percentile_clip_normalize(&m, 1.0, 99.0, EPS, method).unwrap();
            assert!(n.values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn rejects_inverted_percentiles() {
        let m = ScalarMap::filled(2, 2, 1.0f64);
        assert!(percentile_clip_normalize(&m, 99.0, 1.0, EPS, PercentileMethod::Linear).is_err());
    }

    #[test]
    fn fluence_center_and_symmetry() {
        let phi: ScalarMap<f64> = radial_fluence(9, 9, 0.25).unwrap();
        assert_eq!(phi.get(4, 4), 1.0);
        let phi: ScalarMap<f64> = radial_fluence(10, 7, 0.25).unwrap();
        for y in 0..7 {
            for x in 0..10 {
                assert_eq!(phi.get(x, y), phi.get(9 - x, y));
                assert_eq!(phi.get(x, y), phi.get(x, 6 - y));
            }
        }
    }

    #[test]
    fn fluence_outer_corner_is_e_minus_two() {
        for (w, h) in [(336, 336), (224, 224), (7, 5)] {
            let v: f64 = fluence_at(-0.5, -0.5, w, h, 0.25);
            assert!((v - (-2.0f64).exp()).abs() < 1e-12, "{w}x{h}: {v}");
        }
    }

    #[test]
    fn v1_reference_values() {
        let phi = ScalarMap::filled(1, 1, 1.0f64);
        let mid = ScalarMap::filled(1, 1, 0.5f64);
        let top = ScalarMap::filled(1, 1, 1.0f64);
        assert_eq!(
            blood_probability_v1(&mid, &phi, 4.0).unwrap().get(0, 0),
            0.5
        );
        let v = blood_probability_v1(&top, &phi, 4.0).unwrap().get(0, 0);
        assert!((v - 0.880_797_077_977_882_3).abs() < 1e-12);
        let dim = ScalarMap::filled(1, 1, (-2.0f64).exp());
        let v = blood_probability_v1(&mid, &dim, 4.0).unwrap().get(0, 0);
        assert!((v - 0.067_667_641_618_306_35).abs() < 1e-12);
    }

    #[test]
    fn v1_shape_mismatch_errors() {
        let a = ScalarMap::filled(2, 2, 0.5f64);
        let b = ScalarMap::filled(2, 3, 1.0f64);
        assert!(matches!(
            blood_probability_v1(&a, &b, 4.0),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn v2_reference_values() {
        let phi = ScalarMap::filled(1, 1, 1.0f64);
        let gray = blood_probability_v2(&px([0.4, 0.4, 0.2]), &phi, 6.0, 0.3, EPS).unwrap();
        assert!((gray.get(0, 0) - 0.141_851_064_900_487_8).abs() < 1e-9);
        let red = blood_probability_v2(&px([1.0, 0.0, 0.3]), &phi, 6.0, 0.3, EPS).unwrap();
        assert!((red.get(0, 0) - 0.985_225_968_306_726_9).abs() < 1e-5);
    }

    #[test]
    fn v2_pivot_gives_half_fluence() {
        // (R - G) / (R + G) = 0.3 with R = 0.65, G = 0.35
        let frame = RgbFrame::uniform(6, 4, [0.65, 0.35, 0.2]).unwrap();
        let phi = radial_fluence::<f64>(6, 4, 0.25).unwrap();
        let p = blood_probability_v2(&frame, &phi, 6.0, 0.3, 0.0).unwrap();
        for (v, f) in p.values().iter().zip(phi.values()) {
            assert!((v - 0.5 * f).abs() < 1e-12);
        }
    }

    #[test]
    fn afi_reference_values() {
        let phi = ScalarMap::filled(1, 1, 1.0f64);
        let v = afi_surrogate(&px([0.1, 0.8, 0.4]), &phi, EPS)
            .unwrap()
            .get(0, 0);
        assert!((v - std::f64::consts::LN_2).abs() < 1e-5);
        let swapped = afi_surrogate(&px([0.1, 0.4, 0.8]), &phi, EPS)
            .unwrap()
            .get(0, 0);
        assert!((swapped + v).abs() < 1e-15);
        let flat = afi_surrogate(&px([0.9, 0.3, 0.3]), &phi, EPS)
            .unwrap()
            .get(0, 0);
        assert_eq!(flat, 0.0);
    }
}
