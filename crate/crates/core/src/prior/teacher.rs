//! Teacher-map pooling, the map-level BCE term, and region summaries.

use super::ScalarMap;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Adaptive average pooling to `out_h x out_w`.
///
/// Output cell `(i, j)` averages rows `[floor(i*H/out_h), ceil((i+1)*H/out_h))`
/// and the analogous column window, so windows may overlap when sizes do not divide.
pub fn adaptive_avg_pool<T: Scalar>(
    map: &ScalarMap<T>,
    out_h: usize,
    out_w: usize,
) -> Result<ScalarMap<T>> {
    let (h, w) = (map.height(), map.width());
    if out_h == 0 || out_w == 0 || out_h > h || out_w > w {
        return Err(Error::InvalidArgument(format!(
            "cannot pool {w}x{h} to {out_w}x{out_h}"
        )));
    }
    let window =
        |i: usize, size: usize, out: usize| (i * size / out, ((i + 1) * size).div_ceil(out));
    Ok(ScalarMap::from_fn(out_w, out_h, |j, i| {
        let (y0, y1) = window(i, h, out_h);
        let (x0, x1) = window(j, w, out_w);
        let mut sum = T::zero();
        for y in y0..y1 {
            for x in x0..x1 {
                sum = sum + map.get(x, y);
            }
        }
        sum / T::lit(((y1 - y0) * (x1 - x0)) as f64)
    }))
}

pub const BCE_CLAMP: f64 = 1e-7;

/// Mean binary cross-entropy between a predicted map and a soft target map.
/// Predictions are clamped to `[1e-7, 1 - 1e-7]` before taking logs.
pub fn bce_map_loss<T: Scalar>(pred: &ScalarMap<T>, target: &ScalarMap<T>) -> Result<T> {
    pred.check_shape(target)?;
    let lo = T::lit(BCE_CLAMP);
    let hi = T::one() - lo;
    let total = pred
        .values()
        .iter()
        .zip(target.values())
        .fold(0.0f64, |acc, (&p, &t)| {
            let p = p.max(lo).min(hi);
            let term = -(t * p.ln() + (T::one() - t) * (T::one() - p).ln());
            acc + term.as_f64()
        });
    Ok(T::lit(total / pred.len() as f64))
}

/// Combined objective `ce + weight * bce` for the distillation head.
///
/// No default weight is provided; callers must choose one explicitly.
pub fn distillation_objective<T: Scalar>(cross_entropy: T, bce: T, weight: T) -> T {
    cross_entropy + weight * bce
}

/// Mean over the centred rectangle covering `fraction` of the area.
///
/// Side lengths are `round(W * sqrt(fraction))` and `round(H * sqrt(fraction))`,
/// clamped to at least one pixel; odd leftovers put the extra pixel after the region.
pub fn center_area_mean<T: Scalar>(map: &ScalarMap<T>, fraction: f64) -> Result<T> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "fraction must be in (0, 1], got {fraction}"
        )));
    }
    let (x0, y0, rw, rh) = center_region(map.width(), map.height(), fraction);
    let mut sum = 0.0f64;
    for y in y0..y0 + rh {
        for x in x0..x0 + rw {
            sum += map.get(x, y).as_f64();
        }
    }
    Ok(T::lit(sum / (rw * rh) as f64))
}

/// `(x0, y0, width, height)` of the centred region used by [`center_area_mean`].
pub fn center_region(width: usize, height: usize, fraction: f64) -> (usize, usize, usize, usize) {
    let side = fraction.sqrt();
    let rw = ((width as f64 * side).round() as usize).clamp(1, width);
    let rh = ((height as f64 * side).round() as usize).clamp(1, height);
    ((width - rw) / 2, (height - rh) / 2, rw, rh)
}
