//! Files written by the `prior` subcommand.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::write_file;
use crate::error::{Error, Result};
use crate::io::{encode_png, imagenet_normalize, RgbFrame, IMAGENET};
use crate::prior::{assemble_five_channel, center_area_mean, PriorMaps, ScalarMap};
use crate::scalar::Scalar;

const IMAGE_EXTENSIONS: [&str; 4] = ["png", "jpg", "jpeg", "bmp"];

/// Image files directly inside `dir`, sorted by name.
pub fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        })
        .collect();
    files.sort();
    Ok(files)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorFrameSummary {
    pub source: String,
    pub stem: String,
    pub width: usize,
    pub height: usize,
    pub p_blood_min: f64,
    pub p_blood_max: f64,
    pub p_blood_center_mean: f64,
    pub files: Vec<String>,
}

fn f32_le<T: Scalar>(values: impl IntoIterator<Item = T>) -> Vec<u8> {
    values
        .into_iter()
        .flat_map(|v| (v.as_f64() as f32).to_le_bytes())
        .collect()
}

fn gray_png<T: Scalar>(map: &ScalarMap<T>, lo: f64, hi: f64) -> Result<Vec<u8>> {
    let span = if hi > lo { hi - lo } else { 1.0 };
    let frame = RgbFrame::<f64>::from_fn(map.width(), map.height(), |x, y| {
        let v = ((map.get(x, y).as_f64() - lo) / span).clamp(0.0, 1.0);
        [v, v, v]
    })?;
    encode_png(&frame)
}

/// Red tint proportional to `p_blood` over the input frame.
fn overlay_png<T: Scalar>(frame: &RgbFrame<T>, p: &ScalarMap<T>) -> Result<Vec<u8>> {
    let out = RgbFrame::<f64>::from_fn(frame.width(), frame.height(), |x, y| {
        let a = 0.6 * p.get(x, y).as_f64().clamp(0.0, 1.0);
        let [r, g, b] = frame.pixel(x, y).map(|c| c.as_f64());
        [r * (1.0 - a) + a, g * (1.0 - a), b * (1.0 - a)]
    })?;
    encode_png(&out)
}

/// Writes raw `f32` little-endian row-major grids (`.f32`), the CHW
/// five-channel network input, and 8-bit PNG previews for one frame.
pub fn write_prior_outputs<T: Scalar>(
    source: &Path,
    frame: &RgbFrame<T>,
    maps: &PriorMaps<T>,
    out: &Path,
) -> Result<PriorFrameSummary> {
    let stem = source
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "frame".into());
    let mut files = Vec::new();
    let mut put = |name: String, bytes: Vec<u8>| -> Result<()> {
        write_file(out, &name, bytes)?;
        files.push(name);
        Ok(())
    };
    for (name, map) in [
        ("h_norm", &maps.h_norm),
        ("phi", &maps.phi),
        ("p_blood", &maps.p_blood),
        ("h_afi_phi", &maps.h_afi_phi),
    ] {
        put(
            format!("{stem}.{name}.f32"),
            f32_le(map.values().iter().copied()),
        )?;
    }
    let input = assemble_five_channel(&imagenet_normalize(frame, &IMAGENET), maps)?;
    put(
        format!("{stem}.input5.f32"),
        f32_le(input.data.iter().copied()),
    )?;
    put(
        format!("{stem}.p_blood.png"),
        gray_png(&maps.p_blood, 0.0, 1.0)?,
    )?;
    let (lo, hi) = maps.h_afi_phi.min_max();
    put(
        format!("{stem}.h_afi_phi.png"),
        gray_png(&maps.h_afi_phi, lo.as_f64(), hi.as_f64())?,
    )?;
    put(
        format!("{stem}.overlay.png"),
        overlay_png(frame, &maps.p_blood)?,
    )?;
    let (pmin, pmax) = maps.p_blood.min_max();
    Ok(PriorFrameSummary {
        source: source.display().to_string(),
        stem,
        width: frame.width(),
        height: frame.height(),
        p_blood_min: pmin.as_f64(),
        p_blood_max: pmax.as_f64(),
        p_blood_center_mean: center_area_mean(&maps.p_blood, 0.5)?.as_f64(),
        files,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prior::{compute_prior_maps, PriorParams, PriorVersion};

    #[test]
    fn writes_grids_of_the_right_size() {
        let dir = tempfile::tempdir().unwrap();
        let frame =
            RgbFrame::<f64>::from_fn(8, 6, |x, y| [x as f64 / 8.0, y as f64 / 6.0, 0.2]).unwrap();
        let maps = compute_prior_maps(&frame, &PriorParams::default(), PriorVersion::V1).unwrap();
        let s = write_prior_outputs(Path::new("in/abc.png"), &frame, &maps, dir.path()).unwrap();
        assert_eq!(s.stem, "abc");
        assert_eq!(
            std::fs::metadata(dir.path().join("abc.p_blood.f32"))
                .unwrap()
                .len(),
            8 * 6 * 4
        );
        assert_eq!(
            std::fs::metadata(dir.path().join("abc.input5.f32"))
                .unwrap()
                .len(),
            5 * 8 * 6 * 4
        );
        let bytes = std::fs::read(dir.path().join("abc.phi.f32")).unwrap();
        let first = f32::from_le_bytes(bytes[..4].try_into().unwrap());
        assert_eq!(first, maps.phi.get(0, 0) as f32);
        let png: RgbFrame<f64> =
            crate::io::load_image(&dir.path().join("abc.overlay.png")).unwrap();
        assert_eq!((png.width(), png.height()), (8, 6));
    }
}
