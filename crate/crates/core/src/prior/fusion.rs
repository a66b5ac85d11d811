//! Five-channel input assembly and zero-initialized first-layer expansion.

use super::{PriorMaps, ScalarMap};
use crate::error::{Error, Result};
use crate::io::NormalizedFrame;
use crate::scalar::Scalar;

/// Channel-major `(C, H, W)` tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTensor<T> {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> ChannelTensor<T> {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != channels * height * width {
            return Err(Error::shape(
                format!("{channels}x{height}x{width}"),
                format!("{} values", data.len()),
            ));
        }
        Ok(Self {
            channels,
            height,
            width,
            data,
        })
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    pub fn channel(&self, c: usize) -> &[T] {
        let plane = self.height * self.width;
        &self.data[c * plane..(c + 1) * plane]
    }

    /// Copy of the leading `n` channels.
    pub fn leading_channels(&self, n: usize) -> ChannelTensor<T> {
        let n = n.min(self.channels);
        let plane = self.height * self.width;
        ChannelTensor {
            channels: n,
            height: self.height,
            width: self.width,
            data: self.data[..n * plane].to_vec(),
        }
    }

    #[inline]
    pub fn at(&self, c: usize, y: usize, x: usize) -> T {
        self.data[(c * self.height + y) * self.width + x]
    }
}

/// Stacks normalized RGB (channels 0-2) with `p_blood` (3) and `h_afi_phi` (4).
pub fn assemble_five_channel<T: Scalar>(
    norm: &NormalizedFrame<T>,
    maps: &PriorMaps<T>,
) -> Result<ChannelTensor<T>> {
    let (w, h) = (norm.width, norm.height);
    for m in [&maps.p_blood, &maps.h_afi_phi] {
        if m.width() != w || m.height() != h {
            return Err(Error::shape(
                format!("{w}x{h}"),
                format!("{}x{}", m.width(), m.height()),
            ));
        }
    }
    let plane = w * h;
    let mut data = Vec::with_capacity(5 * plane);
    for c in 0..3 {
        data.extend(norm.data.iter().skip(c).step_by(3).copied());
    }
    data.extend_from_slice(maps.p_blood.values());
    data.extend_from_slice(maps.h_afi_phi.values());
    ChannelTensor::new(5, h, w, data)
}

/// First-layer convolution weights, shape `(out, in, k, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvWeights<T> {
    pub out_channels: usize,
    pub in_channels: usize,
    pub kernel: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> ConvWeights<T> {
    pub fn new(
        out_channels: usize,
        in_channels: usize,
        kernel: usize,
        data: Vec<T>,
    ) -> Result<Self> {
        if data.len() != out_channels * in_channels * kernel * kernel {
            return Err(Error::shape(
                format!("{out_channels}x{in_channels}x{kernel}x{kernel}"),
                format!("{} values", data.len()),
            ));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite conv weight".into()));
        }
        Ok(Self {
            out_channels,
            in_channels,
            kernel,
            data,
        })
    }

    #[inline]
    pub fn at(&self, o: usize, i: usize, ky: usize, kx: usize) -> T {
        let k = self.kernel;
        self.data[((o * self.in_channels + i) * k + ky) * k + kx]
    }

    /// Weight block for input channel `i` across all output channels.
    pub fn input_slice(&self, i: usize) -> Vec<T> {
        let kk = self.kernel * self.kernel;
        (0..self.out_channels)
            .flat_map(|o| {
                let start = (o * self.in_channels + i) * kk;
                self.data[start..start + kk].iter().copied()
            })
            .collect()
    }
}

/// Widens a 3-input-channel kernel by `extra` zero-initialized input channels.
pub fn expand_first_conv_weights<T: Scalar>(
    w3: &ConvWeights<T>,
    extra: usize,
) -> Result<ConvWeights<T>> {
    if w3.in_channels != 3 {
        return Err(Error::InvalidArgument(format!(
            "expected 3 input channels, got {}",
            w3.in_channels
        )));
    }
    let kk = w3.kernel * w3.kernel;
    let in_channels = 3 + extra;
    let mut data = Vec::with_capacity(w3.out_channels * in_channels * kk);
    for o in 0..w3.out_channels {
        let start = o * 3 * kk;
        data.extend_from_slice(&w3.data[start..start + 3 * kk]);
        data.extend(std::iter::repeat_n(T::zero(), extra * kk));
    }
    ConvWeights::new(w3.out_channels, in_channels, w3.kernel, data)
}

/// Keeps only the leading `in_channels` input channels.
pub fn truncate_input_channels<T: Scalar>(
    w: &ConvWeights<T>,
    in_channels: usize,
) -> Result<ConvWeights<T>> {
    if in_channels == 0 || in_channels > w.in_channels {
        return Err(Error::InvalidArgument(format!(
            "cannot keep {in_channels} of {} input channels",
            w.in_channels
        )));
    }
    let kk = w.kernel * w.kernel;
    let mut data = Vec::with_capacity(w.out_channels * in_channels * kk);
    for o in 0..w.out_channels {
        let start = o * w.in_channels * kk;
        data.extend_from_slice(&w.data[start..start + in_channels * kk]);
    }
    ConvWeights::new(w.out_channels, in_channels, w.kernel, data)
}

/// Direct stride-`stride` 2-D convolution with symmetric zero padding.
///
/// Accumulates input channels in index order, so appending zero-weighted
/// channels leaves every output bit-identical.
pub fn conv2d<T: Scalar>(
    input: &ChannelTensor<T>,
    weights: &ConvWeights<T>,
    stride: usize,
    padding: usize,
) -> Result<ChannelTensor<T>> {
    if input.channels != weights.in_channels {
        return Err(Error::shape(
            format!("{} input channels", weights.in_channels),
            input.channels,
        ));
    }
    if stride == 0 {
        return Err(Error::InvalidArgument("stride must be >= 1".into()));
    }
    let k = weights.kernel;
    let (h, w) = (input.height + 2 * padding, input.width + 2 * padding);
    if h < k || w < k {
        return Err(Error::InvalidArgument(
            "kernel larger than padded input".into(),
        ));
    }
    let out_h = (h - k) / stride + 1;
    let out_w = (w - k) / stride + 1;
    let mut out = Vec::with_capacity(weights.out_channels * out_h * out_w);
    for o in 0..weights.out_channels {
        for oy in 0..out_h {
            for ox in 0..out_w {
                let mut acc = T::zero();
                for i in 0..input.channels {
                    for ky in 0..k {
                        let iy = (oy * stride + ky) as isize - padding as isize;
                        if iy < 0 || iy >= input.height as isize {
                            continue;
                        }
                        for kx in 0..k {
                            let ix = (ox * stride + kx) as isize - padding as isize;
                            if ix < 0 || ix >= input.width as isize {
                                continue;
                            }
                            acc = acc
                                + weights.at(o, i, ky, kx) * input.at(i, iy as usize, ix as usize);
                        }
                    }
                }
                out.push(acc);
            }
        }
    }
    ChannelTensor::new(weights.out_channels, out_h, out_w, out)
}

/// Convenience view of a single map as a one-channel tensor.
pub fn map_as_tensor<T: Scalar>(map: &ScalarMap<T>) -> ChannelTensor<T> {
    ChannelTensor {
        channels: 1,
        height: map.height(),
        width: map.width(),
        data: map.values().to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn weights(out: usize, k: usize) -> ConvWeights<f64> {
        let n = out * 3 * k * k;
        ConvWeights::new(out, 3, k, (0..n).map(|i| (i as f64 * 0.37).sin()).collect()).unwrap()
    }

    #[test]
    fn expansion_zero_fills_new_slices() {
        let w3 = weights(4, 3);
        let w5 = expand_first_conv_weights(&w3, 2).unwrap();
        assert_eq!(w5.in_channels, 5);
        for i in 0..3 {
            assert_eq!(w5.input_slice(i), w3.input_slice(i));
        }
        let extra: f64 = (3..5).flat_map(|i| w5.input_slice(i)).map(f64::abs).sum();
        assert_eq!(extra, 0.0);
        assert_eq!(truncate_input_channels(&w5, 3).unwrap(), w3);
    }

    #[test]
    fn expansion_requires_three_inputs() {
        let w5 = expand_first_conv_weights(&weights(2, 1), 2).unwrap();
        assert!(expand_first_conv_weights(&w5, 2).is_err());
    }

    #[test]
    fn conv_matches_hand_computation() {
        // single 2x2 input, 1x1 kernel per channel
        let input = ChannelTensor::new(3, 1, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let w = ConvWeights::new(1, 3, 1, vec![1.0, 10.0, 100.0]).unwrap();
        let out = conv2d(&input, &w, 1, 0).unwrap();
        assert_eq!(out.data, vec![1.0 + 30.0 + 500.0, 2.0 + 40.0 + 600.0]);
    }

    #[test]
    fn conv_padding_and_stride_shape() {
        let input = ChannelTensor::new(3, 7, 6, vec![0.5; 3 * 42]).unwrap();
        let out = conv2d(&input, &weights(2, 3), 2, 1).unwrap();
        assert_eq!(out.shape(), (2, 4, 3));
    }
}
