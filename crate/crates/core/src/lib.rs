//! Analytic hemoglobin/fluence priors for capsule-endoscopy frames, a
//! class-aware video-level dataset splitter, and the evaluation and
//! significance-testing toolkit used to compare classifier runs.
//!
//! Image-side code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common choices.

pub mod classes;
pub mod error;
pub mod io;
pub mod json;
pub mod metrics;
pub mod prior;
pub mod report;
pub mod scalar;
pub mod split;
pub mod stats;

pub use classes::{class_index, class_name, ClassSet, CLASS_NAMES, NUM_CLASSES, TRAINING_ONLY};
pub use error::{Error, Result};
pub use scalar::Scalar;

pub type RgbFrameF64 = io::RgbFrame<f64>;
pub type RgbFrameF32 = io::RgbFrame<f32>;
pub type ScalarMapF64 = prior::ScalarMap<f64>;
pub type ScalarMapF32 = prior::ScalarMap<f32>;
pub type PriorMapsF64 = prior::PriorMaps<f64>;
pub type PriorMapsF32 = prior::PriorMaps<f32>;
pub type ChannelTensorF64 = prior::ChannelTensor<f64>;
pub type ChannelTensorF32 = prior::ChannelTensor<f32>;
pub type ConvWeightsF64 = prior::ConvWeights<f64>;
pub type ConvWeightsF32 = prior::ConvWeights<f32>;
