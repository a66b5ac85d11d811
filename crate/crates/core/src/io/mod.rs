//! Image decoding, channel normalization and prediction-dump file formats.

mod frame;
mod predictions;

pub use frame::{
    decode_image, encode_png, imagenet_denormalize, imagenet_normalize, load_image,
    NormalizationConstants, NormalizedFrame, RgbFrame, IMAGENET,
};
pub use predictions::{
    load_predictions, parse_predictions, write_predictions, DumpFormat, PredictionRecord,
    PredictionSet, ScoreKind,
};
