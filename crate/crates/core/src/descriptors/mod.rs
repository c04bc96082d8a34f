//! Labeled per-pixel training records built from distorted images and their
//! full-reference distortion maps.

mod dataset;
mod labels;
mod pixel;
mod sampling;

pub use dataset::{decode_samples, encode_samples, DATASET_MAGIC};
pub use labels::{check_edges, label_pixels, quantile_edges, quantize, PixelLabels};
pub use pixel::{
    describe_into, describe_pixel, feature_dim, PixelDescriptor, COLOR_DIM, NEIGH_DIM,
};
pub use sampling::{
    sample_image, sample_training_set, stratified_indices, LabeledSample, SamplingPolicy,
    TrainingMeta, TrainingSet,
};
