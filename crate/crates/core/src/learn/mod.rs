//! Extremely randomized regression trees over pixel descriptors, the
//! leaf-index codebook they induce, the forest kernel, and a kernel ridge
//! regressor for image-level scores.

mod forest;
mod kernel;
mod persist;
mod tree;

pub use forest::{
    forest_kernel, leaf_signature, predict_forest, train_forest, train_forest_set,
    train_forest_with_meta, DescriptorMeta, ForestConfig, ForestModel,
};
pub use kernel::{
    solve_kernel_ridge, train_kernel_scorer, ImageSignature, KernelModel, MIN_SCORER_IMAGES,
};
pub use persist::{
    decode_model, encode_model, load_model, model_id, model_id_of_bytes, save_model, MODEL_MAGIC,
};
pub use tree::{split_score, Node, Tree};
