//! Image planes, decoding/encoding, dataset manifests and synthetic distortions.

mod codec;
mod corpus;
mod distort;
mod manifest;
mod plane;
pub mod synth;

pub use codec::{decode_image, encode_image, encode_plane, load_image, save_image, save_plane};
pub use corpus::{build_corpus, build_corpus_with, corpus_seed, CorpusSpec};
pub(crate) use distort::convolve_separable;
pub use distort::{apply_distortion, gaussian_kernel, DistortionKind, LEVELS};
pub use manifest::{
    read_manifest, write_manifest, DatasetManifest, ManifestEntry, MANIFEST_HEADER,
};
pub use plane::{rgb_to_ycbcr, ycbcr_to_rgb, ColorImage, ImagePlane};
