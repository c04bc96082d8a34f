//! Forest model files.
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! magic        "NRIQA1"                       6 bytes
//! config       n_trees u32, k_candidates u32, min_leaf u32, max_depth u32, seed u64
//! meta         F u32, M u32, L u32, filter u8 (0 haar, 1 db2),
//!              kind u8 (distortion code, 0xFF pooled), g_sigma f64,
//!              n_edges u32, edges n_edges x f64,
//!              means F x f32, stds F x f32
//! trees        n_trees times:
//!                n_nodes u32, then n_nodes nodes
//! node         feature u16
//!                feature != 0xFFFF: threshold f32, left u32, right u32
//!                feature == 0xFFFF: value f32, count u32
//! ```
//!
//! Node 0 is the root. Children always have larger indices than their
//! parent; leaf ids are assigned in node order.

use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use sha2::{Digest, Sha256};

use super::forest::{DescriptorMeta, ForestConfig, ForestModel};
use super::tree::{Node, Tree, LEAF_MARKER};
use crate::error::{Error, Result};
use crate::imgio::DistortionKind;
use crate::wavelet::WaveletFilter;

pub const MODEL_MAGIC: &[u8; 6] = b"NRIQA1";
const MAGIC_STEM: &[u8; 5] = b"NRIQA";
const POOLED: u8 = 0xFF;

pub fn encode_model(model: &ForestModel) -> Vec<u8> {
    let mut out = Vec::new();
    let w = &mut out;
    w.extend_from_slice(MODEL_MAGIC);
    let c = &model.config;
    w.write_u32::<LittleEndian>(model.trees.len() as u32)
        .expect("vec write");
    w.write_u32::<LittleEndian>(c.k_candidates.unwrap_or(0) as u32)
        .expect("vec write");
    w.write_u32::<LittleEndian>(c.min_leaf as u32)
        .expect("vec write");
    w.write_u32::<LittleEndian>(c.max_depth as u32)
        .expect("vec write");
    w.write_u64::<LittleEndian>(c.seed).expect("vec write");

    let m = &model.meta;
    w.write_u32::<LittleEndian>(m.feature_dim as u32)
        .expect("vec write");
    w.write_u32::<LittleEndian>(m.vector_len as u32)
        .expect("vec write");
    w.write_u32::<LittleEndian>(m.levels as u32)
        .expect("vec write");
    w.write_u8(m.filter.code()).expect("vec write");
    w.write_u8(m.kind.map_or(POOLED, DistortionKind::code))
        .expect("vec write");
    w.write_f64::<LittleEndian>(m.g_sigma).expect("vec write");
    w.write_u32::<LittleEndian>(m.edges.len() as u32)
        .expect("vec write");
    for &e in &m.edges {
        w.write_f64::<LittleEndian>(e).expect("vec write");
    }
    for &v in m.means.iter().chain(&m.stds) {
        w.write_f32::<LittleEndian>(v).expect("vec write");
    }

    for tree in &model.trees {
        w.write_u32::<LittleEndian>(tree.nodes().len() as u32)
            .expect("vec write");
        for node in tree.nodes() {
            match *node {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    w.write_u16::<LittleEndian>(feature).expect("vec write");
                    w.write_f32::<LittleEndian>(threshold).expect("vec write");
                    w.write_u32::<LittleEndian>(left).expect("vec write");
                    w.write_u32::<LittleEndian>(right).expect("vec write");
                }
                Node::Leaf { value, count, .. } => {
                    w.write_u16::<LittleEndian>(LEAF_MARKER).expect("vec write");
                    w.write_f32::<LittleEndian>(value).expect("vec write");
                    w.write_u32::<LittleEndian>(count).expect("vec write");
                }
            }
        }
    }
    out
}

fn bad(reason: impl Into<String>) -> Error {
    Error::format("model", reason)
}

fn truncated(_: std::io::Error) -> Error {
    bad("truncated")
}

pub fn decode_model(bytes: &[u8]) -> Result<ForestModel> {
    if bytes.len() < MODEL_MAGIC.len() || &bytes[..5] != MAGIC_STEM {
        return Err(bad("missing NRIQA header"));
    }
    if &bytes[..6] != MODEL_MAGIC {
        return Err(Error::UnsupportedVersion {
            what: "model",
            tag: String::from_utf8_lossy(&bytes[..6]).into_owned(),
        });
    }
    let mut r = &bytes[6..];
    let n_trees = r.read_u32::<LittleEndian>().map_err(truncated)? as usize;
    let k = r.read_u32::<LittleEndian>().map_err(truncated)? as usize;
    let min_leaf = r.read_u32::<LittleEndian>().map_err(truncated)? as usize;
    let max_depth = r.read_u32::<LittleEndian>().map_err(truncated)? as usize;
    let seed = r.read_u64::<LittleEndian>().map_err(truncated)?;
    let config = ForestConfig {
        n_trees,
        k_candidates: Some(k),
        min_leaf,
        max_depth,
        seed,
    };

    let feature_dim = r.read_u32::<LittleEndian>().map_err(truncated)? as usize;
    let vector_len = r.read_u32::<LittleEndian>().map_err(truncated)? as usize;
    let levels = r.read_u32::<LittleEndian>().map_err(truncated)? as usize;
    let filter = WaveletFilter::from_code(r.read_u8().map_err(truncated)?)
        .ok_or_else(|| bad("unknown wavelet filter code"))?;
    let kind = match r.read_u8().map_err(truncated)? {
        POOLED => None,
        c => Some(DistortionKind::from_code(c).ok_or_else(|| bad("unknown distortion code"))?),
    };
    let g_sigma = r.read_f64::<LittleEndian>().map_err(truncated)?;
    let n_edges = r.read_u32::<LittleEndian>().map_err(truncated)? as usize;
    if r.len() < n_edges * 8 + feature_dim * 8 {
        return Err(bad("truncated"));
    }
    let mut edges = vec![0.0; n_edges];
    r.read_f64_into::<LittleEndian>(&mut edges)
        .map_err(truncated)?;
    let mut means = vec![0.0; feature_dim];
    let mut stds = vec![0.0; feature_dim];
    r.read_f32_into::<LittleEndian>(&mut means)
        .map_err(truncated)?;
    r.read_f32_into::<LittleEndian>(&mut stds)
        .map_err(truncated)?;
    let k = config.validate(feature_dim)?;
    if k != config.k_candidates.unwrap_or(0) {
        return Err(bad("inconsistent k_candidates"));
    }

    let mut trees = Vec::with_capacity(n_trees.min(1 << 16));
    for t in 0..n_trees {
        let n_nodes = r.read_u32::<LittleEndian>().map_err(truncated)? as usize;
        if n_nodes == 0 || r.len() < n_nodes * 10 {
            return Err(bad(format!("tree {t}: truncated or empty")));
        }
        let mut nodes = Vec::with_capacity(n_nodes);
        for i in 0..n_nodes {
            let feature = r.read_u16::<LittleEndian>().map_err(truncated)?;
            let value = r.read_f32::<LittleEndian>().map_err(truncated)?;
            if feature == LEAF_MARKER {
                let count = r.read_u32::<LittleEndian>().map_err(truncated)?;
                nodes.push(Node::Leaf {
                    value,
                    count,
                    leaf_id: 0,
                });
            } else {
                let left = r.read_u32::<LittleEndian>().map_err(truncated)?;
                let right = r.read_u32::<LittleEndian>().map_err(truncated)?;
                let ok = (feature as usize) < feature_dim
                    && (left as usize) > i
                    && (right as usize) > i
                    && (left as usize) < n_nodes
                    && (right as usize) < n_nodes;
                if !ok {
                    return Err(bad(format!("tree {t}: node {i} has invalid links")));
                }
                nodes.push(Node::Split {
                    feature,
                    threshold: value,
                    left,
                    right,
                });
            }
        }
        trees.push(Tree::from_nodes(nodes));
    }
    if !r.is_empty() {
        return Err(bad(format!("{} trailing bytes", r.len())));
    }
    Ok(ForestModel {
        config,
        meta: DescriptorMeta {
            feature_dim,
            vector_len,
            levels,
            filter,
            g_sigma,
            edges,
            kind,
            means,
            stds,
        },
        trees,
    })
}

/// Content hash of an encoded model: the first 16 hex digits of its SHA-256.
pub fn model_id_of_bytes(bytes: &[u8]) -> String {
    hex::encode(&Sha256::digest(bytes)[..8])
}

pub fn model_id(model: &ForestModel) -> String {
    model_id_of_bytes(&encode_model(model))
}

pub fn save_model(model: &ForestModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_model(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ForestModel> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_model(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptors::LabeledSample;
    use crate::learn::train_forest;

    fn model() -> ForestModel {
        let s: Vec<_> = (0..200)
            .map(|i| {
                let a = (i * 37 % 200) as f32 / 200.0;
                let b = (i * 91 % 200) as f32 / 200.0;
                LabeledSample {
                    x: vec![a, b, 0.5],
                    y: a * a + b,
                    bin: 0,
                }
            })
            .collect();
        let cfg = ForestConfig {
            n_trees: 7,
            ..Default::default()
        };
        train_forest(&s, &cfg).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let m = model();
        let bytes = encode_model(&m);
        let back = decode_model(&bytes).unwrap();
        assert_eq!(back, m);
        assert_eq!(encode_model(&back), bytes);
        assert_eq!(model_id(&back), model_id(&m));
        assert_eq!(model_id(&m).len(), 16);
    }

    #[test]
    fn every_truncation_fails() {
        let bytes = encode_model(&model());
        for cut in 0..bytes.len() {
            assert!(decode_model(&bytes[..cut]).is_err(), "cut {cut}");
        }
        let mut longer = bytes.clone();
        longer.push(0);
        assert!(decode_model(&longer).is_err());
    }

    #[test]
    fn old_version_rejected() {
        let mut bytes = encode_model(&model());
        bytes[5] = b'0';
        assert!(matches!(
            decode_model(&bytes),
            Err(Error::UnsupportedVersion { ref tag, .. }) if tag == "NRIQA0"
        ));
        assert!(matches!(
            decode_model(b"GARBAGE!"),
            Err(Error::Format { .. })
        ));
    }
}
