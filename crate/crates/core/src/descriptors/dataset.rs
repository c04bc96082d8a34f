//! Flat binary training tables.
//!
//! ```text
//! magic   "NRIQADS1"                      8 bytes
//! F       u32 LE                          descriptor length
//! count   u64 LE
//! records count x (F + 1) f32 LE          descriptor, then target y
//! edges   u32 LE n, then n x f64 LE       stratum edges (trailer)
//! ```
//!
//! Bins are not stored; they are recomputed from the edges on load.

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::labels::{check_edges, quantize};
use super::sampling::LabeledSample;
use crate::error::{Error, Result};

pub const DATASET_MAGIC: &[u8; 8] = b"NRIQADS1";

pub fn encode_samples(samples: &[LabeledSample], edges: &[f64]) -> Result<Vec<u8>> {
    let f = samples.first().map_or(0, |s| s.x.len());
    if let Some(bad) = samples.iter().find(|s| s.x.len() != f) {
        return Err(Error::LengthMismatch {
            expected: f,
            got: bad.x.len(),
        });
    }
    let mut out = Vec::with_capacity(24 + samples.len() * (f + 1) * 4 + 4 + edges.len() * 8);
    out.extend_from_slice(DATASET_MAGIC);
    out.write_u32::<LittleEndian>(f as u32).expect("vec write");
    out.write_u64::<LittleEndian>(samples.len() as u64)
        .expect("vec write");
    for s in samples {
        for &v in &s.x {
            out.write_f32::<LittleEndian>(v).expect("vec write");
        }
        out.write_f32::<LittleEndian>(s.y).expect("vec write");
    }
    out.write_u32::<LittleEndian>(edges.len() as u32)
        .expect("vec write");
    for &e in edges {
        out.write_f64::<LittleEndian>(e).expect("vec write");
    }
    Ok(out)
}

/// Returns the samples (bins recomputed) and the stored edges.
pub fn decode_samples(bytes: &[u8]) -> Result<(Vec<LabeledSample>, Vec<f64>)> {
    let bad = |r: &str| Error::format("training set", r.to_string());
    if bytes.len() < 20 || &bytes[..8] != DATASET_MAGIC {
        return Err(bad("missing NRIQADS1 header"));
    }
    let mut cur = &bytes[8..];
    let f = cur
        .read_u32::<LittleEndian>()
        .map_err(|_| bad("truncated header"))? as usize;
    let count = cur
        .read_u64::<LittleEndian>()
        .map_err(|_| bad("truncated header"))? as usize;
    let need = count
        .checked_mul(f + 1)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| bad("record count overflows"))?;
    if cur.len() < need + 4 {
        return Err(bad("truncated records"));
    }
    let mut raw = Vec::with_capacity(count);
    for _ in 0..count {
        let mut x = vec![0.0f32; f];
        cur.read_f32_into::<LittleEndian>(&mut x)
            .map_err(|_| bad("truncated records"))?;
        let y = cur
            .read_f32::<LittleEndian>()
            .map_err(|_| bad("truncated records"))?;
        raw.push((x, y));
    }
    let n_edges = cur
        .read_u32::<LittleEndian>()
        .map_err(|_| bad("missing edges"))? as usize;
    if cur.len() != n_edges * 8 {
        return Err(bad("edge trailer length mismatch"));
    }
    let mut edges = vec![0.0f64; n_edges];
    cur.read_f64_into::<LittleEndian>(&mut edges)
        .map_err(|_| bad("missing edges"))?;
    check_edges(&edges)?;
    let samples = raw
        .into_iter()
        .map(|(x, y)| LabeledSample {
            x,
            y,
            bin: quantize(y as f64, &edges),
        })
        .collect();
    Ok((samples, edges))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn round_trip(
            rows in proptest::collection::vec((proptest::collection::vec(-1e3f32..1e3, 5), 0f32..10.0), 0..40),
        ) {
            let edges = [0.5, 2.0, 7.5];
            let samples: Vec<LabeledSample> = rows.into_iter()
                .map(|(x, y)| LabeledSample { x, y, bin: quantize(y as f64, &edges) })
                .collect();
            let bytes = encode_samples(&samples, &edges).unwrap();
            let (back, e) = decode_samples(&bytes).unwrap();
            prop_assert_eq!(e, edges.to_vec());
            prop_assert_eq!(back, samples);
        }
    }

    #[test]
    fn truncation_detected() {
        let s = vec![LabeledSample {
            x: vec![1.0, 2.0],
            y: 0.5,
            bin: 0,
        }];
        let bytes = encode_samples(&s, &[1.0]).unwrap();
        for cut in [4, 19, 25, bytes.len() - 1] {
            assert!(decode_samples(&bytes[..cut]).is_err(), "cut {cut}");
        }
    }
}
