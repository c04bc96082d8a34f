//! Extremely randomized regression trees.
//!
//! At each node up to `k` features are tried, taken in random order among
//! those not constant on the node. Each gets one threshold drawn uniformly
//! between its node minimum and maximum. The candidate with the largest
//! variance reduction wins. A node becomes a leaf when it is pure, too
//! small to split (`< 2 * min_leaf`), at `max_depth`, or when no candidate
//! leaves `min_leaf` samples on both sides.

use rand::Rng;

pub const LEAF_MARKER: u16 = u16::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    Split {
        feature: u16,
        threshold: f32,
        left: u32,
        right: u32,
    },
    Leaf {
        value: f32,
        count: u32,
        leaf_id: u32,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub(crate) nodes: Vec<Node>,
    pub(crate) n_leaves: u32,
}

impl Tree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn n_leaves(&self) -> u32 {
        self.n_leaves
    }

    /// Rebuild from a node array, assigning leaf ids in node order.
    pub(crate) fn from_nodes(mut nodes: Vec<Node>) -> Self {
        let mut next = 0u32;
        for n in &mut nodes {
            if let Node::Leaf { leaf_id, .. } = n {
                *leaf_id = next;
                next += 1;
            }
        }
        Self {
            nodes,
            n_leaves: next,
        }
    }

    /// Route a standardized descriptor; `x[f] < threshold` goes left.
    #[inline]
    pub fn leaf(&self, x: &[f32]) -> (f32, u32) {
        let mut i = 0usize;
        loop {
            match self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x[feature as usize] < threshold {
                        left as usize
                    } else {
                        right as usize
                    };
                }
                Node::Leaf { value, leaf_id, .. } => return (value, leaf_id),
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Split { left, right, .. } => {
                    1 + go(nodes, left as usize).max(go(nodes, right as usize))
                }
                Node::Leaf { .. } => 0,
            }
        }
        go(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TreeParams {
    pub k_candidates: usize,
    pub min_leaf: usize,
    pub max_depth: usize,
}

/// Row-major standardized design matrix.
pub(crate) struct Design<'a> {
    pub x: &'a [f32],
    pub y: &'a [f32],
    pub dim: usize,
}

impl Design<'_> {
    #[inline]
    fn at(&self, row: u32, f: usize) -> f32 {
        self.x[row as usize * self.dim + f]
    }
}

/// Variance reduction of splitting `n` targets with sum `total` into a left
/// part (`n_left`, `sum_left`) and the rest. Nonnegative up to rounding.
#[inline]
pub fn split_score(sum_left: f64, n_left: usize, total: f64, n: usize) -> f64 {
    let n_right = n - n_left;
    let sum_right = total - sum_left;
    sum_left * sum_left / n_left as f64 + sum_right * sum_right / n_right as f64
        - total * total / n as f64
}

pub(crate) fn grow<R: Rng>(data: &Design<'_>, params: TreeParams, rng: &mut R) -> Tree {
    let mut idx: Vec<u32> = (0..data.y.len() as u32).collect();
    let mut nodes = Vec::new();
    let mut order: Vec<usize> = (0..data.dim).collect();
    build(data, params, rng, &mut idx, 0, &mut nodes, &mut order);
    Tree::from_nodes(nodes)
}

fn build<R: Rng>(
    data: &Design<'_>,
    params: TreeParams,
    rng: &mut R,
    idx: &mut [u32],
    depth: usize,
    nodes: &mut Vec<Node>,
    order: &mut [usize],
) -> u32 {
    let here = nodes.len() as u32;
    let n = idx.len();
    let total: f64 = idx.iter().map(|&i| data.y[i as usize] as f64).sum();
    let leaf = |nodes: &mut Vec<Node>| {
        nodes.push(Node::Leaf {
            value: (total / n as f64) as f32,
            count: n as u32,
            leaf_id: 0,
        });
        here
    };
    let first = data.y[idx[0] as usize];
    let pure = idx.iter().all(|&i| data.y[i as usize] == first);
    if pure || n < 2 * params.min_leaf || depth >= params.max_depth {
        return leaf(nodes);
    }

    // Partial Fisher-Yates: features are visited in random order until k
    // non-constant ones have been tried.
    let mut best: Option<(f64, usize, f32)> = None;
    let mut tried = 0usize;
    for slot in 0..order.len() {
        if tried == params.k_candidates {
            break;
        }
        let pick = rng.random_range(slot..order.len());
        order.swap(slot, pick);
        let f = order[slot];
        let (lo, hi) = idx
            .iter()
            .fold((f32::INFINITY, f32::NEG_INFINITY), |(a, b), &i| {
                let v = data.at(i, f);
                (a.min(v), b.max(v))
            });
        if lo >= hi {
            continue;
        }
        tried += 1;
        let u: f64 = rng.random();
        let threshold = (lo as f64 + u * (hi as f64 - lo as f64)) as f32;
        let (mut n_left, mut sum_left) = (0usize, 0.0f64);
        for &i in idx.iter() {
            if data.at(i, f) < threshold {
                n_left += 1;
                sum_left += data.y[i as usize] as f64;
            }
        }
        if n_left < params.min_leaf || n - n_left < params.min_leaf {
            continue;
        }
        let score = split_score(sum_left, n_left, total, n);
        if best.is_none_or(|(s, _, _)| score > s) {
            best = Some((score, f, threshold));
        }
    }
    let Some((_, feature, threshold)) = best else {
        return leaf(nodes);
    };

    let mut split = 0usize;
    for j in 0..n {
        if data.at(idx[j], feature) < threshold {
            idx.swap(split, j);
            split += 1;
        }
    }
    nodes.push(Node::Split {
        feature: feature as u16,
        threshold,
        left: 0,
        right: 0,
    });
    let (l, r) = idx.split_at_mut(split);
    let left = build(data, params, rng, l, depth + 1, nodes, order);
    let right = build(data, params, rng, r, depth + 1, nodes, order);
    nodes[here as usize] = Node::Split {
        feature: feature as u16,
        threshold,
        left,
        right,
    };
    here
}
