//! Set, bag and sequence similarity measures over n-gram representations.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

/// `|A ∩ B| / |A ∪ B|`, 0 when both are empty.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// `|A ∩ B| / |A|`, directed from `a`; 0 when `a` is empty.
pub fn containment<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.intersection(b).count() as f64 / a.len() as f64
}

pub fn counts<T: Ord + Clone>(items: &[T]) -> BTreeMap<T, usize> {
    let mut m = BTreeMap::new();
    for it in items {
        *m.entry(it.clone()).or_insert(0) += 1;
    }
    m
}

/// Cosine of the two count vectors; 0 if either is empty.
pub fn cosine<T: Ord>(a: &BTreeMap<T, usize>, b: &BTreeMap<T, usize>) -> f64 {
    let norm = |m: &BTreeMap<T, usize>| libm::sqrt(m.values().map(|&c| (c * c) as f64).sum());
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let dot: f64 = a
        .iter()
        .filter_map(|(k, &ca)| b.get(k).map(|&cb| (ca * cb) as f64))
        .sum();
    dot / (na * nb)
}

pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Longest common subsequence length over `max(|a|, |b|)`; 0 if either is empty.
pub fn lcs_sim<T: PartialEq>(a: &[T], b: &[T]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    lcs_len(a, b) as f64 / a.len().max(b.len()) as f64
}

/// A matched tile: start in `a`, start in `b`, length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tile {
    pub a_start: usize,
    pub b_start: usize,
    pub len: usize,
}

/// Greedy string tiling: repeatedly marks the longest common run of
/// unmarked items (earliest in `a`, then in `b`, on ties) until no run of at
/// least `min_match` items remains.
pub fn greedy_tiles<T: PartialEq>(a: &[T], b: &[T], min_match: usize) -> Vec<Tile> {
    let min_match = min_match.max(1);
    let mut marked_a = vec![false; a.len()];
    let mut marked_b = vec![false; b.len()];
    let mut tiles = Vec::new();
    let mut run = vec![0usize; (a.len() + 1) * (b.len() + 1)];
    let w = b.len() + 1;
    loop {
        let mut best: Option<Tile> = None;
        for i in 0..a.len() {
            for j in 0..b.len() {
                let l = if !marked_a[i] && !marked_b[j] && a[i] == b[j] { run[i * w + j] + 1 } else { 0 };
                run[(i + 1) * w + j + 1] = l;
                if l >= min_match && best.is_none_or(|t| l > t.len) {
                    best = Some(Tile { a_start: i + 1 - l, b_start: j + 1 - l, len: l });
                }
            }
        }
        let Some(tile) = best else { break };
        marked_a[tile.a_start..tile.a_start + tile.len].fill(true);
        marked_b[tile.b_start..tile.b_start + tile.len].fill(true);
        tiles.push(tile);
    }
    tiles
}

/// `2 * tiled / (|a| + |b|)`; 0 if either is empty.
pub fn gst_sim<T: PartialEq>(a: &[T], b: &[T], min_match: usize) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let tiled: usize = greedy_tiles(a, b, min_match).iter().map(|t| t.len).sum();
    2.0 * tiled as f64 / (a.len() + b.len()) as f64
}
