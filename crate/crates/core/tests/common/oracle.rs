//! Exponential-time reference implementations. They share no code with the
//! library beyond the tree type and are only usable on small inputs.

use std::collections::BTreeMap;

use qrerank_core::SyntaxTree;

fn all_nodes(t: &SyntaxTree) -> Vec<&SyntaxTree> {
    let mut out = vec![t];
    for c in t.children() {
        out.extend(all_nodes(c));
    }
    out
}

/// Subset-tree fragments rooted at `n`, as canonical strings paired with
/// the number of expanded (production-carrying) nodes.
fn subset_fragments(n: &SyntaxTree) -> Vec<(String, u32)> {
    if n.is_leaf() {
        return Vec::new();
    }
    let mut partial: Vec<(Vec<String>, u32)> = vec![(Vec::new(), 1)];
    for c in n.children() {
        let mut options = vec![(c.label().to_string(), 0)];
        options.extend(subset_fragments(c));
        let mut next = Vec::new();
        for (parts, size) in &partial {
            for (s, k) in &options {
                let mut p = parts.clone();
                p.push(s.clone());
                next.push((p, size + k));
            }
        }
        partial = next;
    }
    partial
        .into_iter()
        .map(|(parts, size)| (format!("({} {})", n.label(), parts.join(" ")), size))
        .collect()
}

fn subset_bag(t: &SyntaxTree) -> BTreeMap<String, (u64, u32)> {
    let mut bag = BTreeMap::new();
    for n in all_nodes(t) {
        for (f, size) in subset_fragments(n) {
            bag.entry(f).or_insert((0, size)).0 += 1;
        }
    }
    bag
}

/// `sum_f count_1(f) count_2(f) lambda^size(f)` over shared subset trees.
pub fn stk_oracle(t1: &SyntaxTree, t2: &SyntaxTree, lambda: f64) -> f64 {
    let b1 = subset_bag(t1);
    let b2 = subset_bag(t2);
    b1.iter()
        .filter_map(|(f, &(c1, size))| b2.get(f).map(|&(c2, _)| (c1 * c2) as f64 * lambda.powi(size as i32)))
        .sum()
}

fn index_subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (1u32..(1 << n)).map(move |mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
}

/// Partial-tree fragments rooted at `n` with their summed embedding
/// half-weights: `sqrt(mu) * lambda` for the bare root, otherwise
/// `sqrt(mu) * lambda^span * prod(child half-weights)`.
fn partial_fragments(n: &SyntaxTree, lambda: f64, mu: f64) -> BTreeMap<String, f64> {
    let root = mu.sqrt();
    let mut out = BTreeMap::new();
    out.insert(format!("({})", n.label()), root * lambda);
    let child_frags: Vec<BTreeMap<String, f64>> =
        n.children().iter().map(|c| partial_fragments(c, lambda, mu)).collect();
    for picks in index_subsets(n.children().len()) {
        let span = (picks[picks.len() - 1] - picks[0] + 1) as i32;
        let mut partial: Vec<(Vec<&str>, f64)> = vec![(Vec::new(), root * lambda.powi(span))];
        for &j in &picks {
            let mut next = Vec::new();
            for (parts, w) in &partial {
                for (f, fw) in &child_frags[j] {
                    let mut p = parts.clone();
                    p.push(f.as_str());
                    next.push((p, w * fw));
                }
            }
            partial = next;
        }
        for (parts, w) in partial {
            *out.entry(format!("({} {})", n.label(), parts.join(" "))).or_insert(0.0) += w;
        }
    }
    out
}

fn partial_bag(t: &SyntaxTree, lambda: f64, mu: f64) -> BTreeMap<String, f64> {
    let mut bag = BTreeMap::new();
    for n in all_nodes(t) {
        for (f, w) in partial_fragments(n, lambda, mu) {
            *bag.entry(f).or_insert(0.0) += w;
        }
    }
    bag
}

/// `sum_f H_1(f) H_2(f)` over shared partial trees.
pub fn ptk_oracle(t1: &SyntaxTree, t2: &SyntaxTree, lambda: f64, mu: f64) -> f64 {
    let b1 = partial_bag(t1, lambda, mu);
    let b2 = partial_bag(t2, lambda, mu);
    b1.iter().filter_map(|(f, w1)| b2.get(f).map(|w2| w1 * w2)).sum()
}

/// Longest common subsequence by trying every subsequence of `a`.
pub fn lcs_oracle<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let is_subseq = |idx: &[usize]| {
        let mut it = b.iter();
        idx.iter().all(|&i| it.any(|y| *y == a[i]))
    };
    index_subsets(a.len()).filter(|s| is_subseq(s)).map(|s| s.len()).max().unwrap_or(0)
}

/// Greedy string tiling by scanning every (start_a, start_b) pair each round.
/// Returns the total tiled length.
pub fn gst_oracle<T: PartialEq>(a: &[T], b: &[T], min_match: usize) -> usize {
    let mut ma = vec![false; a.len()];
    let mut mb = vec![false; b.len()];
    let mut tiled = 0;
    loop {
        let mut best = (0, 0, 0);
        for i in 0..a.len() {
            for j in 0..b.len() {
                let mut l = 0;
                while i + l < a.len() && j + l < b.len() && !ma[i + l] && !mb[j + l] && a[i + l] == b[j + l] {
                    l += 1;
                }
                if l > best.2 {
                    best = (i, j, l);
                }
            }
        }
        let (i, j, l) = best;
        if l < min_match.max(1) {
            return tiled;
        }
        ma[i..i + l].iter_mut().for_each(|m| *m = true);
        mb[j..j + l].iter_mut().for_each(|m| *m = true);
        tiled += l;
    }
}
