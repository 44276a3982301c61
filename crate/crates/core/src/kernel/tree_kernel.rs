//! Subset-tree (STK) and partial-tree (PTK) kernels.
//!
//! Trees are first compiled into flat post-order arrays whose labels and
//! grammar productions are interned in a shared [`LabelTable`]. A kernel
//! evaluation then only visits node pairs with equal keys (productions for
//! STK, labels for PTK), in an order that guarantees every child pair has
//! been scored before its parents.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::tree::{to_bracketed, SyntaxTree};

const NO_PRODUCTION: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "UPPERCASE"))]
pub enum TkKind {
    Stk,
    Ptk,
}

/// Decay parameters of a tree kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeKernel {
    pub kind: TkKind,
    pub lambda: f64,
    pub mu: f64,
}

impl TreeKernel {
    pub fn stk(lambda: f64) -> Self {
        Self { kind: TkKind::Stk, lambda, mu: 1.0 }
    }

    pub fn ptk(lambda: f64, mu: f64) -> Self {
        Self { kind: TkKind::Ptk, lambda, mu }
    }

    pub fn eval(&self, a: &CompiledTree, b: &CompiledTree) -> f64 {
        let (a, b) = canonical_order(a, b);
        match self.kind {
            TkKind::Stk => stk_compiled(a, b, self.lambda),
            TkKind::Ptk => ptk_compiled(a, b, self.lambda, self.mu),
        }
    }
}

/// Interns node labels and productions so that compiled trees compare by id.
#[derive(Debug, Default, Clone)]
pub struct LabelTable {
    labels: BTreeMap<String, u32>,
    productions: BTreeMap<Vec<u32>, u32>,
}

impl LabelTable {
    pub fn new() -> Self {
        Self::default()
    }

    fn label(&mut self, s: &str) -> u32 {
        if let Some(&id) = self.labels.get(s) {
            return id;
        }
        let id = self.labels.len() as u32;
        self.labels.insert(String::from(s), id);
        id
    }

    fn production(&mut self, key: Vec<u32>) -> u32 {
        let next = self.productions.len() as u32;
        *self.productions.entry(key).or_insert(next)
    }

    pub fn compile(&mut self, tree: &SyntaxTree) -> CompiledTree {
        let mut out = CompiledTree::default();
        self.push(tree, &mut out);
        out.by_label = sorted_keys(&out.labels);
        out.by_production = sorted_keys(&out.productions);
        out
    }

    // Post-order: children receive smaller indices than their parent.
    fn push(&mut self, node: &SyntaxTree, out: &mut CompiledTree) -> u32 {
        let child_ids: Vec<u32> = node.children().iter().map(|c| self.push(c, out)).collect();
        let label = self.label(node.label());
        let production = if child_ids.is_empty() {
            NO_PRODUCTION
        } else {
            let mut key = Vec::with_capacity(child_ids.len() + 1);
            key.push(label);
            key.extend(child_ids.iter().map(|&c| out.labels[c as usize]));
            self.production(key)
        };
        let start = out.child_ids.len() as u32;
        out.child_ids.extend_from_slice(&child_ids);
        out.children.push((start, child_ids.len() as u32));
        out.labels.push(label);
        out.productions.push(production);
        (out.labels.len() - 1) as u32
    }
}

/// A tree flattened for kernel evaluation. Only meaningful together with the
/// [`LabelTable`] that produced it.
#[derive(Debug, Default, Clone)]
pub struct CompiledTree {
    labels: Vec<u32>,
    productions: Vec<u32>,
    children: Vec<(u32, u32)>,
    child_ids: Vec<u32>,
    // (key, node) sorted; leaves are absent from `by_production`
    by_label: Vec<(u32, u32)>,
    by_production: Vec<(u32, u32)>,
}

fn sorted_keys(keys: &[u32]) -> Vec<(u32, u32)> {
    let mut v: Vec<(u32, u32)> = keys
        .iter()
        .enumerate()
        .filter(|(_, &k)| k != NO_PRODUCTION)
        .map(|(i, &k)| (k, i as u32))
        .collect();
    v.sort_unstable();
    v
}

impl CompiledTree {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    fn children(&self, node: usize) -> &[u32] {
        let (start, len) = self.children[node];
        &self.child_ids[start as usize..(start + len) as usize]
    }
}

// Floating-point sums depend on visiting order; evaluating every pair in a
// fixed argument order makes k(a, b) and k(b, a) bit-identical.
fn canonical_order<'t>(a: &'t CompiledTree, b: &'t CompiledTree) -> (&'t CompiledTree, &'t CompiledTree) {
    let key = |t: &'t CompiledTree| (&t.labels, &t.productions, &t.children, &t.child_ids);
    if key(a) <= key(b) {
        (a, b)
    } else {
        (b, a)
    }
}

fn nodes_with_key(index: &[(u32, u32)], key: u32) -> impl Iterator<Item = usize> + '_ {
    let lo = index.partition_point(|&(k, _)| k < key);
    index[lo..].iter().take_while(move |&&(k, _)| k == key).map(|&(_, n)| n as usize)
}

/// Calls `f(i, j)` for all node pairs with equal keys, `i` ascending then
/// `j` ascending, so children pairs are always visited before parent pairs.
fn for_matching_pairs(
    a_keys: &[u32],
    b_index: &[(u32, u32)],
    mut f: impl FnMut(usize, usize),
) {
    for (i, &key) in a_keys.iter().enumerate() {
        if key == NO_PRODUCTION {
            continue;
        }
        for j in nodes_with_key(b_index, key) {
            f(i, j);
        }
    }
}

fn stk_compiled(a: &CompiledTree, b: &CompiledTree, lambda: f64) -> f64 {
    let n2 = b.len();
    let mut delta = vec![0.0f64; a.len() * n2];
    let mut total = 0.0;
    for_matching_pairs(&a.productions, &b.by_production, |i, j| {
        let mut d = lambda;
        for (&ci, &cj) in a.children(i).iter().zip(b.children(j)) {
            d *= 1.0 + delta[ci as usize * n2 + cj as usize];
        }
        delta[i * n2 + j] = d;
        total += d;
    });
    total
}

fn ptk_compiled(a: &CompiledTree, b: &CompiledTree, lambda: f64, mu: f64) -> f64 {
    let n2 = b.len();
    let mut delta = vec![0.0f64; a.len() * n2];
    let mut scratch = SubsequenceScratch::default();
    let lambda2 = lambda * lambda;
    let mut total = 0.0;
    for_matching_pairs(&a.labels, &b.by_label, |i, j| {
        let ca = a.children(i);
        let cb = b.children(j);
        let d = if ca.is_empty() || cb.is_empty() {
            mu * lambda2
        } else {
            mu * (lambda2 + scratch.sum(ca, cb, lambda, |x, y| delta[x as usize * n2 + y as usize]))
        };
        delta[i * n2 + j] = d;
        total += d;
    });
    total
}

#[derive(Default)]
struct SubsequenceScratch {
    pair: Vec<f64>,
    s: Vec<f64>,
    c: Vec<f64>,
}

impl SubsequenceScratch {
    /// Sums, over all pairs of equal-length (non-empty) child subsequences,
    /// `lambda^(span1 + span2) * prod delta(child pairs)`.
    ///
    /// `s[i][j]` holds the weight of subsequence pairs of the current length
    /// ending exactly at children `i` and `j`; `c[i][j]` accumulates the
    /// decayed weight of all strictly earlier end points.
    fn sum(&mut self, ca: &[u32], cb: &[u32], lambda: f64, delta: impl Fn(u32, u32) -> f64) -> f64 {
        let (m, n) = (ca.len(), cb.len());
        let lambda2 = lambda * lambda;
        self.pair.clear();
        self.pair.extend(ca.iter().flat_map(|&x| cb.iter().map(move |&y| (x, y))).map(|(x, y)| delta(x, y)));
        self.s.clear();
        self.s.extend(self.pair.iter().map(|d| lambda2 * d));
        self.c.clear();
        self.c.resize(m * n, 0.0);

        let mut total: f64 = self.s.iter().sum();
        for _ in 1..m.min(n) {
            if self.s.iter().all(|&v| v == 0.0) {
                break;
            }
            for i in 0..m {
                for j in 0..n {
                    self.c[i * n + j] = if i == 0 || j == 0 {
                        0.0
                    } else {
                        lambda * self.c[(i - 1) * n + j] + lambda * self.c[i * n + j - 1]
                            - lambda2 * self.c[(i - 1) * n + j - 1]
                            + lambda2 * self.s[(i - 1) * n + j - 1]
                    };
                }
            }
            for k in 0..m * n {
                self.s[k] = self.pair[k] * self.c[k];
            }
            total += self.s.iter().sum::<f64>();
        }
        total
    }
}

/// Subset-tree kernel: shared fragments made of complete grammar
/// productions, each weighted by `lambda` per production.
pub fn stk(t1: &SyntaxTree, t2: &SyntaxTree, lambda: f64) -> f64 {
    let (a, b) = compile_pair(t1, t2);
    TreeKernel::stk(lambda).eval(&a, &b)
}

/// Partial-tree kernel: shared fragments whose nodes may keep any
/// subsequence of their children; `lambda` decays child-sequence spans and
/// `mu` decays depth.
pub fn ptk(t1: &SyntaxTree, t2: &SyntaxTree, lambda: f64, mu: f64) -> f64 {
    let (a, b) = compile_pair(t1, t2);
    TreeKernel::ptk(lambda, mu).eval(&a, &b)
}

// Interning order decides the ids, so it must not depend on argument order.
fn compile_pair(t1: &SyntaxTree, t2: &SyntaxTree) -> (CompiledTree, CompiledTree) {
    let mut table = LabelTable::new();
    if to_bracketed(t1) <= to_bracketed(t2) {
        let a = table.compile(t1);
        (a, table.compile(t2))
    } else {
        let b = table.compile(t2);
        (table.compile(t1), b)
    }
}
