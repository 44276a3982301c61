//! Tree kernels, vector kernels and their combination over [`Example`]s.
//!
//! The combined kernel is a sum of independent blocks: RBF over the
//! similarity vector, the pair tree kernel over the REL-tagged trees, a
//! linear or RBF kernel on the rank feature, and an optional kernel on the
//! dense (embedding / MTE) block. A sum of PSD kernels is PSD, so any block
//! selection yields a valid Gram matrix.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::example::Example;
use crate::hash::fnv1a64;

mod tree_kernel;
mod vector;

pub use tree_kernel::{ptk, stk, CompiledTree, LabelTable, TkKind, TreeKernel};
pub use vector::{linear, normalize_kernel, rbf, VectorKernel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Similarity,
    Trees,
    Rank,
    Dense,
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Block::Similarity => "similarity",
            Block::Trees => "trees",
            Block::Rank => "rank",
            Block::Dense => "dense",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KernelError {
    #[error("invalid kernel configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("example is missing the {0} block")]
    MissingBlock(Block),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("degenerate self-kernel (zero or negative)")]
    DegenerateSelfKernel,
    #[error("examples list is empty")]
    NoExamples,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct KernelConfig {
    pub tk_kind: TkKind,
    pub lambda: f64,
    pub mu: f64,
    /// RBF width shared by all RBF blocks; `None` uses 1/dimension per block.
    pub gamma: Option<f64>,
    pub rank_kernel: VectorKernel,
    pub dense_kernel: VectorKernel,
    pub normalize_tk: bool,
    pub use_sim: bool,
    pub use_tk: bool,
    pub use_rank: bool,
    pub use_dense: bool,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            tk_kind: TkKind::Ptk,
            lambda: 0.4,
            mu: 0.4,
            gamma: None,
            rank_kernel: VectorKernel::Rbf,
            dense_kernel: VectorKernel::Linear,
            normalize_tk: true,
            use_sim: true,
            use_tk: true,
            use_rank: true,
            use_dense: false,
        }
    }
}

impl KernelConfig {
    pub fn validate(&self) -> Result<(), KernelError> {
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(KernelError::InvalidConfig("lambda must lie in (0, 1]"));
        }
        if !(self.mu > 0.0 && self.mu <= 1.0) {
            return Err(KernelError::InvalidConfig("mu must lie in (0, 1]"));
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(KernelError::InvalidConfig("gamma must be positive"));
            }
        }
        if !(self.use_sim || self.use_tk || self.use_rank || self.use_dense) {
            return Err(KernelError::InvalidConfig("no kernel block enabled"));
        }
        Ok(())
    }

    pub fn tree_kernel(&self) -> TreeKernel {
        TreeKernel { kind: self.tk_kind, lambda: self.lambda, mu: self.mu }
    }

    /// Stable textual description of every field that affects kernel values.
    pub fn canonical(&self) -> String {
        let name = |k: VectorKernel| match k {
            VectorKernel::Linear => "LINEAR",
            VectorKernel::Rbf => "RBF",
        };
        let gamma = match self.gamma {
            Some(g) => format!("{g}"),
            None => String::from("auto"),
        };
        format!(
            "tk={};lambda={};mu={};gamma={};rank_kernel={};dense_kernel={};normalize_tk={};sim={};tk={};rank={};dense={}",
            match self.tk_kind {
                TkKind::Stk => "STK",
                TkKind::Ptk => "PTK",
            },
            self.lambda,
            self.mu,
            gamma,
            name(self.rank_kernel),
            name(self.dense_kernel),
            self.normalize_tk as u8,
            self.use_sim as u8,
            self.use_tk as u8,
            self.use_rank as u8,
            self.use_dense as u8,
        )
    }

    /// 16 hex digits identifying [`KernelConfig::canonical`].
    pub fn fingerprint(&self) -> String {
        format!("{:016x}", fnv1a64(self.canonical().as_bytes()))
    }
}

#[derive(Debug, Clone)]
struct PreparedTree {
    tree: CompiledTree,
    self_k: f64,
}

/// An example compiled against a [`KernelSpace`]: only the enabled blocks
/// are kept, trees are interned and their self-kernels cached.
#[derive(Debug, Clone)]
pub struct PreparedExample {
    sim: Option<Vec<f64>>,
    rank: Option<f64>,
    dense: Option<Vec<f64>>,
    trees: Option<[PreparedTree; 2]>,
}

/// Evaluates the combined kernel between examples prepared in the same space.
///
/// Preparing needs `&mut self` (labels get interned); evaluation is `&self`
/// and may run concurrently once all examples are prepared.
#[derive(Debug, Clone)]
pub struct KernelSpace {
    cfg: KernelConfig,
    tk: TreeKernel,
    labels: LabelTable,
    sim_dim: Option<usize>,
    dense_dim: Option<usize>,
}

fn fixed_dim(slot: &mut Option<usize>, found: usize) -> Result<(), KernelError> {
    match *slot {
        Some(expected) if expected != found => Err(KernelError::DimensionMismatch { expected, found }),
        Some(_) => Ok(()),
        None => {
            *slot = Some(found);
            Ok(())
        }
    }
}

impl KernelSpace {
    pub fn new(cfg: &KernelConfig) -> Result<Self, KernelError> {
        cfg.validate()?;
        Ok(Self {
            cfg: cfg.clone(),
            tk: cfg.tree_kernel(),
            labels: LabelTable::new(),
            sim_dim: None,
            dense_dim: None,
        })
    }

    pub fn config(&self) -> &KernelConfig {
        &self.cfg
    }

    pub fn prepare(&mut self, ex: &Example) -> Result<PreparedExample, KernelError> {
        let cfg = &self.cfg;
        let sim = if cfg.use_sim {
            let v = ex.sim.as_ref().ok_or(KernelError::MissingBlock(Block::Similarity))?;
            fixed_dim(&mut self.sim_dim, v.len())?;
            Some(v.values().to_vec())
        } else {
            None
        };
        let dense = if cfg.use_dense {
            let v = ex.dense.as_ref().ok_or(KernelError::MissingBlock(Block::Dense))?;
            fixed_dim(&mut self.dense_dim, v.len())?;
            Some(v.values().to_vec())
        } else {
            None
        };
        let rank = if cfg.use_rank {
            Some(ex.rank.ok_or(KernelError::MissingBlock(Block::Rank))?)
        } else {
            None
        };
        let trees = if cfg.use_tk {
            let pair = ex.trees.as_ref().ok_or(KernelError::MissingBlock(Block::Trees))?;
            let mut prep = |t| -> Result<PreparedTree, KernelError> {
                let tree = self.labels.compile(t);
                let self_k = self.tk.eval(&tree, &tree);
                if self.cfg.normalize_tk && !(self_k > 0.0) {
                    return Err(KernelError::DegenerateSelfKernel);
                }
                Ok(PreparedTree { tree, self_k })
            };
            Some([prep(&pair.forward)?, prep(&pair.backward)?])
        } else {
            None
        };
        Ok(PreparedExample { sim, rank, dense, trees })
    }

    fn gamma_for(&self, dim: usize) -> f64 {
        self.cfg.gamma.unwrap_or(1.0 / dim.max(1) as f64)
    }

    pub fn sim_kernel(&self, a: &PreparedExample, b: &PreparedExample) -> f64 {
        match (&a.sim, &b.sim) {
            (Some(u), Some(v)) => rbf(u, v, self.gamma_for(u.len())).unwrap_or(0.0),
            _ => 0.0,
        }
    }

    pub fn rank_kernel(&self, a: &PreparedExample, b: &PreparedExample) -> f64 {
        match (a.rank, b.rank) {
            (Some(u), Some(v)) => self.cfg.rank_kernel.eval(&[u], &[v], self.gamma_for(1)).unwrap_or(0.0),
            _ => 0.0,
        }
    }

    pub fn dense_kernel(&self, a: &PreparedExample, b: &PreparedExample) -> f64 {
        match (&a.dense, &b.dense) {
            (Some(u), Some(v)) => self.cfg.dense_kernel.eval(u, v, self.gamma_for(u.len())).unwrap_or(0.0),
            _ => 0.0,
        }
    }

    /// Sum of the tree kernel on the forward trees and on the backward trees.
    pub fn tree_kernel(&self, a: &PreparedExample, b: &PreparedExample) -> f64 {
        let (Some(ta), Some(tb)) = (&a.trees, &b.trees) else {
            return 0.0;
        };
        ta.iter()
            .zip(tb)
            .map(|(x, y)| {
                let k = self.tk.eval(&x.tree, &y.tree);
                if self.cfg.normalize_tk {
                    k / libm::sqrt(x.self_k * y.self_k)
                } else {
                    k
                }
            })
            .sum()
    }

    pub fn kernel(&self, a: &PreparedExample, b: &PreparedExample) -> f64 {
        self.sim_kernel(a, b) + self.tree_kernel(a, b) + self.rank_kernel(a, b) + self.dense_kernel(a, b)
    }
}

/// Dense square kernel matrix with the fingerprint of the configuration
/// that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Gram {
    n: usize,
    data: Vec<f64>,
    fingerprint: String,
}

impl Gram {
    pub fn from_rows(rows: Vec<Vec<f64>>, fingerprint: impl Into<String>) -> Result<Self, KernelError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in &rows {
            if r.len() != n {
                return Err(KernelError::DimensionMismatch { expected: n, found: r.len() });
            }
            data.extend_from_slice(r);
        }
        Ok(Self { n, data, fingerprint: fingerprint.into() })
    }

    /// Builds a symmetric matrix from `f(i, j)` evaluated for `j <= i`.
    pub fn symmetric_from_fn(n: usize, fingerprint: impl Into<String>, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self { n, data, fingerprint: fingerprint.into() }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..i {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|v| v * v).sum())
    }
}

/// `G[i][j] = combined_kernel(e_i, e_j)`.
pub fn gram_matrix(examples: &[Example], cfg: &KernelConfig) -> Result<Gram, KernelError> {
    if examples.is_empty() {
        return Err(KernelError::NoExamples);
    }
    let mut space = KernelSpace::new(cfg)?;
    let prepared = examples.iter().map(|e| space.prepare(e)).collect::<Result<Vec<_>, _>>()?;
    Ok(Gram::symmetric_from_fn(prepared.len(), cfg.fingerprint(), |i, j| {
        space.kernel(&prepared[i], &prepared[j])
    }))
}

/// Sum of all blocks enabled in `cfg`.
pub fn combined_kernel(a: &Example, b: &Example, cfg: &KernelConfig) -> Result<f64, KernelError> {
    let mut space = KernelSpace::new(cfg)?;
    let pa = space.prepare(a)?;
    let pb = space.prepare(b)?;
    Ok(space.kernel(&pa, &pb))
}

/// `TK(forward_a, forward_b) + TK(backward_a, backward_b)`, each summand
/// normalized when `cfg.normalize_tk`. Ignores the other block switches.
pub fn pair_tk(a: &Example, b: &Example, cfg: &KernelConfig) -> Result<f64, KernelError> {
    let only_trees = KernelConfig { use_sim: false, use_tk: true, use_rank: false, use_dense: false, ..cfg.clone() };
    combined_kernel(a, b, &only_trees)
}
