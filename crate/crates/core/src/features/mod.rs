//! Vector features of a question pair: n-gram similarities, the PTK
//! similarity scalar, search-rank features, embedding concatenation and
//! machine-translation evaluation scores.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::kernel::{normalize_kernel, CompiledTree, LabelTable, TreeKernel};
use crate::tree::SyntaxTree;

pub mod measures;
pub mod mte;
mod text;

pub use measures::{containment, cosine, gst_sim, jaccard, lcs_sim};
pub use mte::{mte_vector, MTE_FEATURE_NAMES};
pub use text::{ngrams, tokenize, TokenSeq};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FeatureError {
    #[error("duplicate feature name {0:?}")]
    DuplicateName(String),
    #[error("search rank must be at least 1, got {0}")]
    InvalidRank(i64),
    #[error("embedding dimension mismatch: expected {expected}, found {found}")]
    EmbeddingDimension { expected: usize, found: usize },
    #[error("reference text is empty")]
    EmptyReference,
}

/// Named feature values in a fixed order.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeatureVector {
    names: Vec<String>,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new<I, S>(pairs: I) -> Result<Self, FeatureError>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut v = Self::default();
        for (name, value) in pairs {
            v.push(name, value)?;
        }
        Ok(v)
    }

    pub fn push(&mut self, name: impl Into<String>, value: f64) -> Result<(), FeatureError> {
        let name = name.into();
        if self.names.contains(&name) {
            return Err(FeatureError::DuplicateName(name));
        }
        self.names.push(name);
        self.values.push(value);
        Ok(())
    }

    pub fn extend(&mut self, other: &FeatureVector) -> Result<(), FeatureError> {
        for (n, v) in other.iter() {
            self.push(n, v)?;
        }
        Ok(())
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.names.iter().map(String::as_str).zip(self.values.iter().copied())
    }
}

/// The five text similarity measures, in feature order.
pub const SIMILARITY_MEASURES: [&str; 5] = ["gst", "lcs", "jaccard", "containment", "cosine"];
pub const MAX_NGRAM: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SimConfig {
    /// Lowercase stopwords removed before computing similarities.
    pub stopwords: BTreeSet<String>,
    /// Shortest tile greedy string tiling may mark.
    pub min_match: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { stopwords: BTreeSet::new(), min_match: 1 }
    }
}

pub fn similarity_name(n: usize, measure: &str) -> String {
    format!("sim_n{n}_{measure}")
}

/// 20 similarities: five measures over word n-grams for n = 1..=4,
/// n-major order, named like `sim_n2_jaccard`. Containment is directed
/// from the original question.
pub fn similarity_vector(qo_text: &str, qs_text: &str, cfg: &SimConfig) -> FeatureVector {
    let a = tokenize(qo_text, &cfg.stopwords);
    let b = tokenize(qs_text, &cfg.stopwords);
    similarity_vector_tokens(&a, &b, cfg.min_match)
}

pub fn similarity_vector_tokens(a: &TokenSeq, b: &TokenSeq, min_match: usize) -> FeatureVector {
    let mut out = FeatureVector::default();
    for n in 1..=MAX_NGRAM {
        let ga = ngrams(a, n);
        let gb = ngrams(b, n);
        let sa: BTreeSet<&String> = ga.iter().collect();
        let sb: BTreeSet<&String> = gb.iter().collect();
        let values = [
            gst_sim(&ga, &gb, min_match),
            lcs_sim(&ga, &gb),
            jaccard(&sa, &sb),
            containment(&sa, &sb),
            cosine(&measures::counts(&ga), &measures::counts(&gb)),
        ];
        for (measure, value) in SIMILARITY_MEASURES.iter().zip(values) {
            out.values.push(value);
            out.names.push(similarity_name(n, measure));
        }
    }
    out
}

pub const PTK_FEATURE_NAME: &str = "ptk_pair";

/// Normalized PTK between the two REL-tagged trees of the same pair.
pub fn ptk_feature(tree_o_rel: &SyntaxTree, tree_s_rel: &SyntaxTree, lambda: f64, mu: f64) -> f64 {
    let mut table = LabelTable::new();
    let a: CompiledTree = table.compile(tree_o_rel);
    let b = table.compile(tree_s_rel);
    let k = TreeKernel::ptk(lambda, mu);
    // PTK self-similarity is at least mu * lambda^2 > 0 for any tree
    normalize_kernel(k.eval(&a, &b), k.eval(&a, &a), k.eval(&b, &b)).unwrap_or(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RankMode {
    AsIs,
    Inverse,
}

/// `pos` or `1/pos`.
pub fn rank_feature(pos: i64, mode: RankMode) -> Result<f64, FeatureError> {
    if pos < 1 {
        return Err(FeatureError::InvalidRank(pos));
    }
    Ok(match mode {
        RankMode::AsIs => pos as f64,
        RankMode::Inverse => 1.0 / pos as f64,
    })
}

/// `[v_new ‖ v_forum]`, both of dimension `dim`.
pub fn embedding_pair(v_new: &[f64], v_forum: &[f64], dim: usize) -> Result<Vec<f64>, FeatureError> {
    for v in [v_new, v_forum] {
        if v.len() != dim {
            return Err(FeatureError::EmbeddingDimension { expected: dim, found: v.len() });
        }
    }
    let mut out = Vec::with_capacity(2 * dim);
    out.extend_from_slice(v_new);
    out.extend_from_slice(v_forum);
    Ok(out)
}

/// Feature names of an embedding pair block.
pub fn embedding_names(dim: usize) -> Vec<String> {
    let side = |prefix: &'static str| (0..dim).map(move |i| format!("{prefix}{i}"));
    side("emb_new_").chain(side("emb_forum_")).collect()
}
