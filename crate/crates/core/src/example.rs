use crate::features::FeatureVector;
use crate::tree::SyntaxTree;

/// The two REL-tagged macro-trees of a question pair.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TreePair {
    /// Original question tagged against the candidate, `t(qo, qs)`.
    pub forward: SyntaxTree,
    /// Candidate tagged against the original question, `t(qs, qo)`.
    pub backward: SyntaxTree,
}

/// One (original question, candidate) instance with its feature blocks.
/// Blocks are optional; a kernel configuration decides which ones it needs.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Example {
    /// Text similarities, optionally followed by the PTK pair feature.
    pub sim: Option<FeatureVector>,
    pub rank: Option<f64>,
    pub trees: Option<TreePair>,
    /// Embedding pair and/or MTE features.
    pub dense: Option<FeatureVector>,
    /// +1 relevant, -1 irrelevant.
    pub label: Option<i8>,
}
