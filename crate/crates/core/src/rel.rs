//! REL tagging: marks the phrases of one question's macro-tree that
//! lexically match the other question.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::tree::SyntaxTree;

pub const REL_PREFIX: &str = "REL-";

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct RelConfig {
    pub phrase_labels: BTreeSet<String>,
    pub match_case_insensitive: bool,
    pub stopwords: BTreeSet<String>,
    pub min_shared_tokens: usize,
}

impl Default for RelConfig {
    fn default() -> Self {
        Self {
            phrase_labels: ["NP", "VP", "PP"].iter().map(|s| s.to_string()).collect(),
            match_case_insensitive: true,
            stopwords: BTreeSet::new(),
            min_shared_tokens: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RelError {
    #[error("phrase label set is empty")]
    NoPhraseLabels,
    #[error("min_shared_tokens must be at least 1")]
    ZeroMinShared,
    #[error("input tree is already REL-tagged (label {0:?})")]
    AlreadyTagged(String),
}

impl RelConfig {
    pub fn validate(&self) -> Result<(), RelError> {
        if self.phrase_labels.is_empty() {
            return Err(RelError::NoPhraseLabels);
        }
        if self.min_shared_tokens == 0 {
            return Err(RelError::ZeroMinShared);
        }
        Ok(())
    }
}

struct Matcher<'a> {
    cfg: &'a RelConfig,
    stopwords: BTreeSet<String>,
}

impl<'a> Matcher<'a> {
    fn new(cfg: &'a RelConfig) -> Self {
        let stopwords = cfg.stopwords.iter().map(|s| fold(cfg, s)).collect();
        Self { cfg, stopwords }
    }

    fn key(&self, token: &str) -> Option<String> {
        let folded = fold(self.cfg, token);
        (!self.stopwords.contains(&folded)).then_some(folded)
    }

    fn vocabulary(&self, tree: &SyntaxTree) -> BTreeSet<String> {
        tree.leaves().into_iter().filter_map(|t| self.key(t)).collect()
    }
}

fn fold(cfg: &RelConfig, token: &str) -> String {
    if cfg.match_case_insensitive {
        token.to_lowercase()
    } else {
        token.to_string()
    }
}

fn find_tagged(tree: &SyntaxTree) -> Option<String> {
    let mut found = None;
    tree.any_node(&mut |n| {
        if n.label().starts_with(REL_PREFIX) {
            found = Some(n.label().to_string());
            true
        } else {
            false
        }
    });
    found
}

/// Returns a copy of `x` where every phrase node (label in
/// `cfg.phrase_labels`) whose yield shares at least `cfg.min_shared_tokens`
/// distinct non-stopword tokens with the yield of `y` is relabeled `REL-<label>`.
///
/// The function is asymmetric: only `x`'s nodes are tagged.
pub fn rel_link(x: &SyntaxTree, y: &SyntaxTree, cfg: &RelConfig) -> Result<SyntaxTree, RelError> {
    cfg.validate()?;
    for t in [x, y] {
        if let Some(label) = find_tagged(t) {
            return Err(RelError::AlreadyTagged(label));
        }
    }
    let matcher = Matcher::new(cfg);
    let target = matcher.vocabulary(y);
    Ok(tag(x, &target, &matcher).0)
}

// Returns the tagged copy and the folded, stopword-free yield of the subtree.
fn tag(node: &SyntaxTree, target: &BTreeSet<String>, m: &Matcher<'_>) -> (SyntaxTree, BTreeSet<String>) {
    if node.is_leaf() {
        return (node.clone(), m.key(node.label()).into_iter().collect());
    }
    let mut children = Vec::with_capacity(node.children().len());
    let mut vocab = BTreeSet::new();
    for c in node.children() {
        let (tc, v) = tag(c, target, m);
        children.push(tc);
        vocab.extend(v);
    }
    let label = if m.cfg.phrase_labels.contains(node.label())
        && vocab.intersection(target).count() >= m.cfg.min_shared_tokens
    {
        format!("{REL_PREFIX}{}", node.label())
    } else {
        node.label().to_string()
    };
    (SyntaxTree::from_parts(label, children), vocab)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{parse_bracketed, to_bracketed};

    fn t(s: &str) -> SyntaxTree {
        parse_bracketed(s).unwrap()
    }

    #[test]
    fn identical_texts_tag_every_phrase() {
        let x = t("(ROOT (S (NP (NN visa)) (VP (VB get))))");
        let out = rel_link(&x, &x, &RelConfig::default()).unwrap();
        assert_eq!(to_bracketed(&out), "(ROOT (S (REL-NP (NN visa)) (REL-VP (VB get))))");
    }

    #[test]
    fn disjoint_vocabulary_leaves_tree_unchanged() {
        let x = t("(ROOT (S (NP (NN visa)) (VP (VB get))))");
        let y = t("(ROOT (S (NP (NN beach)) (VP (VB swim))))");
        assert_eq!(rel_link(&x, &y, &RelConfig::default()).unwrap(), x);
    }

    #[test]
    fn only_matching_phrase_is_tagged() {
        let x = t("(ROOT (S (VP (VB get)) (NP (NN visa) (NN qatar))))");
        let y = t("(ROOT (S (NP (NN visa)) (NP (NN wife))))");
        let out = rel_link(&x, &y, &RelConfig::default()).unwrap();
        assert_eq!(to_bracketed(&out), "(ROOT (S (VP (VB get)) (REL-NP (NN visa) (NN qatar))))");
        // asymmetric: y's phrases are tagged against x's yield
        let back = rel_link(&y, &x, &RelConfig::default()).unwrap();
        assert_eq!(to_bracketed(&back), "(ROOT (S (REL-NP (NN visa)) (NP (NN wife))))");
    }

    #[test]
    fn case_folding_and_stopwords() {
        let x = t("(ROOT (NP (DT the) (NN Visa)))");
        let y = t("(ROOT (NP (DT The) (NN visa)))");
        let mut cfg = RelConfig::default();
        assert_eq!(rel_link(&x, &y, &cfg).unwrap().children()[0].label(), "REL-NP");

        cfg.match_case_insensitive = false;
        cfg.stopwords.insert("the".to_string());
        assert_eq!(rel_link(&x, &y, &cfg).unwrap(), x);

        cfg.match_case_insensitive = true;
        cfg.stopwords = ["THE".to_string()].into_iter().collect();
        let only_stop = t("(ROOT (NP (DT the)))");
        assert_eq!(rel_link(&only_stop, &y, &cfg).unwrap(), only_stop);
    }

    #[test]
    fn min_shared_tokens_threshold() {
        let x = t("(ROOT (NP (NN visa) (NN qatar)) (NP (NN visa)))");
        let y = t("(ROOT (NP (NN visa) (NN qatar)))");
        let cfg = RelConfig { min_shared_tokens: 2, ..RelConfig::default() };
        let out = rel_link(&x, &y, &cfg).unwrap();
        assert_eq!(to_bracketed(&out), "(ROOT (REL-NP (NN visa) (NN qatar)) (NP (NN visa)))");
    }

    #[test]
    fn rejects_tagged_input_and_bad_config() {
        let x = t("(ROOT (REL-NP (NN visa)))");
        let y = t("(ROOT (NP (NN visa)))");
        assert!(matches!(rel_link(&x, &y, &RelConfig::default()), Err(RelError::AlreadyTagged(_))));
        let cfg = RelConfig { phrase_labels: BTreeSet::new(), ..RelConfig::default() };
        assert_eq!(rel_link(&y, &y, &cfg), Err(RelError::NoPhraseLabels));
        let cfg = RelConfig { min_shared_tokens: 0, ..RelConfig::default() };
        assert_eq!(rel_link(&y, &y, &cfg), Err(RelError::ZeroMinShared));
    }

    #[test]
    fn inputs_are_not_mutated() {
        let x = t("(ROOT (NP (NN visa)))");
        let copy = x.clone();
        let _ = rel_link(&x, &x, &RelConfig::default()).unwrap();
        assert_eq!(x, copy);
    }
}
