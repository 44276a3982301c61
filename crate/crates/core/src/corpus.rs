//! Corpus records, gold-label mapping and example construction.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::example::{Example, TreePair};
use crate::features::{
    embedding_names, embedding_pair, mte_vector, ptk_feature, rank_feature, similarity_vector, tokenize,
    FeatureError, FeatureVector, RankMode, SimConfig, PTK_FEATURE_NAME,
};
use crate::rankeval::{Candidate, QueryGroup, RankError};
use crate::rel::{rel_link, RelConfig, RelError};
use crate::tree::{macro_tree, parse_bracketed, ParseError, SyntaxTree, TreeError, DEFAULT_ROOT_LABEL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Task {
    /// Question re-ranking over the search engine's top 10 threads.
    B,
    /// Question-comment re-ranking over 30 candidates per question.
    D,
}

impl Task {
    /// Largest original rank and default evaluation cutoff.
    pub fn max_rank(self) -> u32 {
        match self {
            Task::B => 10,
            Task::D => 30,
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::B => "B",
            Task::D => "D",
        })
    }
}

impl FromStr for Task {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "B" | "b" => Ok(Task::B),
            "D" | "d" => Ok(Task::D),
            _ => Err(CorpusError::UnknownTask(s.into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum GoldLabel {
    PerfectMatch,
    Relevant,
    Irrelevant,
    Direct,
    Related,
}

impl GoldLabel {
    pub fn name(self) -> &'static str {
        match self {
            GoldLabel::PerfectMatch => "PerfectMatch",
            GoldLabel::Relevant => "Relevant",
            GoldLabel::Irrelevant => "Irrelevant",
            GoldLabel::Direct => "Direct",
            GoldLabel::Related => "Related",
        }
    }
}

impl fmt::Display for GoldLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GoldLabel {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            GoldLabel::PerfectMatch,
            GoldLabel::Relevant,
            GoldLabel::Irrelevant,
            GoldLabel::Direct,
            GoldLabel::Related,
        ]
        .into_iter()
        .find(|l| l.name() == s)
        .ok_or_else(|| CorpusError::UnknownLabel(s.into()))
    }
}

/// +1 for the relevant classes of `task`, -1 for `Irrelevant`.
pub fn gold_binary(label: GoldLabel, task: Task) -> Result<i8, CorpusError> {
    match (task, label) {
        (Task::B, GoldLabel::PerfectMatch | GoldLabel::Relevant) => Ok(1),
        (Task::D, GoldLabel::Direct | GoldLabel::Related) => Ok(1),
        (_, GoldLabel::Irrelevant) => Ok(-1),
        _ => Err(CorpusError::LabelForTask { label, task }),
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CorpusRecord {
    pub query_id: String,
    pub candidate_id: String,
    pub original_rank: i64,
    pub qo_text: String,
    pub qs_text: String,
    pub gold_label: GoldLabel,
    /// One bracketed parse per sentence of the original question.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub qo_trees: Option<Vec<String>>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub qs_trees: Option<Vec<String>>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub comment_text: Option<String>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub qo_embedding_id: Option<String>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub qs_embedding_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CorpusError {
    #[error("empty corpus")]
    Empty,
    #[error("unknown task {0:?}")]
    UnknownTask(String),
    #[error("unknown gold label {0:?}")]
    UnknownLabel(String),
    #[error("label {label} is not valid for task {task}")]
    LabelForTask { label: GoldLabel, task: Task },
    #[error("record {index}: label {label} is not valid for task {task}")]
    RecordLabel { index: usize, label: GoldLabel, task: Task },
    #[error("record {index}: duplicate (query, candidate) = ({query}, {candidate})")]
    DuplicateKey { index: usize, query: String, candidate: String },
    #[error("record {index}: original rank {rank} already used in query {query}")]
    RankCollision { index: usize, query: String, rank: i64 },
    #[error("record {index}: original rank {rank} outside 1..={max}")]
    RankRange { index: usize, rank: i64, max: u32 },
    #[error("record {index}: {field} is empty")]
    EmptyField { index: usize, field: &'static str },
    #[error("record {index}: {what} required by the feature configuration is missing")]
    Missing { index: usize, what: &'static str },
    #[error("record {index}: no embedding for id {id:?}")]
    UnknownEmbedding { index: usize, id: String },
    #[error("record {index}: tree {which} #{tree}: {source}")]
    Tree { index: usize, which: &'static str, tree: usize, source: ParseError },
    #[error("record {index}: {source}")]
    MacroTree { index: usize, source: TreeError },
    #[error("record {index}: {source}")]
    Rel { index: usize, source: RelError },
    #[error("record {index}: {source}")]
    Feature { index: usize, source: FeatureError },
    #[error(transparent)]
    Rank(#[from] RankError),
    #[error("{expected} scores expected, got {found}")]
    ScoreCount { expected: usize, found: usize },
    #[error("invalid feature configuration: {0}")]
    Config(&'static str),
}

/// Checks key uniqueness, per-query rank uniqueness and rank range.
pub fn validate_records(records: &[CorpusRecord], task: Task) -> Result<(), CorpusError> {
    if records.is_empty() {
        return Err(CorpusError::Empty);
    }
    let mut keys = BTreeSet::new();
    let mut ranks = BTreeSet::new();
    for (index, r) in records.iter().enumerate() {
        for (field, v) in [("query_id", &r.query_id), ("candidate_id", &r.candidate_id)] {
            if v.is_empty() {
                return Err(CorpusError::EmptyField { index, field });
            }
        }
        if r.original_rank < 1 || r.original_rank > i64::from(task.max_rank()) {
            return Err(CorpusError::RankRange { index, rank: r.original_rank, max: task.max_rank() });
        }
        if gold_binary(r.gold_label, task).is_err() {
            return Err(CorpusError::RecordLabel { index, label: r.gold_label, task });
        }
        if !keys.insert((r.query_id.as_str(), r.candidate_id.as_str())) {
            return Err(CorpusError::DuplicateKey {
                index,
                query: r.query_id.clone(),
                candidate: r.candidate_id.clone(),
            });
        }
        if !ranks.insert((r.query_id.as_str(), r.original_rank)) {
            return Err(CorpusError::RankCollision { index, query: r.query_id.clone(), rank: r.original_rank });
        }
    }
    Ok(())
}

/// `(relevant, irrelevant)` record counts.
pub fn class_counts(records: &[CorpusRecord], task: Task) -> Result<(usize, usize), CorpusError> {
    let mut pos = 0;
    for r in records {
        if gold_binary(r.gold_label, task)? > 0 {
            pos += 1;
        }
    }
    Ok((pos, records.len() - pos))
}

/// Which question the MTE features compare the comment against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MteSide {
    NewQuestion,
    ForumQuestion,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct FeatureConfig {
    /// The 20 n-gram similarities.
    pub sim: bool,
    /// Append the PTK similarity of the pair's two trees to the sim block.
    pub ptk_feature: bool,
    pub ptk_lambda: f64,
    pub ptk_mu: f64,
    pub rank: Option<RankMode>,
    /// REL-linked macro-trees for the tree kernel.
    pub trees: bool,
    pub embeddings: bool,
    pub embedding_dim: usize,
    pub mte: bool,
    pub mte_side: MteSide,
    pub root_label: String,
    pub similarity: SimConfig,
    pub rel: RelConfig,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            sim: true,
            ptk_feature: false,
            ptk_lambda: 0.4,
            ptk_mu: 0.4,
            rank: Some(RankMode::Inverse),
            trees: false,
            embeddings: false,
            embedding_dim: 0,
            mte: false,
            mte_side: MteSide::NewQuestion,
            root_label: String::from(DEFAULT_ROOT_LABEL),
            similarity: SimConfig::default(),
            rel: RelConfig::default(),
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.ptk_feature && !self.sim {
            return Err(CorpusError::Config("ptk_feature is appended to the sim block, enable sim"));
        }
        if !(self.ptk_lambda > 0.0 && self.ptk_lambda <= 1.0 && self.ptk_mu > 0.0 && self.ptk_mu <= 1.0) {
            return Err(CorpusError::Config("ptk_lambda and ptk_mu must lie in (0, 1]"));
        }
        if self.embeddings && self.embedding_dim == 0 {
            return Err(CorpusError::Config("embedding_dim must be positive"));
        }
        if self.similarity.min_match == 0 {
            return Err(CorpusError::Config("min_match must be at least 1"));
        }
        self.rel.validate().map_err(|source| CorpusError::Rel { index: 0, source })
    }

    fn needs_trees(&self) -> bool {
        self.trees || self.ptk_feature
    }
}

fn parse_trees(index: usize, which: &'static str, trees: Option<&Vec<String>>) -> Result<Vec<SyntaxTree>, CorpusError> {
    let trees = trees.ok_or(CorpusError::Missing { index, what: which })?;
    trees
        .iter()
        .enumerate()
        .map(|(tree, s)| parse_bracketed(s).map_err(|source| CorpusError::Tree { index, which, tree, source }))
        .collect()
}

fn lookup<'a>(
    index: usize,
    id: Option<&String>,
    what: &'static str,
    table: Option<&'a BTreeMap<String, Vec<f64>>>,
) -> Result<&'a [f64], CorpusError> {
    let id = id.ok_or(CorpusError::Missing { index, what })?;
    let table = table.ok_or(CorpusError::Missing { index, what: "embedding table" })?;
    table
        .get(id)
        .map(Vec::as_slice)
        .ok_or_else(|| CorpusError::UnknownEmbedding { index, id: id.clone() })
}

fn build_one(
    index: usize,
    r: &CorpusRecord,
    task: Task,
    cfg: &FeatureConfig,
    embeddings: Option<&BTreeMap<String, Vec<f64>>>,
) -> Result<Example, CorpusError> {
    let feature = |source| CorpusError::Feature { index, source };
    let mut ex = Example { label: Some(gold_binary(r.gold_label, task)?), ..Example::default() };

    let trees = if cfg.needs_trees() {
        let qo = parse_trees(index, "qo_trees", r.qo_trees.as_ref())?;
        let qs = parse_trees(index, "qs_trees", r.qs_trees.as_ref())?;
        let macro_err = |source| CorpusError::MacroTree { index, source };
        let mo = macro_tree(&qo, &cfg.root_label).map_err(macro_err)?;
        let ms = macro_tree(&qs, &cfg.root_label).map_err(macro_err)?;
        let rel_err = |source| CorpusError::Rel { index, source };
        Some(TreePair {
            forward: rel_link(&mo, &ms, &cfg.rel).map_err(rel_err)?,
            backward: rel_link(&ms, &mo, &cfg.rel).map_err(rel_err)?,
        })
    } else {
        None
    };

    if cfg.sim {
        let mut v = similarity_vector(&r.qo_text, &r.qs_text, &cfg.similarity);
        if cfg.ptk_feature {
            let t = trees.as_ref().expect("trees are built when ptk_feature is set");
            let k = ptk_feature(&t.forward, &t.backward, cfg.ptk_lambda, cfg.ptk_mu);
            v.push(PTK_FEATURE_NAME, k).map_err(feature)?;
        }
        ex.sim = Some(v);
    }
    if let Some(mode) = cfg.rank {
        ex.rank = Some(rank_feature(r.original_rank, mode).map_err(feature)?);
    }

    let mut dense = FeatureVector::default();
    if cfg.embeddings {
        let v_new = lookup(index, r.qo_embedding_id.as_ref(), "qo_embedding_id", embeddings)?;
        let v_forum = lookup(index, r.qs_embedding_id.as_ref(), "qs_embedding_id", embeddings)?;
        let values = embedding_pair(v_new, v_forum, cfg.embedding_dim).map_err(feature)?;
        let block = FeatureVector::new(embedding_names(cfg.embedding_dim).into_iter().zip(values)).map_err(feature)?;
        dense.extend(&block).map_err(feature)?;
    }
    if cfg.mte {
        let comment = r.comment_text.as_ref().ok_or(CorpusError::Missing { index, what: "comment_text" })?;
        let question = match cfg.mte_side {
            MteSide::NewQuestion => &r.qo_text,
            MteSide::ForumQuestion => &r.qs_text,
        };
        let none = BTreeSet::new();
        let block = mte_vector(&tokenize(question, &none), &tokenize(comment, &none)).map_err(feature)?;
        dense.extend(&block).map_err(feature)?;
    }
    if cfg.embeddings || cfg.mte {
        ex.dense = Some(dense);
    }
    if cfg.trees {
        ex.trees = trees;
    }
    Ok(ex)
}

/// One [`Example`] per record, in record order. Uses only the record itself
/// and the embedding table, so training and test sets never interact.
pub fn build_examples(
    records: &[CorpusRecord],
    task: Task,
    cfg: &FeatureConfig,
    embeddings: Option<&BTreeMap<String, Vec<f64>>>,
) -> Result<Vec<Example>, CorpusError> {
    cfg.validate()?;
    records.iter().enumerate().map(|(i, r)| build_one(i, r, task, cfg, embeddings)).collect()
}

/// Groups records by query (first-appearance order) with `scores[i]`
/// attached to `records[i]`.
pub fn query_groups(records: &[CorpusRecord], task: Task, scores: Option<&[f64]>) -> Result<Vec<QueryGroup>, CorpusError> {
    if let Some(s) = scores {
        if s.len() != records.len() {
            return Err(CorpusError::ScoreCount { expected: records.len(), found: s.len() });
        }
    }
    let mut order: Vec<&str> = Vec::new();
    let mut members: BTreeMap<&str, Vec<Candidate>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        let rank = u32::try_from(r.original_rank)
            .map_err(|_| CorpusError::RankRange { index: i, rank: r.original_rank, max: task.max_rank() })?;
        let list = members.entry(&r.query_id).or_insert_with(|| {
            order.push(&r.query_id);
            Vec::new()
        });
        list.push(Candidate {
            id: r.candidate_id.clone(),
            original_rank: rank,
            relevant: gold_binary(r.gold_label, task)? > 0,
            score: scores.map(|s| s[i]),
        });
    }
    order
        .into_iter()
        .map(|q| Ok(QueryGroup::new(q, members.remove(q).unwrap_or_default())?))
        .collect()
}
