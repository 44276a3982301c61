//! Corpus JSONL, stopword lists, embedding tables and featurized examples.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use qrerank_core::corpus::{class_counts, validate_records, CorpusError, CorpusRecord, Task};
use qrerank_core::Example;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Directory searched for `english.txt` / `arabic.txt` when no stopword
/// file is configured, and for relative stopword paths that do not exist.
pub const STOPWORD_DIR_ENV: &str = "QRERANK_STOPWORD_DIR";

/// Records of one split together with the 1-based source line of each.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub task: Task,
    pub records: Vec<CorpusRecord>,
    pub lines: Vec<usize>,
}

impl Corpus {
    /// `(relevant, irrelevant)`.
    pub fn class_counts(&self) -> (usize, usize) {
        class_counts(&self.records, self.task).expect("labels checked at load time")
    }

    pub fn query_count(&self) -> usize {
        self.records.iter().map(|r| r.query_id.as_str()).collect::<BTreeSet<_>>().len()
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(Error::io(path))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(Error::io(path))
}

fn record_line(e: &CorpusError) -> Option<usize> {
    match e {
        CorpusError::DuplicateKey { index, .. }
        | CorpusError::RankCollision { index, .. }
        | CorpusError::RankRange { index, .. }
        | CorpusError::EmptyField { index, .. }
        | CorpusError::RecordLabel { index, .. } => Some(*index),
        _ => None,
    }
}

/// Reads one JSON record per non-blank line and validates the whole split.
pub fn load_corpus(path: &Path, task: Task) -> Result<Corpus> {
    let mut records = Vec::new();
    let mut lines = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(Error::io(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let r: CorpusRecord = serde_json::from_str(&line).map_err(|e| Error::format(path, i + 1, e.to_string()))?;
        records.push(r);
        lines.push(i + 1);
    }
    if records.is_empty() {
        return Err(Error::File { path: path.to_path_buf(), message: "empty corpus".into() });
    }
    validate_records(&records, task).map_err(|e| match record_line(&e) {
        Some(index) => Error::format(path, lines[index], e.to_string()),
        None => Error::Corpus(e),
    })?;
    let corpus = Corpus { task, records, lines };
    let (pos, neg) = corpus.class_counts();
    log::info!(
        "{}: {} records, {} queries, {pos} relevant / {neg} irrelevant",
        path.display(),
        corpus.records.len(),
        corpus.query_count()
    );
    Ok(corpus)
}

pub fn write_corpus(path: &Path, records: &[CorpusRecord]) -> Result<()> {
    let mut w = create(path)?;
    for r in records {
        let s = serde_json::to_string(r).expect("records serialize");
        writeln!(w, "{s}").map_err(Error::io(path))?;
    }
    w.flush().map_err(Error::io(path))
}

/// One lowercased token per line; blank lines and `#` comments are skipped.
pub fn read_stopwords(path: &Path) -> Result<BTreeSet<String>> {
    let mut out = BTreeSet::new();
    for line in open(path)?.lines() {
        let line = line.map_err(Error::io(path))?;
        let w = line.trim();
        if !w.is_empty() && !w.starts_with('#') {
            out.insert(w.to_lowercase());
        }
    }
    Ok(out)
}

/// Resolves the stopword file for `task`, consulting [`STOPWORD_DIR_ENV`].
pub fn resolve_stopwords(configured: Option<&Path>, task: Task) -> Option<PathBuf> {
    let dir = std::env::var_os(STOPWORD_DIR_ENV).map(PathBuf::from);
    match (configured, dir) {
        (Some(p), Some(d)) if p.is_relative() && !p.exists() => Some(d.join(p)),
        (Some(p), _) => Some(p.to_path_buf()),
        (None, Some(d)) => {
            let name = match task {
                Task::B => "english.txt",
                Task::D => "arabic.txt",
            };
            Some(d.join(name)).filter(|p| p.exists())
        }
        (None, None) => None,
    }
}

/// `id<TAB>v1 v2 ... vd` per line. Every vector must have dimension `dim`
/// when given, otherwise the dimension of the first line.
pub fn read_embeddings(path: &Path, dim: Option<usize>) -> Result<BTreeMap<String, Vec<f64>>> {
    let mut out = BTreeMap::new();
    let mut expected = dim;
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(Error::io(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |m: String| Error::format(path, i + 1, m);
        let (id, rest) = line.split_once('\t').ok_or_else(|| bad("expected id<TAB>values".into()))?;
        let v = rest
            .split_whitespace()
            .map(|x| x.parse::<f64>().map_err(|e| bad(format!("{x:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        match expected {
            Some(d) if d != v.len() => return Err(bad(format!("dimension {} instead of {d}", v.len()))),
            None => expected = Some(v.len()),
            _ => {}
        }
        if out.insert(id.to_string(), v).is_some() {
            return Err(bad(format!("duplicate id {id:?}")));
        }
    }
    Ok(out)
}

/// A featurized record: the example plus the keys needed to rank it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleRecord {
    pub query_id: String,
    pub candidate_id: String,
    pub original_rank: i64,
    pub example: Example,
}

pub fn write_examples(path: &Path, examples: &[ExampleRecord]) -> Result<()> {
    let mut w = create(path)?;
    for e in examples {
        let s = serde_json::to_string(e).expect("examples serialize");
        writeln!(w, "{s}").map_err(Error::io(path))?;
    }
    w.flush().map_err(Error::io(path))
}

pub fn read_examples(path: &Path) -> Result<Vec<ExampleRecord>> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(Error::io(path))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::format(path, i + 1, e.to_string()))?);
    }
    if out.is_empty() {
        return Err(Error::File { path: path.to_path_buf(), message: "no examples".into() });
    }
    Ok(out)
}
