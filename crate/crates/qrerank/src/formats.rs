//! Text formats for Gram matrices, trained models and predictions.
//!
//! Gram file:
//! ```text
//! qrerank-gram 1
//! fingerprint <16 hex digits>
//! n <rows>
//! <row 0: 1 value>
//! <row 1: 2 values>
//! ...
//! ```
//! Only the lower triangle is stored, row-major.
//!
//! Model file:
//! ```text
//! qrerank-model 1
//! kernel_fingerprint <hex>
//! kernel_config <canonical kernel configuration>
//! checksum <hex>
//! n_train <n>
//! iterations <n>
//! dual_objective <value>
//! bias <value>
//! support <m>
//! <index> <alpha_i * y_i>      (m lines, ascending index)
//! end
//! ```
//! Floats are written in Rust's shortest round-trip notation, so reading a
//! file back reproduces every value bit for bit.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use qrerank_core::rankeval::{Candidate, QueryGroup};
use qrerank_core::svm::TrainedModel;
use qrerank_core::{Gram, KernelConfig};

use crate::error::{Error, Result};

pub const GRAM_MAGIC: &str = "qrerank-gram 1";
pub const MODEL_MAGIC: &str = "qrerank-model 1";

fn write_file(path: &Path, text: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(Error::io(path))?;
    f.write_all(text.as_bytes()).map_err(Error::io(path))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(Error::io(path))
}

/// Line cursor that reports 1-based positions in errors.
struct Lines<'a> {
    path: &'a Path,
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(path: &'a Path, text: &'a str) -> Self {
        Self { path, inner: text.lines().enumerate(), last: 0 }
    }

    fn next(&mut self) -> Result<&'a str> {
        match self.inner.next() {
            Some((i, l)) => {
                self.last = i + 1;
                Ok(l)
            }
            None => Err(Error::format(self.path, self.last + 1, "unexpected end of file (truncated?)")),
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::format(self.path, self.last, message)
    }

    fn keyed(&mut self, key: &str) -> Result<&'a str> {
        let l = self.next()?;
        match l.split_once(' ') {
            Some((k, v)) if k == key => Ok(v),
            _ => Err(self.err(format!("expected `{key} <value>`"))),
        }
    }

    fn parsed<T: FromStr>(&mut self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let v = self.keyed(key)?;
        v.parse().map_err(|e| self.err(format!("{key}: {e}")))
    }

    fn rest_is_empty(&mut self) -> Result<()> {
        for (i, l) in self.inner.by_ref() {
            if !l.trim().is_empty() {
                return Err(Error::format(self.path, i + 1, "trailing content"));
            }
        }
        Ok(())
    }
}

pub fn write_gram(path: &Path, g: &Gram) -> Result<()> {
    let mut s = format!("{GRAM_MAGIC}\nfingerprint {}\nn {}\n", g.fingerprint(), g.len());
    for i in 0..g.len() {
        let row: Vec<String> = g.row(i)[..=i].iter().map(|v| v.to_string()).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    write_file(path, &s)
}

pub fn read_gram(path: &Path) -> Result<Gram> {
    let text = read_file(path)?;
    let mut lines = Lines::new(path, &text);
    if lines.next()? != GRAM_MAGIC {
        return Err(lines.err(format!("expected `{GRAM_MAGIC}`")));
    }
    let fingerprint = lines.keyed("fingerprint")?.to_string();
    let n: usize = lines.parsed("n")?;
    let mut lower: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let l = lines.next()?;
        let row = l
            .split_whitespace()
            .map(|x| x.parse::<f64>().map_err(|e| lines.err(format!("{x:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        if row.len() != i + 1 {
            return Err(lines.err(format!("row {i} has {} values, expected {}", row.len(), i + 1)));
        }
        lower.push(row);
    }
    lines.rest_is_empty()?;
    Ok(Gram::symmetric_from_fn(n, fingerprint, |i, j| lower[i][j]))
}

pub fn write_model(path: &Path, m: &TrainedModel, kernel: &KernelConfig) -> Result<()> {
    let mut s = String::new();
    s.push_str(MODEL_MAGIC);
    s.push('\n');
    s.push_str(&format!("kernel_fingerprint {}\n", m.kernel_fingerprint));
    s.push_str(&format!("kernel_config {}\n", kernel.canonical()));
    s.push_str(&format!("checksum {}\n", m.checksum));
    s.push_str(&format!("n_train {}\n", m.n_train));
    s.push_str(&format!("iterations {}\n", m.iterations));
    s.push_str(&format!("dual_objective {}\n", m.dual_objective));
    s.push_str(&format!("bias {}\n", m.bias));
    s.push_str(&format!("support {}\n", m.support_indices.len()));
    for (i, c) in m.support_indices.iter().zip(&m.dual_coefs) {
        s.push_str(&format!("{i} {c}\n"));
    }
    s.push_str("end\n");
    write_file(path, &s)
}

/// Reads a model and compares its kernel fingerprint with `current`.
/// A mismatch is an error when `strict`, otherwise a warning.
pub fn read_model(path: &Path, current: Option<&KernelConfig>, strict: bool) -> Result<TrainedModel> {
    let text = read_file(path)?;
    let mut lines = Lines::new(path, &text);
    if lines.next()? != MODEL_MAGIC {
        return Err(lines.err(format!("expected `{MODEL_MAGIC}`")));
    }
    let kernel_fingerprint = lines.keyed("kernel_fingerprint")?.to_string();
    lines.keyed("kernel_config")?;
    let checksum = lines.keyed("checksum")?.to_string();
    let n_train: usize = lines.parsed("n_train")?;
    let iterations: usize = lines.parsed("iterations")?;
    let dual_objective: f64 = lines.parsed("dual_objective")?;
    let bias: f64 = lines.parsed("bias")?;
    let m: usize = lines.parsed("support")?;
    let mut support_indices = Vec::with_capacity(m);
    let mut dual_coefs = Vec::with_capacity(m);
    for _ in 0..m {
        let l = lines.next()?;
        let (i, c) = l.split_once(' ').ok_or_else(|| lines.err("expected `<index> <coefficient>`"))?;
        let i: usize = i.parse().map_err(|e| lines.err(format!("index: {e}")))?;
        let c: f64 = c.parse().map_err(|e| lines.err(format!("coefficient: {e}")))?;
        if i >= n_train || support_indices.last().is_some_and(|&p| p >= i) {
            return Err(lines.err("support indices must be ascending and below n_train"));
        }
        support_indices.push(i);
        dual_coefs.push(c);
    }
    if lines.next()? != "end" {
        return Err(lines.err("expected `end`"));
    }
    lines.rest_is_empty()?;

    if let Some(cfg) = current {
        let fp = cfg.fingerprint();
        if fp != kernel_fingerprint {
            if strict {
                return Err(Error::FingerprintMismatch { model: kernel_fingerprint, current: fp });
            }
            log::warn!("{}: model kernel fingerprint {kernel_fingerprint} differs from configuration {fp}", path.display());
        }
    }
    Ok(TrainedModel {
        support_indices,
        dual_coefs,
        bias,
        kernel_fingerprint,
        checksum,
        n_train,
        iterations,
        dual_objective,
    })
}

/// One predictions TSV line.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub query_id: String,
    pub candidate_id: String,
    pub original_rank: u32,
    pub score: f64,
    pub relevant: bool,
}

/// `query_id \t candidate_id \t rank \t score \t true|false`, in the given order.
pub fn write_predictions(path: &Path, preds: &[Prediction]) -> Result<()> {
    let mut s = String::new();
    for p in preds {
        s.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            p.query_id, p.candidate_id, p.original_rank, p.score, p.relevant
        ));
    }
    write_file(path, &s)
}

pub fn read_predictions(path: &Path) -> Result<Vec<Prediction>> {
    let text = read_file(path)?;
    let mut out = Vec::new();
    for (i, l) in text.lines().enumerate() {
        if l.trim().is_empty() {
            continue;
        }
        let bad = |m: String| Error::format(path, i + 1, m);
        let f: Vec<&str> = l.split('\t').collect();
        if f.len() != 5 {
            return Err(bad(format!("expected 5 tab-separated fields, found {}", f.len())));
        }
        out.push(Prediction {
            query_id: f[0].to_string(),
            candidate_id: f[1].to_string(),
            original_rank: f[2].parse().map_err(|e| bad(format!("rank: {e}")))?,
            score: f[3].parse().map_err(|e| bad(format!("score: {e}")))?,
            relevant: match f[4] {
                "true" => true,
                "false" => false,
                other => return Err(bad(format!("relevance must be true or false, got {other:?}"))),
            },
        });
    }
    if out.is_empty() {
        return Err(Error::File { path: path.to_path_buf(), message: "no predictions".into() });
    }
    Ok(out)
}

/// Groups predictions by query in first-appearance order.
pub fn prediction_groups(preds: &[Prediction]) -> Result<Vec<QueryGroup>> {
    let mut order: Vec<&str> = Vec::new();
    let mut by_query: std::collections::HashMap<&str, Vec<Candidate>> = std::collections::HashMap::new();
    for p in preds {
        let list = by_query.entry(&p.query_id).or_insert_with(|| {
            order.push(&p.query_id);
            Vec::new()
        });
        list.push(Candidate {
            id: p.candidate_id.clone(),
            original_rank: p.original_rank,
            relevant: p.relevant,
            score: Some(p.score),
        });
    }
    order
        .into_iter()
        .map(|q| Ok(QueryGroup::new(q, by_query.remove(q).unwrap_or_default())?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use qrerank_core::kernel::TkKind;

    fn model() -> TrainedModel {
        TrainedModel {
            support_indices: vec![0, 3],
            dual_coefs: vec![0.1 + 0.2, -1.0 / 3.0],
            bias: -0.123456789012345,
            kernel_fingerprint: KernelConfig::default().fingerprint(),
            checksum: "00ff00ff00ff00ff".into(),
            n_train: 5,
            iterations: 17,
            dual_objective: 0.75,
        }
    }

    #[test]
    fn gram_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.txt");
        let g = Gram::symmetric_from_fn(3, "abc", |i, j| 1.0 / (1 + i + j) as f64 + 1e-17 * i as f64);
        write_gram(&p, &g).unwrap();
        assert_eq!(read_gram(&p).unwrap(), g);
        let text = fs::read_to_string(&p).unwrap();
        let last_row = text.trim_end().rfind('\n').unwrap();
        fs::write(&p, &text[..last_row]).unwrap();
        assert!(read_gram(&p).unwrap_err().to_string().contains("truncated"));
        fs::write(&p, text.replacen("\n0.5 ", "\n0.5 0.5 ", 1)).unwrap();
        assert!(read_gram(&p).is_err());
    }

    #[test]
    fn model_round_trip_and_truncation() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.txt");
        let m = model();
        let cfg = KernelConfig::default();
        write_model(&p, &m, &cfg).unwrap();
        assert_eq!(read_model(&p, Some(&cfg), true).unwrap(), m);
        let text = fs::read_to_string(&p).unwrap();
        let cut = text.rfind("end").unwrap();
        fs::write(&p, &text[..cut]).unwrap();
        let err = read_model(&p, None, false).unwrap_err().to_string();
        assert!(err.contains("truncated"), "{err}");
    }

    #[test]
    fn strict_fingerprint_check() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.txt");
        let stk = KernelConfig { tk_kind: TkKind::Stk, ..KernelConfig::default() };
        let mut m = model();
        m.kernel_fingerprint = stk.fingerprint();
        write_model(&p, &m, &stk).unwrap();
        let ptk = KernelConfig::default();
        assert!(matches!(read_model(&p, Some(&ptk), true), Err(Error::FingerprintMismatch { .. })));
        assert_eq!(read_model(&p, Some(&ptk), false).unwrap(), m);
    }

    #[test]
    fn predictions_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("p.tsv");
        let preds = vec![
            Prediction { query_id: "q2".into(), candidate_id: "a".into(), original_rank: 1, score: 0.5, relevant: true },
            Prediction { query_id: "q1".into(), candidate_id: "b".into(), original_rank: 1, score: -2.0, relevant: false },
            Prediction { query_id: "q2".into(), candidate_id: "c".into(), original_rank: 2, score: 0.7, relevant: false },
        ];
        write_predictions(&p, &preds).unwrap();
        assert_eq!(read_predictions(&p).unwrap(), preds);
        let groups = prediction_groups(&preds).unwrap();
        assert_eq!(groups[0].query_id(), "q2");
        assert_eq!(groups[0].candidates().len(), 2);
        fs::write(&p, "q\tc\t1\t0.5\tyes\n").unwrap();
        assert!(read_predictions(&p).unwrap_err().to_string().contains(":1:"));
    }
}
