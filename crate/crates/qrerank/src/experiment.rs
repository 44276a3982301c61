//! Featurize, build kernels, train, score, re-rank and evaluate.

use std::path::Path;

use qrerank_core::corpus::{build_examples, query_groups, CorpusRecord, FeatureConfig, Task};
use qrerank_core::kernel::{KernelSpace, PreparedExample};
use qrerank_core::rankeval::{evaluate, per_query_ap, randomization_test, Metrics, QueryGroup};
use qrerank_core::svm::{decision, train_smo, TrainedModel};
use qrerank_core::{Example, Gram, KernelConfig, KernelError};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::data::{read_embeddings, read_stopwords, resolve_stopwords, Corpus};
use crate::error::{Error, Result};
use crate::formats::{write_predictions, Prediction};

pub const PREDICTIONS_FILE: &str = "predictions.tsv";
pub const REPORT_FILE: &str = "report.json";
pub const CONFIG_FILE: &str = "config.toml";

/// Feature settings with the configured stopword list filled in.
pub fn feature_config(cfg: &RunConfig) -> Result<FeatureConfig> {
    let mut features = cfg.effective_features();
    if let Some(path) = resolve_stopwords(cfg.stopwords.as_deref(), cfg.task) {
        let words = read_stopwords(&path)?;
        log::info!("{} stopwords from {}", words.len(), path.display());
        features.similarity.stopwords = words.clone();
        features.rel.stopwords = words;
    }
    Ok(features)
}

/// Builds one example per record. Each record is featurized on its own,
/// so no statistic crosses split boundaries.
pub fn featurize(corpus: &Corpus, cfg: &RunConfig) -> Result<Vec<Example>> {
    let features = feature_config(cfg)?;
    let table = match (&cfg.embeddings, features.embeddings) {
        (Some(p), true) => Some(read_embeddings(p, Some(features.embedding_dim))?),
        _ => None,
    };
    Ok(build_examples(&corpus.records, corpus.task, &features, table.as_ref())?)
}

/// Training examples and any later examples compiled into one kernel space.
pub struct Prepared {
    pub space: KernelSpace,
    pub train: Vec<PreparedExample>,
}

impl Prepared {
    pub fn new(train: &[Example], kernel: &KernelConfig) -> Result<Self> {
        if train.is_empty() {
            return Err(KernelError::NoExamples.into());
        }
        let mut space = KernelSpace::new(kernel)?;
        let train = train.iter().map(|e| space.prepare(e)).collect::<std::result::Result<_, _>>()?;
        Ok(Self { space, train })
    }

    /// Gram matrix of the training examples; rows are computed in parallel.
    pub fn gram(&self) -> Gram {
        let space = &self.space;
        let train = &self.train;
        let lower: Vec<Vec<f64>> = (0..train.len())
            .into_par_iter()
            .map(|i| (0..=i).map(|j| space.kernel(&train[i], &train[j])).collect())
            .collect();
        Gram::symmetric_from_fn(train.len(), space.config().fingerprint(), |i, j| lower[i][j])
    }

    /// Decision values for `test` under `model`.
    pub fn score(&mut self, model: &TrainedModel, test: &[Example]) -> Result<Vec<f64>> {
        if model.n_train != self.train.len() {
            return Err(Error::Config(format!(
                "model was trained on {} examples, {} given",
                model.n_train,
                self.train.len()
            )));
        }
        let test = test.iter().map(|e| self.space.prepare(e)).collect::<std::result::Result<Vec<_>, _>>()?;
        let space = &self.space;
        let support: Vec<&PreparedExample> = model.support_indices.iter().map(|&i| &self.train[i]).collect();
        test.par_iter()
            .map(|t| {
                let row: Vec<f64> = support.iter().map(|s| space.kernel(s, t)).collect();
                Ok(decision(model, &row)?)
            })
            .collect()
    }
}

pub fn labels(examples: &[Example]) -> Result<Vec<i8>> {
    examples
        .iter()
        .enumerate()
        .map(|(i, e)| e.label.ok_or_else(|| Error::Config(format!("example {i} has no label"))))
        .collect()
}

/// Scores each record by its inverse original rank: the search engine's own order.
pub fn baseline_scores(records: &[CorpusRecord]) -> Vec<f64> {
    records.iter().map(|r| 1.0 / r.original_rank as f64).collect()
}

pub fn predictions(records: &[CorpusRecord], task: Task, scores: &[f64]) -> Result<Vec<Prediction>> {
    let groups = query_groups(records, task, Some(scores))?;
    Ok(groups_to_predictions(&groups))
}

pub fn groups_to_predictions(groups: &[QueryGroup]) -> Vec<Prediction> {
    groups
        .iter()
        .flat_map(|g| {
            g.candidates().iter().map(move |c| Prediction {
                query_id: g.query_id().to_string(),
                candidate_id: c.id.clone(),
                original_rank: c.original_rank,
                score: c.score.unwrap_or(f64::NAN),
                relevant: c.relevant,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsReport {
    pub map: f64,
    pub avg_rec: f64,
    pub mrr: f64,
    pub groups: usize,
}

impl From<Metrics> for MetricsReport {
    fn from(m: Metrics) -> Self {
        Self { map: m.map, avg_rec: m.avg_rec, mrr: m.mrr, groups: m.groups }
    }
}

/// Model against baseline with the two-sided randomization test on per-query AP.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub model: MetricsReport,
    pub baseline: MetricsReport,
    pub p_value: f64,
}

pub fn compare(model: &[QueryGroup], baseline: &[QueryGroup], k: usize, resamples: usize, seed: u64) -> Result<Comparison> {
    let a: Vec<f64> = per_query_ap(model, k)?.into_iter().map(|(_, ap)| ap).collect();
    let b: Vec<f64> = per_query_ap(baseline, k)?.into_iter().map(|(_, ap)| ap).collect();
    Ok(Comparison {
        model: evaluate(model, k)?.into(),
        baseline: evaluate(baseline, k)?.into(),
        p_value: randomization_test(&a, &b, resamples, seed)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub task: String,
    pub seed: u64,
    pub kernel_fingerprint: String,
    pub kernel_config: String,
    pub model_checksum: String,
    pub cutoff: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub support_vectors: usize,
    pub iterations: usize,
    #[serde(flatten)]
    pub comparison: Comparison,
}

/// Trains on `train`, re-ranks `test`, and writes the predictions, the
/// report and the effective configuration to `out_dir`.
pub fn run_experiment(train: &Corpus, test: &Corpus, cfg: &RunConfig, out_dir: &Path) -> Result<Report> {
    cfg.validate()?;
    if train.task != cfg.task || test.task != cfg.task {
        return Err(Error::Config("corpus task differs from the configured task".into()));
    }
    let train_ex = featurize(train, cfg)?;
    let test_ex = featurize(test, cfg)?;
    log::info!("featurized {} training and {} test examples", train_ex.len(), test_ex.len());

    let mut prepared = Prepared::new(&train_ex, &cfg.kernel)?;
    let gram = prepared.gram();
    let model = train_smo(&gram, &labels(&train_ex)?, &cfg.train_config())?;
    log::info!(
        "trained: {} support vectors, {} iterations, dual objective {}",
        model.support_indices.len(),
        model.iterations,
        model.dual_objective
    );
    let scores = prepared.score(&model, &test_ex)?;

    let k = cfg.cutoff();
    let model_groups = query_groups(&test.records, cfg.task, Some(&scores))?;
    let base_groups = query_groups(&test.records, cfg.task, Some(&baseline_scores(&test.records)))?;
    let comparison = compare(&model_groups, &base_groups, k, cfg.resamples, cfg.seed)?;

    std::fs::create_dir_all(out_dir).map_err(Error::io(out_dir))?;
    write_predictions(&out_dir.join(PREDICTIONS_FILE), &groups_to_predictions(&model_groups))?;
    let report = Report {
        task: cfg.task.to_string(),
        seed: cfg.seed,
        kernel_fingerprint: cfg.kernel.fingerprint(),
        kernel_config: cfg.kernel.canonical(),
        model_checksum: model.checksum.clone(),
        cutoff: k,
        n_train: train_ex.len(),
        n_test: test_ex.len(),
        support_vectors: model.support_indices.len(),
        iterations: model.iterations,
        comparison,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    let path = out_dir.join(REPORT_FILE);
    std::fs::write(&path, json + "\n").map_err(Error::io(&path))?;
    let path = out_dir.join(CONFIG_FILE);
    std::fs::write(&path, cfg.to_toml()).map_err(Error::io(&path))?;
    Ok(report)
}
