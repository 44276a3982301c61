//! Synthetic corpora for end-to-end tests.
#![allow(dead_code)]

use qrerank_core::corpus::{CorpusRecord, GoldLabel};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn record(query_id: String, candidate_id: String, rank: i64, qo: String, qs: String, relevant: bool) -> CorpusRecord {
    CorpusRecord {
        query_id,
        candidate_id,
        original_rank: rank,
        qo_text: qo,
        qs_text: qs,
        gold_label: if relevant { GoldLabel::Relevant } else { GoldLabel::Irrelevant },
        qo_trees: None,
        qs_trees: None,
        comment_text: None,
        qo_embedding_id: None,
        qs_embedding_id: None,
    }
}

/// Task B records where a relevant candidate repeats the query text and an
/// irrelevant one shares no word with it, so every similarity equals the
/// gold label. Original ranks are shuffled within each query, and every
/// query has at least one relevant and one irrelevant candidate.
pub fn perfect_feature_corpus(seed: u64, prefix: &str, queries: usize, per_query: usize) -> Vec<CorpusRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for q in 0..queries {
        let qid = format!("{prefix}{q}");
        let words = rng.random_range(4..=8);
        let text: Vec<String> = (0..words).map(|w| format!("{qid}w{w}")).collect();
        let text = text.join(" ");
        let mut ranks: Vec<i64> = (1..=per_query as i64).collect();
        ranks.shuffle(&mut rng);
        let mut gold: Vec<bool> = (0..per_query).map(|_| rng.random_bool(0.4)).collect();
        gold[0] = true;
        gold[1] = false;
        gold.shuffle(&mut rng);
        for (c, (&rank, &rel)) in ranks.iter().zip(&gold).enumerate() {
            let cid = format!("{qid}_c{c}");
            let qs = if rel {
                text.clone()
            } else {
                (0..rng.random_range(4..=8)).map(|w| format!("{cid}x{w}")).collect::<Vec<_>>().join(" ")
            };
            out.push(record(qid.clone(), cid, rank, text.clone(), qs, rel));
        }
    }
    out
}

/// Records with random overlapping texts and parse trees.
pub fn tree_corpus(seed: u64, queries: usize, per_query: usize) -> Vec<CorpusRecord> {
    const WORDS: [&str; 8] = ["visa", "qatar", "job", "wife", "salary", "doha", "bank", "car"];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sentence = |rng: &mut ChaCha8Rng| {
        let w: Vec<&str> = (0..4).map(|_| WORDS[rng.random_range(0..WORDS.len())]).collect();
        let text = w.join(" ");
        let tree = format!("(S (NP (NN {})) (VP (VB {}) (NP (DT {}) (NN {}))))", w[0], w[1], w[2], w[3]);
        (text, tree)
    };
    let mut out = Vec::new();
    for q in 0..queries {
        let (qo, qo_tree) = sentence(&mut rng);
        for c in 0..per_query {
            let (qs, qs_tree) = sentence(&mut rng);
            let mut r = record(format!("q{q}"), format!("q{q}_c{c}"), c as i64 + 1, qo.clone(), qs, c % 3 == 0);
            r.qo_trees = Some(vec![qo_tree.clone()]);
            r.qs_trees = Some(vec![qs_tree]);
            out.push(r);
        }
    }
    out
}
