//! Re-ranking by score and SemEval-style ranking metrics.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MIN_RESAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RankError {
    #[error("query {query}: duplicate candidate id {candidate:?}")]
    DuplicateCandidate { query: String, candidate: String },
    #[error("query {query}: original rank {rank} used twice")]
    DuplicateRank { query: String, rank: u32 },
    #[error("query {query}: candidate {candidate:?} has no score")]
    MissingScore { query: String, candidate: String },
    #[error("query {query}: candidate {candidate:?} has a NaN score")]
    NanScore { query: String, candidate: String },
    #[error("no query groups to evaluate")]
    NoGroups,
    #[error("no query group has a relevant candidate")]
    NoRelevant,
    #[error("cutoff must be at least 1")]
    ZeroCutoff,
    #[error("paired samples differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("no paired samples")]
    EmptySample,
    #[error("at least {MIN_RESAMPLES} resamples required, got {0}")]
    TooFewResamples(usize),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Candidate {
    pub id: String,
    /// 1-based position in the search engine's list.
    pub original_rank: u32,
    pub relevant: bool,
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QueryGroup {
    query_id: String,
    candidates: Vec<Candidate>,
}

impl QueryGroup {
    /// Checks that candidate ids and original ranks are unique.
    pub fn new(query_id: impl Into<String>, candidates: Vec<Candidate>) -> Result<Self, RankError> {
        let query_id = query_id.into();
        let mut ids = BTreeSet::new();
        let mut ranks = BTreeSet::new();
        for c in &candidates {
            if !ids.insert(c.id.as_str()) {
                return Err(RankError::DuplicateCandidate { query: query_id, candidate: c.id.clone() });
            }
            if !ranks.insert(c.original_rank) {
                return Err(RankError::DuplicateRank { query: query_id, rank: c.original_rank });
            }
        }
        Ok(Self { query_id, candidates })
    }

    pub fn query_id(&self) -> &str {
        &self.query_id
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn candidates_mut(&mut self) -> impl Iterator<Item = &mut Candidate> {
        self.candidates.iter_mut()
    }

    pub fn total_relevant(&self) -> usize {
        self.candidates.iter().filter(|c| c.relevant).count()
    }
}

fn reranked(group: &QueryGroup) -> Result<Vec<&Candidate>, RankError> {
    let mut scored = Vec::with_capacity(group.candidates.len());
    for c in &group.candidates {
        let err = |f: fn(String, String) -> RankError| f(group.query_id.clone(), c.id.clone());
        let s = c.score.ok_or_else(|| err(|query, candidate| RankError::MissingScore { query, candidate }))?;
        if s.is_nan() {
            return Err(err(|query, candidate| RankError::NanScore { query, candidate }));
        }
        scored.push((s, c));
    }
    scored.sort_by(|(sa, a), (sb, b)| match sb.partial_cmp(sa) {
        Some(Ordering::Equal) | None => a.original_rank.cmp(&b.original_rank),
        Some(o) => o,
    });
    Ok(scored.into_iter().map(|(_, c)| c).collect())
}

/// Candidate ids by descending score; ties keep the original order.
pub fn rerank(group: &QueryGroup) -> Result<Vec<&str>, RankError> {
    Ok(reranked(group)?.into_iter().map(|c| c.id.as_str()).collect())
}

/// Relevance flags in re-ranked order.
pub fn ranked_gold(group: &QueryGroup) -> Result<Vec<bool>, RankError> {
    Ok(reranked(group)?.into_iter().map(|c| c.relevant).collect())
}

/// Sum of precision at each relevant position within the top `k`, over
/// `min(R, k)` where `R` counts all relevant entries. `None` when `R = 0`.
pub fn average_precision(ranked_gold: &[bool], k: usize) -> Option<f64> {
    let r = ranked_gold.iter().filter(|&&g| g).count();
    if r == 0 || k == 0 {
        return None;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, _) in ranked_gold.iter().take(k).enumerate().filter(|(_, &g)| g) {
        hits += 1;
        sum += hits as f64 / (i + 1) as f64;
    }
    Some(sum / r.min(k) as f64)
}

/// Relevant entries in the top `k` over `min(R, k)`. `None` when `R = 0`.
pub fn recall_at(ranked_gold: &[bool], k: usize) -> Option<f64> {
    let r = ranked_gold.iter().filter(|&&g| g).count();
    if r == 0 || k == 0 {
        return None;
    }
    let found = ranked_gold.iter().take(k).filter(|&&g| g).count();
    Some(found as f64 / r.min(k) as f64)
}

/// `1 / position` of the first relevant entry in the top `k`, else 0.
pub fn reciprocal_rank(ranked_gold: &[bool], k: usize) -> f64 {
    ranked_gold
        .iter()
        .take(k)
        .position(|&g| g)
        .map_or(0.0, |p| 1.0 / (p + 1) as f64)
}

/// Scores on a 0..=100 scale, averaged over groups with a relevant candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Metrics {
    pub map: f64,
    pub avg_rec: f64,
    pub mrr: f64,
    /// Groups that entered the averages.
    pub groups: usize,
}

/// Metrics over lists already in ranked order.
pub fn evaluate_ranked(lists: &[Vec<bool>], k: usize) -> Result<Metrics, RankError> {
    if k == 0 {
        return Err(RankError::ZeroCutoff);
    }
    if lists.is_empty() {
        return Err(RankError::NoGroups);
    }
    let (mut ap, mut rec, mut rr, mut n) = (0.0, 0.0, 0.0, 0usize);
    for l in lists {
        if let (Some(a), Some(r)) = (average_precision(l, k), recall_at(l, k)) {
            ap += a;
            rec += r;
            rr += reciprocal_rank(l, k);
            n += 1;
        }
    }
    if n == 0 {
        return Err(RankError::NoRelevant);
    }
    let scale = 100.0 / n as f64;
    Ok(Metrics { map: ap * scale, avg_rec: rec * scale, mrr: rr * scale, groups: n })
}

/// Re-ranks every group by score and computes MAP, AvgRec and MRR at `k`.
pub fn evaluate(groups: &[QueryGroup], k: usize) -> Result<Metrics, RankError> {
    let lists = groups.iter().map(ranked_gold).collect::<Result<Vec<_>, _>>()?;
    evaluate_ranked(&lists, k)
}

/// Per-query AP (0..=1) for groups with a relevant candidate, in input order.
pub fn per_query_ap(groups: &[QueryGroup], k: usize) -> Result<Vec<(String, f64)>, RankError> {
    if k == 0 {
        return Err(RankError::ZeroCutoff);
    }
    let mut out = Vec::new();
    for g in groups {
        if let Some(ap) = average_precision(&ranked_gold(g)?, k) {
            out.push((g.query_id.clone(), ap));
        }
    }
    Ok(out)
}

/// Two-sided paired sign-flip test on the mean difference.
/// Returns `(hits + 1) / (resamples + 1)`.
pub fn randomization_test(a: &[f64], b: &[f64], resamples: usize, seed: u64) -> Result<f64, RankError> {
    if a.len() != b.len() {
        return Err(RankError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(RankError::EmptySample);
    }
    if resamples < MIN_RESAMPLES {
        return Err(RankError::TooFewResamples(resamples));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let observed = diffs.iter().sum::<f64>().abs();
    // absorbs summation round-off so exact ties count as ties
    let threshold = observed - 1e-12 * (1.0 + observed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..resamples {
        let s: f64 = diffs.iter().map(|&d| if rng.random::<bool>() { d } else { -d }).sum();
        if s.abs() >= threshold {
            hits += 1;
        }
    }
    Ok((hits + 1) as f64 / (resamples + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::vec;

    fn group(id: &str, rows: &[(u32, bool, f64)]) -> QueryGroup {
        let cands = rows
            .iter()
            .map(|&(rank, relevant, score)| Candidate {
                id: format!("{id}_c{rank}"),
                original_rank: rank,
                relevant,
                score: Some(score),
            })
            .collect();
        QueryGroup::new(id, cands).unwrap()
    }

    #[test]
    fn rerank_sorts_and_breaks_ties() {
        let g = group("q", &[(1, false, 0.1), (2, false, 0.9), (3, false, 0.5)]);
        assert_eq!(rerank(&g).unwrap(), ["q_c2", "q_c3", "q_c1"]);
        let flat = group("q", &[(3, false, 0.0), (1, false, 0.0), (2, false, 0.0)]);
        assert_eq!(rerank(&flat).unwrap(), ["q_c1", "q_c2", "q_c3"]);
        let inv = group("q", &[(2, false, 0.5), (1, false, 1.0), (3, false, 1.0 / 3.0)]);
        assert_eq!(rerank(&inv).unwrap(), ["q_c1", "q_c2", "q_c3"]);
    }

    #[test]
    fn rerank_errors() {
        let mut g = group("q", &[(1, false, 0.1)]);
        g.candidates_mut().for_each(|c| c.score = None);
        assert!(matches!(rerank(&g), Err(RankError::MissingScore { .. })));
        let dup = vec![
            Candidate { id: "a".into(), original_rank: 1, relevant: false, score: None },
            Candidate { id: "a".into(), original_rank: 2, relevant: false, score: None },
        ];
        assert!(matches!(QueryGroup::new("q", dup), Err(RankError::DuplicateCandidate { .. })));
        let clash = vec![
            Candidate { id: "a".into(), original_rank: 1, relevant: false, score: None },
            Candidate { id: "b".into(), original_rank: 1, relevant: false, score: None },
        ];
        assert!(matches!(QueryGroup::new("q", clash), Err(RankError::DuplicateRank { rank: 1, .. })));
    }

    #[test]
    fn ap_fixtures() {
        let ap = average_precision(&[true, false, true, false], 4).unwrap();
        assert!((ap - 5.0 / 6.0).abs() < 1e-12);
        assert_eq!(average_precision(&[true, true, true], 3), Some(1.0));
        assert_eq!(average_precision(&[false, false, true], 2), Some(0.0));
        assert_eq!(average_precision(&[false, false], 2), None);
        // R > k: denominator is k
        assert_eq!(average_precision(&[true, false, true, true], 2), Some(0.5));
    }

    #[test]
    fn evaluate_fixtures() {
        let top = [group("a", &[(1, true, 1.0), (2, false, 0.5)]), group("b", &[(1, false, 0.2), (2, true, 0.9)])];
        let m = evaluate(&top, 10).unwrap();
        assert_eq!((m.map, m.avg_rec, m.mrr), (100.0, 100.0, 100.0));
        let second = [group("a", &[(1, false, 1.0), (2, true, 0.5), (3, false, 0.1)])];
        assert_eq!(evaluate(&second, 10).unwrap().mrr, 50.0);
        let two = [
            group("a", &[(1, true, 1.0)]),
            group("b", &[(1, true, 0.9), (2, false, 0.8), (3, true, 0.7), (4, false, 0.6)]),
        ];
        let m = evaluate(&two, 10).unwrap();
        assert!((m.map - 100.0 * (1.0 + 5.0 / 6.0) / 2.0).abs() < 1e-12);
        assert!((m.map - 91.67).abs() < 5e-3);
    }

    #[test]
    fn groups_without_relevant_are_skipped() {
        let gs = [group("a", &[(1, false, 1.0)]), group("b", &[(1, false, 0.1), (2, true, 0.2)])];
        let m = evaluate(&gs, 10).unwrap();
        assert_eq!(m.groups, 1);
        assert_eq!(m.map, 100.0);
        assert_eq!(evaluate(&gs[..1], 10), Err(RankError::NoRelevant));
        assert_eq!(evaluate(&[], 10), Err(RankError::NoGroups));
    }

    #[test]
    fn randomization_fixtures() {
        let a: Vec<f64> = (0..50).map(|i| (i % 7) as f64 / 10.0).collect();
        assert_eq!(randomization_test(&a, &a, 1000, 1).unwrap(), 1.0);
        let b: Vec<f64> = a.iter().map(|x| x + 0.3).collect();
        let p = randomization_test(&b, &a, 10_000, 1).unwrap();
        assert!(p < 0.05);
        assert_eq!(p, randomization_test(&a, &b, 10_000, 1).unwrap());
        assert_eq!(randomization_test(&a, &a[1..], 1000, 1), Err(RankError::LengthMismatch(50, 49)));
        assert_eq!(randomization_test(&a, &a, 999, 1), Err(RankError::TooFewResamples(999)));
    }
}
