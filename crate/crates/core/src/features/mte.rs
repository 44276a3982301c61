//! Machine-translation evaluation scores used as question/comment features.
//!
//! The question plays the role of the candidate translation and the comment
//! the single reference. Both sequences are expected to keep stopwords.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{FeatureError, FeatureVector, TokenSeq};

pub const MTE_FEATURE_NAMES: [&str; 7] = [
    "mte_bleu",
    "mte_ter_noshift",
    "mte_meteor_lite",
    "mte_nist",
    "mte_precision",
    "mte_recall",
    "mte_length_ratio",
];

const BLEU_ORDER: usize = 4;
const NIST_ORDER: usize = 5;

fn ngram_counts(tokens: &[String], n: usize) -> BTreeMap<&[String], usize> {
    let mut m = BTreeMap::new();
    if n > 0 {
        for w in tokens.windows(n) {
            *m.entry(w).or_insert(0) += 1;
        }
    }
    m
}

fn clipped_matches(cand: &BTreeMap<&[String], usize>, refr: &BTreeMap<&[String], usize>) -> usize {
    cand.iter().map(|(g, &c)| c.min(refr.get(g).copied().unwrap_or(0))).sum()
}

/// Sentence BLEU up to 4-grams. Orders above one use add-one smoothing;
/// the brevity penalty applies when the candidate is shorter than the reference.
pub fn sentence_bleu(cand: &[String], refr: &[String]) -> f64 {
    if cand.is_empty() || refr.is_empty() {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for n in 1..=BLEU_ORDER {
        let cc = ngram_counts(cand, n);
        let rc = ngram_counts(refr, n);
        let matches = clipped_matches(&cc, &rc) as f64;
        let total = cand.len().saturating_sub(n - 1) as f64;
        let p = if n == 1 { matches / total } else { (matches + 1.0) / (total + 1.0) };
        if p == 0.0 {
            return 0.0;
        }
        log_sum += libm::log(p);
    }
    let (c, r) = (cand.len() as f64, refr.len() as f64);
    let bp = if c < r { libm::exp(1.0 - r / c) } else { 1.0 };
    bp * libm::exp(log_sum / BLEU_ORDER as f64)
}

pub fn edit_distance(a: &[String], b: &[String]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Word edit distance (no block shifts) over reference length, capped at 1.
pub fn ter_noshift(cand: &[String], refr: &[String]) -> f64 {
    if refr.is_empty() {
        return 0.0;
    }
    (edit_distance(cand, refr) as f64 / refr.len() as f64).min(1.0)
}

/// Aligns exact unigram matches left to right, preferring the reference
/// position right after the previous match so contiguous runs stay whole.
fn align(cand: &[String], refr: &[String]) -> Vec<(usize, usize)> {
    let mut used = vec![false; refr.len()];
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for (i, w) in cand.iter().enumerate() {
        let next = pairs.last().map(|&(_, j)| j + 1);
        let pick = next
            .filter(|&j| j < refr.len() && !used[j] && refr[j] == *w)
            .or_else(|| (0..refr.len()).find(|&j| !used[j] && refr[j] == *w));
        if let Some(j) = pick {
            used[j] = true;
            pairs.push((i, j));
        }
    }
    pairs
}

/// Exact-match METEOR: `10PR / (R + 9P)` times `1 - 0.5 (chunks / matches)^3`.
pub fn meteor_lite(cand: &[String], refr: &[String]) -> f64 {
    let pairs = align(cand, refr);
    if pairs.is_empty() {
        return 0.0;
    }
    let m = pairs.len() as f64;
    let p = m / cand.len() as f64;
    let r = m / refr.len() as f64;
    let fmean = 10.0 * p * r / (r + 9.0 * p);
    let chunks = 1 + pairs
        .windows(2)
        .filter(|w| !(w[1].0 == w[0].0 + 1 && w[1].1 == w[0].1 + 1))
        .count();
    let frag = chunks as f64 / m;
    fmean * (1.0 - 0.5 * frag * frag * frag)
}

/// NIST up to 5-grams; information weights come from the reference itself.
pub fn nist(cand: &[String], refr: &[String]) -> f64 {
    if cand.is_empty() || refr.is_empty() {
        return 0.0;
    }
    let ref_counts: Vec<BTreeMap<&[String], usize>> = (0..=NIST_ORDER).map(|n| ngram_counts(refr, n)).collect();
    let info = |g: &[String]| -> f64 {
        let n = g.len();
        let full = ref_counts[n][g] as f64;
        let prefix = if n == 1 { refr.len() as f64 } else { ref_counts[n - 1][&g[..n - 1]] as f64 };
        libm::log2(prefix / full)
    };
    let mut score = 0.0;
    for n in 1..=NIST_ORDER {
        let total = cand.len().saturating_sub(n - 1);
        if total == 0 {
            break;
        }
        let gained: f64 = ngram_counts(cand, n)
            .iter()
            .filter_map(|(g, &c)| ref_counts[n].get(g).map(|&r| c.min(r) as f64 * info(g)))
            .sum();
        score += gained / total as f64;
    }
    // beta makes the penalty 0.5 at a length ratio of 2/3
    let beta = libm::log(0.5) / libm::pow(libm::log(1.5), 2.0);
    let ratio = (cand.len() as f64 / refr.len() as f64).min(1.0);
    score * libm::exp(beta * libm::pow(libm::log(ratio), 2.0))
}

/// Clipped unigram matches over candidate and reference lengths.
pub fn unigram_precision_recall(cand: &[String], refr: &[String]) -> (f64, f64) {
    let m = clipped_matches(&ngram_counts(cand, 1), &ngram_counts(refr, 1)) as f64;
    let p = if cand.is_empty() { 0.0 } else { m / cand.len() as f64 };
    let r = if refr.is_empty() { 0.0 } else { m / refr.len() as f64 };
    (p, r)
}

/// The seven MTE features, in [`MTE_FEATURE_NAMES`] order.
pub fn mte_vector(question: &TokenSeq, comment: &TokenSeq) -> Result<FeatureVector, FeatureError> {
    if comment.is_empty() {
        return Err(FeatureError::EmptyReference);
    }
    let (c, r) = (question.tokens(), comment.tokens());
    let (p, rec) = unigram_precision_recall(c, r);
    let values = [
        sentence_bleu(c, r),
        ter_noshift(c, r),
        meteor_lite(c, r),
        nist(c, r),
        p,
        rec,
        c.len() as f64 / r.len() as f64,
    ];
    FeatureVector::new(MTE_FEATURE_NAMES.iter().copied().zip(values))
}
