//! Topic and clustering evaluation.
//!
//! Homogeneity and adjusted mutual information follow the usual contingency
//! table definitions. AMI subtracts the exact expected mutual information
//! under the permutation (hypergeometric) model and normalizes by
//! `max(H(pred), H(truth))`.

use std::collections::HashMap;

use crate::corpus::{SparseBinaryMatrix, Vocabulary};
use crate::error::{Error, Result};
use crate::model::{fit, FittedModel, Matrix, ModelConfig};

/// A topic word with its mutual information with the topic.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedWord {
    pub word: usize,
    pub term: String,
    pub mi: f64,
}

/// Member words of `topic` (argmax or anchored), by `I(X_i : Y_j)`
/// descending, ties broken by term, at most `count` of them.
pub fn top_words(model: &FittedModel, topic: usize, count: usize) -> Result<Vec<RankedWord>> {
    if topic >= model.n_topics() {
        return Err(Error::InvalidArgument(format!(
            "topic {topic} out of range for {} topics",
            model.n_topics()
        )));
    }
    let mi = model.mutual_info();
    let mut words: Vec<RankedWord> = (0..model.n_words())
        .filter(|&i| model.is_member(i, topic))
        .map(|i| RankedWord {
            word: i,
            term: model.vocab().term(i).to_string(),
            mi: mi.get(i, topic),
        })
        .collect();
    words.sort_by(|a, b| b.mi.total_cmp(&a.mi).then_with(|| a.term.cmp(&b.term)));
    words.truncate(count);
    Ok(words)
}

/// UMass coherence `Σ_{m≥2} Σ_{l<m} ln[(D(w_m, w_l) + 1) / D(w_l)]` over
/// words in the caller's ranking order, with document (co-)occurrence
/// counts `D` taken from `data`.
pub fn umass_coherence(words: &[usize], data: &SparseBinaryMatrix) -> Result<f64> {
    if words.len() < 2 {
        return Err(Error::InvalidArgument(
            "coherence needs at least two words".into(),
        ));
    }
    if let Some(&w) = words.iter().find(|&&w| w >= data.n_words()) {
        return Err(Error::InvalidArgument(format!(
            "word {w} outside the vocabulary"
        )));
    }
    let mut score = 0.0;
    for (m, &wm) in words.iter().enumerate().skip(1) {
        for &wl in &words[..m] {
            let dl = data.word_docs(wl).len();
            if dl == 0 {
                return Err(Error::InvalidArgument(format!(
                    "word {wl} occurs in no document"
                )));
            }
            let co = co_occurrences(data.word_docs(wm), data.word_docs(wl));
            score += ((co as f64 + 1.0) / dl as f64).ln();
        }
    }
    Ok(score)
}

fn co_occurrences(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Assigns each document to the topic with the highest `p(y_j = 1 | x)`.
pub fn cluster_documents(model: &FittedModel, data: &SparseBinaryMatrix) -> Result<Vec<usize>> {
    Ok(argmax_topics(&model.transform(data)?))
}

/// Per-row argmax of an N×m probability matrix; ties go to the lowest topic.
pub fn argmax_topics(topic_probs: &Matrix) -> Vec<usize> {
    (0..topic_probs.rows())
        .map(|d| {
            topic_probs
                .row(d)
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (j, &p)| {
                    if p > best.1 {
                        (j, p)
                    } else {
                        best
                    }
                })
                .0
        })
        .collect()
}

/// Hard cluster assignments with their agreement scores against reference
/// labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringResult {
    pub assignments: Vec<usize>,
    pub homogeneity: f64,
    pub ami: f64,
}

/// Clusters the documents with `model` and scores the clusters against
/// `truth`.
pub fn evaluate_clustering(
    model: &FittedModel,
    data: &SparseBinaryMatrix,
    truth: &[usize],
) -> Result<ClusteringResult> {
    let assignments = cluster_documents(model, data)?;
    let homogeneity = homogeneity(&assignments, truth)?;
    let ami = adjusted_mutual_info(&assignments, truth)?;
    Ok(ClusteringResult {
        assignments,
        homogeneity,
        ami,
    })
}

/// Rejects documents with zero or several labels; clustering scores need
/// exactly one per document.
pub fn require_single_labels(labels: &[Vec<usize>]) -> Result<Vec<usize>> {
    labels
        .iter()
        .enumerate()
        .map(|(d, ls)| match ls.as_slice() {
            [l] => Ok(*l),
            _ => Err(Error::InvalidLabels(format!(
                "document {d} has {} labels; clustering metrics need exactly one",
                ls.len()
            ))),
        })
        .collect()
}

struct Contingency {
    n: f64,
    pred_sizes: Vec<f64>,
    truth_sizes: Vec<f64>,
    cells: HashMap<(usize, usize), f64>,
}

fn dense_ids(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = HashMap::new();
    let mut sorted: Vec<usize> = labels.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    for (i, l) in sorted.iter().enumerate() {
        map.insert(*l, i);
    }
    (labels.iter().map(|l| map[l]).collect(), sorted.len())
}

fn contingency(pred: &[usize], truth: &[usize]) -> Result<Contingency> {
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            found: pred.len(),
        });
    }
    let (p, kp) = dense_ids(pred);
    let (t, kt) = dense_ids(truth);
    let mut pred_sizes = vec![0.0; kp];
    let mut truth_sizes = vec![0.0; kt];
    let mut cells = HashMap::new();
    for (&a, &b) in p.iter().zip(&t) {
        pred_sizes[a] += 1.0;
        truth_sizes[b] += 1.0;
        *cells.entry((a, b)).or_insert(0.0) += 1.0;
    }
    Ok(Contingency {
        n: pred.len() as f64,
        pred_sizes,
        truth_sizes,
        cells,
    })
}

fn entropy_of_counts(counts: &[f64], n: f64) -> f64 {
    -counts
        .iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| c / n * (c / n).ln())
        .sum::<f64>()
}

/// `1 − H(truth | pred) / H(truth)`, defined as 1 when `H(truth) = 0`.
pub fn homogeneity(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let c = contingency(pred, truth)?;
    if c.n == 0.0 {
        return Ok(1.0);
    }
    let h_truth = entropy_of_counts(&c.truth_sizes, c.n);
    if h_truth == 0.0 {
        return Ok(1.0);
    }
    let h_cond: f64 = -c
        .cells
        .iter()
        .map(|(&(k, _), &nkc)| nkc / c.n * (nkc / c.pred_sizes[k]).ln())
        .sum::<f64>();
    Ok((1.0 - h_cond / h_truth).clamp(0.0, 1.0))
}

fn mutual_info_of(c: &Contingency) -> f64 {
    c.cells
        .iter()
        .map(|(&(a, b), &nab)| nab / c.n * (c.n * nab / (c.pred_sizes[a] * c.truth_sizes[b])).ln())
        .sum()
}

/// `ln k!` for `k = 0..=n`.
fn ln_factorials(n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n + 1];
    for k in 1..=n {
        t[k] = t[k - 1] + (k as f64).ln();
    }
    t
}

/// Expected mutual information between two partitions with the given
/// cluster sizes when one is randomly permuted against the other.
fn expected_mutual_info(a_sizes: &[f64], b_sizes: &[f64], n: usize) -> f64 {
    let lf = ln_factorials(n);
    let nf = n as f64;
    let mut emi = 0.0;
    for &a in a_sizes {
        let a = a as usize;
        for &b in b_sizes {
            let b = b as usize;
            let lo = (a + b).saturating_sub(n).max(1);
            let hi = a.min(b);
            for k in lo..=hi {
                let kf = k as f64;
                let log_p = lf[a] + lf[b] + lf[n - a] + lf[n - b]
                    - lf[n]
                    - lf[k]
                    - lf[a - k]
                    - lf[b - k]
                    - lf[n + k - a - b];
                emi += kf / nf * (nf * kf / (a as f64 * b as f64)).ln() * log_p.exp();
            }
        }
    }
    emi
}

/// Adjusted mutual information,
/// `(I − E[I]) / (max(H(pred), H(truth)) − E[I])`.
/// Two single-cluster partitions score 1.
pub fn adjusted_mutual_info(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let c = contingency(pred, truth)?;
    let (kp, kt) = (c.pred_sizes.len(), c.truth_sizes.len());
    if (kp <= 1 && kt <= 1) || (kp == pred.len() && kt == pred.len()) {
        return Ok(1.0);
    }
    let mi = mutual_info_of(&c);
    let emi = expected_mutual_info(&c.pred_sizes, &c.truth_sizes, pred.len());
    let norm = entropy_of_counts(&c.pred_sizes, c.n).max(entropy_of_counts(&c.truth_sizes, c.n));
    let mut denom = norm - emi;
    if denom.abs() < f64::EPSILON {
        denom = f64::EPSILON.copysign(denom);
    }
    Ok((mi - emi) / denom)
}

/// One fit of [`topic_count_curve`].
#[derive(Debug, Clone, PartialEq)]
pub struct TopicCountPoint {
    pub n_topics: usize,
    pub total_tc: f64,
    /// Objective share of the weakest topic.
    pub weakest_tc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicCountCurve {
    pub points: Vec<TopicCountPoint>,
    /// Smallest topic count whose weakest topic explains less than 1% of the
    /// total.
    pub flagged: Option<usize>,
}

/// Weakest-topic share below which adding topics stops paying off.
pub const WEAK_TOPIC_FRACTION: f64 = 0.01;

/// Fits one model per entry of `m_values` (all from `base.seed`) and flags
/// the first count at which the weakest topic explains under 1% of the
/// total.
pub fn topic_count_curve(
    data: &SparseBinaryMatrix,
    vocab: &Vocabulary,
    base: &ModelConfig,
    m_values: &[usize],
) -> Result<TopicCountCurve> {
    if m_values.is_empty() {
        return Err(Error::InvalidArgument("no topic counts given".into()));
    }
    if m_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "topic counts must be strictly ascending".into(),
        ));
    }
    let mut points = Vec::with_capacity(m_values.len());
    for &m in m_values {
        let config = ModelConfig {
            n_topics: m,
            ..base.clone()
        };
        let model = fit(data, vocab, &config, None)?.model;
        let weakest_tc = model.tc().iter().copied().fold(f64::INFINITY, f64::min);
        points.push(TopicCountPoint {
            n_topics: m,
            total_tc: model.total_tc(),
            weakest_tc,
        });
    }
    let flagged = points
        .iter()
        .find(|p| p.weakest_tc < WEAK_TOPIC_FRACTION * p.total_tc)
        .map(|p| p.n_topics);
    Ok(TopicCountCurve { points, flagged })
}
