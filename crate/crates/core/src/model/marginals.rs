use rayon::prelude::*;

use super::{ln_1m_exp, LogPosteriors, Matrix};
use crate::corpus::SparseBinaryMatrix;
use crate::error::{Error, Result};

/// Marginal probability tables implied by the current document posteriors,
/// stored as natural-log probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalTable {
    n_words: usize,
    n_topics: usize,
    prob_clip: f64,
    /// Per topic: `[ln p(y_j = 0), ln p(y_j = 1)]`.
    log_p_y: Vec<[f64; 2]>,
    /// Per (word, topic), word-major: `[ln p(x_i = 1 | y_j = 0), ln p(x_i = 1 | y_j = 1)]`.
    log_p_x_given_y: Vec<[f64; 2]>,
    /// Per word: `ln p(x_i = 1)` under the empirical distribution.
    log_p_x: Vec<f64>,
}

impl MarginalTable {
    /// Assembles a table from stored values, checking every invariant.
    pub fn from_parts(
        n_words: usize,
        n_topics: usize,
        prob_clip: f64,
        log_p_y: Vec<[f64; 2]>,
        log_p_x_given_y: Vec<[f64; 2]>,
        log_p_x: Vec<f64>,
    ) -> Result<Self> {
        let bad = |msg: String| Err(Error::Corrupt(msg));
        if log_p_y.len() != n_topics
            || log_p_x_given_y.len() != n_words * n_topics
            || log_p_x.len() != n_words
        {
            return bad("marginal table dimensions disagree".into());
        }
        if !(prob_clip > 0.0 && prob_clip < 0.5) {
            return bad(format!("prob_clip {prob_clip} outside (0, 0.5)"));
        }
        let lo = prob_clip * (1.0 - 1e-9);
        let hi = 1.0 - prob_clip * (1.0 - 1e-9);
        let in_range = |l: f64| {
            let p = l.exp();
            l.is_finite() && p >= lo && p <= hi
        };
        for (j, &[l0, l1]) in log_p_y.iter().enumerate() {
            let total = l0.exp() + l1.exp();
            if !in_range(l0) || !in_range(l1) || (total - 1.0).abs() > 1e-12 {
                return bad(format!(
                    "p(y) of topic {j} is not a clamped distribution (sums to {total})"
                ));
            }
        }
        if let Some(k) = log_p_x_given_y
            .iter()
            .position(|c| !in_range(c[0]) || !in_range(c[1]))
        {
            return bad(format!(
                "p(x|y) for word {} topic {} outside the clamp range",
                k / n_topics.max(1),
                k % n_topics.max(1)
            ));
        }
        if let Some(i) = log_p_x.iter().position(|&l| !in_range(l)) {
            return bad(format!("p(x) for word {i} outside the clamp range"));
        }
        Ok(MarginalTable {
            n_words,
            n_topics,
            prob_clip,
            log_p_y,
            log_p_x_given_y,
            log_p_x,
        })
    }

    pub fn n_words(&self) -> usize {
        self.n_words
    }

    pub fn n_topics(&self) -> usize {
        self.n_topics
    }

    pub fn prob_clip(&self) -> f64 {
        self.prob_clip
    }

    /// `ln p(y_j = y)`.
    pub fn log_p_y(&self, topic: usize, y: usize) -> f64 {
        self.log_p_y[topic][y]
    }

    /// `ln p(x_i = 1 | y_j = y)`.
    pub fn log_p_x1_given_y(&self, word: usize, topic: usize, y: usize) -> f64 {
        self.log_p_x_given_y[word * self.n_topics + topic][y]
    }

    /// `ln p(x_i = 0 | y_j = y)`.
    pub fn log_p_x0_given_y(&self, word: usize, topic: usize, y: usize) -> f64 {
        ln_1m_exp(self.log_p_x1_given_y(word, topic, y))
    }

    /// `ln p(x_i = 1)`.
    pub fn log_p_x1(&self, word: usize) -> f64 {
        self.log_p_x[word]
    }

    pub fn log_p_y_table(&self) -> &[[f64; 2]] {
        &self.log_p_y
    }

    pub fn log_p_x_given_y_table(&self) -> &[[f64; 2]] {
        &self.log_p_x_given_y
    }

    pub fn log_p_x_table(&self) -> &[f64] {
        &self.log_p_x
    }

    /// Relabels the two states of `topic`.
    pub(crate) fn swap_states(&mut self, topic: usize) {
        self.log_p_y[topic].swap(0, 1);
        for i in 0..self.n_words {
            self.log_p_x_given_y[i * self.n_topics + topic].swap(0, 1);
        }
    }

    /// New topic `k` is old topic `order[k]`.
    pub(crate) fn permute_topics(&self, order: &[usize]) -> MarginalTable {
        let m = self.n_topics;
        let log_p_y = order.iter().map(|&j| self.log_p_y[j]).collect();
        let log_p_x_given_y = (0..self.n_words)
            .flat_map(|i| order.iter().map(move |&j| self.log_p_x_given_y[i * m + j]))
            .collect();
        MarginalTable {
            log_p_y,
            log_p_x_given_y,
            ..self.clone()
        }
    }
}

fn clamp(p: f64, clip: f64) -> f64 {
    p.clamp(clip, 1.0 - clip)
}

/// Recomputes the marginal tables from document posteriors.
///
/// `p(y_j) = (1/N) Σ_ℓ p(y_j | x^ℓ)`; the conditional tables add `smoothing`
/// to each cell,
/// `p(x_i = 1 | y_j) = (smoothing + Σ_{ℓ: x_i = 1} p(y_j | x^ℓ)) / (2·smoothing + Σ_ℓ p(y_j | x^ℓ))`.
/// The per-word sums only visit the documents that contain the word.
pub fn compute_marginals(
    posteriors: &LogPosteriors,
    data: &SparseBinaryMatrix,
    smoothing: f64,
    prob_clip: f64,
) -> MarginalTable {
    let n_docs = data.n_docs();
    let m = posteriors.n_topics();
    assert_eq!(
        posteriors.n_docs(),
        n_docs,
        "posterior rows must match documents"
    );

    let probs: Vec<[f64; 2]> = posteriors
        .as_slice()
        .iter()
        .map(|l| [l[0].exp(), l[1].exp()])
        .collect();
    let mut totals = vec![[0.0f64; 2]; m];
    for row in probs.chunks_exact(m) {
        for (t, p) in totals.iter_mut().zip(row) {
            t[0] += p[0];
            t[1] += p[1];
        }
    }

    let log_p_y = totals
        .iter()
        .map(|t| {
            let p1 = clamp(t[1] / n_docs as f64, prob_clip);
            [(1.0 - p1).ln(), p1.ln()]
        })
        .collect();

    let log_p_x_given_y: Vec<[f64; 2]> = (0..data.n_words())
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut acc = vec![[0.0f64; 2]; m];
            for &d in data.word_docs(i) {
                for (a, p) in acc.iter_mut().zip(&probs[d * m..(d + 1) * m]) {
                    a[0] += p[0];
                    a[1] += p[1];
                }
            }
            acc.into_iter().zip(&totals).map(move |(a, t)| {
                let cell =
                    |y: usize| clamp((smoothing + a[y]) / (2.0 * smoothing + t[y]), prob_clip).ln();
                [cell(0), cell(1)]
            })
        })
        .collect();

    let log_p_x = (0..data.n_words())
        .map(|i| clamp(data.word_docs(i).len() as f64 / n_docs as f64, prob_clip).ln())
        .collect();

    MarginalTable {
        n_words: data.n_words(),
        n_topics: m,
        prob_clip,
        log_p_y,
        log_p_x_given_y,
        log_p_x,
    }
}

/// `I(X_i : Y_j)` for every word/topic pair from the 2×2 tables.
///
/// The word marginal used here is the mixture `Σ_y p(x | y) p(y)`, which
/// keeps every entry non-negative regardless of smoothing and clamping.
pub fn mutual_info_estimates(marginals: &MarginalTable) -> Matrix {
    let (n, m) = (marginals.n_words, marginals.n_topics);
    let mut out = Matrix::filled(n, m, 0.0);
    for i in 0..n {
        for j in 0..m {
            out.set(i, j, pair_mutual_info(marginals, i, j));
        }
    }
    out
}

fn pair_mutual_info(marginals: &MarginalTable, i: usize, j: usize) -> f64 {
    let py = [marginals.log_p_y(j, 0).exp(), marginals.log_p_y(j, 1).exp()];
    let px1y = [
        marginals.log_p_x1_given_y(i, j, 0).exp(),
        marginals.log_p_x1_given_y(i, j, 1).exp(),
    ];
    let px1 = py[0] * px1y[0] + py[1] * px1y[1];
    let px0 = 1.0 - px1;
    let term = |p: f64, q: f64| if p > 0.0 { p * (p / q).ln() } else { 0.0 };
    (0..2)
        .map(|y| py[y] * (term(px1y[y], px1) + term(1.0 - px1y[y], px0)))
        .sum()
}
