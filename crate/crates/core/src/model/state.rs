use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    compute_marginals, mutual_info_estimates, AnnealSchedule, LogPosteriors, MarginalTable, Matrix,
    ModelConfig,
};
use crate::anchor::{apply_anchors, ResolvedAnchors};
use crate::corpus::SparseBinaryMatrix;
use crate::error::{Error, Result};

/// Optimizer state of a single restart.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    /// n×m word-to-topic weights.
    pub alpha: Matrix,
    pub log_posteriors: LogPosteriors,
    pub marginals: MarginalTable,
    pub anchors: Option<ResolvedAnchors>,
    /// Total objective after each completed iteration.
    pub objective_trace: Vec<f64>,
}

/// Random posteriors `p(y_j = 1 | x^ℓ) ~ U(0, 1)` drawn from a generator
/// seeded with `config.seed`, uniform α = 1/m, and the marginals implied by
/// those posteriors.
pub fn init_state(data: &SparseBinaryMatrix, config: &ModelConfig) -> Result<ModelState> {
    config.validate()?;
    if data.n_docs() == 0 || data.n_words() == 0 {
        return Err(Error::EmptyData);
    }
    let m = config.n_topics;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let clip = config.prob_clip;
    let p1: Vec<f64> = (0..data.n_docs() * m)
        .map(|_| rng.gen::<f64>().clamp(clip, 1.0 - clip))
        .collect();
    let log_posteriors = LogPosteriors::from_p1(data.n_docs(), m, &p1);
    let marginals = compute_marginals(&log_posteriors, data, config.smoothing, clip);
    Ok(ModelState {
        alpha: Matrix::filled(data.n_words(), m, 1.0 / m as f64),
        log_posteriors,
        marginals,
        anchors: None,
        objective_trace: Vec::new(),
    })
}

/// New α from the current `I(X_i : Y_j)` estimates.
///
/// Soft phase: `α_ij = exp(λ_t (I_ij − max_k I_ik))`. Hard phase: 1 for the
/// row argmax (lowest topic index on exact ties), 0 elsewhere. Anchored
/// entries are overwritten with their strength afterwards; the row maximum
/// is always taken over the MI values, never over patched weights.
pub fn update_alpha(
    mi: &Matrix,
    iter: usize,
    schedule: &AnnealSchedule,
    anchors: Option<&ResolvedAnchors>,
) -> Matrix {
    let mut alpha = Matrix::filled(mi.rows(), mi.cols(), 0.0);
    let hard = schedule.is_hard(iter);
    let lambda = schedule.lambda(iter);
    for i in 0..mi.rows() {
        let row = mi.row(i);
        let (best, max) = row
            .iter()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (j, &v)| if v > acc.1 { (j, v) } else { acc },
            );
        let out = alpha.row_mut(i);
        if hard {
            out[best] = 1.0;
        } else {
            for (a, &v) in out.iter_mut().zip(row) {
                *a = (lambda * (v - max)).exp();
            }
        }
    }
    if let Some(anchors) = anchors {
        apply_anchors(&mut alpha, anchors);
    }
    alpha
}

/// Per-topic objective terms and their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub per_topic: Vec<f64>,
    pub total: f64,
}

/// `TC_j = Σ_i α_ij I(X_i : Y_j) − I(X : Y_j)`.
///
/// `I(X : Y_j)` is the sample average of `Σ_y p(y | x^ℓ) ln[p(y | x^ℓ) / p(y)]`
/// over documents.
pub fn objective(
    log_posteriors: &LogPosteriors,
    marginals: &MarginalTable,
    alpha: &Matrix,
) -> Objective {
    let m = marginals.n_topics();
    let n_docs = log_posteriors.n_docs();
    let mi = mutual_info_estimates(marginals);

    let mut compression = vec![0.0; m];
    for d in 0..n_docs {
        for (j, c) in compression.iter_mut().enumerate() {
            let l = log_posteriors.get(d, j);
            for (y, &ly) in l.iter().enumerate() {
                if ly > f64::NEG_INFINITY {
                    *c += ly.exp() * (ly - marginals.log_p_y(j, y));
                }
            }
        }
    }

    let per_topic: Vec<f64> = (0..m)
        .map(|j| {
            let relevance: f64 = (0..marginals.n_words())
                .map(|i| alpha.get(i, j) * mi.get(i, j))
                .sum();
            relevance - compression[j] / n_docs as f64
        })
        .collect();
    let total = per_topic.iter().sum();
    Objective { per_topic, total }
}
