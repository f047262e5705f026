use rayon::prelude::*;

use super::{
    compute_marginals, init_state, mutual_info_estimates, objective, update_alpha,
    update_posteriors, update_posteriors_dense, update_posteriors_sparse, LogPosteriors,
    MarginalTable, Matrix, ModelConfig, ModelState, Objective,
};
use crate::anchor::{AnchorSpec, ResolvedAnchors};
use crate::corpus::{SparseBinaryMatrix, Vocabulary};
use crate::error::{Error, Result};

/// Outcome of one restart.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartSummary {
    pub restart: usize,
    pub seed: u64,
    pub iterations: usize,
    pub converged: bool,
    pub final_objective: f64,
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub model: FittedModel,
    /// Training-document posteriors under the returned model, topics in
    /// model order.
    pub log_posteriors: LogPosteriors,
    pub restarts: Vec<RestartSummary>,
    /// Index into `restarts` of the returned model.
    pub selected: usize,
}

/// A converged model. Topics are ordered by their share of the objective,
/// largest first.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub(crate) vocab: Vocabulary,
    pub(crate) config: ModelConfig,
    pub(crate) marginals: MarginalTable,
    pub(crate) alpha: Matrix,
    pub(crate) tc: Vec<f64>,
    pub(crate) anchors: Option<AnchorSpec>,
    /// `topic_order[k]` is the optimizer's index of model topic `k`; anchor
    /// bindings refer to optimizer indices.
    pub(crate) topic_order: Vec<usize>,
}

impl FittedModel {
    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn marginals(&self) -> &MarginalTable {
        &self.marginals
    }

    pub fn alpha(&self) -> &Matrix {
        &self.alpha
    }

    /// Per-topic objective terms, descending.
    pub fn tc(&self) -> &[f64] {
        &self.tc
    }

    pub fn total_tc(&self) -> f64 {
        self.tc.iter().sum()
    }

    pub fn anchors(&self) -> Option<&AnchorSpec> {
        self.anchors.as_ref()
    }

    pub fn topic_order(&self) -> &[usize] {
        &self.topic_order
    }

    pub fn n_topics(&self) -> usize {
        self.tc.len()
    }

    pub fn n_words(&self) -> usize {
        self.vocab.len()
    }

    /// Model position of the topic the optimizer called `original`.
    pub fn position_of(&self, original: usize) -> Option<usize> {
        self.topic_order.iter().position(|&o| o == original)
    }

    /// `I(X_i : Y_j)` under the fitted marginals.
    pub fn mutual_info(&self) -> Matrix {
        mutual_info_estimates(&self.marginals)
    }

    /// Whether word `i` belongs to topic `j`: it is the argmax topic of the
    /// word (weight 1) or the word is anchored there (weight β ≥ 1).
    pub fn is_member(&self, word: usize, topic: usize) -> bool {
        self.alpha.get(word, topic) >= 1.0
    }

    /// Anchored `(word, model topic, strength)` entries.
    pub fn anchored_entries(&self) -> Result<Vec<(usize, usize, f64)>> {
        let Some(spec) = &self.anchors else {
            return Ok(Vec::new());
        };
        let resolved = spec.resolve(&self.vocab, self.n_topics())?;
        let mut out: Vec<(usize, usize, f64)> = resolved
            .entries()
            .iter()
            .map(|&(w, t, b)| {
                (
                    w,
                    self.position_of(t).expect("topic order is a permutation"),
                    b,
                )
            })
            .collect();
        out.sort_by_key(|&(w, t, _)| (w, t));
        Ok(out)
    }

    fn check_columns(&self, data: &SparseBinaryMatrix) -> Result<()> {
        if data.n_words() != self.n_words() {
            return Err(Error::DimensionMismatch {
                expected: self.n_words(),
                found: data.n_words(),
            });
        }
        Ok(())
    }

    /// Document posteriors under the frozen model (sparse evaluation).
    pub fn transform_log(&self, data: &SparseBinaryMatrix) -> Result<LogPosteriors> {
        self.check_columns(data)?;
        Ok(update_posteriors_sparse(&self.marginals, &self.alpha, data))
    }

    /// Same as [`Self::transform_log`] through the dense evaluation.
    pub fn transform_log_dense(&self, data: &SparseBinaryMatrix) -> Result<LogPosteriors> {
        self.check_columns(data)?;
        Ok(update_posteriors_dense(&self.marginals, &self.alpha, data))
    }

    /// N×m matrix of `p(y_j = 1 | x^ℓ)`.
    pub fn transform(&self, data: &SparseBinaryMatrix) -> Result<Matrix> {
        Ok(self.transform_log(data)?.p1())
    }
}

/// Fits `config.n_restarts` independent restarts (seeds `seed + r`) and
/// returns the one with the largest final objective.
pub fn fit(
    data: &SparseBinaryMatrix,
    vocab: &Vocabulary,
    config: &ModelConfig,
    anchors: Option<&AnchorSpec>,
) -> Result<FitResult> {
    config.validate()?;
    if data.n_words() != vocab.len() {
        return Err(Error::DimensionMismatch {
            expected: vocab.len(),
            found: data.n_words(),
        });
    }
    let resolved = anchors
        .map(|a| a.resolve(vocab, config.n_topics))
        .transpose()?;

    let runs: Vec<(ModelState, Objective, RestartSummary)> = (0..config.n_restarts)
        .into_par_iter()
        .map(|r| run_restart(data, config, resolved.as_ref(), r))
        .collect::<Result<_>>()?;

    let selected = runs.iter().enumerate().fold(0, |best, (r, run)| {
        if run.1.total > runs[best].1.total {
            r
        } else {
            best
        }
    });
    let restarts = runs.iter().map(|r| r.2.clone()).collect();
    let (state, obj, _) = runs
        .into_iter()
        .nth(selected)
        .expect("at least one restart");
    let (model, log_posteriors) = finish(state, obj, data, vocab, config, anchors);
    Ok(FitResult {
        model,
        log_posteriors,
        restarts,
        selected,
    })
}

fn run_restart(
    data: &SparseBinaryMatrix,
    config: &ModelConfig,
    anchors: Option<&ResolvedAnchors>,
    restart: usize,
) -> Result<(ModelState, Objective, RestartSummary)> {
    let mut cfg = config.clone();
    cfg.seed = config.seed.wrapping_add(restart as u64);
    let mut state = init_state(data, &cfg)?;
    state.anchors = anchors.cloned();

    let mut last = objective(&state.log_posteriors, &state.marginals, &state.alpha);
    let mut converged = false;
    for iter in 0..cfg.max_iter {
        let mi = mutual_info_estimates(&state.marginals);
        state.alpha = update_alpha(&mi, iter, &cfg.anneal, state.anchors.as_ref());
        state.log_posteriors = update_posteriors(&state.marginals, &state.alpha, data, cfg.path);
        state.marginals =
            compute_marginals(&state.log_posteriors, data, cfg.smoothing, cfg.prob_clip);

        let obj = objective(&state.log_posteriors, &state.marginals, &state.alpha);
        if !obj.total.is_finite() {
            return Err(Error::NumericalFailure {
                restart,
                iteration: iter,
            });
        }
        let change = (obj.total - last.total).abs() / obj.total.abs().max(1e-10);
        state.objective_trace.push(obj.total);
        last = obj;
        // the anneal reshapes the objective, so only hard-phase steps count
        if iter > 0 && cfg.anneal.is_hard(iter) && change < cfg.tol {
            converged = true;
            break;
        }
    }
    log::debug!(
        "restart {restart}: {} iterations, objective {:.6}, converged {converged}",
        state.objective_trace.len(),
        last.total
    );
    let summary = RestartSummary {
        restart,
        seed: cfg.seed,
        iterations: state.objective_trace.len(),
        converged,
        final_objective: last.total,
        trace: state.objective_trace.clone(),
    };
    Ok((state, last, summary))
}

/// Orients every topic so that `y = 1` is the state under which its member
/// words are more likely present, sorts topics by objective share, and
/// evaluates the training posteriors under the resulting frozen model.
fn finish(
    state: ModelState,
    obj: Objective,
    data: &SparseBinaryMatrix,
    vocab: &Vocabulary,
    config: &ModelConfig,
    anchors: Option<&AnchorSpec>,
) -> (FittedModel, LogPosteriors) {
    let ModelState {
        alpha,
        mut marginals,
        ..
    } = state;
    for j in 0..marginals.n_topics() {
        let lean: f64 = (0..marginals.n_words())
            .map(|i| {
                alpha.get(i, j)
                    * (marginals.log_p_x1_given_y(i, j, 1).exp()
                        - marginals.log_p_x1_given_y(i, j, 0).exp())
            })
            .sum();
        if lean < 0.0 {
            marginals.swap_states(j);
        }
    }

    let mut order: Vec<usize> = (0..obj.per_topic.len()).collect();
    order.sort_by(|&a, &b| {
        obj.per_topic[b]
            .total_cmp(&obj.per_topic[a])
            .then(a.cmp(&b))
    });
    let marginals = marginals.permute_topics(&order);
    let alpha = alpha.permute_cols(&order);
    let tc = order.iter().map(|&j| obj.per_topic[j]).collect();
    let log_posteriors = update_posteriors_sparse(&marginals, &alpha, data);

    let model = FittedModel {
        vocab: vocab.clone(),
        config: config.clone(),
        marginals,
        alpha,
        tc,
        anchors: anchors.cloned(),
        topic_order: order,
    };
    (model, log_posteriors)
}
