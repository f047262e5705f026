use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Softmax sharpness schedule for the α update.
///
/// At iteration `t < hard_after` the sharpness is
/// `lambda_start * lambda_growth^t`; from `hard_after` on, α is the 0/1
/// argmax indicator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub lambda_start: f64,
    pub lambda_growth: f64,
    pub hard_after: usize,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        AnnealSchedule {
            lambda_start: 1.0,
            lambda_growth: 1.3,
            hard_after: 30,
        }
    }
}

impl AnnealSchedule {
    pub fn lambda(&self, iter: usize) -> f64 {
        self.lambda_start * self.lambda_growth.powi(iter as i32)
    }

    pub fn is_hard(&self, iter: usize) -> bool {
        iter >= self.hard_after
    }
}

/// Which posterior evaluation a fit uses. Both produce the same values up to
/// floating-point summation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PosteriorPath {
    #[default]
    Sparse,
    Dense,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub n_topics: usize,
    pub max_iter: usize,
    /// Relative change of the total objective below which a fit stops.
    pub tol: f64,
    pub n_restarts: usize,
    pub anneal: AnnealSchedule,
    pub seed: u64,
    /// Pseudo-count added to each cell of the `p(x_i | y_j)` tables.
    pub smoothing: f64,
    /// Probabilities are clamped to `[prob_clip, 1 - prob_clip]`.
    pub prob_clip: f64,
    #[serde(default)]
    pub path: PosteriorPath,
}

impl ModelConfig {
    pub fn new(n_topics: usize) -> Self {
        ModelConfig {
            n_topics,
            max_iter: 200,
            tol: 1e-6,
            n_restarts: 1,
            anneal: AnnealSchedule::default(),
            seed: 0,
            smoothing: 1e-3,
            prob_clip: 1e-10,
            path: PosteriorPath::Sparse,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, n_restarts: usize) -> Self {
        self.n_restarts = n_restarts;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.n_topics == 0 {
            return fail("n_topics must be at least 1");
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return fail("tol must be positive");
        }
        if self.n_restarts == 0 {
            return fail("n_restarts must be at least 1");
        }
        if !self.smoothing.is_finite() || self.smoothing <= 0.0 {
            return fail("smoothing must be positive");
        }
        if !(self.prob_clip > 0.0 && self.prob_clip < 0.5) {
            return fail("prob_clip must lie in (0, 0.5)");
        }
        if self.anneal.lambda_start.is_nan() || self.anneal.lambda_start <= 0.0 {
            return fail("lambda_start must be positive");
        }
        if self.anneal.lambda_growth.is_nan() || self.anneal.lambda_growth < 1.0 {
            return fail("lambda_growth must be at least 1");
        }
        if self.anneal.hard_after > self.max_iter {
            return fail("hard_after must not exceed max_iter");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        ModelConfig::new(3).validate().unwrap();
    }

    #[test]
    fn rejects_bad_fields() {
        let base = ModelConfig::new(2);
        let cases: [fn(&mut ModelConfig); 8] = [
            |c| c.n_topics = 0,
            |c| c.tol = 0.0,
            |c| c.n_restarts = 0,
            |c| c.smoothing = 0.0,
            |c| c.prob_clip = 0.5,
            |c| c.anneal.lambda_start = 0.0,
            |c| c.anneal.lambda_growth = 0.9,
            |c| c.anneal.hard_after = 500,
        ];
        for tweak in cases {
            let mut c = base.clone();
            tweak(&mut c);
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn lambda_grows_geometrically() {
        let s = AnnealSchedule {
            lambda_start: 2.0,
            lambda_growth: 1.5,
            hard_after: 3,
        };
        assert_eq!(s.lambda(0), 2.0);
        assert_eq!(s.lambda(2), 4.5);
        assert!(!s.is_hard(2));
        assert!(s.is_hard(3));
    }
}
