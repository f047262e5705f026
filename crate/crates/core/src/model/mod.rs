//! The CorEx optimizer.
//!
//! One iteration computes the marginal tables from the current document
//! posteriors, estimates `I(X_i : Y_j)` for every word/topic pair, turns those
//! into connection weights α through an annealed softmax (hard argmax later
//! on), and finally re-evaluates every document posterior with the
//! fixed-point update. The posterior update exists in two forms: a dense
//! reference that visits every word of every document and a sparse form that
//! starts from an "all words absent" baseline per topic and corrects only for
//! the words a document contains.

mod config;
mod fit;
mod marginals;
mod posterior;
mod state;

pub use config::{AnnealSchedule, ModelConfig, PosteriorPath};
pub use fit::{fit, FitResult, FittedModel, RestartSummary};
pub use marginals::{compute_marginals, mutual_info_estimates, MarginalTable};
pub use posterior::{
    update_posteriors, update_posteriors_dense, update_posteriors_sparse, LogPosteriors,
};
pub use state::{init_state, objective, update_alpha, ModelState, Objective};

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Reorders columns so that new column `k` is old column `order[k]`.
    pub fn permute_cols(&self, order: &[usize]) -> Matrix {
        assert_eq!(order.len(), self.cols);
        let mut out = Matrix::filled(self.rows, self.cols, 0.0);
        for r in 0..self.rows {
            for (k, &c) in order.iter().enumerate() {
                out.set(r, k, self.get(r, c));
            }
        }
        out
    }
}

/// `ln(1 − e^x)` for `x < 0`.
pub(crate) fn ln_1m_exp(x: f64) -> f64 {
    (-x.exp()).ln_1p()
}

/// `ln(e^a + e^b)`.
pub(crate) fn log_sum_exp2(a: f64, b: f64) -> f64 {
    let hi = a.max(b);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + ((a - hi).exp() + (b - hi).exp()).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_exp_is_stable() {
        assert!((log_sum_exp2(0.0, 0.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(log_sum_exp2(-1000.0, 0.0), 0.0);
        assert!((log_sum_exp2(1000.0, 1000.0) - (1000.0 + std::f64::consts::LN_2)).abs() < 1e-12);
    }

    #[test]
    fn permute_cols_moves_columns() {
        let m = Matrix::from_vec(2, 3, vec![1., 2., 3., 4., 5., 6.]);
        assert_eq!(
            m.permute_cols(&[2, 0, 1]).as_slice(),
            &[3., 1., 2., 6., 4., 5.]
        );
    }
}
