use rayon::prelude::*;

use super::{ln_1m_exp, log_sum_exp2, MarginalTable, Matrix, PosteriorPath};
use crate::corpus::SparseBinaryMatrix;

/// `[ln p(y_j = 0 | x^ℓ), ln p(y_j = 1 | x^ℓ)]` per document and topic.
#[derive(Debug, Clone, PartialEq)]
pub struct LogPosteriors {
    n_docs: usize,
    n_topics: usize,
    data: Vec<[f64; 2]>,
}

impl LogPosteriors {
    /// From `p(y_j = 1 | x^ℓ)` values laid out document-major.
    pub fn from_p1(n_docs: usize, n_topics: usize, p1: &[f64]) -> Self {
        assert_eq!(p1.len(), n_docs * n_topics);
        LogPosteriors {
            n_docs,
            n_topics,
            data: p1.iter().map(|&p| [(1.0 - p).ln(), p.ln()]).collect(),
        }
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn n_topics(&self) -> usize {
        self.n_topics
    }

    pub fn get(&self, doc: usize, topic: usize) -> [f64; 2] {
        self.data[doc * self.n_topics + topic]
    }

    pub fn as_slice(&self) -> &[[f64; 2]] {
        &self.data
    }

    /// `p(y_j = 1 | x^ℓ)` as an N×m matrix.
    pub fn p1(&self) -> Matrix {
        Matrix::from_vec(
            self.n_docs,
            self.n_topics,
            self.data.iter().map(|l| l[1].exp()).collect(),
        )
    }
}

/// α-weighted log likelihood ratios `α_ij ln[p(x_i = v | y_j) / p(x_i = v)]`
/// for `v = 0` and `v = 1`, word-major.
struct WeightedRatios {
    absent: Vec<[f64; 2]>,
    present: Vec<[f64; 2]>,
}

impl WeightedRatios {
    fn new(marginals: &MarginalTable, alpha: &Matrix) -> Self {
        let (n, m) = (marginals.n_words(), marginals.n_topics());
        assert_eq!(
            (alpha.rows(), alpha.cols()),
            (n, m),
            "alpha shape must match marginals"
        );
        let mut absent = Vec::with_capacity(n * m);
        let mut present = Vec::with_capacity(n * m);
        for i in 0..n {
            let lx1 = marginals.log_p_x1(i);
            let lx0 = ln_1m_exp(lx1);
            for j in 0..m {
                let a = alpha.get(i, j);
                if a == 0.0 {
                    absent.push([0.0; 2]);
                    present.push([0.0; 2]);
                    continue;
                }
                let cell = |y: usize| {
                    let l1 = marginals.log_p_x1_given_y(i, j, y);
                    (a * (ln_1m_exp(l1) - lx0), a * (l1 - lx1))
                };
                let (a0, p0) = cell(0);
                let (a1, p1) = cell(1);
                absent.push([a0, a1]);
                present.push([p0, p1]);
            }
        }
        WeightedRatios { absent, present }
    }
}

fn normalize(acc: &mut [[f64; 2]]) {
    for a in acc {
        let z = log_sum_exp2(a[0], a[1]);
        a[0] -= z;
        a[1] -= z;
    }
}

fn priors(marginals: &MarginalTable) -> Vec<[f64; 2]> {
    (0..marginals.n_topics())
        .map(|j| [marginals.log_p_y(j, 0), marginals.log_p_y(j, 1)])
        .collect()
}

/// Fixed-point posterior update evaluated word by word over the full
/// vocabulary of every document. O(N·n·m); kept as the reference path.
pub fn update_posteriors_dense(
    marginals: &MarginalTable,
    alpha: &Matrix,
    data: &SparseBinaryMatrix,
) -> LogPosteriors {
    assert_eq!(
        data.n_words(),
        marginals.n_words(),
        "data columns must match marginals"
    );
    let (n, m) = (marginals.n_words(), marginals.n_topics());
    let ratios = WeightedRatios::new(marginals, alpha);
    let prior = priors(marginals);

    let data_out: Vec<[f64; 2]> = (0..data.n_docs())
        .into_par_iter()
        .flat_map_iter(|d| {
            let mut present = vec![false; n];
            for &w in data.doc_words(d) {
                present[w] = true;
            }
            let mut acc = prior.clone();
            for (i, &x) in present.iter().enumerate() {
                let table = if x { &ratios.present } else { &ratios.absent };
                for (a, r) in acc.iter_mut().zip(&table[i * m..(i + 1) * m]) {
                    a[0] += r[0];
                    a[1] += r[1];
                }
            }
            normalize(&mut acc);
            acc
        })
        .collect();

    LogPosteriors {
        n_docs: data.n_docs(),
        n_topics: m,
        data: data_out,
    }
}

/// Same update as [`update_posteriors_dense`], rewritten around sparsity.
///
/// Every topic starts from the baseline of a document with no words,
/// `B_j = Σ_i α_ij ln[p(x_i = 0 | y_j) / p(x_i = 0)]`, computed once. Each
/// document then adds, for the words it contains only,
/// `α_ij ln[p(x_i = 1 | y_j) p(x_i = 0) / (p(x_i = 0 | y_j) p(x_i = 1))]`.
/// Cost is O(n·m) + O(N·m) + O(ρ·m).
pub fn update_posteriors_sparse(
    marginals: &MarginalTable,
    alpha: &Matrix,
    data: &SparseBinaryMatrix,
) -> LogPosteriors {
    assert_eq!(
        data.n_words(),
        marginals.n_words(),
        "data columns must match marginals"
    );
    let m = marginals.n_topics();
    let ratios = WeightedRatios::new(marginals, alpha);

    let mut baseline = priors(marginals);
    for row in ratios.absent.chunks_exact(m.max(1)) {
        for (b, r) in baseline.iter_mut().zip(row) {
            b[0] += r[0];
            b[1] += r[1];
        }
    }
    let correction: Vec<[f64; 2]> = ratios
        .present
        .iter()
        .zip(&ratios.absent)
        .map(|(p, a)| [p[0] - a[0], p[1] - a[1]])
        .collect();

    let data_out: Vec<[f64; 2]> = (0..data.n_docs())
        .into_par_iter()
        .flat_map_iter(|d| {
            let mut acc = baseline.clone();
            for &w in data.doc_words(d) {
                for (a, c) in acc.iter_mut().zip(&correction[w * m..(w + 1) * m]) {
                    a[0] += c[0];
                    a[1] += c[1];
                }
            }
            normalize(&mut acc);
            acc
        })
        .collect();

    LogPosteriors {
        n_docs: data.n_docs(),
        n_topics: m,
        data: data_out,
    }
}

pub fn update_posteriors(
    marginals: &MarginalTable,
    alpha: &Matrix,
    data: &SparseBinaryMatrix,
    path: PosteriorPath,
) -> LogPosteriors {
    match path {
        PosteriorPath::Sparse => update_posteriors_sparse(marginals, alpha, data),
        PosteriorPath::Dense => update_posteriors_dense(marginals, alpha, data),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::compute_marginals;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_case(
        seed: u64,
        n_docs: usize,
        n_words: usize,
        m: usize,
        density: f64,
    ) -> (SparseBinaryMatrix, MarginalTable, Matrix) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<bool>> = (0..n_docs)
            .map(|_| (0..n_words).map(|_| rng.gen_bool(density)).collect())
            .collect();
        let data = SparseBinaryMatrix::from_dense(&rows, n_words).unwrap();
        let p1: Vec<f64> = (0..n_docs * m).map(|_| rng.gen::<f64>()).collect();
        let marg = compute_marginals(&LogPosteriors::from_p1(n_docs, m, &p1), &data, 1e-3, 1e-10);
        let alpha = Matrix::from_vec(
            n_words,
            m,
            (0..n_words * m).map(|_| rng.gen_range(0.0..3.0)).collect(),
        );
        (data, marg, alpha)
    }

    fn assert_normalized(post: &LogPosteriors) {
        for l in post.as_slice() {
            assert!(log_sum_exp2(l[0], l[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_alpha_returns_prior() {
        let (data, marg, alpha) = random_case(1, 15, 8, 3, 0.4);
        let zero = Matrix::filled(alpha.rows(), alpha.cols(), 0.0);
        for post in [
            update_posteriors_dense(&marg, &zero, &data),
            update_posteriors_sparse(&marg, &zero, &data),
        ] {
            for d in 0..15 {
                for j in 0..3 {
                    let l = post.get(d, j);
                    assert!((l[1] - marg.log_p_y(j, 1)).abs() < 1e-12);
                    assert!((l[0] - marg.log_p_y(j, 0)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn single_word_hand_evaluation() {
        // one word, one topic; p(y=1)=0.4, p(x=1|y=0)=0.2, p(x=1|y=1)=0.7, p(x=1)=0.5
        let marg = MarginalTable::from_parts(
            1,
            1,
            1e-10,
            vec![[0.6f64.ln(), 0.4f64.ln()]],
            vec![[0.2f64.ln(), 0.7f64.ln()]],
            vec![0.5f64.ln()],
        )
        .unwrap();
        let alpha = Matrix::from_vec(1, 1, vec![0.8]);
        let data = SparseBinaryMatrix::from_coordinates(2, 1, [(0, 0)]).unwrap();

        // doc 0 has the word, doc 1 does not
        let u = |py: f64, px: f64, base: f64| py.ln() + 0.8 * (px / base).ln();
        let expect = |u0: f64, u1: f64| {
            let z = (u0.exp() + u1.exp()).ln();
            [u0 - z, u1 - z]
        };
        let with = expect(u(0.6, 0.2, 0.5), u(0.4, 0.7, 0.5));
        let without = expect(u(0.6, 0.8, 0.5), u(0.4, 0.3, 0.5));

        for post in [
            update_posteriors_dense(&marg, &alpha, &data),
            update_posteriors_sparse(&marg, &alpha, &data),
        ] {
            for y in 0..2 {
                assert!((post.get(0, 0)[y] - with[y]).abs() < 1e-12);
                assert!((post.get(1, 0)[y] - without[y]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn empty_document_uses_baseline_only() {
        let (data, marg, alpha) = random_case(4, 6, 7, 2, 0.5);
        let mut coords: Vec<(usize, usize)> = data.coordinates().filter(|&(d, _)| d != 0).collect();
        coords.sort();
        let data = SparseBinaryMatrix::from_coordinates(6, 7, coords).unwrap();
        let post = update_posteriors_sparse(&marg, &alpha, &data);
        for j in 0..2 {
            let mut u = [marg.log_p_y(j, 0), marg.log_p_y(j, 1)];
            for (y, uy) in u.iter_mut().enumerate() {
                for i in 0..7 {
                    *uy += alpha.get(i, j)
                        * (marg.log_p_x0_given_y(i, j, y) - ln_1m_exp(marg.log_p_x1(i)));
                }
            }
            let z = log_sum_exp2(u[0], u[1]);
            assert!((post.get(0, j)[1] - (u[1] - z)).abs() < 1e-12);
        }
    }

    #[test]
    fn sparse_matches_dense_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for case in 0..50 {
            let n_docs = rng.gen_range(1..=50);
            let n_words = rng.gen_range(1..=60);
            let m = rng.gen_range(1..=5);
            let density = rng.gen_range(0.05..0.9);
            let (data, marg, alpha) = random_case(case, n_docs, n_words, m, density);
            let dense = update_posteriors_dense(&marg, &alpha, &data);
            let sparse = update_posteriors_sparse(&marg, &alpha, &data);
            assert_normalized(&dense);
            assert_normalized(&sparse);
            for (a, b) in dense.as_slice().iter().zip(sparse.as_slice()) {
                assert!(
                    (a[0] - b[0]).abs() < 1e-10 && (a[1] - b[1]).abs() < 1e-10,
                    "case {case}"
                );
            }
        }
    }
}
