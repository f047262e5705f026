//! Seeded synthetic corpora with planted structure, used for recovery tests
//! and the timing harness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{SparseBinaryMatrix, Vocabulary};

/// A corpus together with the structure it was generated from.
#[derive(Debug, Clone)]
pub struct PlantedCorpus {
    pub data: SparseBinaryMatrix,
    pub vocab: Vocabulary,
    /// Planted class of every document.
    pub doc_classes: Vec<usize>,
    /// Word ids of each planted block.
    pub word_blocks: Vec<Vec<usize>>,
}

fn block_vocab(data: &SparseBinaryMatrix, block_sizes: &[usize]) -> (Vocabulary, Vec<Vec<usize>>) {
    let mut terms = Vec::new();
    let mut blocks = Vec::new();
    for (b, &size) in block_sizes.iter().enumerate() {
        let start = terms.len();
        terms.extend((0..size).map(|k| format!("b{b}w{k}")));
        blocks.push((start..start + size).collect());
    }
    let vocab = Vocabulary::for_matrix(terms, data).expect("generated widths agree");
    (vocab, blocks)
}

impl PlantedCorpus {
    /// `n_blocks` word blocks of `block_size`; document `d` belongs to class
    /// `d % n_blocks` and contains each word of its own block with
    /// probability `p_in`, every other word with probability `p_out`.
    pub fn blocks(
        n_docs: usize,
        n_blocks: usize,
        block_size: usize,
        p_in: f64,
        p_out: f64,
        seed: u64,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_words = n_blocks * block_size;
        let doc_classes: Vec<usize> = (0..n_docs).map(|d| d % n_blocks).collect();
        let mut coords = Vec::new();
        for (d, &c) in doc_classes.iter().enumerate() {
            for w in 0..n_words {
                let p = if w / block_size == c { p_in } else { p_out };
                if rng.gen_bool(p) {
                    coords.push((d, w));
                }
            }
        }
        let data = SparseBinaryMatrix::from_coordinates(n_docs, n_words, coords).expect("in range");
        let (vocab, word_blocks) = block_vocab(&data, &vec![block_size; n_blocks]);
        PlantedCorpus {
            data,
            vocab,
            doc_classes,
            word_blocks,
        }
    }

    /// Two classes, two blocks.
    pub fn two_blocks(n_docs: usize, block_size: usize, p_in: f64, p_out: f64, seed: u64) -> Self {
        Self::blocks(n_docs, 2, block_size, p_in, p_out, seed)
    }

    /// `n_blocks` topics that occur independently: each document carries
    /// each topic with probability `p_topic`. Words of carried topics appear
    /// with probability `p_in`, all others with `p_out`. A document's class
    /// is the bit mask of the topics it carries.
    pub fn independent_blocks(
        n_docs: usize,
        n_blocks: usize,
        block_size: usize,
        p_topic: f64,
        p_in: f64,
        p_out: f64,
        seed: u64,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_words = n_blocks * block_size;
        let mut doc_classes = Vec::with_capacity(n_docs);
        let mut coords = Vec::new();
        for d in 0..n_docs {
            let carried: Vec<bool> = (0..n_blocks).map(|_| rng.gen_bool(p_topic)).collect();
            doc_classes.push(
                carried
                    .iter()
                    .rev()
                    .fold(0, |acc, &c| acc * 2 + usize::from(c)),
            );
            for w in 0..n_words {
                if rng.gen_bool(if carried[w / block_size] { p_in } else { p_out }) {
                    coords.push((d, w));
                }
            }
        }
        let data = SparseBinaryMatrix::from_coordinates(n_docs, n_words, coords).expect("in range");
        let (vocab, word_blocks) = block_vocab(&data, &vec![block_size; n_blocks]);
        PlantedCorpus {
            data,
            vocab,
            doc_classes,
            word_blocks,
        }
    }

    /// Common topics plus one rare topic.
    ///
    /// Each document picks one of `n_common` common topics uniformly; a
    /// `rare_fraction` of documents additionally carry the rare topic. A
    /// topic's words appear with probability `p_in` in documents carrying
    /// it and `p_out` elsewhere. The rare topic is the last block and its
    /// documents are class `n_common`; the others are classed by their
    /// common topic.
    #[allow(clippy::too_many_arguments)]
    pub fn with_rare_topic(
        n_docs: usize,
        n_common: usize,
        block_size: usize,
        rare_size: usize,
        rare_fraction: f64,
        p_in: f64,
        p_out: f64,
        seed: u64,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_rare = ((n_docs as f64) * rare_fraction).round() as usize;
        let mut sizes = vec![block_size; n_common];
        sizes.push(rare_size);
        let n_words: usize = sizes.iter().sum();
        let mut doc_classes = Vec::with_capacity(n_docs);
        let mut coords = Vec::new();
        for d in 0..n_docs {
            let common = rng.gen_range(0..n_common);
            let rare = d < n_rare;
            doc_classes.push(if rare { n_common } else { common });
            for w in 0..n_words {
                let block = if w < n_common * block_size {
                    w / block_size
                } else {
                    n_common
                };
                let active = block == common || (rare && block == n_common);
                if rng.gen_bool(if active { p_in } else { p_out }) {
                    coords.push((d, w));
                }
            }
        }
        let data = SparseBinaryMatrix::from_coordinates(n_docs, n_words, coords).expect("in range");
        let (vocab, word_blocks) = block_vocab(&data, &sizes);
        PlantedCorpus {
            data,
            vocab,
            doc_classes,
            word_blocks,
        }
    }

    /// Four leaf topics in two groups of siblings.
    ///
    /// Each group is switched on independently with probability `p_group`.
    /// A leaf of a switched-on group is active with probability `p_leaf`,
    /// any other leaf with probability `p_stray`. Active leaves emit their
    /// words with probability `p_in`, inactive ones with `p_out`. Leaf `k`
    /// belongs to group `k / 2`; `doc_classes` holds the bit mask of
    /// switched-on groups.
    #[allow(clippy::too_many_arguments)]
    pub fn hierarchical(
        n_docs: usize,
        block_size: usize,
        p_group: f64,
        p_leaf: f64,
        p_stray: f64,
        p_in: f64,
        p_out: f64,
        seed: u64,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_words = 4 * block_size;
        let mut doc_classes = Vec::with_capacity(n_docs);
        let mut coords = Vec::new();
        for d in 0..n_docs {
            let groups = [rng.gen_bool(p_group), rng.gen_bool(p_group)];
            doc_classes.push(usize::from(groups[0]) + 2 * usize::from(groups[1]));
            let active: Vec<bool> = (0..4)
                .map(|leaf| rng.gen_bool(if groups[leaf / 2] { p_leaf } else { p_stray }))
                .collect();
            for w in 0..n_words {
                if rng.gen_bool(if active[w / block_size] { p_in } else { p_out }) {
                    coords.push((d, w));
                }
            }
        }
        let data = SparseBinaryMatrix::from_coordinates(n_docs, n_words, coords).expect("in range");
        let (vocab, word_blocks) = block_vocab(&data, &[block_size; 4]);
        PlantedCorpus {
            data,
            vocab,
            doc_classes,
            word_blocks,
        }
    }
}

/// Independent Bernoulli occurrences at `density`, with generic term names.
pub fn bernoulli_corpus(
    n_docs: usize,
    n_words: usize,
    density: f64,
    seed: u64,
) -> (SparseBinaryMatrix, Vocabulary) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = Vec::with_capacity((n_docs as f64 * n_words as f64 * density * 1.05) as usize);
    for d in 0..n_docs {
        for w in 0..n_words {
            if rng.gen_bool(density) {
                coords.push((d, w));
            }
        }
    }
    let data = SparseBinaryMatrix::from_coordinates(n_docs, n_words, coords).expect("in range");
    let vocab = Vocabulary::for_matrix((0..n_words).map(|w| format!("w{w}")).collect(), &data)
        .expect("widths agree");
    (data, vocab)
}
