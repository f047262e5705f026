//! Multi-level CorEx: the binarized topics of one level are the input
//! variables of the next.

use std::io::Write;

use crate::corpus::{SparseBinaryMatrix, Vocabulary};
use crate::error::{Error, Result};
use crate::model::{fit, FittedModel, ModelConfig};

#[derive(Debug, Clone)]
pub struct HierarchyLevel {
    pub model: FittedModel,
    pub input_dim: usize,
    pub output_dim: usize,
}

/// Membership of a child variable in a parent topic. Level 1 children are
/// words; level `k > 1` children are topics of level `k − 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub level: usize,
    pub child: usize,
    pub parent: usize,
    /// `I(X_child : Y_parent)` in nats.
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct Hierarchy {
    pub levels: Vec<HierarchyLevel>,
    pub edges: Vec<Edge>,
}

/// Topic activations: `(ℓ, j)` is present iff `p(y_j = 1 | x^ℓ) > 0.5`.
pub fn stack_level(model: &FittedModel, data: &SparseBinaryMatrix) -> Result<SparseBinaryMatrix> {
    let probs = model.transform(data)?;
    let coords = (0..probs.rows()).flat_map(|d| {
        probs
            .row(d)
            .iter()
            .enumerate()
            .filter(|&(_, &p)| p > 0.5)
            .map(move |(j, _)| (d, j))
            .collect::<Vec<_>>()
    });
    SparseBinaryMatrix::from_coordinates(probs.rows(), probs.cols(), coords)
}

fn level_edges(level: usize, model: &FittedModel) -> Vec<Edge> {
    let mi = model.mutual_info();
    let mut edges = Vec::new();
    for i in 0..model.n_words() {
        for j in 0..model.n_topics() {
            if model.is_member(i, j) {
                edges.push(Edge {
                    level,
                    child: i,
                    parent: j,
                    weight: mi.get(i, j).max(0.0),
                });
            }
        }
    }
    edges
}

/// Fits one level per config, each on the stacked output of the previous.
/// Level `k + 1` names its inputs `l{k}t{j}`.
pub fn fit_hierarchy(
    data: &SparseBinaryMatrix,
    vocab: &Vocabulary,
    configs: &[ModelConfig],
) -> Result<Hierarchy> {
    if configs.is_empty() {
        return Err(Error::InvalidConfig(
            "a hierarchy needs at least one level".into(),
        ));
    }
    if configs.windows(2).any(|w| w[1].n_topics >= w[0].n_topics) {
        log::warn!("topic counts do not decrease from level to level");
    }
    let mut levels: Vec<HierarchyLevel> = Vec::with_capacity(configs.len());
    let mut edges = Vec::new();
    let mut input = data.clone();
    let mut input_vocab = vocab.clone();
    for (k, config) in configs.iter().enumerate() {
        if k > 0 {
            let prev = &levels[k - 1].model;
            input = stack_level(prev, &input)?;
            let terms = (0..prev.n_topics()).map(|j| format!("l{k}t{j}")).collect();
            input_vocab = Vocabulary::for_matrix(terms, &input)?;
        }
        let model = fit(&input, &input_vocab, config, None)?.model;
        edges.extend(level_edges(k + 1, &model));
        levels.push(HierarchyLevel {
            input_dim: input.n_words(),
            output_dim: model.n_topics(),
            model,
        });
    }
    Ok(Hierarchy { levels, edges })
}

impl Hierarchy {
    /// Writes one `level child parent weight` line per edge.
    pub fn write_edges<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for e in &self.edges {
            writeln!(out, "{} {} {} {}", e.level, e.child, e.parent, e.weight)?;
        }
        Ok(())
    }

    /// Level `level` (1-based) parent of each child, `None` for children
    /// without a membership.
    pub fn parents(&self, level: usize) -> Vec<Option<usize>> {
        let Some(l) = level.checked_sub(1).and_then(|k| self.levels.get(k)) else {
            return Vec::new();
        };
        let mut out = vec![None; l.input_dim];
        for e in self.edges.iter().filter(|e| e.level == level) {
            out[e.child].get_or_insert(e.parent);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::PlantedCorpus;

    fn config(m: usize, seed: u64) -> ModelConfig {
        ModelConfig::new(m).with_seed(seed).with_restarts(3)
    }

    #[test]
    fn stacking_thresholds_strictly() {
        let c = PlantedCorpus::independent_blocks(100, 5, 6, 0.4, 0.5, 0.03, 2);
        let model = fit(&c.data, &c.vocab, &config(5, 0), None).unwrap().model;
        let stacked = stack_level(&model, &c.data).unwrap();
        assert_eq!((stacked.n_docs(), stacked.n_words()), (100, 5));
        let probs = model.transform(&c.data).unwrap();
        for d in 0..100 {
            for j in 0..5 {
                assert_eq!(stacked.contains(d, j), probs.get(d, j) > 0.5);
            }
        }
    }

    #[test]
    fn single_level_matches_fit() {
        let c = PlantedCorpus::independent_blocks(120, 2, 8, 0.5, 0.4, 0.02, 3);
        let h = fit_hierarchy(&c.data, &c.vocab, &[config(2, 4)]).unwrap();
        let direct = fit(&c.data, &c.vocab, &config(2, 4), None).unwrap().model;
        assert_eq!(h.levels.len(), 1);
        assert_eq!(h.levels[0].model.alpha(), direct.alpha());
        assert_eq!(h.levels[0].model.tc(), direct.tc());
    }

    #[test]
    fn planted_siblings_share_a_parent() {
        let c = PlantedCorpus::hierarchical(1000, 10, 0.5, 0.6, 0.05, 0.6, 0.02, 3);
        let cfg = |m| ModelConfig::new(m).with_seed(3).with_restarts(5);
        let h = fit_hierarchy(&c.data, &c.vocab, &[cfg(4), cfg(2)]).unwrap();
        assert_eq!(h.levels[1].input_dim, h.levels[0].output_dim);

        // map each planted leaf to the level-1 topic holding most of its words
        let level1 = h.parents(1);
        let leaf_topic: Vec<usize> = c
            .word_blocks
            .iter()
            .map(|block| {
                let mut counts = [0usize; 4];
                for &w in block {
                    if let Some(t) = level1[w] {
                        counts[t] += 1;
                    }
                }
                (0..4)
                    .max_by_key(|&t| (counts[t], std::cmp::Reverse(t)))
                    .unwrap()
            })
            .collect();
        let mut distinct = leaf_topic.clone();
        distinct.sort_unstable();
        distinct.dedup();
        assert_eq!(distinct.len(), 4, "leaves {leaf_topic:?}");

        let level2 = h.parents(2);
        let parent = |leaf: usize| level2[leaf_topic[leaf]].unwrap();
        assert_eq!(parent(0), parent(1));
        assert_eq!(parent(2), parent(3));
        assert_ne!(parent(0), parent(2));
    }

    #[test]
    fn edges_one_parent_per_child() {
        let c = PlantedCorpus::hierarchical(600, 6, 0.5, 0.6, 0.05, 0.5, 0.02, 5);
        let h = fit_hierarchy(&c.data, &c.vocab, &[config(8, 2), config(2, 2)]).unwrap();
        assert_eq!(h.edges.iter().filter(|e| e.level == 2).count(), 8);
        assert_eq!(h.edges.iter().filter(|e| e.level == 1).count(), 24);
        assert!(h.edges.iter().all(|e| e.weight >= 0.0));

        let mut text = Vec::new();
        h.write_edges(&mut text).unwrap();
        let text = String::from_utf8(text).unwrap();
        assert_eq!(text.lines().count(), 32);
        let first: Vec<&str> = text.lines().next().unwrap().split(' ').collect();
        assert_eq!(first.len(), 4);
        assert_eq!(first[0], "1");

        let again = fit_hierarchy(&c.data, &c.vocab, &[config(8, 2), config(2, 2)]).unwrap();
        assert_eq!(again.edges, h.edges);
    }

    #[test]
    fn empty_config_list_rejected() {
        let c = PlantedCorpus::two_blocks(20, 3, 0.5, 0.1, 0);
        assert!(fit_hierarchy(&c.data, &c.vocab, &[]).is_err());
    }
}
