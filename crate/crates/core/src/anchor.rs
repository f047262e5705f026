//! Anchor words: pinning word-to-topic weights to a fixed strength, and
//! picking candidate anchors from labeled documents by information gain.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{SparseBinaryMatrix, Vocabulary};
use crate::error::{Error, Result};
use crate::model::Matrix;

/// Strength used when an anchor file entry omits one.
pub const DEFAULT_STRENGTH: f64 = 2.0;

/// Words bound to one topic with strength β.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorBinding {
    pub topic: usize,
    pub words: Vec<String>,
    pub strength: f64,
}

/// A set of bindings. A topic may receive many words and a word may be
/// bound to several topics.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AnchorSpec {
    pub bindings: Vec<AnchorBinding>,
}

#[derive(Deserialize)]
struct BindingFile {
    topic: usize,
    words: Vec<String>,
    strength: Option<f64>,
}

impl AnchorSpec {
    pub fn new(bindings: Vec<AnchorBinding>) -> Self {
        AnchorSpec { bindings }
    }

    /// One binding of `words` to `topic`.
    pub fn single(topic: usize, words: &[&str], strength: f64) -> Self {
        AnchorSpec::new(vec![AnchorBinding {
            topic,
            words: words.iter().map(|w| w.to_string()).collect(),
            strength,
        }])
    }

    /// Parses the JSON list `[{"topic": 0, "words": [...], "strength": 2.0}]`;
    /// entries without a strength get `default_strength`.
    pub fn from_json(text: &str, default_strength: f64) -> Result<Self> {
        let raw: Vec<BindingFile> = serde_json::from_str(text)
            .map_err(|e| Error::InvalidAnchor(format!("anchor file: {e}")))?;
        Ok(AnchorSpec::new(
            raw.into_iter()
                .map(|b| AnchorBinding {
                    topic: b.topic,
                    words: b.words,
                    strength: b.strength.unwrap_or(default_strength),
                })
                .collect(),
        ))
    }

    pub fn load(path: impl AsRef<Path>, default_strength: f64) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, default_strength)
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.iter().all(|b| b.words.is_empty())
    }

    /// Maps words to column ids and validates every binding against the
    /// vocabulary and topic count. All unknown words are reported together.
    pub fn resolve(&self, vocab: &Vocabulary, n_topics: usize) -> Result<ResolvedAnchors> {
        let mut missing = Vec::new();
        let mut entries: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for b in &self.bindings {
            if b.topic >= n_topics {
                return Err(Error::InvalidAnchor(format!(
                    "topic {} out of range for {n_topics} topics",
                    b.topic
                )));
            }
            if !b.strength.is_finite() || b.strength < 1.0 {
                return Err(Error::InvalidAnchor(format!(
                    "strength {} for topic {} must be a finite value >= 1",
                    b.strength, b.topic
                )));
            }
            for w in &b.words {
                match vocab.id(w) {
                    Some(id) => {
                        let e = entries.entry((id, b.topic)).or_insert(b.strength);
                        *e = e.max(b.strength);
                    }
                    None if !missing.contains(w) => missing.push(w.clone()),
                    None => {}
                }
            }
        }
        if !missing.is_empty() {
            return Err(Error::UnknownAnchorWords(missing));
        }
        Ok(ResolvedAnchors {
            entries: entries.into_iter().map(|((w, t), s)| (w, t, s)).collect(),
        })
    }
}

/// Validated `(word id, topic, strength)` triples, sorted, one per pair.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResolvedAnchors {
    entries: Vec<(usize, usize, f64)>,
}

impl ResolvedAnchors {
    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Overwrites every anchored entry of α with its strength.
pub fn apply_anchors(alpha: &mut Matrix, anchors: &ResolvedAnchors) {
    for &(w, t, s) in &anchors.entries {
        alpha.set(w, t, s);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnchorCandidate {
    pub word: usize,
    pub term: String,
    /// `I(L : w)` in nats.
    pub info_gain: f64,
}

/// Ranked anchor candidates for one label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelAnchors {
    pub label: usize,
    pub candidates: Vec<AnchorCandidate>,
}

/// `I(L : w)` from a 2×2 count table: `n11` documents carry the label and
/// the word, `n10` the label only, `n01` the word only, `n00` neither.
pub fn information_gain(n11: usize, n10: usize, n01: usize, n00: usize) -> f64 {
    let n = (n11 + n10 + n01 + n00) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let label = [(n01 + n00) as f64, (n11 + n10) as f64];
    let word = [(n10 + n00) as f64, (n11 + n01) as f64];
    let cells = [[n00, n01], [n10, n11]];
    let mut mi = 0.0;
    for (l, row) in cells.iter().enumerate() {
        for (w, &c) in row.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                mi += c / n * (c * n / (label[l] * word[w])).ln();
            }
        }
    }
    mi
}

/// Top `top_k` words per label by information gain with the one-vs-rest
/// label indicator; ties go to the lexicographically smaller term.
///
/// With `filter_ambiguous`, words that make the top-k list of more than one
/// label are dropped everywhere and the lists refilled from lower ranks.
pub fn select_anchor_words(
    data: &SparseBinaryMatrix,
    vocab: &Vocabulary,
    labels: &[usize],
    top_k: usize,
    filter_ambiguous: bool,
) -> Result<Vec<LabelAnchors>> {
    let sets: Vec<Vec<usize>> = labels.iter().map(|&l| vec![l]).collect();
    select_anchor_words_multi(data, vocab, &sets, top_k, filter_ambiguous)
}

/// [`select_anchor_words`] for documents carrying any number of labels.
pub fn select_anchor_words_multi(
    data: &SparseBinaryMatrix,
    vocab: &Vocabulary,
    labels: &[Vec<usize>],
    top_k: usize,
    filter_ambiguous: bool,
) -> Result<Vec<LabelAnchors>> {
    if labels.len() != data.n_docs() {
        return Err(Error::InvalidLabels(format!(
            "{} labels for {} documents",
            labels.len(),
            data.n_docs()
        )));
    }
    if top_k == 0 {
        return Err(Error::InvalidArgument("top_k must be at least 1".into()));
    }
    if vocab.len() != data.n_words() {
        return Err(Error::DimensionMismatch {
            expected: vocab.len(),
            found: data.n_words(),
        });
    }
    let n = data.n_docs();
    let mut label_ids: Vec<usize> = labels.iter().flatten().copied().collect();
    label_ids.sort_unstable();
    label_ids.dedup();

    let rankings: Vec<Vec<AnchorCandidate>> = label_ids
        .iter()
        .map(|&label| {
            let member: Vec<bool> = labels.iter().map(|ls| ls.contains(&label)).collect();
            let n_label = member.iter().filter(|&&m| m).count();
            let mut ranked: Vec<AnchorCandidate> = (0..data.n_words())
                .map(|w| {
                    let docs = data.word_docs(w);
                    let n11 = docs.iter().filter(|&&d| member[d]).count();
                    let n01 = docs.len() - n11;
                    let n10 = n_label - n11;
                    let n00 = n - n11 - n01 - n10;
                    AnchorCandidate {
                        word: w,
                        term: vocab.term(w).to_string(),
                        info_gain: information_gain(n11, n10, n01, n00),
                    }
                })
                .collect();
            ranked.sort_by(|a, b| {
                b.info_gain
                    .total_cmp(&a.info_gain)
                    .then_with(|| a.term.cmp(&b.term))
            });
            ranked
        })
        .collect();

    // refilled lists can share words again, so repeat until no word is
    // listed under two labels
    let mut ambiguous = vec![false; data.n_words()];
    let mut lists = top_lists(&rankings, &ambiguous, top_k);
    if filter_ambiguous {
        loop {
            let mut hits = vec![0usize; data.n_words()];
            for c in lists.iter().flatten() {
                hits[c.word] += 1;
            }
            let shared: Vec<usize> = (0..data.n_words()).filter(|&w| hits[w] > 1).collect();
            if shared.is_empty() {
                break;
            }
            for w in shared {
                ambiguous[w] = true;
            }
            lists = top_lists(&rankings, &ambiguous, top_k);
        }
    }

    Ok(label_ids
        .into_iter()
        .zip(lists)
        .map(|(label, candidates)| LabelAnchors { label, candidates })
        .collect())
}

fn top_lists(
    rankings: &[Vec<AnchorCandidate>],
    excluded: &[bool],
    top_k: usize,
) -> Vec<Vec<AnchorCandidate>> {
    rankings
        .iter()
        .map(|r| {
            r.iter()
                .filter(|c| !excluded[c.word])
                .take(top_k)
                .cloned()
                .collect()
        })
        .collect()
}
