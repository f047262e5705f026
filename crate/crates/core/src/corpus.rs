//! Document ingestion, vocabulary construction and binarization.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Input file layouts understood by [`load_corpus`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorpusFormat {
    /// One document per line, whitespace tokenized.
    Lines,
    /// Header `N n`, then `doc word` id pairs; word ids index the lines of
    /// the vocabulary file.
    SparseTriplets { vocab_path: std::path::PathBuf },
}

/// Tokenized documents.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Documents {
    docs: Vec<Vec<String>>,
}

impl Documents {
    pub fn new(docs: Vec<Vec<String>>) -> Self {
        Documents { docs }
    }

    /// Tokenizes each string with [`tokenize`].
    pub fn from_texts<S: AsRef<str>>(texts: &[S]) -> Self {
        Documents {
            docs: texts.iter().map(|t| tokenize(t.as_ref())).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[String]> {
        self.docs.iter().map(Vec::as_slice)
    }
}

/// Whitespace split, lowercase, trim ASCII punctuation from both ends.
/// Tokens that are pure punctuation vanish.
pub fn tokenize(line: &str) -> Vec<String> {
    line.split_whitespace()
        .map(|tok| tok.trim_matches(|c: char| c.is_ascii_punctuation()))
        .filter(|tok| !tok.is_empty())
        .map(str::to_lowercase)
        .collect()
}

pub fn load_corpus(path: impl AsRef<Path>, format: &CorpusFormat) -> Result<Documents> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let docs = match format {
        CorpusFormat::Lines => Documents::from_texts(&text.lines().collect::<Vec<_>>()),
        CorpusFormat::SparseTriplets { vocab_path } => {
            let vocab_text =
                fs::read_to_string(vocab_path).map_err(|e| Error::io(vocab_path, e))?;
            let terms: Vec<&str> = vocab_text.lines().collect();
            parse_triplets(path, &text, &terms)?
        }
    };
    if docs.is_empty() {
        log::warn!("{} contains no documents", path.display());
    }
    Ok(docs)
}

fn parse_triplets(path: &Path, text: &str, terms: &[&str]) -> Result<Documents> {
    let fail = |line: usize, message: String| Error::Format {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let Some((header_line, header)) = lines.next() else {
        return Ok(Documents::default());
    };
    let (n_docs, n_words) = parse_pair(header).ok_or_else(|| {
        fail(
            header_line,
            format!("expected header `N n`, found `{header}`"),
        )
    })?;
    if terms.len() < n_words {
        return Err(fail(
            header_line,
            format!(
                "header declares {n_words} words but the vocabulary file has {}",
                terms.len()
            ),
        ));
    }

    let mut docs = vec![Vec::new(); n_docs];
    for (line, content) in lines {
        let (doc, word) = parse_pair(content).ok_or_else(|| {
            fail(
                line,
                format!("expected `doc_id word_id`, found `{content}`"),
            )
        })?;
        if doc >= n_docs || word >= n_words {
            return Err(fail(
                line,
                format!("coordinate ({doc},{word}) outside declared shape {n_docs}x{n_words}"),
            ));
        }
        docs[doc].push(terms[word].to_string());
    }
    Ok(Documents::new(docs))
}

fn parse_pair(s: &str) -> Option<(usize, usize)> {
    let mut it = s.split_ascii_whitespace();
    let a = it.next()?.parse().ok()?;
    let b = it.next()?.parse().ok()?;
    it.next().is_none().then_some((a, b))
}

/// Ordered word types with their document frequencies.
///
/// Built by [`build_vocabulary`] the order is descending document frequency
/// with lexicographic tie-break.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    terms: Vec<String>,
    doc_freq: Vec<usize>,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    terms: Vec<String>,
    doc_freq: Vec<usize>,
}

impl TryFrom<VocabularyRepr> for Vocabulary {
    type Error = String;

    fn try_from(r: VocabularyRepr) -> std::result::Result<Self, String> {
        if r.terms.len() != r.doc_freq.len() {
            return Err(format!(
                "{} terms but {} document frequencies",
                r.terms.len(),
                r.doc_freq.len()
            ));
        }
        Ok(Vocabulary::from_parts(r.terms, r.doc_freq))
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        VocabularyRepr {
            terms: v.terms,
            doc_freq: v.doc_freq,
        }
    }
}

impl Vocabulary {
    /// Keeps the given column order. Duplicate terms resolve to their first
    /// occurrence in the index.
    pub fn from_parts(terms: Vec<String>, doc_freq: Vec<usize>) -> Self {
        assert_eq!(
            terms.len(),
            doc_freq.len(),
            "terms and doc_freq differ in length"
        );
        let mut index = HashMap::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            index.entry(t.clone()).or_insert(i);
        }
        Vocabulary {
            terms,
            doc_freq,
            index,
        }
    }

    /// Vocabulary whose columns follow `terms` exactly, with document
    /// frequencies read off an existing matrix.
    pub fn for_matrix(terms: Vec<String>, data: &SparseBinaryMatrix) -> Result<Self> {
        if terms.len() != data.n_words() {
            return Err(Error::DimensionMismatch {
                expected: data.n_words(),
                found: terms.len(),
            });
        }
        let doc_freq = (0..data.n_words())
            .map(|i| data.word_docs(i).len())
            .collect();
        Ok(Vocabulary::from_parts(terms, doc_freq))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term(&self, id: usize) -> &str {
        &self.terms[id]
    }

    pub fn doc_freq(&self) -> &[usize] {
        &self.doc_freq
    }

    pub fn id(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }
}

pub fn build_vocabulary(docs: &Documents, min_df: usize, max_vocab: usize) -> Result<Vocabulary> {
    if min_df == 0 {
        return Err(Error::InvalidArgument("min_df must be at least 1".into()));
    }
    if max_vocab == 0 {
        return Err(Error::InvalidArgument(
            "max_vocab must be at least 1".into(),
        ));
    }
    let mut df: HashMap<&str, usize> = HashMap::new();
    let mut seen: Vec<&str> = Vec::new();
    for doc in docs.iter() {
        seen.clear();
        seen.extend(doc.iter().map(String::as_str));
        seen.sort_unstable();
        seen.dedup();
        for &t in &seen {
            *df.entry(t).or_insert(0) += 1;
        }
    }
    let mut kept: Vec<(&str, usize)> = df.into_iter().filter(|&(_, c)| c >= min_df).collect();
    if kept.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    kept.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    kept.truncate(max_vocab);
    let (terms, doc_freq) = kept.into_iter().map(|(t, c)| (t.to_string(), c)).unzip();
    Ok(Vocabulary::from_parts(terms, doc_freq))
}

/// Binary document-term matrix stored by its nonzero coordinates.
///
/// Both row (document → words) and column (word → documents) adjacency are
/// kept, sorted ascending, so either traversal costs O(ρ).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseBinaryMatrix {
    n_docs: usize,
    n_words: usize,
    row_ptr: Vec<usize>,
    row_words: Vec<usize>,
    col_ptr: Vec<usize>,
    col_docs: Vec<usize>,
}

impl SparseBinaryMatrix {
    /// Duplicate coordinates collapse to one entry.
    pub fn from_coordinates(
        n_docs: usize,
        n_words: usize,
        coords: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut coords: Vec<(usize, usize)> = coords.into_iter().collect();
        if let Some(&(d, w)) = coords.iter().find(|&&(d, w)| d >= n_docs || w >= n_words) {
            return Err(Error::InvalidArgument(format!(
                "coordinate ({d},{w}) outside shape {n_docs}x{n_words}"
            )));
        }
        coords.sort_unstable();
        coords.dedup();

        let mut row_ptr = vec![0; n_docs + 1];
        let mut col_ptr = vec![0; n_words + 1];
        for &(d, w) in &coords {
            row_ptr[d + 1] += 1;
            col_ptr[w + 1] += 1;
        }
        for i in 0..n_docs {
            row_ptr[i + 1] += row_ptr[i];
        }
        for i in 0..n_words {
            col_ptr[i + 1] += col_ptr[i];
        }
        let row_words = coords.iter().map(|&(_, w)| w).collect();
        let mut col_docs = vec![0; coords.len()];
        let mut fill = col_ptr.clone();
        // coords are doc-major, so each column receives docs in ascending order
        for &(d, w) in &coords {
            col_docs[fill[w]] = d;
            fill[w] += 1;
        }
        Ok(SparseBinaryMatrix {
            n_docs,
            n_words,
            row_ptr,
            row_words,
            col_ptr,
            col_docs,
        })
    }

    /// Nonzero wherever the row entry is true.
    pub fn from_dense(rows: &[Vec<bool>], n_words: usize) -> Result<Self> {
        let coords = rows.iter().enumerate().flat_map(|(d, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(move |(w, _)| (d, w))
        });
        Self::from_coordinates(rows.len(), n_words, coords)
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn n_words(&self) -> usize {
        self.n_words
    }

    /// Number of nonzero coordinates, ρ.
    pub fn nnz(&self) -> usize {
        self.row_words.len()
    }

    /// Word ids present in document `doc`, ascending.
    pub fn doc_words(&self, doc: usize) -> &[usize] {
        &self.row_words[self.row_ptr[doc]..self.row_ptr[doc + 1]]
    }

    /// Documents containing word `word`, ascending.
    pub fn word_docs(&self, word: usize) -> &[usize] {
        &self.col_docs[self.col_ptr[word]..self.col_ptr[word + 1]]
    }

    pub fn contains(&self, doc: usize, word: usize) -> bool {
        self.doc_words(doc).binary_search(&word).is_ok()
    }

    pub fn coordinates(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n_docs).flat_map(move |d| self.doc_words(d).iter().map(move |&w| (d, w)))
    }

    pub fn to_dense(&self) -> Vec<Vec<bool>> {
        let mut rows = vec![vec![false; self.n_words]; self.n_docs];
        for (d, w) in self.coordinates() {
            rows[d][w] = true;
        }
        rows
    }

    /// Subset of rows, in the given order.
    pub fn select_rows(&self, docs: &[usize]) -> Self {
        let coords = docs
            .iter()
            .enumerate()
            .flat_map(|(new, &old)| self.doc_words(old).iter().map(move |&w| (new, w)));
        Self::from_coordinates(docs.len(), self.n_words, coords).expect("rows already validated")
    }
}

/// Binarized corpus together with the number of dropped out-of-vocabulary
/// tokens.
#[derive(Debug, Clone)]
pub struct Binarized {
    pub matrix: SparseBinaryMatrix,
    pub oov_tokens: usize,
}

pub fn binarize(docs: &Documents, vocab: &Vocabulary) -> Result<Binarized> {
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    let mut oov_tokens = 0;
    let mut coords = Vec::new();
    for (d, doc) in docs.iter().enumerate() {
        for tok in doc {
            match vocab.id(tok) {
                Some(w) => coords.push((d, w)),
                None => oov_tokens += 1,
            }
        }
    }
    let matrix = SparseBinaryMatrix::from_coordinates(docs.len(), vocab.len(), coords)?;
    Ok(Binarized { matrix, oov_tokens })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn docs(texts: &[&str]) -> Documents {
        Documents::from_texts(texts)
    }

    #[test]
    fn tokenizer_lowercases_and_strips_punctuation() {
        assert_eq!(
            tokenize("Hello, World!  (x) -- y's"),
            vec!["hello", "world", "x", "y's"]
        );
    }

    #[test]
    fn vocabulary_orders_by_doc_freq() {
        let v = build_vocabulary(&docs(&["a b", "a"]), 1, 100).unwrap();
        assert_eq!(v.terms(), ["a", "b"]);
        assert_eq!(v.doc_freq(), [2, 1]);
        assert_eq!(v.id("b"), Some(1));

        let v = build_vocabulary(&docs(&["a b", "a"]), 2, 100).unwrap();
        assert_eq!(v.terms(), ["a"]);
    }

    #[test]
    fn vocabulary_tie_break_is_lexicographic() {
        let v = build_vocabulary(&docs(&["c b a", "c"]), 1, 2).unwrap();
        assert_eq!(v.terms(), ["c", "a"]);
    }

    #[test]
    fn vocabulary_rejects_everything_filtered() {
        assert!(matches!(
            build_vocabulary(&docs(&["a", "b"]), 2, 10),
            Err(Error::EmptyVocabulary)
        ));
        assert!(build_vocabulary(&docs(&["a"]), 0, 10).is_err());
    }

    #[test]
    fn vocabulary_cap_on_zipf_corpus_matches_exhaustive_sort() {
        // 30,000 types; type k appears in roughly 400/(k+1) of 400 documents,
        // always at least one.
        let n_types = 30_000;
        let n_docs = 400;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut texts = vec![String::new(); n_docs];
        for k in 0..n_types {
            let word = format!("w{k}");
            let df = ((n_docs as f64 / (k as f64 + 1.0)).ceil() as usize).clamp(1, n_docs);
            for _ in 0..df {
                let d = rng.gen_range(0..n_docs);
                texts[d].push(' ');
                texts[d].push_str(&word);
            }
        }
        let corpus = Documents::from_texts(&texts);
        let v = build_vocabulary(&corpus, 1, 20_000).unwrap();
        assert_eq!(v.len(), 20_000);

        // oracle: count with a dense per-type set and sort everything
        let mut counts: HashMap<String, std::collections::HashSet<usize>> = HashMap::new();
        for (d, doc) in corpus.iter().enumerate() {
            for t in doc {
                counts.entry(t.clone()).or_default().insert(d);
            }
        }
        let mut all: Vec<(String, usize)> = counts.into_iter().map(|(t, s)| (t, s.len())).collect();
        all.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let expected: Vec<&str> = all[..20_000].iter().map(|(t, _)| t.as_str()).collect();
        assert_eq!(v.terms(), expected.as_slice());
        assert_eq!(
            v.doc_freq(),
            all[..20_000].iter().map(|p| p.1).collect::<Vec<_>>()
        );
    }

    #[test]
    fn binarize_discards_counts_and_tallies_oov() {
        let vocab = Vocabulary::from_parts(vec!["a".into(), "b".into()], vec![1, 1]);
        let b = binarize(&docs(&["a a a b"]), &vocab).unwrap();
        assert_eq!(b.matrix.coordinates().collect::<Vec<_>>(), [(0, 0), (0, 1)]);
        assert_eq!(b.oov_tokens, 0);

        let b = binarize(&docs(&["c"]), &vocab).unwrap();
        assert_eq!(b.matrix.nnz(), 0);
        assert_eq!(b.matrix.n_docs(), 1);
        assert_eq!(b.oov_tokens, 1);
    }

    #[test]
    fn every_column_nonempty_through_build_vocabulary() {
        let corpus = docs(&["x y z", "y z", "z q", ""]);
        let vocab = build_vocabulary(&corpus, 1, 100).unwrap();
        let m = binarize(&corpus, &vocab).unwrap().matrix;
        for w in 0..m.n_words() {
            assert!(!m.word_docs(w).is_empty());
        }
    }

    #[test]
    fn coordinate_out_of_range_is_rejected() {
        assert!(SparseBinaryMatrix::from_coordinates(2, 3, [(5, 1)]).is_err());
    }

    #[test]
    fn load_lines_and_empty_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.txt");
        fs::write(&p, "a b\nc\nd e f\n").unwrap();
        assert_eq!(load_corpus(&p, &CorpusFormat::Lines).unwrap().len(), 3);
        fs::write(&p, "").unwrap();
        assert_eq!(load_corpus(&p, &CorpusFormat::Lines).unwrap().len(), 0);
        assert!(matches!(
            load_corpus(dir.path().join("missing"), &CorpusFormat::Lines),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn load_triplets() {
        let dir = tempfile::tempdir().unwrap();
        let vocab = dir.path().join("vocab.txt");
        fs::write(&vocab, "alpha\nbeta\ngamma\n").unwrap();
        let format = CorpusFormat::SparseTriplets { vocab_path: vocab };
        let p = dir.path().join("t.txt");

        fs::write(&p, "2 3\n0 0\n0 2\n1 1\n").unwrap();
        let d = load_corpus(&p, &format).unwrap();
        assert_eq!(
            d.iter().collect::<Vec<_>>(),
            vec![
                &["alpha".to_string(), "gamma".into()][..],
                &["beta".to_string()][..]
            ]
        );

        fs::write(&p, "2 3\n0 0\n5 1\n").unwrap();
        match load_corpus(&p, &format) {
            Err(Error::Format { line, message, .. }) => {
                assert_eq!(line, 3);
                assert!(message.contains("(5,1)"), "{message}");
            }
            other => panic!("expected coordinate error, got {other:?}"),
        }

        fs::write(&p, "2 3\n0 x\n").unwrap();
        assert!(matches!(
            load_corpus(&p, &format),
            Err(Error::Format { line: 2, .. })
        ));
    }

    proptest! {
        #[test]
        fn binarized_pattern_is_support_of_counts(
            counts in proptest::collection::vec(proptest::collection::vec(0u8..4, 6), 1..12)
        ) {
            let terms: Vec<String> = (0..6).map(|i| format!("t{i}")).collect();
            let vocab = Vocabulary::from_parts(terms.clone(), vec![1; 6]);
            let texts: Vec<String> = counts
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .flat_map(|(i, &c)| std::iter::repeat_n(terms[i].clone(), c as usize))
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .collect();
            let m = binarize(&Documents::from_texts(&texts), &vocab).unwrap().matrix;
            let dense: Vec<Vec<bool>> = counts.iter().map(|r| r.iter().map(|&c| c > 0).collect()).collect();
            prop_assert_eq!(m.to_dense(), dense.clone());
            // idempotent: rebuilding from the pattern changes nothing
            prop_assert_eq!(SparseBinaryMatrix::from_dense(&dense, 6).unwrap(), m);
        }
    }
}
