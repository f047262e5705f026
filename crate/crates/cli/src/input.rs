use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, ValueEnum};
use corex::corpus::{binarize, build_vocabulary, load_corpus, CorpusFormat};
use corex::{Documents, SparseBinaryMatrix, Vocabulary};
use serde::Serialize;

use crate::manifest::RunManifest;

#[derive(ValueEnum, Serialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    /// One whitespace-tokenized document per line
    Lines,
    /// Header `N n`, then `doc_id word_id` lines; terms come from --vocab
    Triplets,
}

#[derive(Args, Serialize, Debug, Clone)]
pub struct CorpusArgs {
    /// Corpus file
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Lines)]
    pub format: Format,
    /// Term list for the triplets format, one term per line
    #[arg(long, required_if_eq("format", "triplets"))]
    pub vocab: Option<PathBuf>,
}

impl CorpusArgs {
    pub fn load(&self, manifest: &mut RunManifest) -> anyhow::Result<Documents> {
        manifest.input(&self.input)?;
        let format = match self.format {
            Format::Lines => CorpusFormat::Lines,
            Format::Triplets => {
                let vocab_path = self.vocab.clone().expect("clap enforces --vocab");
                manifest.input(&vocab_path)?;
                CorpusFormat::SparseTriplets { vocab_path }
            }
        };
        Ok(manifest.time("load", || load_corpus(&self.input, &format))?)
    }
}

#[derive(Args, Serialize, Debug, Clone)]
pub struct VocabArgs {
    /// Drop terms occurring in fewer documents
    #[arg(long, default_value_t = 1)]
    pub min_df: usize,
    /// Keep at most this many terms, most frequent first
    #[arg(long)]
    pub max_vocab: Option<usize>,
}

/// Builds the vocabulary and the binary matrix for a freshly loaded corpus.
pub fn vectorize(
    docs: &Documents,
    opts: &VocabArgs,
    manifest: &mut RunManifest,
) -> anyhow::Result<(SparseBinaryMatrix, Vocabulary)> {
    let vocab = manifest.time("vocabulary", || {
        build_vocabulary(docs, opts.min_df, opts.max_vocab.unwrap_or(usize::MAX))
    })?;
    let data = project(docs, &vocab, manifest)?;
    Ok((data, vocab))
}

/// Binary matrix of `docs` over an existing vocabulary.
pub fn project(
    docs: &Documents,
    vocab: &Vocabulary,
    manifest: &mut RunManifest,
) -> anyhow::Result<SparseBinaryMatrix> {
    let b = manifest.time("binarize", || binarize(docs, vocab))?;
    if b.oov_tokens > 0 {
        log::info!("{} out-of-vocabulary tokens ignored", b.oov_tokens);
    }
    Ok(b.matrix)
}

/// Label file: one line per document holding its whitespace-separated label
/// names. Returns per-document label ids and the names in id order
/// (sorted).
pub fn read_labels(
    path: &Path,
    manifest: &mut RunManifest,
) -> anyhow::Result<(Vec<Vec<usize>>, Vec<String>)> {
    manifest.input(path)?;
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let rows: Vec<Vec<&str>> = text
        .lines()
        .map(|l| l.split_whitespace().collect())
        .collect();
    let names: Vec<String> = rows
        .iter()
        .flatten()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(String::from)
        .collect();
    let ids = rows
        .iter()
        .map(|r| {
            let mut ls: Vec<usize> = r
                .iter()
                .map(|l| names.binary_search_by(|n| n.as_str().cmp(l)).unwrap())
                .collect();
            ls.sort_unstable();
            ls.dedup();
            ls
        })
        .collect();
    Ok((ids, names))
}

/// Opens `path` for writing, or stdout when absent or `-`.
pub fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn std::io::Write>> {
    match path {
        Some(p) if p != Path::new("-") => {
            let f =
                std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
            Ok(Box::new(std::io::BufWriter::new(f)))
        }
        _ => Ok(Box::new(std::io::stdout().lock())),
    }
}

/// `path` unless it names stdout.
pub fn file_path(path: Option<&Path>) -> Option<&Path> {
    path.filter(|p| *p != Path::new("-"))
}
