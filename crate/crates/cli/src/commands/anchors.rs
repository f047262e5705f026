use std::path::{Path, PathBuf};

use anyhow::bail;
use clap::Args;
use corex::anchor::select_anchor_words_multi;
use serde::Serialize;

use super::{positive, write_csv};
use crate::input::{self, CorpusArgs, VocabArgs};
use crate::manifest::RunManifest;

#[derive(Args, Serialize, Debug)]
pub struct SelectAnchorsArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub vocab: VocabArgs,
    /// Labels, one line of whitespace-separated names per document
    #[arg(long)]
    pub labels: PathBuf,
    /// Candidates listed per label
    #[arg(long, default_value_t = 10, value_parser = positive)]
    pub top: usize,
    /// Drop words that rank for more than one label
    #[arg(long)]
    pub filter_ambiguous: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn run(args: SelectAnchorsArgs, manifest_path: Option<&Path>) -> anyhow::Result<()> {
    let mut manifest = RunManifest::new("select-anchors", &args, None);
    let docs = args.corpus.load(&mut manifest)?;
    let (data, vocab) = input::vectorize(&docs, &args.vocab, &mut manifest)?;
    let (labels, names) = input::read_labels(&args.labels, &mut manifest)?;
    if labels.len() != data.n_docs() {
        bail!(
            "{} has {} label lines for {} documents",
            args.labels.display(),
            labels.len(),
            data.n_docs()
        );
    }
    let ranked = manifest.time("select", || {
        select_anchor_words_multi(&data, &vocab, &labels, args.top, args.filter_ambiguous)
    })?;
    let rows = ranked.iter().flat_map(|l| {
        let name = &names[l.label];
        l.candidates.iter().enumerate().map(move |(rank, c)| {
            vec![
                name.clone(),
                (rank + 1).to_string(),
                c.term.clone(),
                c.info_gain.to_string(),
            ]
        })
    });
    write_csv(
        input::output(args.output.as_deref())?,
        &["label", "rank", "term", "info_gain"],
        rows,
    )?;
    let out = input::file_path(args.output.as_deref());
    if let Some(p) = out {
        manifest.output(p);
    }
    manifest.write(manifest_path, out)
}
