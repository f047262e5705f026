use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use corex::hierarchy::fit_hierarchy;
use corex::metrics::topic_count_curve;
use corex::store;
use serde::Serialize;

use super::{positive, write_csv, FitOptions, UsageError};
use crate::input::{self, CorpusArgs, VocabArgs};
use crate::manifest::RunManifest;

#[derive(Args, Serialize, Debug)]
pub struct HierarchyArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Topics per level, bottom up, e.g. `8,2`
    #[arg(long, value_delimiter = ',', required = true, value_parser = positive)]
    pub topics: Vec<usize>,
    #[command(flatten)]
    pub vocab: VocabArgs,
    #[command(flatten)]
    pub fit: FitOptions,
    /// Edge list destination (`level child parent weight` lines); stdout by default
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Save each level's model as `level<k>.json` in this directory
    #[arg(long)]
    pub models_dir: Option<PathBuf>,
}

pub fn hierarchy(args: HierarchyArgs, manifest_path: Option<&Path>) -> anyhow::Result<()> {
    let configs = args
        .topics
        .iter()
        .map(|&m| args.fit.config(m))
        .collect::<Result<Vec<_>, _>>()?;
    let mut manifest = RunManifest::new("hierarchy", &args, Some(args.fit.seed));
    manifest.set_config("levels", &configs);
    let docs = args.corpus.load(&mut manifest)?;
    let (data, vocab) = input::vectorize(&docs, &args.vocab, &mut manifest)?;
    let h = manifest.time("fit", || fit_hierarchy(&data, &vocab, &configs))?;

    let mut out = input::output(args.output.as_deref())?;
    h.write_edges(&mut out)?;
    out.flush()?;
    let primary = input::file_path(args.output.as_deref());
    if let Some(p) = primary {
        manifest.output(p);
    }
    if let Some(dir) = &args.models_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (k, level) in h.levels.iter().enumerate() {
            let path = dir.join(format!("level{}.json", k + 1));
            store::save_model(&level.model, &path)?;
            manifest.output(&path);
        }
    }
    manifest.write(manifest_path, primary)
}

#[derive(Args, Serialize, Debug)]
pub struct TopicCountArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Strictly ascending topic counts, e.g. `1,2,3,4,5,6`
    #[arg(long, value_delimiter = ',', required = true, value_parser = positive)]
    pub topics: Vec<usize>,
    #[command(flatten)]
    pub vocab: VocabArgs,
    #[command(flatten)]
    pub fit: FitOptions,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn topic_count(args: TopicCountArgs, manifest_path: Option<&Path>) -> anyhow::Result<()> {
    if args.topics.windows(2).any(|w| w[0] >= w[1]) {
        return Err(UsageError("--topics must be strictly ascending".into()).into());
    }
    let base = args.fit.config(args.topics[0])?;
    let mut manifest = RunManifest::new("topic-count", &args, Some(base.seed));
    manifest.set_config("model", &base);
    let docs = args.corpus.load(&mut manifest)?;
    let (data, vocab) = input::vectorize(&docs, &args.vocab, &mut manifest)?;
    let curve = manifest.time("fit", || {
        topic_count_curve(&data, &vocab, &base, &args.topics)
    })?;
    let rows = curve.points.iter().map(|p| {
        vec![
            p.n_topics.to_string(),
            p.total_tc.to_string(),
            p.weakest_tc.to_string(),
            (p.weakest_tc / p.total_tc).to_string(),
            (curve.flagged == Some(p.n_topics)).to_string(),
        ]
    });
    write_csv(
        input::output(args.output.as_deref())?,
        &[
            "n_topics",
            "total_tc",
            "weakest_tc",
            "weakest_fraction",
            "flagged",
        ],
        rows,
    )?;
    let out = input::file_path(args.output.as_deref());
    if let Some(p) = out {
        manifest.output(p);
    }
    manifest.write(manifest_path, out)
}
