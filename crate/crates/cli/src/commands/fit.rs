use std::path::{Path, PathBuf};

use clap::Args;
use corex::anchor::DEFAULT_STRENGTH;
use corex::model::LogPosteriors;
use corex::{fit, store, AnchorSpec};
use serde::Serialize;

use super::{positive, write_csv, FitOptions};
use crate::input::{self, CorpusArgs, VocabArgs};
use crate::manifest::RunManifest;

#[derive(Args, Serialize, Debug)]
pub struct FitArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Number of topics m
    #[arg(long, value_parser = positive)]
    pub topics: usize,
    #[command(flatten)]
    pub vocab: VocabArgs,
    #[command(flatten)]
    pub fit: FitOptions,
    /// Anchor file: JSON list of {"topic", "words", "strength"}
    #[arg(long)]
    pub anchors: Option<PathBuf>,
    /// Strength for anchor bindings that do not set one
    #[arg(long, default_value_t = DEFAULT_STRENGTH)]
    pub strength: f64,
    #[arg(long, default_value = "model.json")]
    pub output: PathBuf,
    /// Also write the training posteriors p(y_j=1|x) as CSV
    #[arg(long)]
    pub posteriors: Option<PathBuf>,
}

/// `doc,topic_0,...` rows of `p(y_j = 1 | x)`.
pub fn write_posteriors<W: std::io::Write>(out: W, post: &LogPosteriors) -> anyhow::Result<()> {
    let m = post.n_topics();
    let header: Vec<String> = std::iter::once("doc".to_string())
        .chain((0..m).map(|j| format!("topic_{j}")))
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = (0..post.n_docs()).map(|d| {
        std::iter::once(d.to_string())
            .chain((0..m).map(|j| post.get(d, j)[1].exp().to_string()))
            .collect()
    });
    write_csv(out, &header, rows)
}

pub fn run(args: FitArgs, manifest_path: Option<&Path>) -> anyhow::Result<()> {
    let config = args.fit.config(args.topics)?;
    let mut manifest = RunManifest::new("fit", &args, Some(config.seed));
    manifest.set_config("model", &config);

    let docs = args.corpus.load(&mut manifest)?;
    let (data, vocab) = input::vectorize(&docs, &args.vocab, &mut manifest)?;
    let anchors = match &args.anchors {
        Some(path) => {
            manifest.input(path)?;
            Some(AnchorSpec::load(path, args.strength)?)
        }
        None => None,
    };

    let result = manifest.time("fit", || fit(&data, &vocab, &config, anchors.as_ref()))?;

    let rows = result.restarts.iter().map(|r| {
        vec![
            r.restart.to_string(),
            r.seed.to_string(),
            r.iterations.to_string(),
            r.converged.to_string(),
            r.final_objective.to_string(),
            (r.restart == result.selected).to_string(),
        ]
    });
    write_csv(
        std::io::stdout().lock(),
        &[
            "restart",
            "seed",
            "iterations",
            "converged",
            "objective",
            "selected",
        ],
        rows,
    )?;

    manifest.time("save", || store::save_model(&result.model, &args.output))?;
    manifest.output(&args.output);
    if let Some(path) = &args.posteriors {
        write_posteriors(input::output(Some(path))?, &result.log_posteriors)?;
        manifest.output(path);
    }
    manifest.write(manifest_path, Some(&args.output))
}
