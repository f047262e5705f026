use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::bail;
use clap::Args;
use corex::synthetic::bernoulli_corpus;
use corex::{fit, ModelConfig, PosteriorPath};
use serde::Serialize;

use super::{positive, write_csv, UsageError};
use crate::input;
use crate::manifest::RunManifest;

#[derive(Args, Serialize, Debug)]
pub struct BenchArgs {
    /// Document counts N, comma-separated
    #[arg(long, value_delimiter = ',', required = true, value_parser = positive)]
    pub docs: Vec<usize>,
    /// Vocabulary sizes n, comma-separated
    #[arg(long, value_delimiter = ',', required = true, value_parser = positive)]
    pub vocab: Vec<usize>,
    /// Occurrence densities in (0, 1], comma-separated
    #[arg(long, value_delimiter = ',', required = true)]
    pub density: Vec<f64>,
    #[arg(long, value_parser = positive)]
    pub topics: usize,
    #[arg(long, default_value_t = 3, value_parser = positive)]
    pub repeats: usize,
    /// Iterations per timed fit
    #[arg(long, default_value_t = 20, value_parser = positive)]
    pub iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Refuse grid points whose estimated footprint exceeds this
    #[arg(long, default_value_t = 4096)]
    pub max_memory_mb: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Rough peak bytes of one fit: both matrix orientations plus generation
/// buffer per nonzero, posterior copies per (doc, topic), and the marginal,
/// α and ratio tables per (word, topic).
fn estimated_bytes(n_docs: usize, n_words: usize, density: f64, m: usize) -> f64 {
    let nnz = n_docs as f64 * n_words as f64 * density;
    nnz * 48.0 + (n_docs * m) as f64 * 64.0 + (n_words * m) as f64 * 96.0
}

fn bench_config(args: &BenchArgs, path: PosteriorPath) -> ModelConfig {
    let mut config = ModelConfig::new(args.topics).with_seed(args.seed);
    config.max_iter = args.iters;
    config.anneal.hard_after = config.anneal.hard_after.min(args.iters);
    // run the full budget
    config.tol = f64::MIN_POSITIVE;
    config.path = path;
    config
}

pub fn run(args: BenchArgs, manifest_path: Option<&Path>) -> anyhow::Result<()> {
    if let Some(d) = args.density.iter().find(|&&d| !(d > 0.0 && d <= 1.0)) {
        return Err(UsageError(format!("density {d} outside (0, 1]")).into());
    }
    let mut grid = Vec::new();
    for &n_docs in &args.docs {
        for &n_words in &args.vocab {
            for &density in &args.density {
                let mb = estimated_bytes(n_docs, n_words, density, args.topics) / (1024.0 * 1024.0);
                if mb > args.max_memory_mb as f64 {
                    bail!(
                        "grid point N={n_docs} n={n_words} density={density} needs about {mb:.0} MiB, \
                         over the --max-memory-mb limit of {}",
                        args.max_memory_mb
                    );
                }
                grid.push((n_docs, n_words, density));
            }
        }
    }

    let mut manifest = RunManifest::new("bench", &args, Some(args.seed));
    manifest.set_config("sparse", &bench_config(&args, PosteriorPath::Sparse));
    let mut rows = Vec::new();
    for (n_docs, n_words, density) in grid {
        let (data, vocab) = manifest.time("generate", || {
            bernoulli_corpus(n_docs, n_words, density, args.seed)
        });
        for repeat in 0..args.repeats {
            for (name, path) in [
                ("sparse", PosteriorPath::Sparse),
                ("dense", PosteriorPath::Dense),
            ] {
                let config = bench_config(&args, path);
                let start = Instant::now();
                fit(&data, &vocab, &config, None)?;
                let seconds = start.elapsed().as_secs_f64();
                log::info!("N={n_docs} n={n_words} density={density} {name} repeat {repeat}: {seconds:.3}s");
                rows.push(vec![
                    n_docs.to_string(),
                    n_words.to_string(),
                    density.to_string(),
                    data.nnz().to_string(),
                    name.to_string(),
                    repeat.to_string(),
                    seconds.to_string(),
                ]);
            }
        }
    }
    write_csv(
        input::output(args.output.as_deref())?,
        &[
            "n_docs", "n_words", "density", "nnz", "path", "repeat", "seconds",
        ],
        rows,
    )?;
    let out = input::file_path(args.output.as_deref());
    if let Some(p) = out {
        manifest.output(p);
    }
    manifest.write(manifest_path, out)
}
