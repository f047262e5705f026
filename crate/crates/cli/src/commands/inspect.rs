use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::bail;
use clap::Args;
use corex::metrics::{
    adjusted_mutual_info, cluster_documents, homogeneity, require_single_labels, top_words,
    umass_coherence,
};
use corex::store;
use serde::Serialize;

use super::fit::write_posteriors;
use super::{positive, write_csv};
use crate::input::{self, CorpusArgs};
use crate::manifest::RunManifest;

#[derive(Args, Serialize, Debug)]
pub struct TopicsArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Words listed per topic
    #[arg(long, default_value_t = 10, value_parser = positive)]
    pub top: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn topics(args: TopicsArgs, manifest_path: Option<&Path>) -> anyhow::Result<()> {
    let mut manifest = RunManifest::new("topics", &args, None);
    manifest.input(&args.model)?;
    let model = manifest.time("load", || store::load_model(&args.model))?;
    let mut rows = Vec::with_capacity(model.n_topics());
    for j in 0..model.n_topics() {
        let words = top_words(&model, j, args.top)?;
        let terms: Vec<&str> = words.iter().map(|w| w.term.as_str()).collect();
        rows.push(vec![
            j.to_string(),
            model.tc()[j].to_string(),
            terms.join(" "),
        ]);
    }
    write_csv(
        input::output(args.output.as_deref())?,
        &["topic", "tc", "words"],
        rows,
    )?;
    let out = input::file_path(args.output.as_deref());
    if let Some(p) = out {
        manifest.output(p);
    }
    manifest.write(manifest_path, out)
}

#[derive(Args, Serialize, Debug)]
pub struct TransformArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// CSV destination; stdout by default
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn transform(args: TransformArgs, manifest_path: Option<&Path>) -> anyhow::Result<()> {
    let mut manifest = RunManifest::new("transform", &args, None);
    manifest.input(&args.model)?;
    let model = manifest.time("load", || store::load_model(&args.model))?;
    let docs = args.corpus.load(&mut manifest)?;
    let data = input::project(&docs, model.vocab(), &mut manifest)?;
    let post = manifest.time("transform", || model.transform_log(&data))?;
    write_posteriors(input::output(args.output.as_deref())?, &post)?;
    let out = input::file_path(args.output.as_deref());
    if let Some(p) = out {
        manifest.output(p);
    }
    manifest.write(manifest_path, out)
}

#[derive(Args, Serialize, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Reference labels, one line per document; enables clustering scores
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Words per topic used for coherence
    #[arg(long, default_value_t = 10, value_parser = positive)]
    pub top: usize,
    /// JSON report destination; stdout by default
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Flat `scope,metric,value` table for plotting
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Serialize)]
struct TopicReport {
    topic: usize,
    tc: f64,
    words: Vec<WordReport>,
    /// UMass coherence of the listed words; absent with fewer than two.
    coherence: Option<f64>,
}

#[derive(Serialize)]
struct WordReport {
    term: String,
    mi: f64,
}

#[derive(Serialize)]
struct ClusteringReport {
    homogeneity: f64,
    ami: f64,
    cluster_sizes: Vec<usize>,
}

#[derive(Serialize)]
struct EvalReport {
    n_docs: usize,
    total_tc: f64,
    mean_coherence: Option<f64>,
    topics: Vec<TopicReport>,
    clustering: Option<ClusteringReport>,
}

pub fn eval(args: EvalArgs, manifest_path: Option<&Path>) -> anyhow::Result<()> {
    let mut manifest = RunManifest::new("eval", &args, None);
    manifest.input(&args.model)?;
    let model = manifest.time("load", || store::load_model(&args.model))?;
    let docs = args.corpus.load(&mut manifest)?;
    let data = input::project(&docs, model.vocab(), &mut manifest)?;

    let topics = manifest.time("coherence", || -> anyhow::Result<Vec<TopicReport>> {
        (0..model.n_topics())
            .map(|j| {
                let words = top_words(&model, j, args.top)?;
                let ids: Vec<usize> = words.iter().map(|w| w.word).collect();
                let coherence = if ids.len() >= 2 {
                    Some(umass_coherence(&ids, &data)?)
                } else {
                    None
                };
                Ok(TopicReport {
                    topic: j,
                    tc: model.tc()[j],
                    words: words
                        .into_iter()
                        .map(|w| WordReport {
                            term: w.term,
                            mi: w.mi,
                        })
                        .collect(),
                    coherence,
                })
            })
            .collect()
    })?;
    let scored: Vec<f64> = topics.iter().filter_map(|t| t.coherence).collect();
    let mean_coherence =
        (!scored.is_empty()).then(|| scored.iter().sum::<f64>() / scored.len() as f64);

    let clustering = match &args.labels {
        Some(path) => {
            let (labels, _) = input::read_labels(path, &mut manifest)?;
            if labels.len() != data.n_docs() {
                bail!(
                    "{} has {} label lines for {} documents",
                    path.display(),
                    labels.len(),
                    data.n_docs()
                );
            }
            let truth = require_single_labels(&labels)?;
            let report = manifest.time("clustering", || -> anyhow::Result<ClusteringReport> {
                let assignments = cluster_documents(&model, &data)?;
                let mut cluster_sizes = vec![0; model.n_topics()];
                for &a in &assignments {
                    cluster_sizes[a] += 1;
                }
                Ok(ClusteringReport {
                    homogeneity: homogeneity(&assignments, &truth)?,
                    ami: adjusted_mutual_info(&assignments, &truth)?,
                    cluster_sizes,
                })
            })?;
            Some(report)
        }
        None => None,
    };

    let report = EvalReport {
        n_docs: data.n_docs(),
        total_tc: model.total_tc(),
        mean_coherence,
        topics,
        clustering,
    };
    let mut out = input::output(args.output.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &report)?;
    writeln!(out)?;
    out.flush()?;
    let primary = input::file_path(args.output.as_deref());
    if let Some(p) = primary {
        manifest.output(p);
    }

    if let Some(path) = &args.csv {
        let mut rows = Vec::new();
        for t in &report.topics {
            let scope = format!("topic_{}", t.topic);
            rows.push(vec![scope.clone(), "tc".into(), t.tc.to_string()]);
            if let Some(c) = t.coherence {
                rows.push(vec![scope, "coherence".into(), c.to_string()]);
            }
        }
        rows.push(vec![
            "model".into(),
            "total_tc".into(),
            report.total_tc.to_string(),
        ]);
        if let Some(c) = report.mean_coherence {
            rows.push(vec!["model".into(), "mean_coherence".into(), c.to_string()]);
        }
        if let Some(c) = &report.clustering {
            rows.push(vec![
                "model".into(),
                "homogeneity".into(),
                c.homogeneity.to_string(),
            ]);
            rows.push(vec!["model".into(), "ami".into(), c.ami.to_string()]);
        }
        write_csv(
            input::output(Some(path))?,
            &["scope", "metric", "value"],
            rows,
        )?;
        manifest.output(path);
    }
    manifest.write(manifest_path, primary)
}
