mod commands;
mod input;
mod manifest;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::UsageError;

#[derive(Parser)]
#[command(
    name = "corex",
    version,
    about = "Sparse CorEx topic models over binary bag-of-words corpora"
)]
struct Cli {
    /// Where to write the run manifest. Defaults to `<output>.manifest.json`
    /// next to the command's main output, or stderr when that is stdout.
    #[arg(long, global = true)]
    manifest: Option<std::path::PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model and save it
    Fit(commands::fit::FitArgs),
    /// List each topic's top words
    Topics(commands::inspect::TopicsArgs),
    /// Write document-topic probabilities as CSV
    Transform(commands::inspect::TransformArgs),
    /// Coherence and clustering report
    Eval(commands::inspect::EvalArgs),
    /// Rank anchor word candidates per label by information gain
    SelectAnchors(commands::anchors::SelectAnchorsArgs),
    /// Fit stacked levels and export the topic tree
    Hierarchy(commands::structure::HierarchyArgs),
    /// Total correlation against the number of topics
    TopicCount(commands::structure::TopicCountArgs),
    /// Time sparse and dense posterior updates on synthetic corpora
    Bench(commands::bench::BenchArgs),
}

fn configure_threads() -> Result<(), UsageError> {
    let Ok(value) = std::env::var("COREX_THREADS") else {
        return Ok(());
    };
    let threads: usize = value.parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        UsageError(format!(
            "COREX_THREADS must be a positive integer, got `{value}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| UsageError(e.to_string()))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let manifest = cli.manifest.as_deref();
    match cli.command {
        Command::Fit(args) => commands::fit::run(args, manifest),
        Command::Topics(args) => commands::inspect::topics(args, manifest),
        Command::Transform(args) => commands::inspect::transform(args, manifest),
        Command::Eval(args) => commands::inspect::eval(args, manifest),
        Command::SelectAnchors(args) => commands::anchors::run(args, manifest),
        Command::Hierarchy(args) => commands::structure::hierarchy(args, manifest),
        Command::TopicCount(args) => commands::structure::topic_count(args, manifest),
        Command::Bench(args) => commands::bench::run(args, manifest),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let result = configure_threads()
        .map_err(anyhow::Error::from)
        .and_then(|()| run(cli));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
