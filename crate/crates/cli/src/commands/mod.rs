pub mod anchors;
pub mod bench;
pub mod fit;
pub mod inspect;
pub mod structure;

use clap::Args;
use corex::ModelConfig;
use serde::Serialize;

/// Bad flag values caught after parsing; exits with the usage status.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(format!("expected a positive integer, got `{s}`")),
    }
}

/// Optimizer settings shared by the fitting commands.
#[derive(Args, Serialize, Debug, Clone)]
pub struct FitOptions {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Independent restarts (seeds seed, seed+1, ...); the best objective wins
    #[arg(long, default_value_t = 1, value_parser = positive)]
    pub restarts: usize,
    #[arg(long, default_value_t = 200, value_parser = positive)]
    pub max_iter: usize,
    /// Relative objective change that counts as converged
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

impl FitOptions {
    pub fn config(&self, n_topics: usize) -> Result<ModelConfig, UsageError> {
        let mut config = ModelConfig::new(n_topics)
            .with_seed(self.seed)
            .with_restarts(self.restarts);
        config.max_iter = self.max_iter;
        config.tol = self.tol;
        if config.anneal.hard_after > config.max_iter {
            log::warn!(
                "annealing shortened to {} iterations to fit --max-iter",
                config.max_iter
            );
            config.anneal.hard_after = config.max_iter;
        }
        config.validate().map_err(|e| UsageError(e.to_string()))?;
        Ok(config)
    }
}

/// Writes rows of displayable cells as CSV.
pub fn write_csv<W: std::io::Write>(
    out: W,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
