use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Serialize)]
struct InputDigest {
    path: PathBuf,
    sha256: String,
}

#[derive(Serialize)]
struct Phase {
    name: &'static str,
    seconds: f64,
}

/// Record of one command invocation: resolved settings, input digests,
/// outputs and wall time per phase.
#[derive(Serialize)]
pub struct RunManifest {
    command: &'static str,
    config: serde_json::Value,
    seed: Option<u64>,
    inputs: Vec<InputDigest>,
    outputs: Vec<PathBuf>,
    phases: Vec<Phase>,
}

pub fn sha256_file(path: &Path) -> anyhow::Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(format!("{:x}", Sha256::digest(bytes)))
}

impl RunManifest {
    pub fn new(command: &'static str, config: &impl Serialize, seed: Option<u64>) -> Self {
        RunManifest {
            command,
            config: serde_json::to_value(config).expect("arguments serialize"),
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            phases: Vec::new(),
        }
    }

    pub fn set_config(&mut self, key: &str, value: &impl Serialize) {
        if let serde_json::Value::Object(map) = &mut self.config {
            map.insert(
                key.to_string(),
                serde_json::to_value(value).expect("config serializes"),
            );
        }
    }

    pub fn input(&mut self, path: &Path) -> anyhow::Result<()> {
        let sha256 = sha256_file(path)?;
        self.inputs.push(InputDigest {
            path: path.to_path_buf(),
            sha256,
        });
        Ok(())
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    pub fn time<T>(&mut self, name: &'static str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.phases.push(Phase {
            name,
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }

    /// Writes to `explicit`, else next to `primary`, else to stderr.
    pub fn write(&self, explicit: Option<&Path>, primary: Option<&Path>) -> anyhow::Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        let target = explicit.map(Path::to_path_buf).or_else(|| {
            primary.map(|p| {
                let mut name = p.as_os_str().to_owned();
                name.push(".manifest.json");
                PathBuf::from(name)
            })
        });
        match target {
            Some(path) => std::fs::write(&path, text + "\n")
                .with_context(|| format!("writing manifest {}", path.display())),
            None => {
                eprintln!("{text}");
                Ok(())
            }
        }
    }
}
