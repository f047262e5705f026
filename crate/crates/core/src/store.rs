//! Versioned JSON model files.
//!
//! Floats are written in shortest round-trip form and read back with exact
//! parsing, so a loaded model reproduces the saved one bit for bit and
//! re-saving it yields identical bytes. The field layout is described in the
//! repository README.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::anchor::AnchorSpec;
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::model::{FittedModel, MarginalTable, Matrix, ModelConfig};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format_version: u32,
    vocabulary: Vocabulary,
    config: ModelConfig,
    /// Optimizer index of each model topic.
    topic_order: Vec<usize>,
    tc: Vec<f64>,
    /// Nonzero `[word, topic, weight]` entries, word-major.
    alpha: Vec<(usize, usize, f64)>,
    /// `[ln p(y=0), ln p(y=1)]` per topic.
    log_p_y: Vec<[f64; 2]>,
    /// Per word, per topic: `[ln p(x=1|y=0), ln p(x=1|y=1)]`.
    log_p_x_given_y: Vec<Vec<[f64; 2]>>,
    /// `ln p(x=1)` per word.
    log_p_x: Vec<f64>,
    anchors: Option<AnchorSpec>,
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: Option<u32>,
}

impl ModelFile {
    fn from_model(model: &FittedModel) -> Self {
        let (n, m) = (model.n_words(), model.n_topics());
        let mut alpha = Vec::new();
        for i in 0..n {
            for j in 0..m {
                let v = model.alpha.get(i, j);
                if v != 0.0 {
                    alpha.push((i, j, v));
                }
            }
        }
        let marginals = &model.marginals;
        ModelFile {
            format_version: FORMAT_VERSION,
            vocabulary: model.vocab.clone(),
            config: model.config.clone(),
            topic_order: model.topic_order.clone(),
            tc: model.tc.clone(),
            alpha,
            log_p_y: marginals.log_p_y_table().to_vec(),
            log_p_x_given_y: marginals
                .log_p_x_given_y_table()
                .chunks(m.max(1))
                .map(<[_]>::to_vec)
                .collect(),
            log_p_x: marginals.log_p_x_table().to_vec(),
            anchors: model.anchors.clone(),
        }
    }

    fn into_model(self) -> Result<FittedModel> {
        let corrupt = |msg: String| Err(Error::Corrupt(msg));
        let n = self.vocabulary.len();
        let m = self.config.n_topics;
        if let Err(e) = self.config.validate() {
            return corrupt(format!("config: {e}"));
        }
        if self.tc.len() != m || self.topic_order.len() != m {
            return corrupt(format!("expected {m} topics in tc and topic_order"));
        }
        if self.tc.iter().any(|t| !t.is_finite()) || self.tc.windows(2).any(|w| w[0] < w[1]) {
            return corrupt("tc must be finite and descending".into());
        }
        let mut seen = vec![false; m];
        for &o in &self.topic_order {
            if o >= m || std::mem::replace(&mut seen[o], true) {
                return corrupt("topic_order is not a permutation".into());
            }
        }
        if self.log_p_x_given_y.len() != n || self.log_p_x_given_y.iter().any(|row| row.len() != m)
        {
            return corrupt(format!("log_p_x_given_y must be {n} rows of {m} entries"));
        }

        let mut alpha = Matrix::filled(n, m, 0.0);
        let mut last = None;
        for &(i, j, v) in &self.alpha {
            if i >= n || j >= m {
                return corrupt(format!("alpha entry ({i}, {j}) out of range"));
            }
            if last.is_some_and(|l| l >= (i, j)) {
                return corrupt("alpha entries must be sorted and unique".into());
            }
            if !(v.is_finite() && v > 0.0) {
                return corrupt(format!(
                    "alpha entry ({i}, {j}) = {v} is not a positive weight"
                ));
            }
            last = Some((i, j));
            alpha.set(i, j, v);
        }

        let marginals = MarginalTable::from_parts(
            n,
            m,
            self.config.prob_clip,
            self.log_p_y,
            self.log_p_x_given_y.into_iter().flatten().collect(),
            self.log_p_x,
        )?;

        let model = FittedModel {
            vocab: self.vocabulary,
            config: self.config,
            marginals,
            alpha,
            tc: self.tc,
            anchors: self.anchors,
            topic_order: self.topic_order,
        };
        let anchored = model
            .anchored_entries()
            .map_err(|e| Error::Corrupt(format!("anchors: {e}")))?;
        for (w, t, beta) in anchored {
            if model.alpha.get(w, t) != beta {
                return corrupt(format!(
                    "alpha of anchored word {w} in topic {t} differs from its strength {beta}"
                ));
            }
        }
        Ok(model)
    }
}

/// Canonical serialization of `model`.
pub fn model_to_string(model: &FittedModel) -> String {
    let mut text = serde_json::to_string_pretty(&ModelFile::from_model(model))
        .expect("model values are finite");
    text.push('\n');
    text
}

fn parse_error(text: &str, e: &serde_json::Error) -> Error {
    let offset = if e.line() == 0 {
        0
    } else {
        let line_start: usize = text
            .split_inclusive('\n')
            .take(e.line() - 1)
            .map(str::len)
            .sum();
        (line_start + e.column().saturating_sub(1)).min(text.len())
    };
    Error::Parse {
        offset,
        message: e.to_string(),
    }
}

pub fn model_from_str(text: &str) -> Result<FittedModel> {
    let probe: VersionProbe = serde_json::from_str(text).map_err(|e| parse_error(text, &e))?;
    match probe.format_version {
        None => {
            return Err(Error::Parse {
                offset: 0,
                message: "missing format_version".into(),
            })
        }
        Some(FORMAT_VERSION) => {}
        Some(v) => return Err(Error::UnsupportedVersion(v)),
    }
    let file: ModelFile = serde_json::from_str(text).map_err(|e| parse_error(text, &e))?;
    file.into_model()
}

pub fn save_model(model: &FittedModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, model_to_string(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<FittedModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fit;
    use crate::synthetic::PlantedCorpus;

    fn planted() -> (PlantedCorpus, FittedModel) {
        let c = PlantedCorpus::independent_blocks(200, 3, 8, 0.4, 0.5, 0.03, 9);
        let anchors = AnchorSpec::single(1, &["b2w0", "b2w1"], 3.0);
        let model = fit(
            &c.data,
            &c.vocab,
            &ModelConfig::new(3).with_seed(2),
            Some(&anchors),
        )
        .unwrap()
        .model;
        (c, model)
    }

    #[test]
    fn round_trip_is_exact() {
        let (c, model) = planted();
        let text = model_to_string(&model);
        let loaded = model_from_str(&text).unwrap();
        assert_eq!(loaded, model);
        assert_eq!(model_to_string(&loaded), text);
        let a = model.transform_log(&c.data).unwrap();
        let b = loaded.transform_log(&c.data).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn file_round_trip() {
        let (_, model) = planted();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        save_model(&model, &path).unwrap();
        let first = std::fs::read(&path).unwrap();
        save_model(&load_model(&path).unwrap(), &path).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), first);
    }

    #[test]
    fn alpha_stored_sparsely() {
        let (_, model) = planted();
        let file: serde_json::Value = serde_json::from_str(&model_to_string(&model)).unwrap();
        let nonzero = model
            .alpha()
            .as_slice()
            .iter()
            .filter(|&&v| v != 0.0)
            .count();
        assert_eq!(file["alpha"].as_array().unwrap().len(), nonzero);
        let anchored: Vec<_> = file["alpha"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|e| e[2].as_f64() == Some(3.0))
            .collect();
        assert_eq!(anchored.len(), 2);
    }

    #[test]
    fn version_999_rejected() {
        let (_, model) = planted();
        let text =
            model_to_string(&model).replacen("\"format_version\": 1", "\"format_version\": 999", 1);
        assert!(matches!(
            model_from_str(&text),
            Err(Error::UnsupportedVersion(999))
        ));
    }

    #[test]
    fn truncated_file_reports_offset() {
        let (_, model) = planted();
        let text = model_to_string(&model);
        let cut = &text[..text.len() / 2];
        match model_from_str(cut) {
            Err(Error::Parse { offset, .. }) => assert!(offset > 0 && offset <= cut.len()),
            other => panic!("expected parse error, got {other:?}"),
        }
        match model_from_str("{\n  \"format_version\": 1,\n  x") {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 27),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unnormalized_marginal_is_corrupt() {
        let (_, model) = planted();
        let mut file: serde_json::Value = serde_json::from_str(&model_to_string(&model)).unwrap();
        file["log_p_y"][0][0] = serde_json::json!((0.7f64).ln());
        file["log_p_y"][0][1] = serde_json::json!((0.7f64).ln());
        let text = serde_json::to_string(&file).unwrap();
        assert!(matches!(model_from_str(&text), Err(Error::Corrupt(_))));
    }

    #[test]
    fn edited_anchor_weight_is_corrupt() {
        let (_, model) = planted();
        let mut file: serde_json::Value = serde_json::from_str(&model_to_string(&model)).unwrap();
        for e in file["alpha"].as_array_mut().unwrap() {
            if e[2].as_f64() == Some(3.0) {
                e[2] = serde_json::json!(1.0);
            }
        }
        let text = serde_json::to_string(&file).unwrap();
        assert!(matches!(model_from_str(&text), Err(Error::Corrupt(_))));
    }
}
