//! Self-describing JSON model file.
//!
//! Numbers are written in shortest round-trip decimal form and parsed back
//! exactly, so a loaded model scores bit-identically to the one saved.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::nn::{Dims, ModelParams, NnError};
use crate::preprocess::{PreprocessError, Vocabulary};
use crate::trainer::{EpochMetrics, TrainingConfig};

pub const FORMAT: &str = "deep-breath-model";
pub const VERSION: u64 = 1;

#[derive(Debug, Error)]
pub enum ArtifactError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("malformed model file: {0}")]
    Malformed(String),
    #[error("not a model file (format {0:?})")]
    Format(String),
    #[error("unsupported model version {0} (expected {VERSION})")]
    Version(u64),
    #[error("vocabulary holds {tokens} tokens but dims declare a vocabulary of {vocab}")]
    VocabMismatch { tokens: usize, vocab: usize },
    #[error("tensor `{name}` row {row} has width {actual}, expected {expected}")]
    RowWidth {
        name: &'static str,
        row: usize,
        expected: usize,
        actual: usize,
    },
    #[error(transparent)]
    Params(#[from] NnError),
    #[error(transparent)]
    Vocabulary(#[from] PreprocessError),
}

/// Configuration and per-epoch metrics of the run that produced a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingRecord {
    pub config: TrainingConfig,
    pub history: Vec<EpochMetrics>,
}

/// A model ready for scoring, plus how it was trained when known.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelArtifact {
    pub params: ModelParams,
    pub vocab: Vocabulary,
    pub training: Option<TrainingRecord>,
}

#[derive(Serialize, Deserialize)]
struct Document {
    format: String,
    version: u64,
    dims: Dims,
    vocabulary: Vec<String>,
    embedding: Vec<Vec<f64>>,
    hidden_weights: Vec<Vec<f64>>,
    hidden_bias: Vec<f64>,
    output_weights: Vec<f64>,
    output_bias: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    training: Option<TrainingRecord>,
}

fn rows(flat: &[f64], width: usize) -> Vec<Vec<f64>> {
    flat.chunks(width).map(<[f64]>::to_vec).collect()
}

fn flatten(
    name: &'static str,
    rows: Vec<Vec<f64>>,
    width: usize,
) -> Result<Vec<f64>, ArtifactError> {
    let mut flat = Vec::with_capacity(rows.len() * width);
    for (row, values) in rows.into_iter().enumerate() {
        if values.len() != width {
            return Err(ArtifactError::RowWidth {
                name,
                row,
                expected: width,
                actual: values.len(),
            });
        }
        flat.extend(values);
    }
    Ok(flat)
}

impl ModelArtifact {
    pub fn new(params: ModelParams, vocab: Vocabulary, training: Option<TrainingRecord>) -> Self {
        Self {
            params,
            vocab,
            training,
        }
    }

    pub fn to_json(&self) -> Result<String, ArtifactError> {
        self.params.validate()?;
        let dims = self.params.dims;
        if dims.vocab != self.vocab.size() {
            return Err(ArtifactError::VocabMismatch {
                tokens: self.vocab.size(),
                vocab: dims.vocab,
            });
        }
        let doc = Document {
            format: FORMAT.to_owned(),
            version: VERSION,
            dims,
            vocabulary: self.vocab.tokens().to_vec(),
            embedding: rows(&self.params.embedding, dims.embed_dim),
            hidden_weights: rows(&self.params.hidden_weights, dims.hidden),
            hidden_bias: self.params.hidden_bias.clone(),
            output_weights: self.params.output_weights.clone(),
            output_bias: self.params.output_bias,
            training: self.training.clone(),
        };
        let mut text =
            serde_json::to_string(&doc).map_err(|e| ArtifactError::Malformed(e.to_string()))?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self, ArtifactError> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| ArtifactError::Malformed(e.to_string()))?;
        let format = value
            .get("format")
            .and_then(Value::as_str)
            .unwrap_or_default();
        if format != FORMAT {
            return Err(ArtifactError::Format(format.to_owned()));
        }
        match value.get("version").and_then(Value::as_u64) {
            Some(VERSION) => {}
            Some(other) => return Err(ArtifactError::Version(other)),
            None => return Err(ArtifactError::Malformed("missing version".into())),
        }
        let doc: Document =
            serde_json::from_value(value).map_err(|e| ArtifactError::Malformed(e.to_string()))?;
        let dims = doc.dims;
        dims.validate()?;
        let vocab = Vocabulary::from_tokens(doc.vocabulary)?;
        if vocab.size() != dims.vocab {
            return Err(ArtifactError::VocabMismatch {
                tokens: vocab.size(),
                vocab: dims.vocab,
            });
        }
        let params = ModelParams {
            dims,
            embedding: flatten("embedding", doc.embedding, dims.embed_dim)?,
            hidden_weights: flatten("hidden_weights", doc.hidden_weights, dims.hidden)?,
            hidden_bias: doc.hidden_bias,
            output_weights: doc.output_weights,
            output_bias: doc.output_bias,
        };
        params.validate()?;
        Ok(Self {
            params,
            vocab,
            training: doc.training,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), ArtifactError> {
        let text = self.to_json()?;
        fs::write(path, text).map_err(|source| ArtifactError::Io {
            path: path.to_owned(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ArtifactError> {
        let text = fs::read_to_string(path).map_err(|source| ArtifactError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::forward;
    use crate::preprocess::{Label, LabeledExample};

    fn artifact() -> ModelArtifact {
        let corpus = [
            LabeledExample::new("this one weird trick", Label::Clickbait),
            LabeledExample::new("parliament passes budget", Label::NonClickbait),
        ];
        let vocab = Vocabulary::build(&corpus, 100).unwrap();
        let mut params = ModelParams::init(Dims::new(vocab.size(), 16), 99);
        params.hidden_bias[3] = -0.0;
        params.output_bias = 1.0 / 3.0;
        ModelArtifact::new(params, vocab, None)
    }

    fn tamper(text: &str, f: impl FnOnce(&mut Value)) -> String {
        let mut v: Value = serde_json::from_str(text).unwrap();
        f(&mut v);
        serde_json::to_string(&v).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let a = artifact();
        let b = ModelArtifact::from_json(&a.to_json().unwrap()).unwrap();
        assert_eq!(a, b);
        for (x, y) in a.params.embedding.iter().zip(&b.params.embedding) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        let seq = a.vocab.encode_text("one weird budget");
        assert_eq!(
            forward(&seq, &a.params).to_bits(),
            forward(&seq, &b.params).to_bits()
        );
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    }

    #[test]
    fn rejects_hidden_width_mismatch() {
        let text = tamper(&artifact().to_json().unwrap(), |v| {
            v["dims"]["hidden"] = 17.into()
        });
        assert!(matches!(
            ModelArtifact::from_json(&text),
            Err(ArtifactError::RowWidth {
                name: "hidden_weights",
                ..
            })
        ));
    }

    #[test]
    fn rejects_unknown_version_and_format() {
        let good = artifact().to_json().unwrap();
        let text = tamper(&good, |v| v["version"] = 2.into());
        assert!(matches!(
            ModelArtifact::from_json(&text),
            Err(ArtifactError::Version(2))
        ));
        let text = tamper(&good, |v| v["format"] = "something-else".into());
        assert!(matches!(
            ModelArtifact::from_json(&text),
            Err(ArtifactError::Format(_))
        ));
    }

    #[test]
    fn rejects_non_finite_and_short_tensors() {
        let good = artifact().to_json().unwrap();
        let text = tamper(&good, |v| v["output_weights"][0] = Value::Null);
        assert!(matches!(
            ModelArtifact::from_json(&text),
            Err(ArtifactError::Malformed(_))
        ));
        let text = tamper(&good, |v| {
            v["hidden_bias"].as_array_mut().unwrap().pop();
        });
        assert!(matches!(
            ModelArtifact::from_json(&text),
            Err(ArtifactError::Params(_))
        ));
        let text = tamper(&good, |v| v["output_bias"] = 0.0.into())
            .replace("\"output_bias\":0.0", "\"output_bias\":1e999");
        assert!(text.contains("1e999"));
        assert!(ModelArtifact::from_json(&text).is_err());
    }

    #[test]
    fn rejects_vocabulary_size_mismatch() {
        let text = tamper(&artifact().to_json().unwrap(), |v| {
            v["vocabulary"].as_array_mut().unwrap().push("extra".into());
        });
        assert!(matches!(
            ModelArtifact::from_json(&text),
            Err(ArtifactError::VocabMismatch { .. })
        ));
    }

    #[test]
    fn refuses_to_save_non_finite() {
        let mut a = artifact();
        a.params.output_weights[0] = f64::INFINITY;
        assert!(matches!(a.to_json(), Err(ArtifactError::Params(_))));
    }

    #[test]
    fn keeps_training_record() {
        let mut a = artifact();
        a.training = Some(TrainingRecord {
            config: TrainingConfig::default(),
            history: vec![EpochMetrics {
                epoch: 1,
                train_accuracy: 0.75,
                train_loss: 0.5,
            }],
        });
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        a.save(&path).unwrap();
        assert_eq!(ModelArtifact::load(&path).unwrap(), a);
        assert!(matches!(
            ModelArtifact::load(&dir.path().join("missing.json")),
            Err(ArtifactError::Io { .. })
        ));
    }
}
