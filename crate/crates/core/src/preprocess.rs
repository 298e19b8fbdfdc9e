//! Headline text normalization, tokenization and vocabulary encoding.
//!
//! Raw headlines go through `normalize` → `tokenize` → `Vocabulary::encode`
//! and come out as a fixed-width [`TokenSequence`] of [`SEQ_LEN`] ids.
//! Index 0 is reserved for padding and index 1 for out-of-vocabulary tokens.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of token positions fed to the model.
pub const SEQ_LEN: usize = 24;
/// Padding index.
pub const PAD: u32 = 0;
/// Out-of-vocabulary index.
pub const OOV: u32 = 1;
/// Reserved indices preceding the first real token.
pub const RESERVED: usize = 2;
/// Default number of real (non-reserved) vocabulary entries.
pub const DEFAULT_VOCAB_SIZE: usize = 10_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PreprocessError {
    #[error("cannot build a vocabulary from an empty corpus")]
    EmptyCorpus,
    #[error("vocabulary size must be at least 1")]
    ZeroVocabSize,
    #[error("duplicate vocabulary token {0:?}")]
    DuplicateToken(String),
    #[error("invalid vocabulary token {0:?}")]
    InvalidToken(String),
}

/// Binary headline label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    NonClickbait,
    Clickbait,
}

impl Label {
    pub fn from_bit(bit: u8) -> Option<Label> {
        match bit {
            0 => Some(Label::NonClickbait),
            1 => Some(Label::Clickbait),
            _ => None,
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            Label::NonClickbait => 0,
            Label::Clickbait => 1,
        }
    }

    pub fn target(self) -> f64 {
        f64::from(self.bit())
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bit())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledExample {
    pub headline: String,
    pub label: Label,
}

impl LabeledExample {
    pub fn new(headline: impl Into<String>, label: Label) -> Self {
        Self {
            headline: headline.into(),
            label,
        }
    }
}

/// Lowercases, replaces every non-alphanumeric character with a space and
/// collapses whitespace runs. Control characters fall under the
/// non-alphanumeric rule and vanish with the trim.
pub fn normalize(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    for c in raw.chars().flat_map(char::to_lowercase) {
        if c.is_alphanumeric() {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(c);
        } else {
            pending_space = true;
        }
    }
    out
}

/// Splits normalized text on spaces, dropping empty pieces.
pub fn tokenize(normalized: &str) -> Vec<&str> {
    normalized.split(' ').filter(|t| !t.is_empty()).collect()
}

/// Fixed-length model input: exactly [`SEQ_LEN`] token ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TokenSequence([u32; SEQ_LEN]);

impl TokenSequence {
    pub fn new(ids: [u32; SEQ_LEN]) -> Self {
        Self(ids)
    }

    /// The all-padding sequence an empty headline encodes to.
    pub fn padding() -> Self {
        Self([PAD; SEQ_LEN])
    }

    pub fn ids(&self) -> &[u32; SEQ_LEN] {
        &self.0
    }
}

/// Ordered token table. Real tokens occupy indices `2..size`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    /// Builds the table from the `max_size` most frequent tokens of the corpus.
    /// Ties are ordered lexicographically ascending.
    pub fn build(corpus: &[LabeledExample], max_size: usize) -> Result<Self, PreprocessError> {
        if corpus.is_empty() {
            return Err(PreprocessError::EmptyCorpus);
        }
        if max_size == 0 {
            return Err(PreprocessError::ZeroVocabSize);
        }
        let mut counts: HashMap<String, u64> = HashMap::new();
        for example in corpus {
            let normalized = normalize(&example.headline);
            for token in tokenize(&normalized) {
                *counts.entry(token.to_owned()).or_default() += 1;
            }
        }
        let mut ranked: Vec<(String, u64)> = counts.into_iter().collect();
        ranked.sort_unstable_by(|(ta, ca), (tb, cb)| cb.cmp(ca).then_with(|| ta.cmp(tb)));
        ranked.truncate(max_size);
        Self::from_tokens(ranked.into_iter().map(|(t, _)| t).collect())
    }

    /// Rebuilds a vocabulary from its ordered token list (index 2 onward).
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self, PreprocessError> {
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, token) in tokens.iter().enumerate() {
            if token.is_empty() || tokenize(&normalize(token)) != [token.as_str()] {
                return Err(PreprocessError::InvalidToken(token.clone()));
            }
            let id = (i + RESERVED) as u32;
            if index.insert(token.clone(), id).is_some() {
                return Err(PreprocessError::DuplicateToken(token.clone()));
            }
        }
        Ok(Self { tokens, index })
    }

    /// Real tokens in index order, starting at index 2.
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Total number of ids including PAD and OOV.
    pub fn size(&self) -> usize {
        self.tokens.len() + RESERVED
    }

    pub fn lookup(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(OOV)
    }

    /// Maps the first [`SEQ_LEN`] tokens to ids and post-pads with PAD.
    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> TokenSequence {
        let mut ids = [PAD; SEQ_LEN];
        for (slot, token) in ids.iter_mut().zip(tokens) {
            *slot = self.lookup(token.as_ref());
        }
        TokenSequence(ids)
    }

    /// Full pipeline from raw headline text.
    pub fn encode_text(&self, raw: &str) -> TokenSequence {
        let normalized = normalize(raw);
        self.encode(&tokenize(&normalized))
    }
}
