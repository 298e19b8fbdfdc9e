//! Headline scoring, severity tiers and the warning variant table.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::artifact::ModelArtifact;
use crate::nn::{forward, ModelParams};
use crate::preprocess::Vocabulary;

#[derive(Debug, Error, PartialEq)]
pub enum ScoreError {
    #[error("score {0} is outside [0, 1]")]
    ScoreOutOfRange(f64),
    #[error("warning tier {0} is outside 1..=5")]
    NoSuchVariant(u8),
}

/// Severity on the 0–5 scale; 0 means no warning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tier(u8);

impl Tier {
    pub const NONE: Tier = Tier(0);
    pub const MAX: Tier = Tier(5);

    pub fn new(level: u8) -> Option<Tier> {
        (level <= Self::MAX.0).then_some(Tier(level))
    }

    pub fn level(self) -> u8 {
        self.0
    }

    pub fn warns(self) -> bool {
        self.0 > 0
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Tier of a score: `t = score × 10`, no warning while `t ≤ 5`, then one
/// tier per unit interval `(5, 6]`, `(6, 7]`, … `(9, 10]`.
///
/// Comparisons are exact on the scaled value with no tolerance.
pub fn severity(score: f64) -> Result<Tier, ScoreError> {
    if !(0.0..=1.0).contains(&score) {
        return Err(ScoreError::ScoreOutOfRange(score));
    }
    let t = score * 10.0;
    let level = match t {
        t if t <= 5.0 => 0,
        t if t <= 6.0 => 1,
        t if t <= 7.0 => 2,
        t if t <= 8.0 => 3,
        t if t <= 9.0 => 4,
        _ => 5,
    };
    Ok(Tier(level))
}

/// Warning symbols, least to most prominent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Symbol {
    MagnifyingGlass,
    WarningSign,
    StopSign,
    AuthorityFigure,
}

/// Gradient colours, least to most intense.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Colour {
    Yellow,
    Amber,
    Orange,
    OrangeRed,
    Red,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WarningSpec {
    pub tier: Tier,
    pub symbol: Symbol,
    pub colour: Colour,
    /// The perceived risk.
    pub heading: &'static str,
    /// What the reader can do next.
    pub advice: &'static str,
}

const VARIANTS: [WarningSpec; 5] = [
    WarningSpec {
        tier: Tier(1),
        symbol: Symbol::MagnifyingGlass,
        colour: Colour::Yellow,
        heading: "This headline may be exaggerated",
        advice: "Read the full article with a critical eye before forming a view.",
    },
    WarningSpec {
        tier: Tier(2),
        symbol: Symbol::MagnifyingGlass,
        colour: Colour::Amber,
        heading: "This page shows signs of sensationalist framing",
        advice: "Check how other outlets are reporting the same story.",
    },
    WarningSpec {
        tier: Tier(3),
        symbol: Symbol::WarningSign,
        colour: Colour::Orange,
        heading: "This page is likely to contain misleading content",
        advice: "Consider finding alternative sources.",
    },
    WarningSpec {
        tier: Tier(4),
        symbol: Symbol::StopSign,
        colour: Colour::OrangeRed,
        heading: "This page is very likely to be misleading",
        advice: "Pause before sharing and verify its claims with a trusted source.",
    },
    WarningSpec {
        tier: Tier(5),
        symbol: Symbol::AuthorityFigure,
        colour: Colour::Red,
        heading: "This page contains misinformation",
        advice: "Leave this page and find alternative sources.",
    },
];

/// The warning variant shown for tiers 1–5.
pub fn warning_spec(tier: Tier) -> Result<&'static WarningSpec, ScoreError> {
    match tier.0 {
        1..=5 => Ok(&VARIANTS[usize::from(tier.0) - 1]),
        other => Err(ScoreError::NoSuchVariant(other)),
    }
}

pub fn warning_variants() -> &'static [WarningSpec; 5] {
    &VARIANTS
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoreResult {
    pub score: f64,
    pub tier: Tier,
}

/// A loaded model that turns raw headlines into scores.
#[derive(Debug, Clone)]
pub struct Scorer {
    params: ModelParams,
    vocab: Vocabulary,
}

impl Scorer {
    pub fn new(params: ModelParams, vocab: Vocabulary) -> Self {
        assert_eq!(
            params.dims.vocab,
            vocab.size(),
            "model and vocabulary disagree"
        );
        Self { params, vocab }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn score_headline(&self, raw: &str) -> f64 {
        forward(&self.vocab.encode_text(raw), &self.params)
    }

    pub fn assess(&self, raw: &str) -> ScoreResult {
        let score = self.score_headline(raw);
        let tier = severity(score).expect("forward output lies in (0, 1)");
        ScoreResult { score, tier }
    }
}

impl From<ModelArtifact> for Scorer {
    fn from(artifact: ModelArtifact) -> Self {
        Scorer::new(artifact.params, artifact.vocab)
    }
}
