//! Headline clickbait scoring: preprocessing, a small embedding-pooling
//! network trained with SGD and momentum, a portable model file, severity
//! tiers with warning variants, and a native-messaging host.

pub mod artifact;
pub mod msghost;
pub mod nn;
pub mod preprocess;
pub mod scorer;
pub mod trainer;

pub use artifact::{ModelArtifact, TrainingRecord};
pub use nn::{Dims, ModelParams};
pub use preprocess::{Label, LabeledExample, TokenSequence, Vocabulary};
pub use scorer::{severity, warning_spec, ScoreResult, Scorer, Tier, WarningSpec};
pub use trainer::{DataSource, EpochMetrics, Evaluation, TrainingConfig};
