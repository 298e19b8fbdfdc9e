//! Corpus ingestion, train/test split, the mini-batch training loop and
//! evaluation.

use std::fs;
use std::io::{self, BufRead, BufReader};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nn::{
    self, backward, bce_loss, forward, sgd_momentum_step, Dims, ModelParams, Velocity,
};
use crate::preprocess::{
    Label, LabeledExample, PreprocessError, TokenSequence, Vocabulary, DEFAULT_VOCAB_SIZE,
};

/// File names of the two-file corpus layout inside a directory.
pub const CLICKBAIT_FILE: &str = "clickbait_data";
pub const NON_CLICKBAIT_FILE: &str = "non_clickbait_data";

const SPLIT_STREAM: u64 = 1;
const SHUFFLE_STREAM: u64 = 2;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    Malformed {
        path: PathBuf,
        line: usize,
        reason: String,
    },
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error("training diverged at epoch {epoch}, batch {batch}: loss {loss}")]
    Diverged {
        epoch: usize,
        batch: usize,
        loss: f64,
    },
    #[error("cannot evaluate on an empty dataset")]
    EmptyDataset,
}

/// Where labelled headlines come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DataSource {
    /// One headline per line; every line of `clickbait` is labelled 1 and
    /// every line of `non_clickbait` 0.
    Pair {
        clickbait: PathBuf,
        non_clickbait: PathBuf,
    },
    /// `label<TAB>headline` per line.
    Tsv(PathBuf),
}

impl DataSource {
    /// One path naming a directory means the two-file layout inside it,
    /// one path naming a file means TSV, two paths mean a clickbait file
    /// followed by a non-clickbait file.
    pub fn from_paths(paths: &[PathBuf]) -> Option<DataSource> {
        match paths {
            [dir] if dir.is_dir() => Some(DataSource::Pair {
                clickbait: dir.join(CLICKBAIT_FILE),
                non_clickbait: dir.join(NON_CLICKBAIT_FILE),
            }),
            [file] => Some(DataSource::Tsv(file.clone())),
            [clickbait, non_clickbait] => Some(DataSource::Pair {
                clickbait: clickbait.clone(),
                non_clickbait: non_clickbait.clone(),
            }),
            _ => None,
        }
    }
}

fn open(path: &Path) -> Result<BufReader<fs::File>, DataError> {
    fs::File::open(path)
        .map(BufReader::new)
        .map_err(|source| DataError::Io {
            path: path.to_owned(),
            source,
        })
}

fn lines(path: &Path) -> Result<Vec<(usize, String)>, DataError> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|source| DataError::Io {
            path: path.to_owned(),
            source,
        })?;
        if !line.trim().is_empty() {
            out.push((i + 1, line));
        }
    }
    Ok(out)
}

/// Reads every non-blank line of the source as one example.
pub fn load_dataset(source: &DataSource) -> Result<Vec<LabeledExample>, DataError> {
    match source {
        DataSource::Pair {
            clickbait,
            non_clickbait,
        } => {
            let mut out = Vec::new();
            for (path, label) in [
                (clickbait, Label::Clickbait),
                (non_clickbait, Label::NonClickbait),
            ] {
                out.extend(
                    lines(path)?
                        .into_iter()
                        .map(|(_, l)| LabeledExample::new(l, label)),
                );
            }
            Ok(out)
        }
        DataSource::Tsv(path) => lines(path)?
            .into_iter()
            .map(|(line, text)| {
                parse_tsv_line(&text).map_err(|reason| DataError::Malformed {
                    path: path.clone(),
                    line,
                    reason,
                })
            })
            .collect(),
    }
}

fn parse_tsv_line(text: &str) -> Result<LabeledExample, String> {
    let (label, headline) = text
        .split_once('\t')
        .ok_or_else(|| "expected `label<TAB>headline`".to_owned())?;
    let label = match label.trim() {
        "0" => Label::NonClickbait,
        "1" => Label::Clickbait,
        other => return Err(format!("label {other:?} is not 0 or 1")),
    };
    Ok(LabeledExample::new(headline, label))
}

/// Seeded shuffle, then the first `train_count` examples become the
/// training split and the rest the test split.
pub fn split_dataset(
    examples: &[LabeledExample],
    seed: u64,
    train_count: usize,
) -> Result<(Vec<LabeledExample>, Vec<LabeledExample>), TrainError> {
    if train_count == 0 || train_count >= examples.len() {
        return Err(TrainError::Config(format!(
            "train count {train_count} must be in 1..{} for a dataset of {} examples",
            examples.len(),
            examples.len()
        )));
    }
    let mut shuffled = examples.to_vec();
    shuffled.shuffle(&mut seeded_rng(seed, SPLIT_STREAM));
    let test = shuffled.split_off(train_count);
    Ok((shuffled, test))
}

fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub momentum: f64,
    pub seed: u64,
    pub train_count: usize,
    pub vocab_size: usize,
    pub hidden: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            epochs: 80,
            batch_size: 128,
            lr: 0.01,
            momentum: 0.9,
            seed: 0,
            train_count: 26_666,
            vocab_size: DEFAULT_VOCAB_SIZE,
            hidden: nn::DEFAULT_HIDDEN,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let fail = |msg: &str| Err(TrainError::Config(msg.to_owned()));
        if self.epochs == 0 {
            return fail("epochs must be at least 1");
        }
        if self.batch_size == 0 {
            return fail("batch size must be at least 1");
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return fail("learning rate must be positive and finite");
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return fail("momentum must lie in [0, 1)");
        }
        if self.vocab_size == 0 {
            return fail("vocabulary size must be at least 1");
        }
        if self.hidden == 0 {
            return fail("hidden width must be at least 1");
        }
        Ok(())
    }
}

/// Metrics over the full training set after one epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_accuracy: f64,
    pub train_loss: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub accuracy: f64,
    pub loss: f64,
}

/// A score of exactly 0.5 counts as a clickbait prediction.
pub fn predicts_clickbait(score: f64) -> bool {
    score >= 0.5
}

fn evaluate_encoded(params: &ModelParams, data: &[(TokenSequence, Label)]) -> Evaluation {
    let mut correct = 0usize;
    let mut loss = 0.0;
    for (seq, label) in data {
        let p = forward(seq, params);
        if predicts_clickbait(p) == (*label == Label::Clickbait) {
            correct += 1;
        }
        loss += bce_loss(p, *label);
    }
    let n = data.len() as f64;
    Evaluation {
        accuracy: correct as f64 / n,
        loss: loss / n,
    }
}

fn encode_all(vocab: &Vocabulary, data: &[LabeledExample]) -> Vec<(TokenSequence, Label)> {
    data.iter()
        .map(|e| (vocab.encode_text(&e.headline), e.label))
        .collect()
}

/// Accuracy (threshold 0.5) and mean BCE of the model on `dataset`.
pub fn evaluate(
    params: &ModelParams,
    vocab: &Vocabulary,
    dataset: &[LabeledExample],
) -> Result<Evaluation, TrainError> {
    if dataset.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    Ok(evaluate_encoded(params, &encode_all(vocab, dataset)))
}

/// Runs the training loop on a vocabulary already built from `train_set`.
pub fn train(
    config: &TrainingConfig,
    vocab: &Vocabulary,
    train_set: &[LabeledExample],
) -> Result<(ModelParams, Vec<EpochMetrics>), TrainError> {
    train_with_progress(config, vocab, train_set, |_| {})
}

/// As [`train`], calling `on_epoch` after each completed epoch.
pub fn train_with_progress(
    config: &TrainingConfig,
    vocab: &Vocabulary,
    train_set: &[LabeledExample],
    mut on_epoch: impl FnMut(&EpochMetrics),
) -> Result<(ModelParams, Vec<EpochMetrics>), TrainError> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let data = encode_all(vocab, train_set);
    let dims = Dims::new(vocab.size(), config.hidden);
    let mut params = ModelParams::init(dims, config.seed);
    let mut velocity = Velocity::zeros(dims);
    let mut rng = seeded_rng(config.seed, SHUFFLE_STREAM);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    let mut batch = Vec::with_capacity(config.batch_size);

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for (b, chunk) in order.chunks(config.batch_size).enumerate() {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| data[i]));
            let (grads, loss) = backward(&batch, &params);
            if !loss.is_finite() || !grads.is_finite() {
                return Err(TrainError::Diverged {
                    epoch,
                    batch: b + 1,
                    loss,
                });
            }
            sgd_momentum_step(
                &mut params,
                &grads,
                &mut velocity,
                config.lr,
                config.momentum,
            );
        }
        let eval = evaluate_encoded(&params, &data);
        if !eval.loss.is_finite() || !params.is_finite() {
            return Err(TrainError::Diverged {
                epoch,
                batch: order.len().div_ceil(config.batch_size),
                loss: eval.loss,
            });
        }
        let metrics = EpochMetrics {
            epoch,
            train_accuracy: eval.accuracy,
            train_loss: eval.loss,
        };
        on_epoch(&metrics);
        history.push(metrics);
    }
    Ok((params, history))
}

/// Everything produced by a split → vocabulary → train run.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub params: ModelParams,
    pub vocab: Vocabulary,
    pub history: Vec<EpochMetrics>,
    pub train_set: Vec<LabeledExample>,
    pub test_set: Vec<LabeledExample>,
}

/// Splits `examples`, builds the vocabulary from the training split only,
/// and trains.
pub fn fit(
    config: &TrainingConfig,
    examples: &[LabeledExample],
    on_epoch: impl FnMut(&EpochMetrics),
) -> Result<FitOutcome, TrainError> {
    config.validate()?;
    let (train_set, test_set) = split_dataset(examples, config.seed, config.train_count)?;
    let vocab = Vocabulary::build(&train_set, config.vocab_size)?;
    let (params, history) = train_with_progress(config, &vocab, &train_set, on_epoch)?;
    Ok(FitOutcome {
        params,
        vocab,
        history,
        train_set,
        test_set,
    })
}

/// CSV text `epoch,train_accuracy,train_loss` with six decimals.
pub fn metrics_csv(history: &[EpochMetrics]) -> String {
    let mut out = String::from("epoch,train_accuracy,train_loss\n");
    for m in history {
        out.push_str(&format!(
            "{},{:.6},{:.6}\n",
            m.epoch, m.train_accuracy, m.train_loss
        ));
    }
    out
}

pub fn export_metrics(history: &[EpochMetrics], path: &Path) -> io::Result<()> {
    if history.is_empty() {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            "no epochs to export",
        ));
    }
    fs::write(path, metrics_csv(history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let path = dir.join(name);
        fs::File::create(&path)
            .unwrap()
            .write_all(body.as_bytes())
            .unwrap();
        path
    }

    fn examples(n: usize) -> Vec<LabeledExample> {
        (0..n)
            .map(|i| {
                LabeledExample::new(
                    format!("headline {i}"),
                    Label::from_bit((i % 2) as u8).unwrap(),
                )
            })
            .collect()
    }

    #[test]
    fn loads_two_file_layout_skipping_blank_lines() {
        let dir = tempfile::tempdir().unwrap();
        write(
            dir.path(),
            CLICKBAIT_FILE,
            "You won't believe this\n\nThis one trick\n",
        );
        write(dir.path(), NON_CLICKBAIT_FILE, "\nMarkets close higher\n");
        let src = DataSource::from_paths(&[dir.path().to_owned()]).unwrap();
        let data = load_dataset(&src).unwrap();
        assert_eq!(data.len(), 3);
        assert_eq!(
            data.iter().filter(|e| e.label == Label::Clickbait).count(),
            2
        );
        assert_eq!(
            data[2],
            LabeledExample::new("Markets close higher", Label::NonClickbait)
        );
    }

    #[test]
    fn empty_pair_loads_nothing_and_refuses_to_train() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a", "");
        let b = write(dir.path(), "b", "\n\n");
        let data = load_dataset(&DataSource::from_paths(&[a, b]).unwrap()).unwrap();
        assert!(data.is_empty());
        assert!(matches!(
            fit(&TrainingConfig::default(), &data, |_| {}),
            Err(TrainError::Config(_))
        ));
    }

    #[test]
    fn parses_tsv_and_reports_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let ok = write(
            dir.path(),
            "ok.tsv",
            "1\tyou won't believe this\n\n0\tRates held\n",
        );
        let data = load_dataset(&DataSource::Tsv(ok)).unwrap();
        assert_eq!(
            data[0],
            LabeledExample::new("you won't believe this", Label::Clickbait)
        );
        assert_eq!(data[1].label, Label::NonClickbait);

        let bad = write(dir.path(), "bad.tsv", "1\tfine\n\n2\tnope\n");
        match load_dataset(&DataSource::Tsv(bad)) {
            Err(DataError::Malformed { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let no_tab = write(dir.path(), "notab.tsv", "1 missing tab\n");
        assert!(matches!(
            load_dataset(&DataSource::Tsv(no_tab)),
            Err(DataError::Malformed { line: 1, .. })
        ));
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let src = DataSource::Tsv(PathBuf::from("/nonexistent/data.tsv"));
        assert!(matches!(load_dataset(&src), Err(DataError::Io { .. })));
    }

    #[test]
    fn split_sizes_and_partition() {
        let data = examples(32_000);
        let (train, test) = split_dataset(&data, 7, 26_666).unwrap();
        assert_eq!(train.len(), 26_666);
        assert_eq!(test.len(), 5_334);
        let mut all: Vec<String> = train
            .iter()
            .chain(&test)
            .map(|e| e.headline.clone())
            .collect();
        all.sort();
        let mut expected: Vec<String> = data.iter().map(|e| e.headline.clone()).collect();
        expected.sort();
        assert_eq!(all, expected);
    }

    #[test]
    fn split_is_seeded() {
        let data = examples(100);
        assert_eq!(
            split_dataset(&data, 3, 80).unwrap(),
            split_dataset(&data, 3, 80).unwrap()
        );
        assert_ne!(
            split_dataset(&data, 3, 80).unwrap(),
            split_dataset(&data, 4, 80).unwrap()
        );
    }

    #[test]
    fn split_rejects_out_of_range_counts() {
        let data = examples(10);
        assert!(split_dataset(&data, 0, 0).is_err());
        assert!(split_dataset(&data, 0, 10).is_err());
        assert!(split_dataset(&data, 0, 11).is_err());
    }

    #[test]
    fn config_validation() {
        let ok = TrainingConfig::default();
        ok.validate().unwrap();
        for bad in [
            TrainingConfig { epochs: 0, ..ok },
            TrainingConfig {
                batch_size: 0,
                ..ok
            },
            TrainingConfig { lr: 0.0, ..ok },
            TrainingConfig {
                momentum: 1.0,
                ..ok
            },
            TrainingConfig {
                momentum: -0.1,
                ..ok
            },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn history_has_one_row_per_epoch() {
        let data = examples(40);
        let vocab = Vocabulary::build(&data, 100).unwrap();
        let config = TrainingConfig {
            epochs: 7,
            batch_size: 16,
            ..Default::default()
        };
        let (_, history) = train(&config, &vocab, &data).unwrap();
        assert_eq!(history.len(), 7);
        assert!(history.iter().enumerate().all(|(i, m)| m.epoch == i + 1));
        assert!(history
            .iter()
            .all(|m| (0.0..=1.0).contains(&m.train_accuracy)));
    }

    #[test]
    fn separable_pair_is_learned() {
        let data = vec![
            LabeledExample::new("amazing trick", Label::Clickbait),
            LabeledExample::new("budget report", Label::NonClickbait),
        ];
        let vocab = Vocabulary::build(&data, 100).unwrap();
        let config = TrainingConfig {
            epochs: 200,
            ..Default::default()
        };
        let (_, history) = train(&config, &vocab, &data).unwrap();
        assert_eq!(history.last().unwrap().train_accuracy, 1.0);
    }

    #[test]
    fn diverging_run_reports_position() {
        let data = examples(20);
        let vocab = Vocabulary::build(&data, 100).unwrap();
        let config = TrainingConfig {
            lr: 1e300,
            epochs: 3,
            batch_size: 4,
            ..Default::default()
        };
        match train(&config, &vocab, &data) {
            Err(TrainError::Diverged { epoch, batch, .. }) => assert!(epoch >= 1 && batch >= 1),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn evaluate_conventions() {
        let data = examples(9);
        let vocab = Vocabulary::build(&data, 100).unwrap();
        let zero = ModelParams::zeros(Dims::new(vocab.size(), 4));
        let eval = evaluate(&zero, &vocab, &data).unwrap();
        // Every score is 0.5, which counts as clickbait: 4 of 9 labels are 1.
        assert_eq!(eval.accuracy, 4.0 / 9.0);
        assert!((eval.loss - std::f64::consts::LN_2).abs() < 1e-12);
        assert!(matches!(
            evaluate(&zero, &vocab, &[]),
            Err(TrainError::EmptyDataset)
        ));
    }

    #[test]
    fn saturated_model_scores_labels_exactly() {
        // Token "yes" drives the logit far positive, "no" far negative.
        let data = vec![
            LabeledExample::new("yes", Label::Clickbait),
            LabeledExample::new("no", Label::NonClickbait),
        ];
        let vocab = Vocabulary::build(&data, 10).unwrap();
        let mut p = ModelParams::zeros(Dims::new(vocab.size(), 1));
        let yes = vocab.lookup("yes") as usize * p.dims.embed_dim;
        let no = vocab.lookup("no") as usize * p.dims.embed_dim;
        p.embedding[yes] = 24e3;
        p.embedding[no] = -24e3;
        p.hidden_weights[0] = 1.0;
        p.hidden_bias[0] = 1e3;
        p.output_weights[0] = 1.0;
        p.output_bias = -1e3;
        let eval = evaluate(&p, &vocab, &data).unwrap();
        assert_eq!(eval.accuracy, 1.0);
        assert!(eval.loss < 1e-6);
    }

    #[test]
    fn metrics_csv_layout() {
        let history: Vec<EpochMetrics> = (1..=80)
            .map(|epoch| EpochMetrics {
                epoch,
                train_accuracy: 0.5 + epoch as f64 / 200.0,
                train_loss: 1.0 / epoch as f64,
            })
            .collect();
        let csv = metrics_csv(&history);
        let rows: Vec<&str> = csv.lines().collect();
        assert_eq!(rows.len(), 81);
        assert_eq!(rows[0], "epoch,train_accuracy,train_loss");
        assert_eq!(rows[1], "1,0.505000,1.000000");
        assert!(rows[2].starts_with("2,"));

        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        export_metrics(&history, &a).unwrap();
        export_metrics(&history, &b).unwrap();
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
        assert!(export_metrics(&[], &a).is_err());
        assert!(export_metrics(&history, Path::new("/nonexistent/dir/m.csv")).is_err());
    }
}
