//! `deep-breath` command-line tool.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error. Diagnostics go
//! to stderr; stdout carries only the documented `key=value` lines (or
//! frames, in host mode).

use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use deep_breath::artifact::{ArtifactError, ModelArtifact, TrainingRecord};
use deep_breath::trainer::{self, DataSource, TrainError, TrainingConfig};
use deep_breath::{msghost, LabeledExample, Scorer};

/// Environment variable naming the model used by `host` when `--model` is absent.
const MODEL_ENV: &str = "DEEP_BREATH_MODEL";

#[derive(Debug, Parser)]
#[command(
    name = "deep-breath",
    version,
    about = "Clickbait headline classifier and browser host"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Split the corpus, train a model and write it with its metric history.
    Train(TrainArgs),
    /// Report accuracy and loss of a model on a dataset.
    Eval(EvalArgs),
    /// Score one headline.
    Score(ScoreArgs),
    /// Serve score requests over the native-messaging protocol on stdio.
    Host(HostArgs),
    /// Write the per-epoch metrics stored in a model file as CSV.
    ExportMetrics(ExportArgs),
}

#[derive(Debug, Args)]
struct DataArgs {
    /// A TSV file (`label<TAB>headline`), a directory holding `clickbait_data`
    /// and `non_clickbait_data`, or a clickbait file followed by a
    /// non-clickbait file.
    #[arg(long, required = true, num_args = 1..=2)]
    data: Vec<PathBuf>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Model file to write.
    #[arg(long)]
    out: PathBuf,
    /// Metrics CSV to write [default: <out>.metrics.csv].
    #[arg(long)]
    metrics: Option<PathBuf>,
    #[arg(long, default_value_t = 80, value_parser = clap::value_parser!(u64).range(1..))]
    epochs: u64,
    #[arg(long, default_value_t = 128, value_parser = clap::value_parser!(u64).range(1..))]
    batch_size: u64,
    #[arg(long, default_value_t = 0.01)]
    lr: f64,
    #[arg(long, default_value_t = 0.9)]
    momentum: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Examples in the training split; the rest form the test split.
    #[arg(long, default_value_t = 26_666)]
    train_count: usize,
    #[arg(long, default_value_t = 10_000)]
    vocab_size: usize,
    #[arg(long, default_value_t = 16)]
    hidden: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Split {
    /// Every example in the dataset.
    All,
    /// The training split recorded in the model file.
    Train,
    /// The held-out split recorded in the model file.
    Test,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum, default_value_t = Split::All)]
    split: Split,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    headline: String,
}

#[derive(Debug, Args)]
struct HostArgs {
    #[arg(long, env = MODEL_ENV)]
    model: PathBuf,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

/// Failures that map to exit code 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.is::<UsageError>() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Train(args) => cmd_train(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Score(args) => cmd_score(args),
        Command::Host(args) => cmd_host(args),
        Command::ExportMetrics(args) => cmd_export(args),
    }
}

fn load_data(args: &DataArgs) -> anyhow::Result<Vec<LabeledExample>> {
    let source =
        DataSource::from_paths(&args.data).ok_or_else(|| usage("--data takes one or two paths"))?;
    if let Some(missing) = args.data.iter().find(|p| !p.exists()) {
        return Err(usage(format!(
            "data path {} does not exist",
            missing.display()
        )));
    }
    Ok(trainer::load_dataset(&source)?)
}

fn load_model(path: &Path) -> anyhow::Result<ModelArtifact> {
    match ModelArtifact::load(path) {
        Ok(model) => Ok(model),
        Err(ArtifactError::Io { source, .. }) if source.kind() == io::ErrorKind::NotFound => Err(
            usage(format!("model file {} does not exist", path.display())),
        ),
        Err(e) => Err(e).with_context(|| format!("loading {}", path.display())),
    }
}

fn default_metrics_path(model: &Path) -> PathBuf {
    let mut name = model.file_stem().unwrap_or_default().to_owned();
    name.push(".metrics.csv");
    model.with_file_name(name)
}

fn cmd_train(args: TrainArgs) -> anyhow::Result<()> {
    let config = TrainingConfig {
        epochs: args.epochs as usize,
        batch_size: args.batch_size as usize,
        lr: args.lr,
        momentum: args.momentum,
        seed: args.seed,
        train_count: args.train_count,
        vocab_size: args.vocab_size,
        hidden: args.hidden,
    };
    config.validate().map_err(|e| usage(e.to_string()))?;
    let examples = load_data(&args.data)?;
    if examples.is_empty() {
        bail!("dataset is empty; nothing to train on");
    }
    eprintln!(
        "training on {} of {} examples for {} epochs",
        config.train_count.min(examples.len()),
        examples.len(),
        config.epochs
    );
    let outcome = trainer::fit(&config, &examples, |m| {
        eprintln!(
            "epoch {:>3}  accuracy {:.4}  loss {:.4}",
            m.epoch, m.train_accuracy, m.train_loss
        );
    })
    .map_err(|e| match e {
        TrainError::Config(msg) => usage(msg),
        e => e.into(),
    })?;

    let metrics_path = args
        .metrics
        .unwrap_or_else(|| default_metrics_path(&args.out));
    trainer::export_metrics(&outcome.history, &metrics_path)
        .with_context(|| format!("writing {}", metrics_path.display()))?;
    let test = trainer::evaluate(&outcome.params, &outcome.vocab, &outcome.test_set)?;
    let last = *outcome.history.last().expect("at least one epoch");
    let artifact = ModelArtifact::new(
        outcome.params,
        outcome.vocab,
        Some(TrainingRecord {
            config,
            history: outcome.history,
        }),
    );
    artifact
        .save(&args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;

    println!(
        "accuracy={:.6} loss={:.6} test_accuracy={:.6} test_loss={:.6}",
        last.train_accuracy, last.train_loss, test.accuracy, test.loss
    );
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> anyhow::Result<()> {
    let model = load_model(&args.model)?;
    let examples = load_data(&args.data)?;
    let dataset = match args.split {
        Split::All => examples,
        split => {
            let record = model
                .training
                .as_ref()
                .ok_or_else(|| anyhow!("model file has no training record; use --split all"))?;
            let (train, test) =
                trainer::split_dataset(&examples, record.config.seed, record.config.train_count)?;
            if split == Split::Train {
                train
            } else {
                test
            }
        }
    };
    let eval = trainer::evaluate(&model.params, &model.vocab, &dataset)?;
    println!("accuracy={:.6} loss={:.6}", eval.accuracy, eval.loss);
    Ok(())
}

fn cmd_score(args: ScoreArgs) -> anyhow::Result<()> {
    let scorer = Scorer::from(load_model(&args.model)?);
    let result = scorer.assess(&args.headline);
    println!("score={} tier={}", result.score, result.tier);
    Ok(())
}

fn cmd_host(args: HostArgs) -> anyhow::Result<()> {
    let scorer = Scorer::from(load_model(&args.model)?);
    let stdin = io::stdin();
    let stdout = io::stdout();
    let served = msghost::serve(&scorer, &mut stdin.lock(), &mut stdout.lock())?;
    eprintln!("host: served {served} requests");
    Ok(())
}

fn cmd_export(args: ExportArgs) -> anyhow::Result<()> {
    let model = load_model(&args.model)?;
    let record = model
        .training
        .ok_or_else(|| anyhow!("model file has no training record"))?;
    trainer::export_metrics(&record.history, &args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    Ok(())
}
