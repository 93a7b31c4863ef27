//! Command-line front end. [`run`] parses arguments, executes one
//! subcommand and maps the outcome to an exit code: 0 on success, 1 for
//! invalid input or configuration, 2 for failures while running.

mod commands;
mod config;

pub use config::RunConfig;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "factsum", version, about = "Fact-aware summarization toolkit")]
pub struct Cli {
    /// `key = value` config file applied over the preset.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every random choice; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Built-in settings: desk, paper-cnndm or paper-xsum.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Summarizer,
    Corrector,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract relation tuples from every article.
    Extract {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build knowledge graphs from extracted tuples.
    Graph {
        #[arg(long)]
        tuples: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the summarizer on a dataset, or the corrector on forged samples.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        valid: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "summarizer")]
        kind: ModelKind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate summaries with a trained summarizer.
    Summarize {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Correct summaries with a trained corrector.
    Correct {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Summaries to correct (`{"id","summary"}` lines); defaults to the
        /// dataset's own summaries.
        #[arg(long)]
        predictions: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write synthetic corruptions of the reference summaries.
    Forge {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the claim classifier behind the factual score.
    FactccTrain {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predictions against the dataset.
    Evaluate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        predictions: PathBuf,
        /// Claim classifier checkpoint for the factual score.
        #[arg(long)]
        factcc: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Exit code for an error: 1 when the input or configuration is at fault,
/// 2 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) | Error::Checkpoint(_) | Error::ShapeMismatch(_) | Error::MissingGradient(_) => 2,
        _ => 1,
    }
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("FACTSUM_THREADS") else {
        return Ok(());
    };
    let n: usize =
        raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            Error::ConfigInvalid(format!("FACTSUM_THREADS=`{raw}` is not a positive integer"))
        })?;
    // A pool built by an earlier call in the same process stays in place.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match configure_threads().and_then(|_| execute(&cli)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    let cfg = RunConfig::resolve(cli.preset.as_deref(), cli.config.as_deref(), cli.seed)?;
    match &cli.command {
        Command::Extract { data, out } => commands::extract(data, out),
        Command::Graph { tuples, out } => commands::graph(tuples, out),
        Command::Train {
            data,
            valid,
            kind,
            out,
        } => match kind {
            ModelKind::Summarizer => commands::train_summarizer(&cfg, data, valid.as_deref(), out),
            ModelKind::Corrector => commands::train_corrector(&cfg, data, valid.as_deref(), out),
        },
        Command::Summarize { model, data, out } => commands::summarize(model, data, out),
        Command::Correct {
            model,
            data,
            predictions,
            out,
        } => commands::correct(model, data, predictions.as_deref(), out),
        Command::Forge { data, out } => commands::forge(&cfg, data, out),
        Command::FactccTrain { data, out } => commands::factcc_train(&cfg, data, out),
        Command::Evaluate {
            data,
            predictions,
            factcc,
            out,
        } => commands::evaluate(data, predictions, factcc.as_deref(), out),
    }
}
