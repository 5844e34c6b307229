//! `synsem`: enrich article corpora with keyword-overlap categories, query
//! and evaluate the result, and manage knowledge-base snapshots.

mod commands;
mod exit;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};

use crate::exit::{ExitStatus, Failure};

#[derive(Debug, Parser)]
#[command(name = "synsem", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Infer categories for every article and write the enriched corpus.
    Enrich {
        /// Line-delimited article file.
        articles: PathBuf,
        /// JSON configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// `snapshot:<path>` or `remote`.
        #[arg(long)]
        backend: Backend,
        /// Output file for the enriched corpus.
        #[arg(long)]
        out: PathBuf,
        /// Knowledge-base language code (overrides the config file).
        #[arg(long)]
        language: Option<String>,
        /// Base URL of the remote knowledge-base service.
        #[arg(long)]
        kb_url: Option<String>,
        /// Synset cache directory. Defaults to `.synsem-cache` for the
        /// remote backend; the snapshot backend is uncached unless given.
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// Precision, recall and coverage against gold labels.
    Evaluate {
        enriched: PathBuf,
        gold: PathBuf,
        /// Inclusive threshold range, e.g. `2..3`.
        #[arg(long, default_value = "2..3")]
        thresholds: ThresholdRange,
        /// Also write a tab-separated export.
        #[arg(long)]
        tsv: Option<PathBuf>,
        /// Add one table per journal.
        #[arg(long)]
        by_journal: bool,
    },
    /// List articles assigned a category (case-insensitive).
    Query { enriched: PathBuf, category: String },
    /// Coverage and assignment statistics of an enriched corpus.
    Stats { enriched: PathBuf },
    /// Build or check snapshot files.
    Snapshot {
        #[command(subcommand)]
        action: SnapshotAction,
    },
    /// Remove every record from a synset cache.
    ClearCache {
        #[arg(long)]
        cache_dir: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum SnapshotAction {
    /// Freeze accumulated cache records into a snapshot file.
    BuildFromCache {
        /// Output snapshot file.
        path: PathBuf,
        #[arg(long)]
        cache_dir: PathBuf,
    },
    /// Check every synset invariant of a snapshot file.
    Validate { path: PathBuf },
}

#[derive(Debug, Clone)]
enum Backend {
    Snapshot(PathBuf),
    Remote,
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "remote" {
            return Ok(Backend::Remote);
        }
        match s.strip_prefix("snapshot:") {
            Some(path) if !path.is_empty() => Ok(Backend::Snapshot(PathBuf::from(path))),
            _ => Err(format!("expected `snapshot:<path>` or `remote`, got {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct ThresholdRange {
    min: usize,
    max: usize,
}

impl FromStr for ThresholdRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |v: &str| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| format!("bad threshold {v:?} in {s:?}"))
        };
        let (min, max) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b)?),
            None => {
                let t = parse(s)?;
                (t, t)
            }
        };
        if min < 2 || min > max {
            return Err(format!("threshold range {s:?} must satisfy 2 <= a <= b"));
        }
        Ok(ThresholdRange { min, max })
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let status = if e.use_stderr() {
                ExitStatus::Input
            } else {
                ExitStatus::Success
            };
            let _ = e.print();
            return status.into();
        }
    };

    match run(cli.command) {
        Ok(()) => ExitStatus::Success.into(),
        Err(failure) => {
            eprintln!("error: {failure}");
            failure.status.into()
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Enrich {
            articles,
            config,
            backend,
            out,
            language,
            kb_url,
            cache_dir,
        } => commands::enrich(commands::EnrichArgs {
            articles,
            config,
            backend: match backend {
                Backend::Snapshot(path) => commands::BackendChoice::Snapshot(path),
                Backend::Remote => commands::BackendChoice::Remote,
            },
            out,
            language,
            kb_url,
            cache_dir,
        }),
        Command::Evaluate {
            enriched,
            gold,
            thresholds,
            tsv,
            by_journal,
        } => commands::evaluate(
            &enriched,
            &gold,
            thresholds.min,
            thresholds.max,
            tsv.as_deref(),
            by_journal,
        ),
        Command::Query { enriched, category } => commands::query(&enriched, &category),
        Command::Stats { enriched } => commands::stats(&enriched),
        Command::Snapshot { action } => match action {
            SnapshotAction::BuildFromCache { path, cache_dir } => {
                commands::snapshot_from_cache(&cache_dir, &path)
            }
            SnapshotAction::Validate { path } => commands::snapshot_validate(&path),
        },
        Command::ClearCache { cache_dir } => commands::clear_cache(&cache_dir),
    }
}
