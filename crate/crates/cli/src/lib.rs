//! The `lyrval` command line: subcommands over the `lyrval-core` pipeline
//! driven by one TOML configuration file.
//!
//! Settings resolve as flag, then `LYRVAL_*` environment variable, then
//! configuration file.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod plot;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lyrval_core::aggregate::Correction;
use lyrval_core::sampler::StratumKind;
use lyrval_core::Execution;

use crate::commands::Context;
use crate::config::{ModelConfig, PipelineConfig};
use crate::error::{CliError, Result};
use crate::plot::PlotKind;

#[derive(Parser, Debug)]
#[command(name = "lyrval", version, about = "Value estimation for song lyrics")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct GlobalArgs {
    /// Pipeline configuration (TOML).
    #[arg(long, global = true, env = "LYRVAL_CONFIG")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, env = "LYRVAL_SEED")]
    pub seed: Option<u64>,
    /// Output directory [default: out].
    #[arg(long, global = true, env = "LYRVAL_OUT")]
    pub out: Option<PathBuf>,
    /// Significance level for truncated rankings.
    #[arg(long, global = true, env = "LYRVAL_ALPHA")]
    pub alpha: Option<f64>,
    /// Bonferroni factor: number of lists or number of items.
    #[arg(long, global = true, env = "LYRVAL_CORRECTION", value_enum)]
    pub correction: Option<CorrectionArg>,
    /// Embedding model as NAME=PATH; repeatable. Replaces the configured
    /// model list.
    #[arg(long = "models", global = true, env = "LYRVAL_MODELS", value_delimiter = ',', value_parser = ModelConfig::parse_flag)]
    pub models: Vec<ModelConfig>,
    /// Minimum smoothed share of every bin, applied to all strata without an
    /// override.
    #[arg(long, global = true, env = "LYRVAL_TARGET_MIN_SHARE")]
    pub target_min_share: Option<f64>,
    /// Run everything on the calling thread.
    #[arg(long, global = true, env = "LYRVAL_SEQUENTIAL")]
    pub sequential: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CorrectionArg {
    Lists,
    Items,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Draw a stratified weighted sample of the catalog -> sample.json
    Sample,
    /// Screen lyrics for length, repetition, language and onomatopoeia -> screening.json
    Screen,
    /// Aggregate rater annotations with RRA -> aggregates.json
    Aggregate,
    /// Inter-rater reliability and rater-count studies -> reliability.json
    Reliability,
    /// Wordcount and embedding score grid -> scores.json
    Score,
    /// Kendall tau-b of every score set against truncated rankings -> eval.json
    Evaluate,
    /// Mean truncated ranks per stratum level -> strata_summary.json
    Describe,
    /// Classical MDS of the value space -> mds.json
    Mds,
    /// Flat CSV of one result for plotting -> plot_<kind>.csv
    Plot {
        #[arg(long, value_enum)]
        kind: PlotKind,
        /// Restrict strata_trend to one stratum.
        #[arg(long, value_parser = parse_stratum)]
        stratum: Option<StratumKind>,
    },
}

fn parse_stratum(s: &str) -> std::result::Result<StratumKind, String> {
    StratumKind::parse(s).ok_or_else(|| {
        let names: Vec<_> = StratumKind::ALL.iter().map(|k| k.name()).collect();
        format!("unknown stratum `{s}` (expected one of {})", names.join(", "))
    })
}

/// Loads the configuration and applies flag and environment overrides.
pub fn build_context(global: &GlobalArgs) -> Result<Context> {
    let mut config = match &global.config {
        Some(p) if !p.exists() => return Err(CliError::MissingPath { what: "config", path: p.clone() }),
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = global.seed {
        config.seed = Some(seed);
    }
    if let Some(alpha) = global.alpha {
        config.aggregation.alpha = alpha;
    }
    if let Some(c) = global.correction {
        config.aggregation.correction = match c {
            CorrectionArg::Lists => Correction::Lists,
            CorrectionArg::Items => Correction::Items,
        };
    }
    if !global.models.is_empty() {
        config.models = global.models.clone();
    }
    if let Some(t) = global.target_min_share {
        config.sampling.a = None;
        config.sampling.target_min_share = Some(t);
    }
    let out = global
        .out
        .clone()
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let exec = if global.sequential { Execution::Sequential } else { Execution::default() };
    Ok(Context { config, out, exec })
}

pub fn execute(cli: &Cli) -> Result<()> {
    let ctx = build_context(&cli.global)?;
    match &cli.command {
        Command::Sample => commands::sample(&ctx),
        Command::Screen => commands::screen(&ctx),
        Command::Aggregate => commands::aggregate(&ctx),
        Command::Reliability => commands::reliability(&ctx),
        Command::Score => commands::score(&ctx),
        Command::Evaluate => commands::evaluate(&ctx),
        Command::Describe => commands::describe(&ctx),
        Command::Mds => commands::mds(&ctx),
        Command::Plot { kind, stratum } => commands::plot(&ctx, *kind, *stratum),
    }
}

/// Runs one command line and returns the process exit code: 0 on success,
/// 1 on domain errors (a JSON error record goes to stderr), 2 on usage
/// errors.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.record());
            1
        }
    }
}
