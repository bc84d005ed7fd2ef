use std::path::PathBuf;

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] lyrval_core::Error),
    #[error("configuration: {0}")]
    Config(String),
    #[error("{what} not found: {}", path.display())]
    MissingPath { what: &'static str, path: PathBuf },
    #[error("command `{0}` is stochastic and needs a seed (--seed, LYRVAL_SEED or `seed` in the config)")]
    MissingSeed(&'static str),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("results file {} does not exist; run the producing command first", .0.display())]
    MissingResults(PathBuf),
    #[error("plot output: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Config(_) => "ConfigError",
            CliError::MissingPath { .. } => "MissingPath",
            CliError::MissingSeed(_) => "MissingSeed",
            CliError::Io { .. } => "Io",
            CliError::Json { .. } => "Json",
            CliError::MissingResults(_) => "MissingResults",
            CliError::Csv(_) => "Csv",
        }
    }

    /// The machine-readable record written to stderr on failure.
    pub fn record(&self) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            error: &'a str,
            message: String,
        }
        serde_json::to_string(&Record { error: self.kind(), message: self.to_string() })
            .expect("error record serializes")
    }
}

macro_rules! from_core {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Core(e.into())
            }
        })*
    };
}

from_core!(
    lyrval_core::ingest::IngestError,
    lyrval_core::sampler::SampleError,
    lyrval_core::aggregate::AggregateError,
    lyrval_core::reliability::ReliabilityError,
    lyrval_core::autoscore::ScoreError,
    lyrval_core::evaluate::EvalError
);

pub type Result<T, E = CliError> = std::result::Result<T, E>;
