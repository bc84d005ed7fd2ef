//! Data model, file loaders and heuristic lyric screening.
//!
//! All loaders read UTF-8, comma-separated CSV with a header row (RFC 4180
//! quoting), except embedding tables which are whitespace-separated text.
//! Returned structures are immutable after load.

mod catalog;
mod embeddings;
mod lexicon;
mod model;
mod screen;
mod tokenize;

pub use catalog::{
    load_annotations, load_song_catalog, read_annotations, read_song_catalog, write_annotations,
    write_song_catalog,
};
pub use embeddings::{load_doc_vectors, load_embeddings, read_embeddings, EmbeddingTable};
pub use lexicon::{load_value_lexicon, read_value_lexicon, Pattern, ValueLexicon};
pub use model::{AnnotationRecord, SongRecord, ValueId, ValueMap, ValueProfile};
pub use screen::{
    screen_lyric, stopwords, Diagnostics, RejectReason, ScreeningConfig, ScreeningReport, Verdict,
};
pub use tokenize::tokenize;

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("unexpected header: expected {expected:?}, found {found:?}")]
    Header { expected: String, found: Vec<String> },
    #[error("line {line}: malformed field `{field}`: {reason}")]
    MalformedRow {
        line: u64,
        field: String,
        reason: String,
    },
    #[error("line {line}: duplicate song id `{song_id}`")]
    DuplicateSongId { line: u64, song_id: String },
    #[error("line {line}: score {score} outside [-100, 100]")]
    ScoreOutOfRange { line: u64, score: f64 },
    #[error("line {line}: confidence {confidence} outside [0, 100]")]
    ConfidenceOutOfRange { line: u64, confidence: f64 },
    #[error("line {line}: duplicate annotation ({rater_id}, {song_id}, {value})")]
    DuplicateTriple {
        line: u64,
        rater_id: String,
        song_id: String,
        value: ValueId,
    },
    #[error("lexicon has no patterns for {0}")]
    MissingValueCategory(ValueId),
    #[error("line {line}: empty lexicon pattern")]
    EmptyPattern { line: u64 },
    #[error("line {line}: expected {expected} vector components, found {found}")]
    DimensionMismatch {
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("embedding table is empty")]
    EmptyTable,
}

impl IngestError {
    pub fn kind(&self) -> &'static str {
        match self {
            IngestError::Io { .. } => "Io",
            IngestError::Csv(_) => "Csv",
            IngestError::Header { .. } => "Header",
            IngestError::MalformedRow { .. } => "MalformedRow",
            IngestError::DuplicateSongId { .. } => "DuplicateSongId",
            IngestError::ScoreOutOfRange { .. } => "ScoreOutOfRange",
            IngestError::ConfidenceOutOfRange { .. } => "ConfidenceOutOfRange",
            IngestError::DuplicateTriple { .. } => "DuplicateTriple",
            IngestError::MissingValueCategory(_) => "MissingValueCategory",
            IngestError::EmptyPattern { .. } => "EmptyPattern",
            IngestError::DimensionMismatch { .. } => "DimensionMismatch",
            IngestError::EmptyTable => "EmptyTable",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        IngestError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn malformed(line: u64, field: &str, reason: impl Into<String>) -> Self {
        IngestError::MalformedRow {
            line,
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = IngestError> = std::result::Result<T, E>;
