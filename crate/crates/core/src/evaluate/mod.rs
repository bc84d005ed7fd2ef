//! Evaluation of automated scorers against aggregated human rankings,
//! per-stratum rank summaries, and MDS of the value space.

pub mod kendall;
pub mod mds;
pub mod summary;

pub use kendall::{kendall_tau_b, pair_counts, PairCounts};
pub use mds::{
    classical_mds, correlation_to_dissimilarity, empirical_correlation, load_reference_correlation, mds_report,
    read_reference_correlation, simulate_from_correlation, MdsFile, MdsPoint, MdsResult, MdsSet, Simulation,
    SquareMatrix,
};
pub use summary::{
    eval_score_sets, eval_scoreset, strata_rank_summary, stratum_by_name, EvalFile, EvalSummary, LevelRanks,
    LevelTau, RankCell, SongTau, StrataRankSummary, StratumTaus, StratumView, TauStats, ValueGroup, TAU_THRESHOLD,
};

use crate::aggregate::AggregateError;
use crate::sampler::SampleError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("vectors differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("a ranking is fully tied; tau-b is undefined")]
    AllTied,
    #[error("non-finite rank")]
    NonFinite,
    #[error("song `{0}` has no aggregated ranking")]
    MissingAggregate(String),
    #[error("song `{0}` is not in the catalog")]
    MissingSong(String),
    #[error("song `{0}` falls outside every stratum level")]
    Unassignable(String),
    #[error("unknown stratum `{0}`")]
    UnknownStratum(String),
    #[error("matrix is not symmetric")]
    AsymmetricInput,
    #[error("dissimilarities must be finite and non-negative")]
    NegativeDissimilarity,
    #[error("dissimilarity diagonal must be zero")]
    NonZeroDiagonal,
    #[error("matrix of {len} entries is not {rows}x{rows}")]
    NotSquare { rows: usize, len: usize },
    #[error("correlation matrix must be symmetric with unit diagonal and entries in [-1, 1]")]
    InvalidCorrelation,
    #[error("diagonal differs from 1")]
    NotACorrelationMatrix,
    #[error("a column has zero variance")]
    ConstantColumn,
    #[error("reference correlation file: {0}")]
    Reference(String),
    #[error(transparent)]
    Aggregate(#[from] AggregateError),
    #[error(transparent)]
    Stratum(#[from] SampleError),
}

impl EvalError {
    pub fn kind(&self) -> &'static str {
        match self {
            EvalError::LengthMismatch { .. } => "LengthMismatch",
            EvalError::AllTied => "AllTied",
            EvalError::NonFinite => "NonFinite",
            EvalError::MissingAggregate(_) => "MissingAggregate",
            EvalError::MissingSong(_) => "MissingSong",
            EvalError::Unassignable(_) => "Unassignable",
            EvalError::UnknownStratum(_) => "UnknownStratum",
            EvalError::AsymmetricInput => "AsymmetricInput",
            EvalError::NegativeDissimilarity => "NegativeDissimilarity",
            EvalError::NonZeroDiagonal => "NonZeroDiagonal",
            EvalError::NotSquare { .. } => "NotSquare",
            EvalError::InvalidCorrelation => "InvalidCorrelation",
            EvalError::NotACorrelationMatrix => "NotACorrelationMatrix",
            EvalError::ConstantColumn => "ConstantColumn",
            EvalError::Reference(_) => "ReferenceFormat",
            EvalError::Aggregate(e) => e.kind(),
            EvalError::Stratum(e) => e.kind(),
        }
    }
}

pub type Result<T, E = EvalError> = std::result::Result<T, E>;
