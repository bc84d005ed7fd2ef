//! Estimating perceived personal values in song lyrics.
//!
//! The crate covers the whole analysis pipeline:
//!
//! - [`ingest`]: data model, file loaders and heuristic lyric screening.
//! - [`sampler`]: Dirichlet-MAP smoothed stratified sampling of a catalog.
//! - [`aggregate`]: confidence-weighted means and Robust Rank Aggregation of
//!   per-rater value rankings.
//! - [`reliability`]: Cronbach's alpha, ICC(2,k) and rater-count studies.
//! - [`autoscore`]: lexicon word counting and embedding similarity scorers.
//! - [`synth`]: seeded synthetic catalogs, ratings and embeddings.
//! - [`evaluate`]: Kendall's tau-b evaluation, per-stratum summaries and
//!   classical MDS.
//!
//! Batch entry points take an [`Execution`] so that per-song and
//! per-replicate work can run on the rayon pool (feature `parallel`, on by
//! default) or sequentially. Results are identical either way: every
//! stochastic task draws from its own seeded stream.

pub mod aggregate;
pub mod autoscore;
pub mod evaluate;
pub mod exec;
pub mod ingest;
pub mod reliability;
pub mod rng;
pub mod sampler;
pub mod stats;
pub mod synth;

pub use exec::Execution;
pub use ingest::{ValueId, ValueMap, ValueProfile};

/// Crate-wide error, one variant per module.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Ingest(#[from] ingest::IngestError),
    #[error(transparent)]
    Sample(#[from] sampler::SampleError),
    #[error(transparent)]
    Aggregate(#[from] aggregate::AggregateError),
    #[error(transparent)]
    Reliability(#[from] reliability::ReliabilityError),
    #[error(transparent)]
    Score(#[from] autoscore::ScoreError),
    #[error(transparent)]
    Eval(#[from] evaluate::EvalError),
}

impl Error {
    /// Stable machine-readable name of the failure, e.g. `"NoAnnotations"`.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Ingest(e) => e.kind(),
            Error::Sample(e) => e.kind(),
            Error::Aggregate(e) => e.kind(),
            Error::Reliability(e) => e.kind(),
            Error::Score(e) => e.kind(),
            Error::Eval(e) => e.kind(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
