//! Automated value scoring of lyrics: lexicon word counting and embedding
//! cosine similarity against per-value centroids, each under four
//! normalization schemes.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::exec::Execution;
use crate::ingest::{tokenize, EmbeddingTable, Pattern, SongRecord, ValueId, ValueLexicon, ValueMap, ValueProfile};
use crate::stats::{mean, sample_sd};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScoreError {
    #[error("song `{song_id}` has no tokens")]
    EmptyText { song_id: String },
    #[error("model `{model}`: no lexicon word of {value} is in the vocabulary")]
    NoVocabularyOverlap { model: String, value: ValueId },
    #[error("model `{model}`: song `{song_id}` has no in-vocabulary tokens")]
    NoTokensInVocabulary { model: String, song_id: String },
    #[error("model `{model}`: document vector of song `{song_id}` is zero")]
    ZeroVector { model: String, song_id: String },
    #[error("vector dimension {found} does not match {expected}")]
    DimensionMismatch { expected: usize, found: usize },
}

impl ScoreError {
    pub fn kind(&self) -> &'static str {
        match self {
            ScoreError::EmptyText { .. } => "EmptyText",
            ScoreError::NoVocabularyOverlap { .. } => "NoVocabularyOverlap",
            ScoreError::NoTokensInVocabulary { .. } => "NoTokensInVocabulary",
            ScoreError::ZeroVector { .. } => "ZeroVector",
            ScoreError::DimensionMismatch { .. } => "DimensionMismatch",
        }
    }
}

type Result<T, E = ScoreError> = std::result::Result<T, E>;

pub const WORDCOUNT: &str = "wordcount";

/// Fraction of tokens matching each value's patterns. A token that
/// matches several values counts once for each.
pub fn wordcount_profile(tokens: &[String], lexicon: &ValueLexicon) -> Option<ValueProfile> {
    if tokens.is_empty() {
        return None;
    }
    let n = tokens.len() as f64;
    Some(ValueMap::from_fn(|v| {
        tokens.iter().filter(|t| lexicon.matches(v, t)).count() as f64 / n
    }))
}

pub fn wordcount_scores(song_id: &str, lyrics: &str, lexicon: &ValueLexicon) -> Result<ValueProfile> {
    wordcount_profile(&tokenize(lyrics), lexicon).ok_or_else(|| ScoreError::EmptyText {
        song_id: song_id.to_string(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Centroid {
    pub vector: Vec<f64>,
    /// Distinct vocabulary words averaged into the centroid.
    pub words: usize,
    /// Patterns with at least one vocabulary match.
    pub patterns_matched: usize,
    /// Zero vector; cosine scores against it are reported as 0.
    pub degenerate: bool,
}

fn vocabulary_words<'a>(pattern: &'a Pattern, table: &'a EmbeddingTable) -> Vec<&'a str> {
    match pattern {
        Pattern::Exact(w) => table.vector(w).map(|_| vec![w.as_str()]).unwrap_or_default(),
        Pattern::Prefix(p) => table.prefix_matches(p).collect(),
    }
}

/// Per-value mean embedding of the lexicon words found in the table, with
/// wildcard patterns expanded against the vocabulary.
pub fn value_centroids(lexicon: &ValueLexicon, table: &EmbeddingTable) -> Result<ValueMap<Centroid>> {
    let mut out = Vec::with_capacity(ValueId::COUNT);
    for v in ValueId::ALL {
        let mut words = BTreeSet::new();
        let mut patterns_matched = 0;
        for p in lexicon.patterns(v) {
            let hits = vocabulary_words(p, table);
            patterns_matched += usize::from(!hits.is_empty());
            words.extend(hits);
        }
        if words.is_empty() {
            return Err(ScoreError::NoVocabularyOverlap {
                model: table.model_name.clone(),
                value: v,
            });
        }
        let mut sum = vec![0.0; table.dim()];
        for w in &words {
            add(&mut sum, table.vector(w).expect("word taken from vocabulary"));
        }
        let k = words.len() as f64;
        sum.iter_mut().for_each(|x| *x /= k);
        out.push(Centroid {
            degenerate: norm(&sum) == 0.0,
            vector: sum,
            words: words.len(),
            patterns_matched,
        });
    }
    Ok(ValueMap(out.try_into().expect("ten values")))
}

fn add(acc: &mut [f64], v: &[f64]) {
    acc.iter_mut().zip(v).for_each(|(a, b)| *a += b);
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Cosine similarity, `None` when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Some((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// Document vector plus the number of tokens missing from the vocabulary.
#[derive(Clone, Debug, PartialEq)]
pub struct DocVector {
    pub vector: Vec<f64>,
    pub tokens: usize,
    pub oov: usize,
    pub precomputed: bool,
}

/// The precomputed vector for the song when the table has one, otherwise
/// the unweighted mean of in-vocabulary token vectors.
pub fn document_vector(song: &SongRecord, table: &EmbeddingTable) -> Result<DocVector> {
    let tokens = tokenize(&song.lyrics_text);
    let (vector, oov, precomputed) = if let Some(v) = table.doc_vector(&song.song_id) {
        let oov = tokens.iter().filter(|t| !table.contains(t)).count();
        (v.to_vec(), oov, true)
    } else {
        let mut sum = vec![0.0; table.dim()];
        let mut hits = 0usize;
        for t in &tokens {
            if let Some(v) = table.vector(t) {
                add(&mut sum, v);
                hits += 1;
            }
        }
        if hits == 0 {
            return Err(ScoreError::NoTokensInVocabulary {
                model: table.model_name.clone(),
                song_id: song.song_id.clone(),
            });
        }
        sum.iter_mut().for_each(|x| *x /= hits as f64);
        (sum, tokens.len() - hits, false)
    };
    if norm(&vector) == 0.0 {
        return Err(ScoreError::ZeroVector {
            model: table.model_name.clone(),
            song_id: song.song_id.clone(),
        });
    }
    Ok(DocVector {
        vector,
        tokens: tokens.len(),
        oov,
        precomputed,
    })
}

/// Cosine of a document vector with every centroid; degenerate centroids
/// score 0.
pub fn embedding_scores(doc: &[f64], centroids: &ValueMap<Centroid>) -> Result<ValueProfile> {
    let mut out = [0.0; 10];
    for (v, c) in centroids.iter() {
        if c.vector.len() != doc.len() {
            return Err(ScoreError::DimensionMismatch {
                expected: c.vector.len(),
                found: doc.len(),
            });
        }
        out[v.index()] = if c.degenerate { 0.0 } else { cosine(doc, &c.vector).unwrap_or(0.0) };
    }
    Ok(ValueMap(out))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    Null,
    CorpusZ,
    SongZ,
    SongMinmax,
}

impl Normalization {
    pub const ALL: [Normalization; 4] = [
        Normalization::Null,
        Normalization::CorpusZ,
        Normalization::SongZ,
        Normalization::SongMinmax,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Normalization::Null => "null",
            Normalization::CorpusZ => "corpus_z",
            Normalization::SongZ => "song_z",
            Normalization::SongMinmax => "song_minmax",
        }
    }
}

impl std::fmt::Display for Normalization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Normalized {
    pub profiles: Vec<ValueProfile>,
    /// Zero-variance groups: value indices for `corpus_z`, song indices for
    /// the per-song schemes.
    pub degenerate: Vec<usize>,
}

fn z_scores(xs: &[f64]) -> Option<Vec<f64>> {
    let sd = sample_sd(xs);
    if !(sd > 0.0 && sd.is_finite()) {
        return None;
    }
    let m = mean(xs);
    Some(xs.iter().map(|x| (x - m) / sd).collect())
}

fn min_max(xs: &[f64]) -> Option<Vec<f64>> {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (hi > lo).then(|| xs.iter().map(|x| (x - lo) / (hi - lo)).collect())
}

pub fn normalize_scores(profiles: &[ValueProfile], scheme: Normalization) -> Normalized {
    let mut degenerate = Vec::new();
    let profiles = match scheme {
        Normalization::Null => profiles.to_vec(),
        Normalization::CorpusZ => {
            let mut out = profiles.to_vec();
            for v in ValueId::ALL {
                let col: Vec<f64> = profiles.iter().map(|p| p[v]).collect();
                let z = z_scores(&col).unwrap_or_else(|| {
                    degenerate.push(v.index());
                    vec![0.0; col.len()]
                });
                out.iter_mut().zip(z).for_each(|(p, x)| p.0[v.index()] = x);
            }
            out
        }
        Normalization::SongZ | Normalization::SongMinmax => profiles
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let r = if scheme == Normalization::SongZ { z_scores(&p.0) } else { min_max(&p.0) };
                let fill = if scheme == Normalization::SongZ { 0.0 } else { 0.5 };
                let r = r.unwrap_or_else(|| {
                    degenerate.push(i);
                    vec![fill; 10]
                });
                ValueMap(r.try_into().expect("ten values"))
            })
            .collect(),
    };
    Normalized { profiles, degenerate }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SongScores {
    pub song_id: String,
    pub scores: ValueProfile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LexiconCoverage {
    pub patterns: usize,
    /// Patterns matching at least one corpus token (wordcount) or
    /// vocabulary word (embedding models).
    pub patterns_matched: usize,
    /// Distinct matched words.
    pub words: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub songs: usize,
    pub tokens: usize,
    /// Out-of-vocabulary share of all corpus tokens; absent for wordcount.
    pub oov_rate: Option<f64>,
    pub mean_song_oov_rate: Option<f64>,
    pub precomputed_doc_vectors: usize,
    pub lexicon: ValueMap<LexiconCoverage>,
    pub degenerate_centroids: Vec<ValueId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreSet {
    pub scorer: String,
    pub normalization: Normalization,
    pub songs: Vec<SongScores>,
    /// Groups mapped to constants by the normalization (value names for
    /// `corpus_z`, song ids otherwise).
    pub degenerate: Vec<String>,
    pub coverage: Coverage,
}

/// Contents of `scores.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoresFile {
    pub sets: Vec<ScoreSet>,
}

struct RawScores {
    scorer: String,
    profiles: Vec<ValueProfile>,
    coverage: Coverage,
}

fn wordcount_raw(corpus: &[SongRecord], lexicon: &ValueLexicon, exec: Execution) -> Result<RawScores> {
    let tokenized = exec.map(corpus, |s| tokenize(&s.lyrics_text));
    let profiles = exec.try_map_range(corpus.len(), |i| {
        wordcount_profile(&tokenized[i], lexicon).ok_or_else(|| ScoreError::EmptyText {
            song_id: corpus[i].song_id.clone(),
        })
    })?;
    let distinct: BTreeSet<&str> = tokenized.iter().flatten().map(String::as_str).collect();
    let lexicon_cov = ValueMap::from_fn(|v| {
        let ps = lexicon.patterns(v);
        LexiconCoverage {
            patterns: ps.len(),
            patterns_matched: ps.iter().filter(|p| distinct.iter().any(|t| p.matches(t))).count(),
            words: distinct.iter().filter(|t| lexicon.matches(v, t)).count(),
        }
    });
    Ok(RawScores {
        scorer: WORDCOUNT.to_string(),
        profiles,
        coverage: Coverage {
            songs: corpus.len(),
            tokens: tokenized.iter().map(Vec::len).sum(),
            oov_rate: None,
            mean_song_oov_rate: None,
            precomputed_doc_vectors: 0,
            lexicon: lexicon_cov,
            degenerate_centroids: Vec::new(),
        },
    })
}

fn embedding_raw(
    corpus: &[SongRecord],
    lexicon: &ValueLexicon,
    table: &EmbeddingTable,
    exec: Execution,
) -> Result<RawScores> {
    let centroids = value_centroids(lexicon, table)?;
    let docs = exec.try_map(corpus, |s| document_vector(s, table))?;
    let profiles = exec.try_map(&docs, |d| embedding_scores(&d.vector, &centroids))?;
    let tokens: usize = docs.iter().map(|d| d.tokens).sum();
    let oov: usize = docs.iter().map(|d| d.oov).sum();
    let song_rates: Vec<f64> = docs
        .iter()
        .filter(|d| d.tokens > 0)
        .map(|d| d.oov as f64 / d.tokens as f64)
        .collect();
    Ok(RawScores {
        scorer: table.model_name.clone(),
        profiles,
        coverage: Coverage {
            songs: corpus.len(),
            tokens,
            oov_rate: (tokens > 0).then(|| oov as f64 / tokens as f64),
            mean_song_oov_rate: (!song_rates.is_empty()).then(|| mean(&song_rates)),
            precomputed_doc_vectors: docs.iter().filter(|d| d.precomputed).count(),
            lexicon: ValueMap::from_fn(|v| LexiconCoverage {
                patterns: lexicon.patterns(v).len(),
                patterns_matched: centroids[v].patterns_matched,
                words: centroids[v].words,
            }),
            degenerate_centroids: centroids.iter().filter(|(_, c)| c.degenerate).map(|(v, _)| v).collect(),
        },
    })
}

/// Wordcount plus one scorer per model, each under all four
/// normalizations: `(models.len() + 1) * 4` sets, scorer-major.
pub fn build_score_sets(
    corpus: &[SongRecord],
    lexicon: &ValueLexicon,
    models: &[EmbeddingTable],
    exec: Execution,
) -> Result<Vec<ScoreSet>> {
    let mut raw = vec![wordcount_raw(corpus, lexicon, exec)?];
    for table in models {
        raw.push(embedding_raw(corpus, lexicon, table, exec)?);
    }
    let mut sets = Vec::with_capacity(raw.len() * 4);
    for r in &raw {
        for scheme in Normalization::ALL {
            let n = normalize_scores(&r.profiles, scheme);
            let degenerate = n
                .degenerate
                .iter()
                .map(|&i| match scheme {
                    Normalization::CorpusZ => ValueId::ALL[i].name().to_string(),
                    _ => corpus[i].song_id.clone(),
                })
                .collect();
            sets.push(ScoreSet {
                scorer: r.scorer.clone(),
                normalization: scheme,
                songs: corpus
                    .iter()
                    .zip(n.profiles)
                    .map(|(s, scores)| SongScores { song_id: s.song_id.clone(), scores })
                    .collect(),
                degenerate,
                coverage: r.coverage.clone(),
            });
        }
    }
    Ok(sets)
}
