//! Fuzzy stratified sampling.
//!
//! Each stratum's empirical bin distribution is smoothed toward uniform with
//! the MAP estimate under a symmetric Dirichlet prior of concentration `a`:
//!
//! ```text
//! q_i = (n_i + a - 1) / (N + K (a - 1))
//! ```
//!
//! Songs then get importance weights `prod_d q_d(b) / p_d(b)` across strata
//! and are drawn without replacement by exponential keys, so rare bins are
//! oversampled relative to the catalog.

use serde::{Deserialize, Serialize};

use crate::exec::Execution;
use crate::ingest::SongRecord;
use crate::rng::task_rng;
use rand::Rng;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SampleError {
    #[error("concentration must be >= 1, got {0}")]
    InvalidConcentration(f64),
    #[error("all bin counts are zero")]
    EmptyPopulation,
    #[error("target share {target} unreachable with {bins} bins (must be in (0, 1/K))")]
    UnreachableTarget { target: f64, bins: usize },
    #[error("song `{song_id}` falls in bin {bin} of {stratum}, which has no empirical mass")]
    EmptyBin {
        song_id: String,
        stratum: StratumKind,
        bin: usize,
    },
    #[error("song `{song_id}` cannot be assigned a bin of {stratum}")]
    Unassignable { song_id: String, stratum: StratumKind },
    #[error("requested {requested} songs from a catalog of {available}")]
    SampleTooLarge { requested: usize, available: usize },
    #[error("weights invalid: {0}")]
    InvalidWeights(String),
    #[error("invalid stratum definition: {0}")]
    InvalidStratum(String),
}

impl SampleError {
    pub fn kind(&self) -> &'static str {
        match self {
            SampleError::InvalidConcentration(_) => "InvalidConcentration",
            SampleError::EmptyPopulation => "EmptyPopulation",
            SampleError::UnreachableTarget { .. } => "UnreachableTarget",
            SampleError::EmptyBin { .. } => "EmptyBin",
            SampleError::Unassignable { .. } => "Unassignable",
            SampleError::SampleTooLarge { .. } => "SampleTooLarge",
            SampleError::InvalidWeights(_) => "InvalidWeights",
            SampleError::InvalidStratum(_) => "InvalidStratum",
        }
    }
}

type Result<T, E = SampleError> = std::result::Result<T, E>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StratumKind {
    ReleaseYear,
    Popularity,
    GenreTopic,
    LyricTopic,
}

impl StratumKind {
    pub const ALL: [StratumKind; 4] = [
        StratumKind::ReleaseYear,
        StratumKind::Popularity,
        StratumKind::GenreTopic,
        StratumKind::LyricTopic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StratumKind::ReleaseYear => "release_year",
            StratumKind::Popularity => "popularity",
            StratumKind::GenreTopic => "genre_topic",
            StratumKind::LyricTopic => "lyric_topic",
        }
    }

    pub fn parse(s: &str) -> Option<StratumKind> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

impl std::fmt::Display for StratumKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Default cumulative quantiles for the six popularity cut points: the
/// lowest 40% share bin 1, the top 9% bin 7, the rest split evenly.
pub const DEFAULT_POPULARITY_QUANTILES: [f64; 6] = [0.40, 0.502, 0.604, 0.706, 0.808, 0.91];

/// How one stratum assigns songs to bins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StratumSpec {
    pub kind: StratumKind,
    /// Number of bins K.
    pub bins: usize,
    /// Ascending cut points for numeric strata: bin = number of edges <= x.
    /// Empty for categorical strata.
    pub edges: Vec<f64>,
}

impl StratumSpec {
    /// Fourteen decades spanning [1890, 2030).
    pub fn release_year() -> Self {
        StratumSpec {
            kind: StratumKind::ReleaseYear,
            bins: 14,
            edges: (1..14).map(|i| (1890 + 10 * i) as f64).collect(),
        }
    }

    /// Seven popularity bins from six non-decreasing cut points.
    pub fn popularity(edges: Vec<f64>) -> Result<Self> {
        if edges.len() != 6 {
            return Err(SampleError::InvalidStratum(format!(
                "popularity needs 6 edges for 7 bins, got {}",
                edges.len()
            )));
        }
        if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[0] > w[1]) {
            return Err(SampleError::InvalidStratum(
                "popularity edges must be finite and non-decreasing".into(),
            ));
        }
        Ok(StratumSpec {
            kind: StratumKind::Popularity,
            bins: 7,
            edges,
        })
    }

    /// Popularity cut points at the given cumulative quantiles of the
    /// catalog: edge j is the `floor(q_j * N)`-th smallest popularity.
    pub fn popularity_from_quantiles(catalog: &[SongRecord], quantiles: &[f64]) -> Result<Self> {
        if catalog.is_empty() {
            return Err(SampleError::EmptyPopulation);
        }
        if quantiles.iter().any(|q| !(0.0..=1.0).contains(q)) {
            return Err(SampleError::InvalidStratum("quantiles must lie in [0, 1]".into()));
        }
        let mut pops: Vec<f64> = catalog.iter().map(|s| s.popularity).collect();
        pops.sort_by(f64::total_cmp);
        let n = pops.len();
        let edges = quantiles
            .iter()
            .map(|q| pops[((q * n as f64).floor() as usize).min(n - 1)])
            .collect();
        Self::popularity(edges)
    }

    pub fn genre_topic() -> Self {
        StratumSpec {
            kind: StratumKind::GenreTopic,
            bins: SongRecord::GENRE_TOPICS as usize,
            edges: Vec::new(),
        }
    }

    pub fn lyric_topic() -> Self {
        StratumSpec {
            kind: StratumKind::LyricTopic,
            bins: SongRecord::LYRIC_TOPICS as usize,
            edges: Vec::new(),
        }
    }

    /// Bin index of `song`, or `None` when it falls outside the stratum.
    pub fn bin(&self, song: &SongRecord) -> Option<usize> {
        let b = match self.kind {
            StratumKind::ReleaseYear => {
                if !(SongRecord::MIN_YEAR..SongRecord::END_YEAR).contains(&song.release_year) {
                    return None;
                }
                self.edge_bin(song.release_year as f64)
            }
            StratumKind::Popularity => self.edge_bin(song.popularity),
            StratumKind::GenreTopic => song.genre_topic as usize,
            StratumKind::LyricTopic => song.lyric_topic as usize,
        };
        (b < self.bins).then_some(b)
    }

    fn edge_bin(&self, x: f64) -> usize {
        self.edges.partition_point(|&e| e <= x)
    }

    /// Per-bin song counts over `catalog`.
    pub fn counts(&self, catalog: &[SongRecord]) -> Result<Vec<u64>> {
        let mut counts = vec![0u64; self.bins];
        for s in catalog {
            let b = self.bin(s).ok_or_else(|| SampleError::Unassignable {
                song_id: s.song_id.clone(),
                stratum: self.kind,
            })?;
            counts[b] += 1;
        }
        Ok(counts)
    }
}

/// MAP-smoothed categorical distribution of one stratum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothedDistribution {
    pub stratum: Option<StratumKind>,
    pub counts: Vec<u64>,
    pub concentration: f64,
    pub probabilities: Vec<f64>,
}

impl SmoothedDistribution {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Empirical share n_i / N.
    pub fn empirical(&self, bin: usize) -> f64 {
        self.counts[bin] as f64 / self.total() as f64
    }

    pub fn min_probability(&self) -> f64 {
        self.probabilities.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `q_i = (n_i + a - 1) / (N + K(a - 1))`.
pub fn map_smooth(counts: &[u64], a: f64) -> Result<SmoothedDistribution> {
    if !a.is_finite() || a < 1.0 {
        return Err(SampleError::InvalidConcentration(a));
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(SampleError::EmptyPopulation);
    }
    let k = counts.len() as f64;
    let denom = total as f64 + k * (a - 1.0);
    Ok(SmoothedDistribution {
        stratum: None,
        counts: counts.to_vec(),
        concentration: a,
        probabilities: counts.iter().map(|&n| (n as f64 + a - 1.0) / denom).collect(),
    })
}

fn min_share(counts: &[u64], total: f64, a: f64) -> f64 {
    let n_min = counts.iter().copied().min().unwrap_or(0) as f64;
    (n_min + a - 1.0) / (total + counts.len() as f64 * (a - 1.0))
}

/// Smallest `a >= 1` (to within 1e-7) whose smoothed minimum bin share
/// reaches `target_min_share`. The minimum share is non-decreasing in `a`
/// and tends to 1/K, so the target must lie in (0, 1/K).
pub fn choose_concentration(counts: &[u64], target_min_share: f64) -> Result<f64> {
    let k = counts.len();
    if k == 0 || !(target_min_share > 0.0 && target_min_share < 1.0 / k as f64) {
        return Err(SampleError::UnreachableTarget {
            target: target_min_share,
            bins: k,
        });
    }
    let total = counts.iter().sum::<u64>() as f64;
    if total == 0.0 {
        return Err(SampleError::EmptyPopulation);
    }
    let reached = |a: f64| min_share(counts, total, a) >= target_min_share;
    if reached(1.0) {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (1.0, 2.0);
    while !reached(hi) {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-7 {
        let mid = 0.5 * (lo + hi);
        if reached(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// A stratum with its smoothed distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stratum {
    pub spec: StratumSpec,
    pub distribution: SmoothedDistribution,
}

impl Stratum {
    /// Smooths `spec`'s catalog counts with concentration `a`.
    pub fn with_concentration(spec: StratumSpec, catalog: &[SongRecord], a: f64) -> Result<Self> {
        let counts = spec.counts(catalog)?;
        let mut distribution = map_smooth(&counts, a)?;
        distribution.stratum = Some(spec.kind);
        Ok(Stratum { spec, distribution })
    }

    /// Smooths with the smallest concentration reaching `target_min_share`.
    pub fn with_target(spec: StratumSpec, catalog: &[SongRecord], target_min_share: f64) -> Result<Self> {
        let counts = spec.counts(catalog)?;
        let a = choose_concentration(&counts, target_min_share)?;
        Self::with_concentration(spec, catalog, a)
    }
}

/// Normalized importance weights `prod_d q_d(b_d) / p_d(b_d)`, one per song.
/// Empirical shares come from the distributions' own counts, which must
/// describe `catalog`.
pub fn song_weights(catalog: &[SongRecord], strata: &[Stratum], exec: Execution) -> Result<Vec<f64>> {
    if catalog.is_empty() {
        return Err(SampleError::EmptyPopulation);
    }
    for s in strata {
        if s.distribution.bins() != s.spec.bins {
            return Err(SampleError::InvalidStratum(format!(
                "{}: distribution has {} bins, stratum has {}",
                s.spec.kind,
                s.distribution.bins(),
                s.spec.bins
            )));
        }
    }
    let raw = exec.try_map(catalog, |song| {
        let mut w = 1.0;
        for s in strata {
            let b = s.spec.bin(song).ok_or_else(|| SampleError::Unassignable {
                song_id: song.song_id.clone(),
                stratum: s.spec.kind,
            })?;
            if s.distribution.counts[b] == 0 || s.distribution.total() == 0 {
                return Err(SampleError::EmptyBin {
                    song_id: song.song_id.clone(),
                    stratum: s.spec.kind,
                    bin: b,
                });
            }
            w *= s.distribution.probabilities[b] / s.distribution.empirical(b);
        }
        Ok(w)
    })?;
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|w| w / total).collect())
}

/// Draws `n` distinct indices with probability proportional to `weights`
/// using exponential keys `u^(1/w)` (compared as `ln(u) / w`). Each index
/// draws its key from its own stream of `seed`, so the result does not
/// depend on `exec`. Indices are returned by descending key.
pub fn sample_indices(weights: &[f64], n: usize, seed: u64, exec: Execution) -> Result<Vec<usize>> {
    if n > weights.len() {
        return Err(SampleError::SampleTooLarge {
            requested: n,
            available: weights.len(),
        });
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(SampleError::InvalidWeights(format!("weight {w} is not finite and positive")));
    }
    let mut keyed: Vec<(f64, usize)> = exec.map_range(weights.len(), |i| {
        let mut rng = task_rng(seed, "sample_songs", i as u64);
        // u in (0, 1]
        let u: f64 = 1.0 - rng.random::<f64>();
        (u.ln() / weights[i], i)
    });
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    Ok(keyed.into_iter().take(n).map(|(_, i)| i).collect())
}

/// Draws `n` song ids; see [`sample_indices`].
pub fn sample_songs(
    catalog: &[SongRecord],
    weights: &[f64],
    n: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<String>> {
    if weights.len() != catalog.len() {
        return Err(SampleError::InvalidWeights(format!(
            "{} weights for {} songs",
            weights.len(),
            catalog.len()
        )));
    }
    Ok(sample_indices(weights, n, seed, exec)?
        .into_iter()
        .map(|i| catalog[i].song_id.clone())
        .collect())
}

/// Per-stratum summary of a drawn sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StratumShares {
    pub stratum: StratumKind,
    pub concentration: f64,
    pub edges: Vec<f64>,
    pub catalog_counts: Vec<u64>,
    pub smoothed: Vec<f64>,
    pub realized: Vec<f64>,
}

/// Contents of `sample.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleOutput {
    pub seed: u64,
    pub n: usize,
    pub song_ids: Vec<String>,
    pub strata: Vec<StratumShares>,
}

/// Full sampling run: weights from `strata`, draw, and realized shares.
pub fn run_sampling(
    catalog: &[SongRecord],
    strata: &[Stratum],
    n: usize,
    seed: u64,
    exec: Execution,
) -> Result<SampleOutput> {
    let weights = song_weights(catalog, strata, exec)?;
    let idx = sample_indices(&weights, n, seed, exec)?;
    let shares = strata
        .iter()
        .map(|s| {
            let mut realized = vec![0.0; s.spec.bins];
            for &i in &idx {
                // bins were validated by song_weights
                realized[s.spec.bin(&catalog[i]).unwrap()] += 1.0;
            }
            if n > 0 {
                for r in &mut realized {
                    *r /= n as f64;
                }
            }
            StratumShares {
                stratum: s.spec.kind,
                concentration: s.distribution.concentration,
                edges: s.spec.edges.clone(),
                catalog_counts: s.distribution.counts.clone(),
                smoothed: s.distribution.probabilities.clone(),
                realized,
            }
        })
        .collect();
    Ok(SampleOutput {
        seed,
        n,
        song_ids: idx.into_iter().map(|i| catalog[i].song_id.clone()).collect(),
        strata: shares,
    })
}
