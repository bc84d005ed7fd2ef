//! Automated-vs-human rank agreement and per-stratum rank descriptives.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::kendall::kendall_tau_b;
use super::{EvalError, Result};
use crate::aggregate::{scores_to_ranking, AggregatesFile};
use crate::autoscore::{Normalization, ScoreSet};
use crate::exec::Execution;
use crate::ingest::{SongRecord, ValueId, ValueMap};
use crate::sampler::{StratumKind, StratumSpec, DEFAULT_POPULARITY_QUANTILES};
use crate::stats::{mean, sample_sd};

/// Songs above this tau count as agreeing.
pub const TAU_THRESHOLD: f64 = 0.10;

const Z95: f64 = 1.96;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauStats {
    pub n: usize,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub frac_above: Option<f64>,
}

impl TauStats {
    pub fn from_taus(taus: &[f64]) -> Self {
        let n = taus.len();
        TauStats {
            n,
            mean: (n > 0).then(|| mean(taus)),
            sd: (n > 1).then(|| sample_sd(taus)),
            frac_above: (n > 0).then(|| taus.iter().filter(|&&t| t > TAU_THRESHOLD).count() as f64 / n as f64),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SongTau {
    pub song_id: String,
    pub tau: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelTau {
    pub level: usize,
    pub stats: TauStats,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StratumTaus {
    pub stratum: StratumKind,
    pub levels: Vec<LevelTau>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub scorer: String,
    pub normalization: Normalization,
    pub songs: Vec<SongTau>,
    pub stats: TauStats,
    /// Songs whose aggregated ranking has no significant value.
    pub excluded_truth_tied: Vec<String>,
    /// Songs whose model scores are all equal.
    pub excluded_model_tied: Vec<String>,
    pub by_stratum: Vec<StratumTaus>,
}

/// Songs of a catalog binned under one stratum.
#[derive(Clone, Copy)]
pub struct StratumView<'a> {
    pub spec: &'a StratumSpec,
    pub catalog: &'a [SongRecord],
}

impl StratumView<'_> {
    fn levels(&self) -> Result<HashMap<&str, usize>> {
        self.catalog
            .iter()
            .map(|s| {
                self.spec
                    .bin(s)
                    .map(|b| (s.song_id.as_str(), b))
                    .ok_or_else(|| EvalError::Unassignable(s.song_id.clone()))
            })
            .collect()
    }
}

/// Tau-b between each song's model ranking and its truncated aggregated
/// ranking, with summary statistics overall and per stratum level.
pub fn eval_scoreset(set: &ScoreSet, aggregates: &AggregatesFile, strata: &[StratumView<'_>]) -> Result<EvalSummary> {
    let by_song = aggregates.by_song();
    let mut songs = Vec::new();
    let mut truth_tied = Vec::new();
    let mut model_tied = Vec::new();
    for s in &set.songs {
        let agg = by_song
            .get(s.song_id.as_str())
            .ok_or_else(|| EvalError::MissingAggregate(s.song_id.clone()))?;
        let truth = agg.ranking.truncated_rank.values();
        if truth.iter().all(|&r| r == truth[0]) {
            truth_tied.push(s.song_id.clone());
            continue;
        }
        let model = scores_to_ranking(&s.scores)?;
        match kendall_tau_b(model.ranks(), truth) {
            Ok(tau) => songs.push(SongTau { song_id: s.song_id.clone(), tau }),
            Err(EvalError::AllTied) => model_tied.push(s.song_id.clone()),
            Err(e) => return Err(e),
        }
    }
    let taus: Vec<f64> = songs.iter().map(|s| s.tau).collect();
    let mut by_stratum = Vec::with_capacity(strata.len());
    for view in strata {
        let levels = view.levels()?;
        let mut grouped = vec![Vec::new(); view.spec.bins];
        for s in &songs {
            let l = *levels
                .get(s.song_id.as_str())
                .ok_or_else(|| EvalError::MissingSong(s.song_id.clone()))?;
            grouped[l].push(s.tau);
        }
        by_stratum.push(StratumTaus {
            stratum: view.spec.kind,
            levels: grouped
                .iter()
                .enumerate()
                .map(|(level, t)| LevelTau { level, stats: TauStats::from_taus(t) })
                .collect(),
        });
    }
    Ok(EvalSummary {
        scorer: set.scorer.clone(),
        normalization: set.normalization,
        stats: TauStats::from_taus(&taus),
        songs,
        excluded_truth_tied: truth_tied,
        excluded_model_tied: model_tied,
        by_stratum,
    })
}

/// Contents of `eval.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalFile {
    pub threshold: f64,
    pub summaries: Vec<EvalSummary>,
}

pub fn eval_score_sets(
    sets: &[ScoreSet],
    aggregates: &AggregatesFile,
    strata: &[StratumView<'_>],
    exec: Execution,
) -> Result<EvalFile> {
    Ok(EvalFile {
        threshold: TAU_THRESHOLD,
        summaries: exec.try_map(sets, |s| eval_scoreset(s, aggregates, strata))?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ValueGroup {
    Group1,
    Group2,
    Group3,
}

impl ValueGroup {
    pub fn of(v: ValueId) -> ValueGroup {
        match v {
            ValueId::Hedonism | ValueId::Stimulation | ValueId::SelfDirection => ValueGroup::Group1,
            ValueId::Achievement | ValueId::Power => ValueGroup::Group2,
            _ => ValueGroup::Group3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankCell {
    pub mean: Option<f64>,
    /// `1.96 * sd / sqrt(count)`, absent below two songs.
    pub ci_half_width: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRanks {
    pub level: usize,
    pub label: String,
    pub count: usize,
    pub values: ValueMap<RankCell>,
}

/// Contents of `strata_summary.json` for one stratum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrataRankSummary {
    pub stratum: StratumKind,
    pub groups: ValueMap<ValueGroup>,
    pub levels: Vec<LevelRanks>,
}

fn level_label(spec: &StratumSpec, level: usize) -> String {
    match spec.kind {
        StratumKind::ReleaseYear => format!("{}s", SongRecord::MIN_YEAR + 10 * level as i32),
        StratumKind::Popularity => {
            let lo = if level == 0 { f64::NEG_INFINITY } else { spec.edges[level - 1] };
            let hi = spec.edges.get(level).copied().unwrap_or(f64::INFINITY);
            format!("[{lo}, {hi})")
        }
        StratumKind::GenreTopic | StratumKind::LyricTopic => format!("topic {level}"),
    }
}

/// Resolves a stratum name. Popularity uses `popularity_edges` when given,
/// otherwise the default quantile cut points of `catalog`.
pub fn stratum_by_name(name: &str, catalog: &[SongRecord], popularity_edges: Option<&[f64]>) -> Result<StratumSpec> {
    let kind = StratumKind::parse(name).ok_or_else(|| EvalError::UnknownStratum(name.to_string()))?;
    Ok(match kind {
        StratumKind::ReleaseYear => StratumSpec::release_year(),
        StratumKind::GenreTopic => StratumSpec::genre_topic(),
        StratumKind::LyricTopic => StratumSpec::lyric_topic(),
        StratumKind::Popularity => match popularity_edges {
            Some(e) => StratumSpec::popularity(e.to_vec())?,
            None => StratumSpec::popularity_from_quantiles(catalog, &DEFAULT_POPULARITY_QUANTILES)?,
        },
    })
}

/// Mean truncated rank per value at every level of `spec`, including
/// empty levels.
pub fn strata_rank_summary(
    aggregates: &AggregatesFile,
    catalog: &[SongRecord],
    spec: &StratumSpec,
) -> Result<StrataRankSummary> {
    let view = StratumView { spec, catalog };
    let levels = view.levels()?;
    let mut grouped: Vec<Vec<&ValueMap<f64>>> = vec![Vec::new(); spec.bins];
    for s in &aggregates.songs {
        let l = *levels
            .get(s.song_id.as_str())
            .ok_or_else(|| EvalError::MissingSong(s.song_id.clone()))?;
        grouped[l].push(&s.ranking.truncated_rank);
    }
    let levels = grouped
        .iter()
        .enumerate()
        .map(|(level, ranks)| LevelRanks {
            level,
            label: level_label(spec, level),
            count: ranks.len(),
            values: ValueMap::from_fn(|v| {
                let xs: Vec<f64> = ranks.iter().map(|r| r[v]).collect();
                RankCell {
                    mean: (!xs.is_empty()).then(|| mean(&xs)),
                    ci_half_width: (xs.len() > 1).then(|| Z95 * sample_sd(&xs) / (xs.len() as f64).sqrt()),
                }
            }),
        })
        .collect();
    Ok(StrataRankSummary {
        stratum: spec.kind,
        groups: ValueMap::from_fn(ValueGroup::of),
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregate::{AggregatedRanking, Correction, SongAggregate, ValueStat};
    use crate::autoscore::SongScores;
    use crate::ingest::ValueProfile;

    fn agg(id: &str, truncated: [f64; 10]) -> SongAggregate {
        SongAggregate {
            song_id: id.into(),
            weighted_mean: ValueMap([0.0; 10]),
            ranking: AggregatedRanking {
                m: 25,
                correction: Correction::Lists,
                correction_factor: 25.0,
                alpha: 0.05,
                values: ValueMap::from_fn(|v| ValueStat { rho: 0.5, p: 1.0, position: v.index() + 1 }),
                order: ValueId::ALL.to_vec(),
                truncated_rank: ValueMap(truncated),
            },
        }
    }

    fn file(songs: Vec<SongAggregate>) -> AggregatesFile {
        AggregatesFile { alpha: 0.05, correction: Correction::Lists, songs }
    }

    fn set(songs: Vec<(&str, [f64; 10])>) -> ScoreSet {
        ScoreSet {
            scorer: "m".into(),
            normalization: Normalization::Null,
            songs: songs
                .into_iter()
                .map(|(id, s)| SongScores { song_id: id.into(), scores: ValueMap(s) })
                .collect(),
            degenerate: Vec::new(),
            coverage: crate::autoscore::Coverage {
                songs: 0,
                tokens: 0,
                oov_rate: None,
                mean_song_oov_rate: None,
                precomputed_doc_vectors: 0,
                lexicon: ValueMap::from_fn(|_| crate::autoscore::LexiconCoverage {
                    patterns: 0,
                    patterns_matched: 0,
                    words: 0,
                }),
                degenerate_centroids: Vec::new(),
            },
        }
    }

    const T: [f64; 10] = [1.0, 2.0, 3.0, 7.0, 7.0, 7.0, 7.0, 7.0, 7.0, 7.0];

    #[test]
    fn perfect_agreement() {
        let scores = [10.0, 9.0, 8.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let s = eval_scoreset(&set(vec![("a", scores), ("b", scores)]), &file(vec![agg("a", T), agg("b", T)]), &[])
            .unwrap();
        assert_eq!(s.stats.mean, Some(1.0));
        assert_eq!(s.stats.frac_above, Some(1.0));
        assert_eq!(s.stats.sd, Some(0.0));
    }

    #[test]
    fn exclusions_counted_separately() {
        let flat = [5.5; 10];
        let s = eval_scoreset(
            &set(vec![("a", [1.0; 10]), ("b", [3.0, 2.0, 1.0, 0., 0., 0., 0., 0., 0., 0.])]),
            &file(vec![agg("a", T), agg("b", flat)]),
            &[],
        )
        .unwrap();
        assert_eq!(s.excluded_model_tied, vec!["a"]);
        assert_eq!(s.excluded_truth_tied, vec!["b"]);
        assert_eq!(s.stats.n, 0);
        assert_eq!(s.stats.mean, None);
        assert!(matches!(
            eval_scoreset(&set(vec![("zz", [1.0; 10])]), &file(vec![]), &[]),
            Err(EvalError::MissingAggregate(_))
        ));
    }

    fn catalog_song(id: &str, year: i32) -> SongRecord {
        SongRecord {
            song_id: id.into(),
            title: String::new(),
            artist: String::new(),
            release_year: year,
            popularity: 1.0,
            genre_topic: 0,
            lyric_topic: 0,
            lyrics_text: String::new(),
        }
    }

    #[test]
    fn strata_examples() {
        let catalog = vec![catalog_song("a", 1995), catalog_song("b", 1999), catalog_song("c", 2005)];
        let mut ra = T;
        ra.swap(0, 1); // POWER rank 2
        // four significant values, POWER fourth
        let rb = [4.0, 2.0, 3.0, 1.0, 7.5, 7.5, 7.5, 7.5, 7.5, 7.5];
        let aggs = file(vec![agg("a", ra), agg("b", rb), agg("c", T)]);
        let spec = stratum_by_name("release_year", &catalog, None).unwrap();
        let s = strata_rank_summary(&aggs, &catalog, &spec).unwrap();
        assert_eq!(s.levels.len(), 14);
        let nineties = &s.levels[10];
        assert_eq!(nineties.label, "1990s");
        assert_eq!(nineties.count, 2);
        assert_eq!(nineties.values[ValueId::Power].mean, Some(3.0));
        assert!((nineties.values[ValueId::Power].ci_half_width.unwrap() - 1.96).abs() < 1e-12);
        let single = &s.levels[11];
        assert_eq!(single.values[ValueId::Power].mean, Some(1.0));
        assert_eq!(single.values[ValueId::Power].ci_half_width, None);
        for l in s.levels.iter().filter(|l| l.count > 0) {
            let avg: f64 = l.values.values().iter().map(|c| c.mean.unwrap()).sum::<f64>() / 10.0;
            assert!((avg - 5.5).abs() < 1e-9);
        }
        assert_eq!(s.groups[ValueId::SelfDirection], ValueGroup::Group1);
        assert_eq!(s.groups[ValueId::Power], ValueGroup::Group2);
        assert_eq!(s.groups[ValueId::Security], ValueGroup::Group3);

        let twins = file(vec![agg("a", T), agg("b", T)]);
        let s = strata_rank_summary(&twins, &catalog, &spec).unwrap();
        assert_eq!(s.levels[10].values[ValueId::Power].ci_half_width, Some(0.0));
        assert!(matches!(stratum_by_name("mood", &catalog, None), Err(EvalError::UnknownStratum(_))));
        let _: ValueProfile = ValueMap(T);
    }

    #[test]
    fn per_stratum_taus() {
        let catalog = vec![catalog_song("a", 1995), catalog_song("b", 2005)];
        let scores = [10.0, 9.0, 8.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let spec = StratumSpec::release_year();
        let s = eval_scoreset(
            &set(vec![("a", scores), ("b", scores)]),
            &file(vec![agg("a", T), agg("b", T)]),
            &[StratumView { spec: &spec, catalog: &catalog }],
        )
        .unwrap();
        let levels = &s.by_stratum[0].levels;
        assert_eq!(levels.len(), 14);
        assert_eq!(levels[10].stats.n, 1);
        assert_eq!(levels[11].stats.n, 1);
        assert_eq!(levels[0].stats.mean, None);
    }
}
