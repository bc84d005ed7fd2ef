//! Per-song ground truth from raw annotations.
//!
//! Each rater's ten scores for a song are coerced to a midranked list, and
//! the lists are combined with Robust Rank Aggregation: for an item with
//! sorted normalized ranks `r(1) <= ... <= r(m)` over `m` lists,
//!
//! ```text
//! beta_k = P(U(k) <= r(k)) = sum_{l=k}^{m} C(m,l) r(k)^l (1 - r(k))^(m-l)
//! rho    = min_k beta_k
//! ```
//!
//! and `p = min(1, rho * factor)` with a Bonferroni factor (number of lists by
//! default). Values with `p > alpha` share a tied bottom rank in the
//! truncated ranking.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::exec::Execution;
use crate::ingest::{AnnotationRecord, ValueId, ValueMap, ValueProfile};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AggregateError {
    #[error("no annotations")]
    NoAnnotations,
    #[error("empty rank input")]
    EmptyInput,
    #[error("normalized rank {0} outside (0, 1]")]
    RankOutOfRange(f64),
    #[error("score for {0} is not finite")]
    NonFiniteScore(ValueId),
    #[error("inconsistent lists: {0}")]
    InconsistentLists(String),
    #[error("song `{song_id}`: rater `{rater_id}` did not score {missing}")]
    IncompleteList {
        song_id: String,
        rater_id: String,
        missing: ValueId,
    },
    #[error("alpha {0} outside [0, 1]")]
    InvalidAlpha(f64),
    #[error("correction factor {0} must be finite and > 0")]
    InvalidCorrection(f64),
}

impl AggregateError {
    pub fn kind(&self) -> &'static str {
        match self {
            AggregateError::NoAnnotations => "NoAnnotations",
            AggregateError::EmptyInput => "EmptyInput",
            AggregateError::RankOutOfRange(_) => "RankOutOfRange",
            AggregateError::NonFiniteScore(_) => "NonFiniteScore",
            AggregateError::InconsistentLists(_) => "InconsistentLists",
            AggregateError::IncompleteList { .. } => "IncompleteList",
            AggregateError::InvalidAlpha(_) => "InvalidAlpha",
            AggregateError::InvalidCorrection(_) => "InvalidCorrection",
        }
    }
}

type Result<T, E = AggregateError> = std::result::Result<T, E>;

pub const DEFAULT_ALPHA: f64 = 0.05;

/// Weighted mean with weights `confidence / 100`; falls back to the plain
/// mean when every confidence is zero.
pub fn confidence_weighted_mean(ratings: &[(f64, f64)]) -> Result<f64> {
    if ratings.is_empty() {
        return Err(AggregateError::NoAnnotations);
    }
    let (num, den) = ratings
        .iter()
        .fold((0.0, 0.0), |(n, d), &(x, c)| (n + x * c / 100.0, d + c / 100.0));
    if den > 0.0 {
        Ok(num / den)
    } else {
        Ok(ratings.iter().map(|r| r.0).sum::<f64>() / ratings.len() as f64)
    }
}

/// Ranks in descending score order (1 = highest); tied scores share the
/// mean of the positions they span.
pub fn midranks_descending(scores: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // positions i+1 ..= j+1
        let mid = (i + j + 2) as f64 / 2.0;
        for &k in &order[i..=j] {
            ranks[k] = mid;
        }
        i = j + 1;
    }
    ranks
}

/// A midranked ordering of the ten values (1 = top). Ranks sum to 55.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedList(pub ValueMap<f64>);

impl RankedList {
    pub fn rank(&self, v: ValueId) -> f64 {
        self.0[v]
    }

    pub fn ranks(&self) -> &[f64; 10] {
        self.0.values()
    }
}

pub fn scores_to_ranking(profile: &ValueProfile) -> Result<RankedList> {
    if let Some((v, _)) = profile.iter().find(|(_, x)| !x.is_finite()) {
        return Err(AggregateError::NonFiniteScore(v));
    }
    let r = midranks_descending(profile.values());
    Ok(RankedList(ValueMap(r.try_into().expect("ten ranks"))))
}

/// Binomial upper tail `P(Bin(m, r) >= k)` summed in log space.
fn upper_tail(m: usize, k: usize, r: f64) -> f64 {
    if r >= 1.0 {
        return 1.0;
    }
    let (ln_r, ln_q) = (r.ln(), (-r).ln_1p());
    // ln C(m, l) built incrementally from ln C(m, 0) = 0
    let mut ln_c = 0.0;
    for l in 0..k {
        ln_c += ((m - l) as f64).ln() - ((l + 1) as f64).ln();
    }
    let mut terms = Vec::with_capacity(m - k + 1);
    for l in k..=m {
        terms.push(ln_c + l as f64 * ln_r + (m - l) as f64 * ln_q);
        if l < m {
            ln_c += ((m - l) as f64).ln() - ((l + 1) as f64).ln();
        }
    }
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    (max + sum.ln()).exp().min(1.0)
}

/// Order-statistic scores `beta_k` for k = 1..m, in sorted-rank order.
pub fn rra_beta_scores(normalized_ranks: &[f64]) -> Result<Vec<f64>> {
    if normalized_ranks.is_empty() {
        return Err(AggregateError::EmptyInput);
    }
    if let Some(&r) = normalized_ranks.iter().find(|r| !(**r > 0.0 && **r <= 1.0)) {
        return Err(AggregateError::RankOutOfRange(r));
    }
    let mut sorted = normalized_ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    Ok(sorted
        .iter()
        .enumerate()
        .map(|(i, &r)| upper_tail(m, i + 1, r))
        .collect())
}

/// RRA rho score: the minimum of the beta scores, in (0, 1].
pub fn rra_rho(normalized_ranks: &[f64]) -> Result<f64> {
    Ok(rra_beta_scores(normalized_ranks)?
        .into_iter()
        .fold(1.0, f64::min))
}

/// Bonferroni factor applied to rho.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Correction {
    /// Number of input lists.
    #[default]
    Lists,
    /// Number of ranked items.
    Items,
    Custom(f64),
}

impl Correction {
    pub fn factor(self, lists: usize, items: usize) -> f64 {
        match self {
            Correction::Lists => lists as f64,
            Correction::Items => items as f64,
            Correction::Custom(f) => f,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueStat {
    pub rho: f64,
    pub p: f64,
    /// 1-based position in the aggregated order.
    pub position: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregatedRanking {
    /// Number of input lists.
    pub m: usize,
    pub correction: Correction,
    pub correction_factor: f64,
    pub alpha: f64,
    pub values: ValueMap<ValueStat>,
    /// Values by ascending p, then rho, then canonical order.
    pub order: Vec<ValueId>,
    pub truncated_rank: ValueProfile,
}

impl AggregatedRanking {
    pub fn significant_count(&self, alpha: f64) -> usize {
        self.values.iter().filter(|(_, s)| s.p <= alpha).count()
    }

    /// True when no value is significant, i.e. every truncated rank ties.
    pub fn is_fully_tied(&self) -> bool {
        self.significant_count(self.alpha) == 0
    }
}

/// Aggregates `lists` with RRA over normalized ranks `midrank / 10`.
pub fn aggregate_song(lists: &[RankedList], correction: Correction, alpha: f64) -> Result<AggregatedRanking> {
    if lists.is_empty() {
        return Err(AggregateError::NoAnnotations);
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(AggregateError::InvalidAlpha(alpha));
    }
    for (i, l) in lists.iter().enumerate() {
        let sum: f64 = l.ranks().iter().sum();
        if (sum - 55.0).abs() > 1e-9 || l.ranks().iter().any(|r| !(1.0..=10.0).contains(r)) {
            return Err(AggregateError::InconsistentLists(format!(
                "list {i} is not a midrank vector over 10 values"
            )));
        }
    }
    let m = lists.len();
    let factor = correction.factor(m, ValueId::COUNT);
    if !(factor.is_finite() && factor > 0.0) {
        return Err(AggregateError::InvalidCorrection(factor));
    }
    let mut rho = [0.0; 10];
    for v in ValueId::ALL {
        let ranks: Vec<f64> = lists.iter().map(|l| l.rank(v) / ValueId::COUNT as f64).collect();
        rho[v.index()] = rra_rho(&ranks)?;
    }
    let p: [f64; 10] = std::array::from_fn(|i| (rho[i] * factor).min(1.0));
    let mut order: Vec<ValueId> = ValueId::ALL.to_vec();
    order.sort_by(|a, b| {
        let (i, j) = (a.index(), b.index());
        p[i].total_cmp(&p[j]).then(rho[i].total_cmp(&rho[j])).then(i.cmp(&j))
    });
    let mut values = ValueMap([ValueStat { rho: 0.0, p: 0.0, position: 0 }; 10]);
    for (pos, v) in order.iter().enumerate() {
        values[*v] = ValueStat {
            rho: rho[v.index()],
            p: p[v.index()],
            position: pos + 1,
        };
    }
    let mut out = AggregatedRanking {
        m,
        correction,
        correction_factor: factor,
        alpha,
        values,
        order,
        truncated_rank: ValueMap([0.0; 10]),
    };
    out.truncated_rank = truncate_ranking(&out, alpha);
    Ok(out)
}

/// Positions 1..k for the k values with `p <= alpha` (in aggregated order),
/// midrank `(k + 11) / 2` for the rest.
pub fn truncate_ranking(ranking: &AggregatedRanking, alpha: f64) -> ValueProfile {
    let k = ranking.significant_count(alpha);
    let tied = (k + 1 + ValueId::COUNT) as f64 / 2.0;
    let mut out = ValueMap([tied; 10]);
    let significant = ranking.order.iter().filter(|v| ranking.values[**v].p <= alpha);
    for (pos, v) in significant.enumerate() {
        out[*v] = (pos + 1) as f64;
    }
    out
}

/// Per-rater ranked lists for one song's annotations, ordered by rater id.
pub fn rater_lists(song_id: &str, annotations: &[&AnnotationRecord]) -> Result<Vec<RankedList>> {
    let mut by_rater: BTreeMap<&str, ValueMap<Option<f64>>> = BTreeMap::new();
    for a in annotations {
        by_rater.entry(a.rater_id.as_str()).or_default()[a.value] = Some(a.score);
    }
    by_rater
        .into_iter()
        .map(|(rater, scores)| {
            let mut profile = ValueMap([0.0; 10]);
            for (v, s) in scores.iter() {
                profile[v] = s.ok_or_else(|| AggregateError::IncompleteList {
                    song_id: song_id.to_string(),
                    rater_id: rater.to_string(),
                    missing: v,
                })?;
            }
            scores_to_ranking(&profile)
        })
        .collect()
}

/// Confidence-weighted mean score per value over one song's annotations.
pub fn weighted_mean_profile(annotations: &[&AnnotationRecord]) -> Result<ValueProfile> {
    let mut per_value: ValueMap<Vec<(f64, f64)>> = ValueMap::default();
    for a in annotations {
        per_value[a.value].push((a.score, a.confidence));
    }
    let mut out = ValueMap([0.0; 10]);
    for (v, rs) in per_value.iter() {
        out[v] = confidence_weighted_mean(rs)?;
    }
    Ok(out)
}

/// One song's entry in `aggregates.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SongAggregate {
    pub song_id: String,
    pub weighted_mean: ValueProfile,
    #[serde(flatten)]
    pub ranking: AggregatedRanking,
}

/// Contents of `aggregates.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregatesFile {
    pub alpha: f64,
    pub correction: Correction,
    pub songs: Vec<SongAggregate>,
}

impl AggregatesFile {
    pub fn by_song(&self) -> HashMap<&str, &SongAggregate> {
        self.songs.iter().map(|s| (s.song_id.as_str(), s)).collect()
    }
}

/// Groups annotations by song (first-appearance order) and aggregates each.
pub fn aggregate_annotations(
    annotations: &[AnnotationRecord],
    correction: Correction,
    alpha: f64,
    exec: Execution,
) -> Result<AggregatesFile> {
    if annotations.is_empty() {
        return Err(AggregateError::NoAnnotations);
    }
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut groups: Vec<(&str, Vec<&AnnotationRecord>)> = Vec::new();
    for a in annotations {
        let i = *index.entry(a.song_id.as_str()).or_insert_with(|| {
            groups.push((a.song_id.as_str(), Vec::new()));
            groups.len() - 1
        });
        groups[i].1.push(a);
    }
    let songs = exec.try_map(&groups, |(song_id, recs)| {
        let lists = rater_lists(song_id, recs)?;
        Ok(SongAggregate {
            song_id: song_id.to_string(),
            weighted_mean: weighted_mean_profile(recs)?,
            ranking: aggregate_song(&lists, correction, alpha)?,
        })
    })?;
    Ok(AggregatesFile {
        alpha,
        correction,
        songs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Binomial tail by direct summation with exact integer coefficients.
    fn tail_direct(m: usize, k: usize, r: f64) -> f64 {
        let mut c = 1.0f64;
        let mut total = 0.0;
        for l in 0..=m {
            if l >= k {
                total += c * r.powi(l as i32) * (1.0 - r).powi((m - l) as i32);
            }
            c = c * (m - l) as f64 / (l + 1) as f64;
        }
        total
    }

    fn list_from_order(order: &[ValueId]) -> RankedList {
        let mut r = ValueMap([0.0; 10]);
        for (i, v) in order.iter().enumerate() {
            r[*v] = (i + 1) as f64;
        }
        RankedList(r)
    }

    #[test]
    fn weighted_mean_examples() {
        assert_eq!(confidence_weighted_mean(&[(50.0, 100.0), (-50.0, 0.0)]).unwrap(), 50.0);
        assert_eq!(confidence_weighted_mean(&[(10.0, 30.0), (20.0, 30.0)]).unwrap(), 15.0);
        assert_eq!(
            confidence_weighted_mean(&[(10.0, 50.0), (20.0, 100.0), (40.0, 50.0)]).unwrap(),
            22.5
        );
        assert_eq!(confidence_weighted_mean(&[(10.0, 0.0), (20.0, 0.0)]).unwrap(), 15.0);
        assert_eq!(confidence_weighted_mean(&[]), Err(AggregateError::NoAnnotations));
    }

    #[test]
    fn ranking_examples() {
        let desc = ValueMap(std::array::from_fn(|i| 10.0 - i as f64));
        let r = scores_to_ranking(&desc).unwrap();
        assert_eq!(r.ranks(), &std::array::from_fn(|i| (i + 1) as f64));
        let flat = scores_to_ranking(&ValueMap([3.0; 10])).unwrap();
        assert!(flat.ranks().iter().all(|&x| x == 5.5));
        let mut s = [9.0, 9.0, 7.0, 6.0, 5.0, 4.0, 3.0, 2.0, 1.0, 0.0];
        let r = scores_to_ranking(&ValueMap(s)).unwrap();
        assert_eq!(r.ranks()[..3], [1.5, 1.5, 3.0]);
        s[4] = f64::NAN;
        assert_eq!(
            scores_to_ranking(&ValueMap(s)),
            Err(AggregateError::NonFiniteScore(ValueId::SelfDirection))
        );
    }

    #[test]
    fn rho_examples() {
        assert!((rra_rho(&[0.3]).unwrap() - 0.3).abs() < 1e-15);
        let b = rra_beta_scores(&[0.5, 0.5]).unwrap();
        assert!((b[0] - 0.75).abs() < 1e-15 && (b[1] - 0.25).abs() < 1e-15);
        assert!((rra_rho(&[0.5, 0.5]).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(rra_rho(&[1.0, 1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(rra_rho(&[]), Err(AggregateError::EmptyInput));
        assert_eq!(rra_rho(&[0.0]), Err(AggregateError::RankOutOfRange(0.0)));
        assert_eq!(rra_rho(&[1.5]), Err(AggregateError::RankOutOfRange(1.5)));
    }

    #[test]
    fn rho_of_25_top_ranks() {
        // Oracle: every beta_k summed directly; the minimum is
        // at k = 25 where beta = 0.1^25.
        let r = vec![0.1; 25];
        let oracle: Vec<f64> = (1..=25).map(|k| tail_direct(25, k, 0.1)).collect();
        let argmin = oracle
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(argmin, 24);
        let rho = rra_rho(&r).unwrap();
        assert!((rho / 1e-25 - 1.0).abs() < 1e-10, "{rho}");
        for (got, want) in rra_beta_scores(&r).unwrap().iter().zip(&oracle) {
            assert!((got - want).abs() <= 1e-12 * want.max(1e-300) + 1e-15);
        }
    }

    #[test]
    fn single_list_is_identity() {
        let order = [
            ValueId::Hedonism,
            ValueId::Power,
            ValueId::Security,
            ValueId::Tradition,
            ValueId::Stimulation,
            ValueId::Achievement,
            ValueId::Benevolence,
            ValueId::Universalism,
            ValueId::Conformity,
            ValueId::SelfDirection,
        ];
        let agg = aggregate_song(&[list_from_order(&order)], Correction::Lists, 0.05).unwrap();
        assert_eq!(agg.order, order);
        for (i, v) in order.iter().enumerate() {
            assert!((agg.values[*v].rho - (i + 1) as f64 / 10.0).abs() < 1e-15);
        }
        assert_eq!(agg.correction_factor, 1.0);
    }

    #[test]
    fn identical_lists_make_top_significant() {
        let order = ValueId::ALL;
        let lists = vec![list_from_order(&order); 25];
        let agg = aggregate_song(&lists, Correction::Lists, 0.05).unwrap();
        let top = agg.values[ValueId::Power];
        assert_eq!(top.position, 1);
        assert!((top.p / (25.0 * 1e-25) - 1.0).abs() < 1e-9);
        assert_eq!(agg.truncated_rank[ValueId::Power], 1.0);
        let items = aggregate_song(&lists, Correction::Items, 0.05).unwrap();
        assert_eq!(items.correction_factor, 10.0);
    }

    #[test]
    fn cyclic_shifts_are_fully_tied() {
        let lists: Vec<_> = (0..10)
            .map(|s| {
                let order: Vec<ValueId> = (0..10).map(|i| ValueId::ALL[(i + s) % 10]).collect();
                list_from_order(&order)
            })
            .collect();
        let agg = aggregate_song(&lists, Correction::Lists, 0.05).unwrap();
        let rho0 = agg.values[ValueId::Power].rho;
        for (_, s) in agg.values.iter() {
            assert_eq!(s.rho, rho0);
            assert_eq!(s.p, 1.0);
        }
        assert!(agg.truncated_rank.values().iter().all(|&r| r == 5.5));
        assert!(agg.is_fully_tied());
        // equal p and rho: canonical order
        assert_eq!(agg.order, ValueId::ALL);
    }

    fn ranking_with_p(ps: [f64; 10]) -> AggregatedRanking {
        let mut order = ValueId::ALL.to_vec();
        order.sort_by(|a, b| ps[a.index()].total_cmp(&ps[b.index()]));
        let mut values = ValueMap([ValueStat { rho: 0.0, p: 0.0, position: 0 }; 10]);
        for (i, v) in order.iter().enumerate() {
            values[*v] = ValueStat { rho: ps[v.index()], p: ps[v.index()], position: i + 1 };
        }
        AggregatedRanking {
            m: 1,
            correction: Correction::Lists,
            correction_factor: 1.0,
            alpha: 0.05,
            values,
            order,
            truncated_rank: ValueMap([0.0; 10]),
        }
    }

    #[test]
    fn truncation_examples() {
        let all = ranking_with_p(std::array::from_fn(|i| 0.001 * (i + 1) as f64));
        assert_eq!(truncate_ranking(&all, 0.05).values(), &std::array::from_fn(|i| (i + 1) as f64));
        let none = ranking_with_p([0.5; 10]);
        assert!(truncate_ranking(&none, 0.05).values().iter().all(|&r| r == 5.5));
        let mut ps = [0.9; 10];
        ps[3] = 0.01;
        ps[7] = 0.02;
        let two = truncate_ranking(&ranking_with_p(ps), 0.05);
        assert_eq!(two[ValueId::Stimulation], 1.0);
        assert_eq!(two[ValueId::Tradition], 2.0);
        assert_eq!(two.values().iter().filter(|&&r| r == 6.5).count(), 8);
    }

    #[test]
    fn incomplete_rater_rejected() {
        let recs: Vec<AnnotationRecord> = ValueId::ALL[..9]
            .iter()
            .map(|v| AnnotationRecord {
                rater_id: "r".into(),
                song_id: "s".into(),
                value: *v,
                score: 1.0,
                confidence: 50.0,
            })
            .collect();
        let refs: Vec<_> = recs.iter().collect();
        assert!(matches!(
            rater_lists("s", &refs),
            Err(AggregateError::IncompleteList { missing: ValueId::Security, .. })
        ));
        assert_eq!(
            aggregate_annotations(&[], Correction::Lists, 0.05, Execution::Sequential),
            Err(AggregateError::NoAnnotations)
        );
    }

    fn permutation() -> impl Strategy<Value = Vec<ValueId>> {
        Just(ValueId::ALL.to_vec()).prop_shuffle()
    }

    proptest! {
        #[test]
        fn rho_in_unit_interval_and_monotone(
            ranks in proptest::collection::vec(0.01f64..=1.0, 1..30),
            idx in 0usize..30,
            shrink in 0.1f64..1.0,
        ) {
            let rho = rra_rho(&ranks).unwrap();
            prop_assert!(rho > 0.0 && rho <= 1.0);
            let mut lower = ranks.clone();
            let i = idx % lower.len();
            lower[i] *= shrink;
            prop_assert!(rra_rho(&lower).unwrap() <= rho + 1e-15);
        }

        #[test]
        fn log_space_matches_direct_sum(ranks in proptest::collection::vec(0.01f64..=1.0, 1..12)) {
            let mut s = ranks.clone();
            s.sort_by(f64::total_cmp);
            let betas = rra_beta_scores(&ranks).unwrap();
            for (k, (&r, b)) in s.iter().zip(&betas).enumerate() {
                prop_assert!((b - tail_direct(s.len(), k + 1, r)).abs() < 1e-12);
            }
        }

        #[test]
        fn truncated_ranks_sum_to_55(lists in proptest::collection::vec(permutation(), 1..30), alpha in 0.0f64..1.0) {
            let lists: Vec<_> = lists.iter().map(|o| list_from_order(o)).collect();
            let agg = aggregate_song(&lists, Correction::Lists, alpha).unwrap();
            prop_assert!((agg.truncated_rank.values().iter().sum::<f64>() - 55.0).abs() < 1e-12);
            // order sorted by p
            for w in agg.order.windows(2) {
                prop_assert!(agg.values[w[0]].p <= agg.values[w[1]].p);
            }
        }

        #[test]
        fn relabeling_permutes_output(lists in proptest::collection::vec(permutation(), 1..15), relabel in permutation()) {
            let base: Vec<_> = lists.iter().map(|o| list_from_order(o)).collect();
            let mapped: Vec<_> = lists
                .iter()
                .map(|o| list_from_order(&o.iter().map(|v| relabel[v.index()]).collect::<Vec<_>>()))
                .collect();
            let a = aggregate_song(&base, Correction::Lists, 0.05).unwrap();
            let b = aggregate_song(&mapped, Correction::Lists, 0.05).unwrap();
            for v in ValueId::ALL {
                prop_assert_eq!(a.values[v].rho, b.values[relabel[v.index()]].rho);
                prop_assert_eq!(a.values[v].p, b.values[relabel[v.index()]].p);
            }
        }

        #[test]
        fn midranks_sum_and_bounds(scores in proptest::collection::vec(-3i32..3, 10)) {
            let s: Vec<f64> = scores.iter().map(|&x| x as f64).collect();
            let r = midranks_descending(&s);
            prop_assert!((r.iter().sum::<f64>() - 55.0).abs() < 1e-12);
            prop_assert!(r.iter().all(|x| (1.0..=10.0).contains(x)));
        }
    }
}
