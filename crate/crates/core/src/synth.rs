//! Seeded synthetic data for tests, benchmarks and demonstrations.
//!
//! Two rating generators are provided:
//!
//! - [`signal_noise_ratings`]: every song has a true mean drawn from
//!   `N(0, mean_sd)` and each rater adds `N(0, noise_sd)` noise.
//! - [`planted_hierarchy`]: every song gets a random order of the ten
//!   values with fixed means per position ([`PLANTED_MEANS`]); raters add
//!   `N(0, noise_sd)` noise.
//!
//! Scores are clamped to the rating scale [-100, 100]; confidences are
//! uniform on [50, 100].

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::ingest::{AnnotationRecord, EmbeddingTable, SongRecord, ValueId, ValueMap, ValueProfile};
use crate::reliability::SongRatings;
use crate::rng::task_rng;

/// Planted mean score by position in a song's hierarchy: the top three are
/// 40 points apart and 40 above the rest.
pub const PLANTED_MEANS: [f64; 10] = [80.0, 40.0, 0.0, -40.0, -45.0, -50.0, -55.0, -60.0, -65.0, -70.0];

pub fn song_id(i: usize) -> String {
    format!("s{i:04}")
}

pub fn rater_id(j: usize) -> String {
    format!("r{j:03}")
}

fn clamp_score(x: f64) -> f64 {
    x.clamp(-100.0, 100.0)
}

/// Per-song ratings of one value under the signal+noise model.
pub fn signal_noise_ratings(songs: usize, raters: usize, mean_sd: f64, noise_sd: f64, seed: u64) -> Vec<SongRatings> {
    let means = Normal::new(0.0, mean_sd).expect("finite sd");
    let noise = Normal::new(0.0, noise_sd).expect("finite sd");
    (0..songs)
        .map(|i| {
            let mut rng = task_rng(seed, "signal_noise", i as u64);
            let mu = means.sample(&mut rng);
            SongRatings {
                song_id: song_id(i),
                scores: (0..raters).map(|_| mu + noise.sample(&mut rng)).collect(),
            }
        })
        .collect()
}

/// Annotation records for all ten values under the signal+noise model.
pub fn signal_noise_annotations(songs: usize, raters: usize, mean_sd: f64, noise_sd: f64, seed: u64) -> Vec<AnnotationRecord> {
    let means = Normal::new(0.0, mean_sd).expect("finite sd");
    let noise = Normal::new(0.0, noise_sd).expect("finite sd");
    let mut out = Vec::with_capacity(songs * raters * ValueId::COUNT);
    for i in 0..songs {
        let mut rng = task_rng(seed, "signal_noise_annotations", i as u64);
        let mu: Vec<f64> = ValueId::ALL.iter().map(|_| means.sample(&mut rng)).collect();
        for j in 0..raters {
            for v in ValueId::ALL {
                out.push(AnnotationRecord {
                    rater_id: rater_id(j),
                    song_id: song_id(i),
                    value: v,
                    score: clamp_score(mu[v.index()] + noise.sample(&mut rng)),
                    confidence: rng.random_range(50.0..=100.0),
                });
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct PlantedCorpus {
    pub annotations: Vec<AnnotationRecord>,
    /// True mean profile per song, in song order.
    pub means: Vec<(String, ValueProfile)>,
}

impl PlantedCorpus {
    /// The value planted at the top of each song's hierarchy.
    pub fn top_values(&self) -> Vec<ValueId> {
        self.means
            .iter()
            .map(|(_, m)| {
                ValueId::ALL
                    .into_iter()
                    .max_by(|a, b| m[*a].total_cmp(&m[*b]))
                    .expect("ten values")
            })
            .collect()
    }
}

/// Songs with a planted value order; see the module docs.
pub fn planted_hierarchy(songs: usize, raters: usize, noise_sd: f64, seed: u64) -> PlantedCorpus {
    let noise = Normal::new(0.0, noise_sd).expect("finite sd");
    let mut annotations = Vec::with_capacity(songs * raters * ValueId::COUNT);
    let mut means = Vec::with_capacity(songs);
    for i in 0..songs {
        let mut rng = task_rng(seed, "planted_hierarchy", i as u64);
        let mut order = ValueId::ALL;
        order.shuffle(&mut rng);
        let mut m = [0.0; 10];
        for (pos, v) in order.iter().enumerate() {
            m[v.index()] = PLANTED_MEANS[pos];
        }
        for j in 0..raters {
            for v in ValueId::ALL {
                annotations.push(AnnotationRecord {
                    rater_id: rater_id(j),
                    song_id: song_id(i),
                    value: v,
                    score: clamp_score(m[v.index()] + noise.sample(&mut rng)),
                    confidence: rng.random_range(50.0..=100.0),
                });
            }
        }
        means.push((song_id(i), ValueMap(m)));
    }
    PlantedCorpus { annotations, means }
}

/// Three lexicon words per value (the first is a `*` prefix pattern).
pub const LEXICON_WORDS: [[&str; 3]; 10] = [
    ["power*", "money", "control"],
    ["achiev*", "success", "goal"],
    ["pleasur*", "party", "fun"],
    ["adventur*", "thrill", "wild"],
    ["freedom*", "choose", "create"],
    ["justic*", "nature", "equal"],
    ["help*", "friend", "care"],
    ["tradition*", "faith", "pray"],
    ["obey*", "polite", "rules"],
    ["safe*", "home", "protect"],
];

const FILLER: [&str; 24] = [
    "the", "and", "you", "i", "a", "to", "me", "my", "in", "we", "it", "is", "night", "road", "heart", "rain",
    "light", "walk", "time", "sky", "sing", "dream", "city", "fire",
];

/// `(value, pattern)` pairs of the demonstration lexicon.
pub fn lexicon_pairs() -> Vec<(ValueId, &'static str)> {
    ValueId::ALL
        .iter()
        .flat_map(|&v| LEXICON_WORDS[v.index()].iter().map(move |&w| (v, w)))
        .collect()
}

/// Concrete words (prefix patterns completed) used in generated lyrics.
fn lyric_words(v: ValueId) -> [String; 3] {
    LEXICON_WORDS[v.index()].map(|w| w.strip_suffix('*').map_or(w.to_string(), |p| format!("{p}ful")))
}

/// A catalog of `n` songs with random strata and lyrics mixing filler
/// words with lexicon words of two favored values per song.
pub fn catalog(n: usize, seed: u64) -> Vec<SongRecord> {
    let pop = rand_distr::LogNormal::new(3.0, 1.0).expect("valid lognormal");
    (0..n)
        .map(|i| {
            let mut rng = task_rng(seed, "synthetic_catalog", i as u64);
            let favored = [ValueId::ALL[rng.random_range(0..10)], ValueId::ALL[rng.random_range(0..10)]];
            let len = rng.random_range(40..80);
            let words: Vec<String> = (0..len)
                .map(|_| {
                    if rng.random_bool(0.2) {
                        let v = favored[rng.random_range(0..2)];
                        lyric_words(v)[rng.random_range(0..3)].clone()
                    } else {
                        FILLER[rng.random_range(0..FILLER.len())].to_string()
                    }
                })
                .collect();
            SongRecord {
                song_id: song_id(i),
                title: format!("Song {i}"),
                artist: format!("Artist {}", i % 37),
                release_year: rng.random_range(SongRecord::MIN_YEAR..SongRecord::END_YEAR),
                popularity: pop.sample(&mut rng),
                genre_topic: rng.random_range(0..SongRecord::GENRE_TOPICS),
                lyric_topic: rng.random_range(0..SongRecord::LYRIC_TOPICS),
                lyrics_text: words.join(" "),
            }
        })
        .collect()
}

/// Every token a generated lyric can contain.
pub fn vocabulary() -> Vec<String> {
    let mut v: Vec<String> = FILLER.iter().map(|s| s.to_string()).collect();
    for val in ValueId::ALL {
        v.extend(lyric_words(val));
    }
    v
}

/// Random Gaussian vectors for [`vocabulary`]; value words share a
/// per-value direction so centroids are informative.
pub fn embeddings(name: &str, dim: usize, seed: u64) -> EmbeddingTable {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut rng = task_rng(seed, "synthetic_embeddings", 0);
    let axes: Vec<Vec<f64>> = (0..10).map(|_| (0..dim).map(|_| normal.sample(&mut rng)).collect()).collect();
    let mut entries = Vec::new();
    for w in FILLER {
        entries.push((w.to_string(), (0..dim).map(|_| normal.sample(&mut rng)).collect()));
    }
    for v in ValueId::ALL {
        for w in lyric_words(v) {
            let e = axes[v.index()].iter().map(|a| 2.0 * a + normal.sample(&mut rng)).collect();
            entries.push((w, e));
        }
    }
    EmbeddingTable::from_entries(name, entries).expect("non-empty table")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{tokenize, ValueLexicon};

    #[test]
    fn generators_are_seeded() {
        assert_eq!(planted_hierarchy(3, 4, 20.0, 1).annotations, planted_hierarchy(3, 4, 20.0, 1).annotations);
        assert_eq!(catalog(5, 2), catalog(5, 2));
        let p = planted_hierarchy(2, 3, 20.0, 1);
        assert_eq!(p.annotations.len(), 60);
        assert!(p.annotations.iter().all(|a| a.score.abs() <= 100.0));
    }

    #[test]
    fn lyrics_are_covered_by_vocabulary_and_lexicon() {
        let vocab: std::collections::HashSet<String> = vocabulary().into_iter().collect();
        let lex = ValueLexicon::from_pairs(lexicon_pairs()).unwrap();
        let table = embeddings("m", 8, 3);
        for s in catalog(20, 4) {
            assert!(tokenize(&s.lyrics_text).iter().all(|t| vocab.contains(t) && table.contains(t)));
        }
        for v in ValueId::ALL {
            assert!(lyric_words(v).iter().all(|w| lex.matches(v, w)));
        }
    }
}
