//! Heuristic lyric screening. Verdicts are advisory; final inclusion is a
//! human decision.

use std::collections::HashSet;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::embeddings::EmbeddingTable;
use super::model::SongRecord;
use super::tokenize::tokenize;

const STOPWORDS: &str = include_str!("stopwords.txt");

/// The shipped English stopword list (one word per line in
/// `stopwords.txt`).
pub fn stopwords() -> &'static HashSet<String> {
    static SET: OnceLock<HashSet<String>> = OnceLock::new();
    SET.get_or_init(|| {
        STOPWORDS
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_string)
            .collect()
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScreeningConfig {
    pub min_tokens: usize,
    /// Below this type-token ratio the lyric is a repetition.
    pub min_type_token_ratio: f64,
    /// Below this stopword-hit ratio the lyric is likely not English.
    pub min_stopword_ratio: f64,
    /// Above this out-of-vocabulary ratio (vocabulary supplied) the lyric is
    /// onomatopoeia.
    pub max_oov_ratio: f64,
}

impl Default for ScreeningConfig {
    fn default() -> Self {
        ScreeningConfig {
            min_tokens: 20,
            min_type_token_ratio: 0.10,
            min_stopword_ratio: 0.05,
            max_oov_ratio: 0.8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RejectReason {
    NotEnglish,
    Onomatopoeia,
    Repetition,
    TooShort,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Reject { reason: RejectReason },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub token_count: usize,
    pub type_token_ratio: f64,
    pub stopword_ratio: f64,
    /// Only computed when a vocabulary is supplied.
    pub oov_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScreeningReport {
    pub song_id: String,
    #[serde(flatten)]
    pub verdict: Verdict,
    pub diagnostics: Diagnostics,
}

/// Screens one lyric. Checks run in the order TooShort, Repetition,
/// NotEnglish, Onomatopoeia; the first failure is the reason.
pub fn screen_lyric(
    song: &SongRecord,
    config: &ScreeningConfig,
    stopwords: &HashSet<String>,
    vocab: Option<&EmbeddingTable>,
) -> ScreeningReport {
    let tokens = tokenize(&song.lyrics_text);
    let n = tokens.len();
    let ratio = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };

    let types: HashSet<&str> = tokens.iter().map(String::as_str).collect();
    let stop_hits = tokens.iter().filter(|t| stopwords.contains(t.as_str())).count();
    let oov = vocab.map(|v| ratio(tokens.iter().filter(|t| !v.contains(t)).count()));
    let diagnostics = Diagnostics {
        token_count: n,
        type_token_ratio: ratio(types.len()),
        stopword_ratio: ratio(stop_hits),
        oov_ratio: oov,
    };

    let reason = if n < config.min_tokens || n == 0 {
        Some(RejectReason::TooShort)
    } else if diagnostics.type_token_ratio < config.min_type_token_ratio {
        Some(RejectReason::Repetition)
    } else if diagnostics.stopword_ratio < config.min_stopword_ratio {
        Some(RejectReason::NotEnglish)
    } else if oov.is_some_and(|r| r > config.max_oov_ratio) {
        Some(RejectReason::Onomatopoeia)
    } else {
        None
    };

    ScreeningReport {
        song_id: song.song_id.clone(),
        verdict: reason.map_or(Verdict::Pass, |reason| Verdict::Reject { reason }),
        diagnostics,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn song(text: &str) -> SongRecord {
        SongRecord {
            song_id: "s".into(),
            title: String::new(),
            artist: String::new(),
            release_year: 2000,
            popularity: 1.0,
            genre_topic: 0,
            lyric_topic: 0,
            lyrics_text: text.into(),
        }
    }

    fn verdict(text: &str) -> Verdict {
        screen_lyric(&song(text), &ScreeningConfig::default(), stopwords(), None).verdict
    }

    const VERSE: &str = "The city lights are burning bright tonight\n\
        I walk alone along the empty street\n\
        Dreams of gold and silver fill my restless mind\n\
        Hope will carry me beyond the river\n\
        Tomorrow brings a brand new morning sun\n\
        And so on";

    #[test]
    fn short_lyric_rejected() {
        assert_eq!(
            verdict("la la la la la la"),
            Verdict::Reject { reason: RejectReason::TooShort }
        );
        assert_eq!(verdict(""), Verdict::Reject { reason: RejectReason::TooShort });
    }

    #[test]
    fn repetition_rejected() {
        let text = vec!["la"; 40].join(" ");
        let r = screen_lyric(&song(&text), &ScreeningConfig::default(), stopwords(), None);
        assert_eq!(r.diagnostics.type_token_ratio, 0.025);
        assert_eq!(r.verdict, Verdict::Reject { reason: RejectReason::Repetition });
    }

    #[test]
    fn english_verse_passes() {
        // Hand count: the, are / i, the / of, and, my / will, me, the / a / and, so, on
        let hits = ["the", "are", "i", "the", "of", "and", "my", "will", "me", "the", "a", "and", "so", "on"];
        assert_eq!(hits.len(), 14);
        let r = screen_lyric(&song(VERSE), &ScreeningConfig::default(), stopwords(), None);
        assert_eq!(r.diagnostics.token_count, 40);
        assert_eq!(r.diagnostics.stopword_ratio, 14.0 / 40.0);
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.diagnostics.oov_ratio, None);
    }

    #[test]
    fn non_english_and_onomatopoeia() {
        let foreign = "luz de la ciudad arde brillante esta noche camino solo por calle vacia \
                       sueños oro plata llenan mente inquieta esperanza llevará más allá río mañana";
        assert_eq!(verdict(foreign), Verdict::Reject { reason: RejectReason::NotEnglish });

        let vocab = EmbeddingTable::from_entries("v", [("the".to_string(), vec![1.0])]).unwrap();
        let sounds = "the ooh aah woo yeah brr bam pow zap zing boing whoosh the \
                      klang bong ding dong tick tock buzz hiss fizz";
        let r = screen_lyric(&song(sounds), &ScreeningConfig::default(), stopwords(), Some(&vocab));
        assert_eq!(r.verdict, Verdict::Reject { reason: RejectReason::Onomatopoeia });
        assert!(r.diagnostics.oov_ratio.unwrap() > 0.8);
    }

    #[test]
    fn pure_and_ordered() {
        let a = screen_lyric(&song(VERSE), &ScreeningConfig::default(), stopwords(), None);
        let b = screen_lyric(&song(VERSE), &ScreeningConfig::default(), stopwords(), None);
        assert_eq!(a, b);
        // Short and repetitive: TooShort wins.
        assert_eq!(verdict("la la la"), Verdict::Reject { reason: RejectReason::TooShort });
    }

    #[test]
    fn report_json_shape() {
        let r = screen_lyric(&song("la"), &ScreeningConfig::default(), stopwords(), None);
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["verdict"], "reject");
        assert_eq!(v["reason"], "TooShort");
    }
}
