use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use super::model::{AnnotationRecord, SongRecord, ValueId};
use super::{IngestError, Result};

const SONG_FIELDS: [&str; 7] = [
    "song_id",
    "title",
    "artist",
    "release_year",
    "popularity",
    "genre_topic",
    "lyric_topic",
];

const ANNOTATION_FIELDS: [&str; 5] = ["rater_id", "song_id", "value", "score", "confidence"];

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| IngestError::io(path, e))
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader)
}

fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

fn parse_field<T: std::str::FromStr>(record: &csv::StringRecord, idx: usize, name: &str) -> Result<T> {
    let raw = record.get(idx).unwrap_or("");
    raw.parse()
        .map_err(|_| IngestError::malformed(line_of(record), name, format!("cannot parse `{raw}`")))
}

enum LyricsColumn {
    Inline,
    Path(Option<PathBuf>),
}

/// Loads `songs.csv`. The eighth column is either `lyrics` (inline text) or
/// `lyrics_path` (a file path, relative paths resolved against the catalog's
/// directory).
pub fn load_song_catalog(path: impl AsRef<Path>) -> Result<Vec<SongRecord>> {
    let path = path.as_ref();
    let base = path.parent().map(Path::to_path_buf);
    read_song_catalog_with_base(open(path)?, base)
}

/// Reads a song catalog from any reader. `lyrics_path` entries are resolved
/// relative to the working directory.
pub fn read_song_catalog<R: Read>(reader: R) -> Result<Vec<SongRecord>> {
    read_song_catalog_with_base(reader, None)
}

fn read_song_catalog_with_base<R: Read>(reader: R, base: Option<PathBuf>) -> Result<Vec<SongRecord>> {
    let mut rdr = csv_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let lyrics = match headers.get(7).map(String::as_str) {
        Some("lyrics") => LyricsColumn::Inline,
        Some("lyrics_path") => LyricsColumn::Path(base),
        _ => {
            return Err(IngestError::Header {
                expected: format!("{},lyrics|lyrics_path", SONG_FIELDS.join(",")),
                found: headers,
            })
        }
    };
    if headers.len() != 8 || headers[..7] != SONG_FIELDS {
        return Err(IngestError::Header {
            expected: format!("{},lyrics|lyrics_path", SONG_FIELDS.join(",")),
            found: headers,
        });
    }

    let mut seen = HashSet::new();
    let mut songs = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = line_of(&rec);
        let song_id = rec.get(0).unwrap_or("").to_string();
        if song_id.is_empty() {
            return Err(IngestError::malformed(line, "song_id", "empty"));
        }
        let release_year: i32 = parse_field(&rec, 3, "release_year")?;
        if !(SongRecord::MIN_YEAR..SongRecord::END_YEAR).contains(&release_year) {
            return Err(IngestError::malformed(
                line,
                "release_year",
                format!("{release_year} outside [1890, 2030)"),
            ));
        }
        let popularity: f64 = parse_field(&rec, 4, "popularity")?;
        if !(popularity.is_finite() && popularity >= 0.0) {
            return Err(IngestError::malformed(line, "popularity", "must be finite and >= 0"));
        }
        let genre_topic: u32 = parse_field(&rec, 5, "genre_topic")?;
        if genre_topic >= SongRecord::GENRE_TOPICS {
            return Err(IngestError::malformed(line, "genre_topic", "must be < 25"));
        }
        let lyric_topic: u32 = parse_field(&rec, 6, "lyric_topic")?;
        if lyric_topic >= SongRecord::LYRIC_TOPICS {
            return Err(IngestError::malformed(line, "lyric_topic", "must be < 9"));
        }
        let raw = rec.get(7).unwrap_or("");
        let lyrics_text = match &lyrics {
            LyricsColumn::Inline => raw.to_string(),
            LyricsColumn::Path(base) => {
                let p = Path::new(raw);
                let full = match base {
                    Some(b) if p.is_relative() => b.join(p),
                    _ => p.to_path_buf(),
                };
                std::fs::read_to_string(&full).map_err(|e| IngestError::io(full, e))?
            }
        };
        if !seen.insert(song_id.clone()) {
            return Err(IngestError::DuplicateSongId { line, song_id });
        }
        songs.push(SongRecord {
            song_id,
            title: rec.get(1).unwrap_or("").to_string(),
            artist: rec.get(2).unwrap_or("").to_string(),
            release_year,
            popularity,
            genre_topic,
            lyric_topic,
            lyrics_text,
        });
    }
    Ok(songs)
}

/// Writes a catalog with inline lyrics; the output reloads losslessly.
pub fn write_song_catalog<W: Write>(writer: W, songs: &[SongRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = SONG_FIELDS.to_vec();
    header.push("lyrics");
    w.write_record(&header)?;
    for s in songs {
        w.write_record([
            s.song_id.clone(),
            s.title.clone(),
            s.artist.clone(),
            s.release_year.to_string(),
            s.popularity.to_string(),
            s.genre_topic.to_string(),
            s.lyric_topic.to_string(),
            s.lyrics_text.clone(),
        ])?;
    }
    w.flush().map_err(|e| IngestError::io("<writer>", e))?;
    Ok(())
}

/// Loads a long-format `annotations.csv`
/// (`rater_id,song_id,value,score,confidence`).
pub fn load_annotations(path: impl AsRef<Path>) -> Result<Vec<AnnotationRecord>> {
    read_annotations(open(path.as_ref())?)
}

pub fn read_annotations<R: Read>(reader: R) -> Result<Vec<AnnotationRecord>> {
    let mut rdr = csv_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if headers != ANNOTATION_FIELDS {
        return Err(IngestError::Header {
            expected: ANNOTATION_FIELDS.join(","),
            found: headers,
        });
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = line_of(&rec);
        let rater_id = rec.get(0).unwrap_or("").to_string();
        let song_id = rec.get(1).unwrap_or("").to_string();
        if rater_id.is_empty() {
            return Err(IngestError::malformed(line, "rater_id", "empty"));
        }
        if song_id.is_empty() {
            return Err(IngestError::malformed(line, "song_id", "empty"));
        }
        let value: ValueId = rec
            .get(2)
            .unwrap_or("")
            .parse()
            .map_err(|e: super::model::UnknownValue| IngestError::malformed(line, "value", e.to_string()))?;
        let score: f64 = parse_field(&rec, 3, "score")?;
        if !(-100.0..=100.0).contains(&score) {
            return Err(IngestError::ScoreOutOfRange { line, score });
        }
        let confidence: f64 = parse_field(&rec, 4, "confidence")?;
        if !(0.0..=100.0).contains(&confidence) {
            return Err(IngestError::ConfidenceOutOfRange { line, confidence });
        }
        if !seen.insert((rater_id.clone(), song_id.clone(), value)) {
            return Err(IngestError::DuplicateTriple {
                line,
                rater_id,
                song_id,
                value,
            });
        }
        out.push(AnnotationRecord {
            rater_id,
            song_id,
            value,
            score,
            confidence,
        });
    }
    Ok(out)
}

pub fn write_annotations<W: Write>(writer: W, records: &[AnnotationRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(ANNOTATION_FIELDS)?;
    for a in records {
        w.write_record([
            a.rater_id.clone(),
            a.song_id.clone(),
            a.value.name().to_string(),
            a.score.to_string(),
            a.confidence.to_string(),
        ])?;
    }
    w.flush().map_err(|e| IngestError::io("<writer>", e))?;
    Ok(())
}
