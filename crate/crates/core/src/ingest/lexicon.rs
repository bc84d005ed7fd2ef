use std::io::Read;
use std::path::Path;

use super::model::{ValueId, ValueMap};
use super::{IngestError, Result};

/// A lowercase lexicon entry; a trailing `*` matches any token with that
/// prefix.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pattern {
    Exact(String),
    Prefix(String),
}

impl Pattern {
    /// Parses and lowercases a pattern; `None` when nothing but `*` or
    /// whitespace remains.
    pub fn parse(raw: &str) -> Option<Pattern> {
        let p = raw.trim().to_lowercase();
        match p.strip_suffix('*') {
            Some(prefix) if !prefix.is_empty() => Some(Pattern::Prefix(prefix.to_string())),
            Some(_) => None,
            None if p.is_empty() => None,
            None => Some(Pattern::Exact(p)),
        }
    }

    pub fn matches(&self, token: &str) -> bool {
        match self {
            Pattern::Exact(w) => w == token,
            Pattern::Prefix(p) => token.starts_with(p.as_str()),
        }
    }
}

impl std::fmt::Display for Pattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Pattern::Exact(w) => f.write_str(w),
            Pattern::Prefix(p) => write!(f, "{p}*"),
        }
    }
}

/// Word patterns per value. Every value has at least one pattern.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueLexicon {
    patterns: ValueMap<Vec<Pattern>>,
}

impl ValueLexicon {
    /// Builds a lexicon, sorting and deduplicating each value's patterns.
    pub fn new(mut patterns: ValueMap<Vec<Pattern>>) -> Result<Self> {
        for v in ValueId::ALL {
            let ps = &mut patterns[v];
            ps.sort();
            ps.dedup();
            if ps.is_empty() {
                return Err(IngestError::MissingValueCategory(v));
            }
        }
        Ok(ValueLexicon { patterns })
    }

    /// Convenience constructor from `(value, pattern)` string pairs.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (ValueId, &'a str)>) -> Result<Self> {
        let mut map: ValueMap<Vec<Pattern>> = ValueMap::default();
        for (v, raw) in pairs {
            map[v].push(Pattern::parse(raw).ok_or(IngestError::EmptyPattern { line: 0 })?);
        }
        Self::new(map)
    }

    pub fn patterns(&self, v: ValueId) -> &[Pattern] {
        &self.patterns[v]
    }

    /// True when `token` matches any pattern of `v`.
    pub fn matches(&self, v: ValueId, token: &str) -> bool {
        self.patterns[v].iter().any(|p| p.matches(token))
    }
}

/// Loads `lexicon.csv` (`value,pattern`).
pub fn load_value_lexicon(path: impl AsRef<Path>) -> Result<ValueLexicon> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| IngestError::io(path, e))?;
    read_value_lexicon(f)
}

pub fn read_value_lexicon<R: Read>(reader: R) -> Result<ValueLexicon> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if headers != ["value", "pattern"] {
        return Err(IngestError::Header {
            expected: "value,pattern".into(),
            found: headers,
        });
    }
    let mut map: ValueMap<Vec<Pattern>> = ValueMap::default();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let v: ValueId = rec
            .get(0)
            .unwrap_or("")
            .parse()
            .map_err(|e: super::model::UnknownValue| IngestError::malformed(line, "value", e.to_string()))?;
        let pat = Pattern::parse(rec.get(1).unwrap_or("")).ok_or(IngestError::EmptyPattern { line })?;
        map[v].push(pat);
    }
    ValueLexicon::new(map)
}
