use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use super::{IngestError, Result};

/// Pre-trained token vectors of uniform dimension, optionally with
/// precomputed per-song document vectors (sentence-level models).
#[derive(Clone, Debug)]
pub struct EmbeddingTable {
    pub model_name: String,
    dim: usize,
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    /// Token ids sorted by token, for prefix lookups.
    sorted: Vec<usize>,
    data: Vec<f64>,
    doc_vectors: HashMap<String, Vec<f64>>,
    duplicates: usize,
}

impl EmbeddingTable {
    /// Builds a table from `(token, vector)` entries. Later duplicates of a
    /// token are dropped and counted.
    pub fn from_entries(
        model_name: impl Into<String>,
        entries: impl IntoIterator<Item = (String, Vec<f64>)>,
    ) -> Result<Self> {
        let mut dim = None;
        let mut tokens = Vec::new();
        let mut index = HashMap::new();
        let mut data = Vec::new();
        let mut duplicates = 0;
        for (i, (tok, v)) in entries.into_iter().enumerate() {
            let d = *dim.get_or_insert(v.len());
            if v.len() != d || d == 0 {
                return Err(IngestError::DimensionMismatch {
                    line: i as u64 + 1,
                    expected: d,
                    found: v.len(),
                });
            }
            if index.contains_key(&tok) {
                duplicates += 1;
                continue;
            }
            index.insert(tok.clone(), tokens.len());
            tokens.push(tok);
            data.extend_from_slice(&v);
        }
        let dim = dim.ok_or(IngestError::EmptyTable)?;
        let mut sorted: Vec<usize> = (0..tokens.len()).collect();
        sorted.sort_by(|&a, &b| tokens[a].cmp(&tokens[b]));
        Ok(EmbeddingTable {
            model_name: model_name.into(),
            dim,
            tokens,
            index,
            sorted,
            data,
            doc_vectors: HashMap::new(),
            duplicates,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Number of duplicate token lines that were ignored.
    pub fn duplicate_count(&self) -> usize {
        self.duplicates
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn vector(&self, token: &str) -> Option<&[f64]> {
        self.index
            .get(token)
            .map(|&i| &self.data[i * self.dim..(i + 1) * self.dim])
    }

    /// Vocabulary tokens starting with `prefix`, in lexicographic order.
    pub fn prefix_matches<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        let start = self
            .sorted
            .partition_point(|&i| self.tokens[i].as_str() < prefix);
        self.sorted[start..]
            .iter()
            .map(move |&i| self.tokens[i].as_str())
            .take_while(move |t| t.starts_with(prefix))
    }

    pub fn doc_vector(&self, song_id: &str) -> Option<&[f64]> {
        self.doc_vectors.get(song_id).map(Vec::as_slice)
    }

    pub fn has_doc_vectors(&self) -> bool {
        !self.doc_vectors.is_empty()
    }

    /// Attaches per-song document vectors; each must match the token
    /// dimension.
    pub fn with_doc_vectors(mut self, docs: HashMap<String, Vec<f64>>) -> Result<Self> {
        for v in docs.values() {
            if v.len() != self.dim {
                return Err(IngestError::DimensionMismatch {
                    line: 0,
                    expected: self.dim,
                    found: v.len(),
                });
            }
        }
        self.doc_vectors = docs;
        Ok(self)
    }
}

/// Loads a whitespace-separated `token v1 ... vd` file. A first line of
/// exactly two unsigned integers is taken as a `count dim` header.
pub fn load_embeddings(path: impl AsRef<Path>, model_name: &str) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| IngestError::io(path, e))?;
    read_embeddings(f, model_name)
}

pub fn read_embeddings<R: Read>(reader: R, model_name: &str) -> Result<EmbeddingTable> {
    let mut dim: Option<usize> = None;
    let mut entries = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| IngestError::io("<embeddings>", e))?;
        let lineno = i as u64 + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if i == 0 && fields.len() == 2 {
            if let (Ok(_), Ok(d)) = (fields[0].parse::<usize>(), fields[1].parse::<usize>()) {
                dim = Some(d);
                continue;
            }
        }
        let vec = fields[1..]
            .iter()
            .enumerate()
            .map(|(j, s)| {
                s.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| IngestError::malformed(lineno, &format!("v{}", j + 1), format!("`{s}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let d = *dim.get_or_insert(vec.len());
        if vec.len() != d || d == 0 {
            return Err(IngestError::DimensionMismatch {
                line: lineno,
                expected: d,
                found: vec.len(),
            });
        }
        entries.push((fields[0].to_string(), vec));
    }
    EmbeddingTable::from_entries(model_name, entries)
}

/// Loads `doc_vectors.csv` (`song_id,v1,...,vd`).
pub fn load_doc_vectors(path: impl AsRef<Path>) -> Result<HashMap<String, Vec<f64>>> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| IngestError::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(f);
    let headers = rdr.headers()?.clone();
    if headers.get(0) != Some("song_id") || headers.len() < 2 {
        return Err(IngestError::Header {
            expected: "song_id,v1,...,vd".into(),
            found: headers.iter().map(str::to_string).collect(),
        });
    }
    let mut out = HashMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let id = rec.get(0).unwrap_or("").to_string();
        let v = (1..rec.len())
            .map(|j| {
                rec[j]
                    .parse::<f64>()
                    .map_err(|_| IngestError::malformed(line, &format!("v{j}"), format!("`{}`", &rec[j])))
            })
            .collect::<Result<Vec<_>>>()?;
        if out.contains_key(&id) {
            return Err(IngestError::DuplicateSongId { line, song_id: id });
        }
        out.insert(id, v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_lines_three_dims() {
        let t = read_embeddings("a 1 2 3\nb 4 5 6\n".as_bytes(), "m").unwrap();
        assert_eq!((t.dim(), t.len()), (3, 2));
        assert_eq!(t.vector("b"), Some(&[4.0, 5.0, 6.0][..]));
    }

    #[test]
    fn header_line_and_duplicates() {
        let t = read_embeddings("3 2\na 1 2\nb 3 4\na 9 9\n".as_bytes(), "m").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.duplicate_count(), 1);
        assert_eq!(t.vector("a"), Some(&[1.0, 2.0][..]));
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            read_embeddings("a 1 2 3\nb 4 5\n".as_bytes(), "m"),
            Err(IngestError::DimensionMismatch { line: 2, expected: 3, found: 2 })
        ));
    }

    #[test]
    fn empty_file() {
        assert!(matches!(read_embeddings("".as_bytes(), "m"), Err(IngestError::EmptyTable)));
    }

    #[test]
    fn prefix_lookup_is_sorted() {
        let t = read_embeddings("zebra 1\nachiever 2\nachieve 3\nach 4\n".as_bytes(), "m").unwrap();
        let m: Vec<_> = t.prefix_matches("achiev").collect();
        assert_eq!(m, ["achieve", "achiever"]);
    }
}
