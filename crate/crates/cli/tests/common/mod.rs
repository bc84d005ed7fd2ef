//! Writes a complete synthetic project (inputs plus configuration) into a
//! temporary directory.

#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs::File;
use std::path::{Path, PathBuf};

use lyrval_core::ingest::{write_annotations, write_song_catalog, EmbeddingTable, ValueId};
use lyrval_core::synth;

pub struct Project {
    pub dir: tempfile::TempDir,
}

impl Project {
    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn config(&self) -> String {
        self.path("pipeline.toml").display().to_string()
    }

    /// Runs `lyrval` in-process with the project config and `out` dir.
    pub fn run(&self, out: &str, args: &[&str]) -> i32 {
        let out = self.path(out).display().to_string();
        let mut argv = vec!["lyrval".to_string()];
        argv.extend(args.iter().map(|s| s.to_string()));
        argv.extend(["--config".into(), self.config(), "--out".into(), out]);
        lyrval_cli::run(argv)
    }
}

pub const MODELS: usize = 5;

fn write_table(path: &Path, table_words: &[String], table: &EmbeddingTable) {
    let mut s = format!("{} {}\n", table_words.len(), table.dim());
    for w in table_words {
        let v = table.vector(w).unwrap();
        let _ = writeln!(s, "{w} {}", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "));
    }
    std::fs::write(path, s).unwrap();
}

/// 200-song catalog, planted annotations for the first 30 songs from 25
/// raters, the demo lexicon, `MODELS` embedding tables and an identity
/// reference correlation.
pub fn project() -> Project {
    let dir = tempfile::tempdir().unwrap();
    let p = Project { dir };
    write_song_catalog(File::create(p.path("catalog.csv")).unwrap(), &synth::catalog(200, 11)).unwrap();
    let planted = synth::planted_hierarchy(30, 25, 20.0, 12);
    write_annotations(File::create(p.path("annotations.csv")).unwrap(), &planted.annotations).unwrap();
    let mut lex = String::from("value,pattern\n");
    for (v, w) in synth::lexicon_pairs() {
        let _ = writeln!(lex, "{v},{w}");
    }
    std::fs::write(p.path("lexicon.csv"), lex).unwrap();
    let vocab = synth::vocabulary();
    for m in 0..MODELS {
        let t = synth::embeddings(&format!("model{m}"), 16, 100 + m as u64);
        write_table(&p.path(&format!("model{m}.txt")), &vocab, &t);
    }
    let mut reference = String::from("value_a,value_b,correlation\n");
    for a in 0..10 {
        for b in a + 1..10 {
            let _ = writeln!(reference, "{},{},0", ValueId::ALL[a], ValueId::ALL[b]);
        }
    }
    std::fs::write(p.path("reference.csv"), reference).unwrap();
    let mut config = String::from(
        r#"seed = 42

[paths]
catalog = "catalog.csv"
annotations = "annotations.csv"
lexicon = "lexicon.csv"
reference_correlation = "reference.csv"

[sampling]
n = 50
target_min_share = 0.05

[sampling.overrides.genre_topic]
a = 2.0

[reliability]
sizes = [5, 10, 15, 20, 25]
replicates = 10
posthoc_sizes = [5, 10, 15, 20]
posthoc_replicates = 20

[scoring]
songs = "aggregates"

[evaluation]
strata = ["release_year"]

[mds]
n_samples = 2000
"#,
    );
    for m in 0..MODELS {
        let _ = write!(config, "\n[[models]]\nname = \"model{m}\"\npath = \"model{m}.txt\"\n");
    }
    std::fs::write(p.path("pipeline.toml"), config).unwrap();
    p
}

/// Every stochastic and deterministic command in pipeline order.
pub const PIPELINE: [&str; 8] = ["sample", "screen", "aggregate", "reliability", "score", "evaluate", "describe", "mds"];
