//! The TOML pipeline configuration.
//!
//! Relative paths in the file resolve against the file's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use lyrval_core::aggregate::{Correction, DEFAULT_ALPHA};
use lyrval_core::ingest::ScreeningConfig;
use lyrval_core::reliability::ReliabilityConfig;
use lyrval_core::sampler::{StratumKind, DEFAULT_POPULARITY_QUANTILES};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: Option<u64>,
    /// Output directory. Excluded from the manifest hash since it does not
    /// affect results.
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    pub paths: Paths,
    pub sampling: Sampling,
    pub screening: Screening,
    pub aggregation: Aggregation,
    pub reliability: ReliabilityConfig,
    pub scoring: Scoring,
    pub models: Vec<ModelConfig>,
    pub evaluation: Evaluation,
    pub describe: Describe,
    pub mds: Mds,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub catalog: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    /// Pilot annotations for the alpha study; the main set is used when
    /// absent.
    pub pilot_annotations: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub reference_correlation: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sampling {
    pub n: Option<usize>,
    pub a: Option<f64>,
    pub target_min_share: Option<f64>,
    pub strata: Vec<StratumKind>,
    pub popularity_edges: Option<Vec<f64>>,
    pub popularity_quantiles: Vec<f64>,
    /// Per-stratum `a` or `target_min_share`, keyed by stratum name.
    pub overrides: BTreeMap<StratumKind, Concentration>,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling {
            n: None,
            a: None,
            target_min_share: None,
            strata: StratumKind::ALL.to_vec(),
            popularity_edges: None,
            popularity_quantiles: DEFAULT_POPULARITY_QUANTILES.to_vec(),
            overrides: BTreeMap::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Concentration {
    pub a: Option<f64>,
    pub target_min_share: Option<f64>,
}

/// How one stratum's concentration is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConcentrationChoice {
    Fixed(f64),
    Target(f64),
}

impl Sampling {
    /// Override first, then the global setting, then `a = 1` (no smoothing).
    pub fn concentration(&self, kind: StratumKind) -> Result<ConcentrationChoice> {
        let pick = |c: Concentration, scope: &str| match (c.a, c.target_min_share) {
            (Some(_), Some(_)) => Err(CliError::Config(format!(
                "{scope}: set either `a` or `target_min_share`, not both"
            ))),
            (Some(a), None) => Ok(Some(ConcentrationChoice::Fixed(a))),
            (None, Some(t)) => Ok(Some(ConcentrationChoice::Target(t))),
            (None, None) => Ok(None),
        };
        if let Some(&o) = self.overrides.get(&kind) {
            if let Some(c) = pick(o, &format!("sampling.overrides.{kind}"))? {
                return Ok(c);
            }
        }
        let global = Concentration { a: self.a, target_min_share: self.target_min_share };
        Ok(pick(global, "sampling")?.unwrap_or(ConcentrationChoice::Fixed(1.0)))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Screening {
    #[serde(flatten)]
    pub thresholds: ScreeningConfig,
    /// Name of a configured model whose vocabulary drives the
    /// onomatopoeia check.
    pub vocabulary_model: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Aggregation {
    pub alpha: f64,
    pub correction: Correction,
}

impl Default for Aggregation {
    fn default() -> Self {
        Aggregation { alpha: DEFAULT_ALPHA, correction: Correction::Lists }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SongSelection {
    #[default]
    All,
    /// Songs listed in `sample.json`.
    Sample,
    /// Songs present in `aggregates.json`.
    Aggregates,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scoring {
    pub songs: SongSelection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: String,
    pub path: PathBuf,
    /// Precomputed per-song vectors (`song_id,v1..vd`) for sentence models.
    pub doc_vectors: Option<PathBuf>,
}

impl ModelConfig {
    /// Parses `NAME=PATH`.
    pub fn parse_flag(s: &str) -> std::result::Result<Self, String> {
        let (name, path) = s
            .split_once('=')
            .filter(|(n, p)| !n.is_empty() && !p.is_empty())
            .ok_or_else(|| format!("expected NAME=PATH, got `{s}`"))?;
        Ok(ModelConfig { name: name.to_string(), path: PathBuf::from(path), doc_vectors: None })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Evaluation {
    /// Strata for per-level tau summaries; needs the catalog.
    pub strata: Vec<StratumKind>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Describe {
    pub strata: Vec<StratumKind>,
}

impl Default for Describe {
    fn default() -> Self {
        Describe { strata: StratumKind::ALL.to_vec() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Mds {
    pub n_samples: usize,
}

impl Default for Mds {
    fn default() -> Self {
        Mds { n_samples: 10_000 }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
        let mut cfg: PipelineConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let p = &mut self.paths;
        for slot in [
            &mut p.catalog,
            &mut p.annotations,
            &mut p.pilot_annotations,
            &mut p.lexicon,
            &mut p.reference_correlation,
            &mut self.out,
        ]
        .into_iter()
        .flatten()
        {
            fix(slot);
        }
        for m in &mut self.models {
            fix(&mut m.path);
            if let Some(d) = &mut m.doc_vectors {
                fix(d);
            }
        }
    }
}

/// Returns the configured path after checking that it exists.
pub fn require(path: &Option<PathBuf>, what: &'static str) -> Result<PathBuf> {
    let p = path
        .clone()
        .ok_or_else(|| CliError::Config(format!("`paths.{what}` is not set")))?;
    if !p.exists() {
        return Err(CliError::MissingPath { what, path: p });
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let cfg: PipelineConfig = toml::from_str(
            r#"
            seed = 7
            [paths]
            catalog = "songs.csv"
            [sampling]
            n = 40
            target_min_share = 0.05
            [sampling.overrides.genre_topic]
            a = 2.0
            [aggregation]
            correction = "items"
            [[models]]
            name = "glove"
            path = "glove.txt"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.seed, Some(7));
        assert_eq!(cfg.aggregation.correction, Correction::Items);
        assert_eq!(cfg.sampling.concentration(StratumKind::GenreTopic).unwrap(), ConcentrationChoice::Fixed(2.0));
        assert_eq!(
            cfg.sampling.concentration(StratumKind::ReleaseYear).unwrap(),
            ConcentrationChoice::Target(0.05)
        );
        assert_eq!(cfg.reliability.replicates, 10);
        assert!(toml::from_str::<PipelineConfig>("sede = 1").is_err());
    }

    #[test]
    fn model_flag() {
        let m = ModelConfig::parse_flag("w2v=/x/y.txt").unwrap();
        assert_eq!((m.name.as_str(), m.path.to_str().unwrap()), ("w2v", "/x/y.txt"));
        assert!(ModelConfig::parse_flag("nopath").is_err());
        assert!(ModelConfig::parse_flag("=p").is_err());
    }
}
