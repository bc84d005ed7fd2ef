//! One function per subcommand. Each reads its inputs, calls into the
//! core library and writes its results plus a manifest.

use std::collections::{BTreeMap, HashSet};
use std::path::PathBuf;

use lyrval_core::aggregate::{aggregate_annotations, AggregatesFile};
use lyrval_core::autoscore::{build_score_sets, ScoresFile};
use lyrval_core::evaluate::{
    eval_score_sets, load_reference_correlation, mds_report, strata_rank_summary, StrataRankSummary, StratumView,
};
use lyrval_core::ingest::{
    load_annotations, load_doc_vectors, load_embeddings, load_song_catalog, load_value_lexicon, screen_lyric,
    stopwords, EmbeddingTable, ScreeningConfig, ScreeningReport, SongRecord, Verdict,
};
use lyrval_core::reliability::reliability_report;
use lyrval_core::sampler::{run_sampling, SampleOutput, Stratum, StratumKind, StratumSpec};
use lyrval_core::Execution;
use serde::{Deserialize, Serialize};

use crate::config::{require, ConcentrationChoice, ModelConfig, PipelineConfig, Sampling, SongSelection};
use crate::error::{CliError, Result};
use crate::output::{read_json, RunWriter};
use crate::plot::{emit_plot_data, PlotKind};

pub struct Context {
    pub config: PipelineConfig,
    pub out: PathBuf,
    pub exec: Execution,
}

impl Context {
    fn seed(&self, command: &'static str) -> Result<u64> {
        self.config.seed.ok_or(CliError::MissingSeed(command))
    }

    fn writer(&self) -> RunWriter {
        RunWriter::new(self.out.clone())
    }

    fn artifact(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn catalog(&self, w: &mut RunWriter) -> Result<Vec<SongRecord>> {
        let path = require(&self.config.paths.catalog, "catalog")?;
        w.input(&path);
        Ok(load_song_catalog(&path)?)
    }

    fn aggregates(&self, w: &mut RunWriter) -> Result<AggregatesFile> {
        let path = self.artifact("aggregates.json");
        let a = read_json(&path)?;
        w.input(&path);
        Ok(a)
    }
}

fn stratum_spec(kind: StratumKind, catalog: &[SongRecord], sampling: &Sampling) -> Result<StratumSpec> {
    Ok(match kind {
        StratumKind::ReleaseYear => StratumSpec::release_year(),
        StratumKind::GenreTopic => StratumSpec::genre_topic(),
        StratumKind::LyricTopic => StratumSpec::lyric_topic(),
        StratumKind::Popularity => match &sampling.popularity_edges {
            Some(e) => StratumSpec::popularity(e.clone())?,
            None => StratumSpec::popularity_from_quantiles(catalog, &sampling.popularity_quantiles)?,
        },
    })
}

pub fn sample(ctx: &Context) -> Result<()> {
    let seed = ctx.seed("sample")?;
    let mut w = ctx.writer();
    let catalog = ctx.catalog(&mut w)?;
    let s = &ctx.config.sampling;
    let n = s.n.ok_or_else(|| CliError::Config("`sampling.n` is not set".into()))?;
    let mut strata = Vec::with_capacity(s.strata.len());
    for &kind in &s.strata {
        let spec = stratum_spec(kind, &catalog, s)?;
        strata.push(match s.concentration(kind)? {
            ConcentrationChoice::Fixed(a) => Stratum::with_concentration(spec, &catalog, a)?,
            ConcentrationChoice::Target(t) => Stratum::with_target(spec, &catalog, t)?,
        });
    }
    let result = run_sampling(&catalog, &strata, n, seed, ctx.exec)?;
    w.json("sample.json", &result)?;
    w.finish("sample", Some(seed), &ctx.config)
}

fn load_model(m: &ModelConfig, w: &mut RunWriter) -> Result<EmbeddingTable> {
    let path = require(&Some(m.path.clone()), "embedding table")?;
    w.input(&path);
    let table = load_embeddings(&path, &m.name)?;
    Ok(match &m.doc_vectors {
        Some(d) => {
            let d = require(&Some(d.clone()), "document vectors")?;
            w.input(&d);
            table.with_doc_vectors(load_doc_vectors(&d)?)?
        }
        None => table,
    })
}

/// Contents of `screening.json`.
#[derive(Serialize, Deserialize)]
pub struct ScreeningFile {
    pub thresholds: ScreeningConfig,
    pub vocabulary_model: Option<String>,
    pub accepted: usize,
    pub rejected: BTreeMap<String, usize>,
    pub reports: Vec<ScreeningReport>,
}

pub fn screen(ctx: &Context) -> Result<()> {
    let mut w = ctx.writer();
    let catalog = ctx.catalog(&mut w)?;
    let cfg = &ctx.config.screening;
    let vocab = match &cfg.vocabulary_model {
        Some(name) => {
            let m = ctx
                .config
                .models
                .iter()
                .find(|m| &m.name == name)
                .ok_or_else(|| CliError::Config(format!("screening.vocabulary_model `{name}` is not a configured model")))?;
            Some(load_model(m, &mut w)?)
        }
        None => None,
    };
    let stop = stopwords();
    let reports = ctx
        .exec
        .map(&catalog, |s| screen_lyric(s, &cfg.thresholds, stop, vocab.as_ref()));
    let mut rejected = BTreeMap::new();
    for r in &reports {
        if let Verdict::Reject { reason } = r.verdict {
            *rejected.entry(format!("{reason:?}")).or_insert(0) += 1;
        }
    }
    let file = ScreeningFile {
        thresholds: cfg.thresholds.clone(),
        vocabulary_model: cfg.vocabulary_model.clone(),
        accepted: reports.iter().filter(|r| r.verdict == Verdict::Pass).count(),
        rejected,
        reports,
    };
    w.json("screening.json", &file)?;
    w.finish("screen", None, &ctx.config)
}

pub fn aggregate(ctx: &Context) -> Result<()> {
    let mut w = ctx.writer();
    let path = require(&ctx.config.paths.annotations, "annotations")?;
    w.input(&path);
    let annotations = load_annotations(&path)?;
    let a = &ctx.config.aggregation;
    let file = aggregate_annotations(&annotations, a.correction, a.alpha, ctx.exec)?;
    w.json("aggregates.json", &file)?;
    w.finish("aggregate", None, &ctx.config)
}

pub fn reliability(ctx: &Context) -> Result<()> {
    let seed = ctx.seed("reliability")?;
    let mut w = ctx.writer();
    let path = require(&ctx.config.paths.annotations, "annotations")?;
    w.input(&path);
    let main = load_annotations(&path)?;
    let pilot = match &ctx.config.paths.pilot_annotations {
        Some(_) => {
            let p = require(&ctx.config.paths.pilot_annotations, "pilot_annotations")?;
            w.input(&p);
            Some(load_annotations(&p)?)
        }
        None => None,
    };
    let report = reliability_report(&main, pilot.as_deref(), &ctx.config.reliability, seed, ctx.exec)?;
    w.json("reliability.json", &report)?;
    w.finish("reliability", Some(seed), &ctx.config)
}

pub fn score(ctx: &Context) -> Result<()> {
    let mut w = ctx.writer();
    let catalog = ctx.catalog(&mut w)?;
    let lex_path = require(&ctx.config.paths.lexicon, "lexicon")?;
    w.input(&lex_path);
    let lexicon = load_value_lexicon(&lex_path)?;
    let wanted: Option<Vec<String>> = match ctx.config.scoring.songs {
        SongSelection::All => None,
        SongSelection::Sample => {
            let p = ctx.artifact("sample.json");
            let s: SampleOutput = read_json(&p)?;
            w.input(&p);
            Some(s.song_ids)
        }
        SongSelection::Aggregates => Some(ctx.aggregates(&mut w)?.songs.into_iter().map(|s| s.song_id).collect()),
    };
    let corpus: Vec<SongRecord> = match wanted {
        None => catalog,
        Some(ids) => {
            let known: HashSet<&str> = catalog.iter().map(|s| s.song_id.as_str()).collect();
            if let Some(missing) = ids.iter().find(|id| !known.contains(id.as_str())) {
                return Err(CliError::Config(format!("selected song `{missing}` is not in the catalog")));
            }
            let ids: HashSet<String> = ids.into_iter().collect();
            catalog.into_iter().filter(|s| ids.contains(&s.song_id)).collect()
        }
    };
    let mut models = Vec::with_capacity(ctx.config.models.len());
    for m in &ctx.config.models {
        models.push(load_model(m, &mut w)?);
    }
    let sets = build_score_sets(&corpus, &lexicon, &models, ctx.exec)?;
    w.json("scores.json", &ScoresFile { sets })?;
    w.finish("score", None, &ctx.config)
}

pub fn evaluate(ctx: &Context) -> Result<()> {
    let mut w = ctx.writer();
    let scores_path = ctx.artifact("scores.json");
    let scores: ScoresFile = read_json(&scores_path)?;
    w.input(&scores_path);
    let aggregates = ctx.aggregates(&mut w)?;
    let strata = &ctx.config.evaluation.strata;
    let catalog = if strata.is_empty() { Vec::new() } else { ctx.catalog(&mut w)? };
    let specs = strata
        .iter()
        .map(|&k| stratum_spec(k, &catalog, &ctx.config.sampling))
        .collect::<Result<Vec<_>>>()?;
    let views: Vec<StratumView<'_>> = specs.iter().map(|spec| StratumView { spec, catalog: &catalog }).collect();
    let file = eval_score_sets(&scores.sets, &aggregates, &views, ctx.exec)?;
    w.json("eval.json", &file)?;
    w.finish("evaluate", None, &ctx.config)
}

/// Contents of `strata_summary.json`.
#[derive(Serialize, Deserialize)]
pub struct StrataSummaryFile {
    pub alpha: f64,
    pub strata: Vec<StrataRankSummary>,
}

pub fn describe(ctx: &Context) -> Result<()> {
    let mut w = ctx.writer();
    let aggregates = ctx.aggregates(&mut w)?;
    let catalog = ctx.catalog(&mut w)?;
    let mut strata = Vec::new();
    for &k in &ctx.config.describe.strata {
        let spec = stratum_spec(k, &catalog, &ctx.config.sampling)?;
        strata.push(strata_rank_summary(&aggregates, &catalog, &spec)?);
    }
    w.json("strata_summary.json", &StrataSummaryFile { alpha: aggregates.alpha, strata })?;
    w.finish("describe", None, &ctx.config)
}

pub fn mds(ctx: &Context) -> Result<()> {
    let mut w = ctx.writer();
    let aggregates = ctx.aggregates(&mut w)?;
    let profiles: Vec<_> = aggregates.songs.iter().map(|s| s.weighted_mean).collect();
    let (reference, seed) = match &ctx.config.paths.reference_correlation {
        Some(_) => {
            let seed = ctx.seed("mds")?;
            let p = require(&ctx.config.paths.reference_correlation, "reference_correlation")?;
            w.input(&p);
            (Some(load_reference_correlation(&p)?), Some(seed))
        }
        None => (None, None),
    };
    let file = mds_report(&profiles, reference.as_ref(), ctx.config.mds.n_samples, seed.unwrap_or(0), ctx.exec)?;
    w.json("mds.json", &file)?;
    w.finish("mds", seed, &ctx.config)
}

pub fn plot(ctx: &Context, kind: PlotKind, stratum: Option<StratumKind>) -> Result<()> {
    let mut w = ctx.writer();
    let (bytes, _) = emit_plot_data(&ctx.out, kind, stratum)?;
    w.input(&ctx.artifact(kind.source()));
    w.write(&kind.file_name(), &bytes)?;
    w.finish(&format!("plot_{}", kind.name()), None, &ctx.config)
}
