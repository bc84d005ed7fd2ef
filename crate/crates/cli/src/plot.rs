//! Flat CSV tables for external plotting. Column names are part of the
//! documented interface.

use std::path::Path;

use lyrval_core::evaluate::EvalFile;
use lyrval_core::evaluate::{MdsFile, ValueGroup};
use lyrval_core::reliability::ReliabilityReport;
use lyrval_core::sampler::StratumKind;
use serde::{Deserialize, Serialize};

use crate::commands::StrataSummaryFile;
use crate::error::Result;
use crate::output::read_json;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[clap(rename_all = "snake_case")]
pub enum PlotKind {
    RankCorr,
    StrataTrend,
    MdsPoints,
    AlphaCurves,
}

impl PlotKind {
    pub fn name(self) -> &'static str {
        match self {
            PlotKind::RankCorr => "rank_corr",
            PlotKind::StrataTrend => "strata_trend",
            PlotKind::MdsPoints => "mds_points",
            PlotKind::AlphaCurves => "alpha_curves",
        }
    }

    /// Results file the table is built from.
    pub fn source(self) -> &'static str {
        match self {
            PlotKind::RankCorr => "eval.json",
            PlotKind::StrataTrend => "strata_summary.json",
            PlotKind::MdsPoints => "mds.json",
            PlotKind::AlphaCurves => "reliability.json",
        }
    }

    pub fn file_name(self) -> String {
        format!("plot_{}.csv", self.name())
    }
}

fn group_name(g: ValueGroup) -> &'static str {
    match g {
        ValueGroup::Group1 => "group1",
        ValueGroup::Group2 => "group2",
        ValueGroup::Group3 => "group3",
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Builds the CSV for `kind` from the results in `out`. `stratum` filters
/// the strata trend table.
pub fn emit_plot_data(out: &Path, kind: PlotKind, stratum: Option<StratumKind>) -> Result<(Vec<u8>, usize)> {
    let source = out.join(kind.source());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut rows = 0;
    match kind {
        PlotKind::RankCorr => {
            let eval: EvalFile = read_json(&source)?;
            w.write_record([
                "scorer",
                "normalization",
                "n_songs",
                "mean_tau",
                "sd_tau",
                "frac_above_threshold",
                "excluded_truth_tied",
                "excluded_model_tied",
            ])?;
            for s in &eval.summaries {
                w.write_record([
                    s.scorer.clone(),
                    s.normalization.to_string(),
                    s.stats.n.to_string(),
                    opt(s.stats.mean),
                    opt(s.stats.sd),
                    opt(s.stats.frac_above),
                    s.excluded_truth_tied.len().to_string(),
                    s.excluded_model_tied.len().to_string(),
                ])?;
                rows += 1;
            }
        }
        PlotKind::StrataTrend => {
            let file: StrataSummaryFile = read_json(&source)?;
            w.write_record(["stratum", "level", "label", "value", "group", "count", "mean_rank", "ci_half_width"])?;
            for s in file.strata.iter().filter(|s| stratum.is_none_or(|k| k == s.stratum)) {
                for l in &s.levels {
                    for (v, cell) in l.values.iter() {
                        w.write_record([
                            s.stratum.to_string(),
                            l.level.to_string(),
                            l.label.clone(),
                            v.to_string(),
                            group_name(s.groups[v]).to_string(),
                            l.count.to_string(),
                            opt(cell.mean),
                            opt(cell.ci_half_width),
                        ])?;
                        rows += 1;
                    }
                }
            }
        }
        PlotKind::MdsPoints => {
            let mds: MdsFile = read_json(&source)?;
            w.write_record(["set", "value", "x", "y"])?;
            for set in &mds.sets {
                for p in &set.points {
                    w.write_record([set.label.clone(), p.value.to_string(), p.x.to_string(), p.y.to_string()])?;
                    rows += 1;
                }
            }
        }
        PlotKind::AlphaCurves => {
            let rel: ReliabilityReport = read_json(&source)?;
            w.write_record(["value", "size", "median_alpha", "min_alpha", "max_alpha", "replicates"])?;
            for (v, r) in rel.values.iter() {
                for c in r.alpha_study.iter().flat_map(|s| &s.cells) {
                    let lo = c.alphas.iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = c.alphas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    w.write_record([
                        v.to_string(),
                        c.size.to_string(),
                        c.median.to_string(),
                        lo.to_string(),
                        hi.to_string(),
                        c.alphas.len().to_string(),
                    ])?;
                    rows += 1;
                }
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok((bytes, rows))
}
