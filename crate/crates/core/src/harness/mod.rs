//! Experiment harness: seeded drops, scheduler runs, metrics and outputs.
//!
//! Every drop draws its geometry and channels from a stream indexed by the
//! drop number only, so all sweep points and schedulers see the same UEs
//! (common random numbers).

mod output;
mod plot;
mod sweep;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{drop_ues, synthesize_channels};
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::irs::{build_codebook, Codebook};
use crate::rate::{build_rate_table, RateTable, TableMode};
use crate::rng::{stream, Stream};
use crate::sched::{self, AssignmentGrid};

pub use output::{emit_csv, write_audit, write_timing_csv, DROPS_HEADER, SUMMARY_HEADER};
pub use plot::{emit_plots, render_line_plot, PlotSeries};
pub use sweep::{apply, point_label, Sweep, SweepAxis, SweepParam, SweepPoint, SweepValue};

/// Scheduling algorithm selectable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SchedulerKind {
    Gmax,
    Da,
    Uoscbc,
    Ga,
    Exhaustive,
}

impl SchedulerKind {
    pub const ALL: [SchedulerKind; 5] = [
        SchedulerKind::Gmax,
        SchedulerKind::Da,
        SchedulerKind::Uoscbc,
        SchedulerKind::Ga,
        SchedulerKind::Exhaustive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchedulerKind::Gmax => "gmax",
            SchedulerKind::Da => "da",
            SchedulerKind::Uoscbc => "uoscbc",
            SchedulerKind::Ga => "ga",
            SchedulerKind::Exhaustive => "exhaustive",
        }
    }

    /// Parses a comma-separated list, keeping the given order.
    pub fn parse_list(s: &str) -> Result<Vec<Self>> {
        let mut out: Vec<Self> = Vec::new();
        for name in s.split(',').map(str::trim).filter(|n| !n.is_empty()) {
            let kind = name.parse()?;
            if !out.contains(&kind) {
                out.push(kind);
            }
        }
        if out.is_empty() {
            return Err(Error::InvalidArgument("no scheduler selected".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for SchedulerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown scheduler {s:?}")))
    }
}

/// Where the codebook of each sweep point comes from.
#[derive(Debug, Clone, Default)]
pub enum CodebookSource {
    /// Train by k-means on the configured number of training drops.
    #[default]
    Build,
    /// Use this codebook; points whose geometry it does not fit are skipped.
    Fixed(Codebook),
}

#[derive(Debug, Clone)]
pub struct ExperimentOptions {
    pub schedulers: Vec<SchedulerKind>,
    pub mode: TableMode,
    pub codebook: CodebookSource,
    /// Keep every assignment grid in the report (for auditing).
    pub keep_grids: bool,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self {
            schedulers: vec![SchedulerKind::Gmax, SchedulerKind::Da, SchedulerKind::Uoscbc],
            mode: TableMode::Exhaustive,
            codebook: CodebookSource::Build,
            keep_grids: false,
        }
    }
}

/// Outcome of one scheduler on one drop.
#[derive(Debug, Clone)]
pub struct DropRecord {
    pub drop: usize,
    pub sum_rate: f64,
    pub ue_rates: Vec<f64>,
    pub reconfigurations: usize,
    pub reconfig_bits: u64,
    pub violations: Vec<String>,
    pub elapsed_s: f64,
    pub grid: Option<AssignmentGrid>,
}

/// Metrics of one scheduler at one sweep point.
#[derive(Debug, Clone)]
pub struct MetricsReport {
    pub scheduler: SchedulerKind,
    pub drops: Vec<DropRecord>,
    /// Reason the scheduler did not run (for instance an oversized search).
    pub skipped: Option<String>,
}

impl MetricsReport {
    pub fn n_drops(&self) -> usize {
        self.drops.len()
    }

    pub fn sum_rates(&self) -> Vec<f64> {
        self.drops.iter().map(|d| d.sum_rate).collect()
    }

    pub fn mean_sum_rate(&self) -> f64 {
        mean(self.drops.iter().map(|d| d.sum_rate))
    }

    /// Standard error of the mean sum rate (zero below two drops).
    pub fn std_err(&self) -> f64 {
        let n = self.drops.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.mean_sum_rate();
        let var = self.drops.iter().map(|d| (d.sum_rate - m).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    }

    /// All per-UE rates, drop by drop.
    pub fn ue_rates(&self) -> Vec<f64> {
        self.drops.iter().flat_map(|d| d.ue_rates.iter().copied()).collect()
    }

    pub fn mean_ue_rate(&self) -> f64 {
        mean(self.drops.iter().flat_map(|d| d.ue_rates.iter().copied()))
    }

    pub fn mean_reconfigurations(&self) -> f64 {
        mean(self.drops.iter().map(|d| d.reconfigurations as f64))
    }

    pub fn mean_reconfig_bits(&self) -> f64 {
        mean(self.drops.iter().map(|d| d.reconfig_bits as f64))
    }

    /// Configurations per frame relative to one configuration per RB,
    /// i.e. `reconfigurations * F / K`.
    pub fn reduction_factor(&self, cfg: &ScenarioConfig) -> f64 {
        self.mean_reconfigurations() * cfg.f as f64 / cfg.k as f64
    }

    pub fn violations(&self) -> usize {
        self.drops.iter().map(|d| d.violations.len()).sum()
    }

    pub fn mean_elapsed_s(&self) -> f64 {
        mean(self.drops.iter().map(|d| d.elapsed_s))
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// All scheduler metrics at one sweep point.
#[derive(Debug, Clone)]
pub struct PointReport {
    pub label: String,
    pub point: SweepPoint,
    pub cfg: ScenarioConfig,
    pub schedulers: Vec<MetricsReport>,
}

impl PointReport {
    pub fn metrics(&self, kind: SchedulerKind) -> Option<&MetricsReport> {
        self.schedulers.iter().find(|m| m.scheduler == kind)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedPoint {
    pub label: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentReport {
    pub points: Vec<PointReport>,
    pub skipped: Vec<SkippedPoint>,
}

impl ExperimentReport {
    pub fn total_violations(&self) -> usize {
        self.points
            .iter()
            .flat_map(|p| &p.schedulers)
            .map(MetricsReport::violations)
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Fields that influence codebook training; points sharing them share a codebook.
fn codebook_key(cfg: &ScenarioConfig) -> String {
    let mut c = cfg.clone();
    c.z = 0;
    c.n_drops = 0;
    c.k = 0;
    c.ga = Default::default();
    c.to_json()
}

/// Runs every scheduler on `n_drops` seeded drops at every sweep point.
///
/// Invalid sweep points are skipped and listed in the report. Only I/O and
/// internal errors abort the run; scheduler output violations are recorded.
pub fn run_experiment(
    base: &ScenarioConfig,
    sweep: &Sweep,
    opts: &ExperimentOptions,
) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::default();
    let mut codebooks: BTreeMap<String, Codebook> = BTreeMap::new();

    for point in sweep.points() {
        let label = point_label(&point);
        let cfg = apply(base, &point);
        let skip = |reason: String| {
            log::warn!("skipping point {label}: {reason}");
            SkippedPoint { label: label.clone(), reason }
        };
        if let Err(e) = cfg.validate() {
            report.skipped.push(skip(e.to_string()));
            continue;
        }
        let codebook = match &opts.codebook {
            CodebookSource::Fixed(cb) if !cb.matches(&cfg) => {
                report.skipped.push(skip(format!(
                    "codebook has b_q={}, b_irs={}, n_irs={}",
                    cb.b_q(),
                    cb.b_irs(),
                    cb.n_irs()
                )));
                continue;
            }
            CodebookSource::Fixed(cb) => cb.clone(),
            CodebookSource::Build => {
                let key = codebook_key(&cfg);
                if let Some(cb) = codebooks.get(&key) {
                    cb.clone()
                } else {
                    log::info!("training codebook for {label}");
                    let mut rng = stream(cfg.seed, Stream::Training, 0);
                    match build_codebook(&cfg, &mut rng) {
                        Ok(cb) => {
                            codebooks.insert(key, cb.clone());
                            cb
                        }
                        Err(e @ (Error::Io { .. } | Error::Json { .. } | Error::Csv { .. })) => {
                            return Err(e)
                        }
                        Err(e) => {
                            report.skipped.push(skip(e.to_string()));
                            continue;
                        }
                    }
                }
            }
        };
        log::info!("running point {label} ({} drops)", cfg.n_drops);
        let schedulers = run_point(&cfg, &codebook, opts)?;
        report.points.push(PointReport {
            label,
            point,
            cfg,
            schedulers,
        });
    }
    Ok(report)
}

/// Per-drop results for every scheduler, in scheduler order.
type DropOutcome = Vec<std::result::Result<DropRecord, String>>;

fn run_point(
    cfg: &ScenarioConfig,
    codebook: &Codebook,
    opts: &ExperimentOptions,
) -> Result<Vec<MetricsReport>> {
    let outcomes: Vec<DropOutcome> = (0..cfg.n_drops)
        .into_par_iter()
        .map(|d| run_drop(cfg, codebook, opts, d))
        .collect::<Result<_>>()?;

    Ok(opts
        .schedulers
        .iter()
        .enumerate()
        .map(|(s, &kind)| {
            let mut drops = Vec::with_capacity(outcomes.len());
            let mut skipped = None;
            for outcome in &outcomes {
                match &outcome[s] {
                    Ok(rec) => drops.push(rec.clone()),
                    Err(reason) => {
                        skipped.get_or_insert_with(|| reason.clone());
                    }
                }
            }
            if skipped.is_some() {
                drops.clear();
            }
            MetricsReport {
                scheduler: kind,
                drops,
                skipped,
            }
        })
        .collect())
}

/// Channel realization and rate table of drop `d`.
pub fn drop_table(cfg: &ScenarioConfig, codebook: &Codebook, mode: TableMode, d: usize) -> Result<RateTable> {
    let mut rng = stream(cfg.seed, Stream::Drop, d as u64);
    let ues = drop_ues(cfg, &mut rng);
    let channels = synthesize_channels(cfg, &ues, &mut rng)?;
    build_rate_table(&channels, codebook, cfg, mode)
}

fn run_drop(
    cfg: &ScenarioConfig,
    codebook: &Codebook,
    opts: &ExperimentOptions,
    d: usize,
) -> Result<DropOutcome> {
    let table = drop_table(cfg, codebook, opts.mode, d)?;
    let mut gmax_grid: Option<AssignmentGrid> = None;
    let mut out = Vec::with_capacity(opts.schedulers.len());
    for &kind in &opts.schedulers {
        let start = Instant::now();
        let result = match kind {
            SchedulerKind::Gmax => sched::gmax(&table, cfg),
            SchedulerKind::Da => sched::da(&table, cfg),
            SchedulerKind::Uoscbc => sched::uoscbc(&table, cfg),
            SchedulerKind::Exhaustive => sched::exhaustive(&table, cfg),
            SchedulerKind::Ga => {
                let seed = match &gmax_grid {
                    Some(g) => g.clone(),
                    None => sched::gmax(&table, cfg)?,
                };
                let mut rng = stream(cfg.seed, Stream::Genetic, d as u64);
                sched::ga(&table, cfg, &seed, &mut rng)
            }
        };
        let elapsed_s = start.elapsed().as_secs_f64();
        let grid = match result {
            Ok(g) => g,
            Err(e @ Error::TooLarge { .. }) => {
                out.push(Err(e.to_string()));
                continue;
            }
            Err(e) => return Err(e),
        };
        if kind == SchedulerKind::Gmax {
            gmax_grid = Some(grid.clone());
        }
        let violations = match sched::validate(&grid, cfg) {
            Ok(()) => Vec::new(),
            Err(v) => v.iter().map(ToString::to_string).collect(),
        };
        let ue_rates = sched::per_ue_rates(&grid, &table)?;
        let reconfigurations = grid.reconfigurations();
        out.push(Ok(DropRecord {
            drop: d,
            sum_rate: ue_rates.iter().sum(),
            ue_rates,
            reconfigurations,
            reconfig_bits: grid.reconfiguration_bits(cfg.b_codebook),
            violations,
            elapsed_s,
            grid: opts.keep_grids.then_some(grid),
        }));
    }
    Ok(out)
}
