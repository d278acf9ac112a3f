//! Command-line surface: configuration, the five commands, and output.
//!
//! Every command turns a [`RunConfig`] into a [`ResultEnvelope`]: a table of
//! records plus a summary and diagnostics. The envelope renders either as
//! CSV (config, summary and diagnostics in leading `#` lines) or as JSON.
//! Both formats print floats with the shortest representation that parses
//! back to the same value.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::basis::{BilliardSpec, ModeTable, Point, GOLDEN_RATIO};
use crate::error::{Error, Result};
use crate::extension::{vbar_from_theta, ThetaParameter};
use crate::greens::{Greens, GreensAccuracy, ScattererSet, TailMode, DEFAULT_POLE_EXCLUSION};
use crate::solver::{self, EnergyWindow, SolverOptions};
use crate::stats::{self, ReferenceKind};

pub const SCHEMA_VERSION: u32 = 1;

/// Fewest levels `stats` accepts after the low-lying ones are dropped.
pub const MIN_STATS_LEVELS: usize = 100;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

// ---------------------------------------------------------------- config

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BilliardSection {
    pub lx: f64,
    pub ly: f64,
    pub mass: f64,
}

impl Default for BilliardSection {
    fn default() -> Self {
        BilliardSection {
            lx: 1.0,
            ly: GOLDEN_RATIO,
            mass: 1.0,
        }
    }
}

/// One scatterer; exactly one of `vbar_inv` and `theta` must be given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScattererEntry {
    pub x: f64,
    pub y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vbar_inv: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
    /// Unperturbed level indices `[first, last]`, 1-based, instead of energies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AccuracySection {
    pub n_max: usize,
    pub tail: TailMode,
    pub target_abs_err: f64,
    pub pole_exclusion: f64,
}

impl Default for AccuracySection {
    fn default() -> Self {
        let acc = GreensAccuracy::default();
        AccuracySection {
            n_max: acc.n_max,
            tail: acc.tail,
            target_abs_err: acc.target_abs_err,
            pole_exclusion: DEFAULT_POLE_EXCLUSION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub tol: f64,
    pub grid_per_spacing: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        let o = SolverOptions::default();
        SolverSection {
            tol: o.tol,
            grid_per_spacing: o.grid_per_spacing,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StatsSection {
    pub bins: usize,
    pub exclude_levels: usize,
}

impl Default for StatsSection {
    fn default() -> Self {
        StatsSection {
            bins: 40,
            exclude_levels: stats::DEFAULT_EXCLUDED_LEVELS,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub vbar_inv: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

/// The full run description. Every section is optional in the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub billiard: BilliardSection,
    #[serde(default)]
    pub window: WindowSection,
    #[serde(default)]
    pub accuracy: AccuracySection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub stats: StatsSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, rename = "scatterer")]
    pub scatterers: Vec<ScattererEntry>,
}

fn default_lambda() -> f64 {
    1.0
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            lambda: 1.0,
            billiard: BilliardSection::default(),
            window: WindowSection::default(),
            accuracy: AccuracySection::default(),
            solver: SolverSection::default(),
            stats: StatsSection::default(),
            sweep: SweepSection::default(),
            output: OutputSection::default(),
            scatterers: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(vec![e.to_string()]))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn spec(&self) -> BilliardSpec {
        BilliardSpec {
            lx: self.billiard.lx,
            ly: self.billiard.ly,
            mass: self.billiard.mass,
        }
    }

    pub fn accuracy(&self) -> GreensAccuracy {
        GreensAccuracy {
            n_max: self.accuracy.n_max,
            tail: self.accuracy.tail,
            target_abs_err: self.accuracy.target_abs_err,
            pole_exclusion: self.accuracy.pole_exclusion,
        }
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.solver.tol,
            grid_per_spacing: self.solver.grid_per_spacing,
            allow_pole_shrink: true,
        }
    }

    /// Every violated precondition that can be checked without building
    /// the mode table.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let spec = self.spec();
        if let Err(e) = spec.validate() {
            out.push(e.to_string());
        }
        out.extend(self.accuracy().problems());
        let placeholder = ScattererSet::new(
            self.scatterers.iter().map(|s| Point::new(s.x, s.y)).collect(),
            vec![0.0; self.scatterers.len()],
            self.lambda,
        );
        if spec.validate().is_ok() {
            out.extend(placeholder.problems(&spec));
        }
        for (i, s) in self.scatterers.iter().enumerate() {
            match (s.vbar_inv, s.theta) {
                (Some(v), None) if !v.is_finite() => out.push(format!("scatterer {i}: vbar_inv must be finite, got {v}")),
                (Some(_), None) => {}
                (None, Some(t)) if !(t > 0.0 && t < 2.0 * PI) => {
                    out.push(format!("scatterer {i}: theta must lie in (0, 2π), got {t}"))
                }
                (None, Some(_)) => {}
                (Some(_), Some(_)) => out.push(format!("scatterer {i}: give vbar_inv or theta, not both")),
                (None, None) => out.push(format!("scatterer {i}: needs vbar_inv or theta")),
            }
        }
        let w = &self.window;
        match (w.lo, w.hi, w.levels) {
            (Some(lo), Some(hi), None) if !(lo < hi) || !hi.is_finite() || lo.is_nan() => {
                out.push(format!("window lo={lo} must be below hi={hi}"))
            }
            (None, None, Some([a, b])) if a == 0 || b <= a || b > self.accuracy.n_max => {
                out.push(format!("window levels [{a}, {b}] must satisfy 1 <= first < last <= n_max"))
            }
            (Some(_), Some(_), None) | (None, None, Some(_)) | (None, None, None) => {}
            _ => out.push("window needs both lo and hi, or levels, but not both".into()),
        }
        if !(self.solver.tol > 0.0 && self.solver.tol.is_finite()) {
            out.push(format!("solver tol must be positive, got {}", self.solver.tol));
        }
        if self.solver.grid_per_spacing < 8 {
            out.push(format!(
                "solver grid_per_spacing must be at least 8, got {}",
                self.solver.grid_per_spacing
            ));
        }
        if self.stats.bins == 0 {
            out.push("stats bins must be positive".into());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.problems();
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(p))
        }
    }

    pub fn has_window(&self) -> bool {
        self.window.levels.is_some() || (self.window.lo.is_some() && self.window.hi.is_some())
    }
}

// -------------------------------------------------------------- envelope

/// One table cell. Failed sweep rows leave numeric cells empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Bool(bool),
    Text(String),
    Empty(Option<()>),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(v) => v.clone(),
            Cell::Empty(_) => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        if v.is_finite() {
            Cell::Num(v)
        } else {
            Cell::Empty(None)
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultEnvelope {
    pub schema_version: u32,
    pub library_version: String,
    pub command: String,
    pub config: RunConfig,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: BTreeMap<String, Value>,
    pub diagnostics: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<BTreeMap<String, f64>>,
}

impl ResultEnvelope {
    fn new(command: &str, config: &RunConfig, columns: &[&str]) -> Self {
        ResultEnvelope {
            schema_version: SCHEMA_VERSION,
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config: config.clone(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            summary: BTreeMap::new(),
            diagnostics: BTreeMap::new(),
            timings: None,
        }
    }

    /// Index of a column by name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of one column (empty cells become NaN).
    pub fn numbers(&self, name: &str) -> Vec<f64> {
        let Some(k) = self.column(name) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .map(|r| match &r[k] {
                Cell::Num(v) => *v,
                Cell::Int(v) => *v as f64,
                _ => f64::NAN,
            })
            .collect()
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("envelope serializes");
                s.push('\n');
                s
            }
            OutputFormat::Csv => self.render_csv(),
        }
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# schema_version={}", self.schema_version);
        let _ = writeln!(out, "# generator=point-billiard {}", self.library_version);
        let _ = writeln!(out, "# command={}", self.command);
        let _ = writeln!(out, "# config:");
        for line in self.config.to_toml().lines() {
            let _ = writeln!(out, "#   {line}");
        }
        for (k, v) in &self.summary {
            let _ = writeln!(out, "# summary.{k}={v}");
        }
        for (k, v) in &self.diagnostics {
            let _ = writeln!(out, "# diagnostics.{k}={v}");
        }
        if let Some(t) = &self.timings {
            for (k, v) in t {
                let _ = writeln!(out, "# timings.{k}={v}");
            }
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("flush")).expect("utf-8"));
        out
    }
}

// -------------------------------------------------------------- commands

/// Validated inputs shared by the commands.
pub struct Prepared {
    pub spec: BilliardSpec,
    pub table: Arc<ModeTable>,
    pub greens: Greens,
    pub accuracy: GreensAccuracy,
    pub window: Option<EnergyWindow>,
    pub options: SolverOptions,
}

impl Prepared {
    pub fn window(&self) -> Result<EnergyWindow> {
        self.window
            .ok_or_else(|| Error::Config(vec!["an energy window is required ([window] or --window)".into()]))
    }
}

pub fn prepare(config: &RunConfig) -> Result<Prepared> {
    config.validate()?;
    let spec = config.spec();
    let accuracy = config.accuracy();
    let table = Arc::new(ModeTable::lowest(spec, accuracy.n_max)?);
    let positions: Vec<Point> = config.scatterers.iter().map(|s| Point::new(s.x, s.y)).collect();
    let placeholder = ScattererSet::new(positions, vec![0.0; config.scatterers.len()], config.lambda);
    let base = Greens::new(table.clone(), placeholder)?;
    let mut inverse = Vec::with_capacity(config.scatterers.len());
    for (i, s) in config.scatterers.iter().enumerate() {
        inverse.push(match (s.vbar_inv, s.theta) {
            (Some(v), _) => v,
            (None, Some(t)) => vbar_from_theta(&base, ThetaParameter::new(t)?, i, &accuracy)?.value,
            (None, None) => unreachable!("validated"),
        });
    }
    let greens = base.with_inverse_couplings(inverse)?;
    let window = match (config.window.lo, config.window.hi, config.window.levels) {
        (Some(lo), Some(hi), _) => Some(EnergyWindow::new(lo, hi)?),
        (_, _, Some([a, b])) => Some(EnergyWindow::from_levels(&table, a, b)?),
        _ => None,
    };
    Ok(Prepared {
        spec,
        table,
        greens,
        accuracy,
        window,
        options: config.solver_options(),
    })
}

fn level_kind_name(kind: solver::LevelKind) -> &'static str {
    match kind {
        solver::LevelKind::BetweenPoles => "between-poles",
        solver::LevelKind::BelowGround => "below-ground",
        solver::LevelKind::Unshifted => "unshifted",
    }
}

fn truncation_estimate(p: &Prepared, omega: f64) -> Option<f64> {
    (0..p.greens.len())
        .filter_map(|i| p.greens.g_bar(i, omega, &p.accuracy).ok())
        .map(|s| s.error_estimate)
        .reduce(f64::max)
}

/// Perturbed levels in the window.
pub fn cmd_spectrum(config: &RunConfig) -> Result<ResultEnvelope> {
    let p = prepare(config)?;
    let window = p.window()?;
    let result = solver::solve(&p.greens, &window, &p.accuracy, &p.options)?;
    let mut env = ResultEnvelope::new(
        "spectrum",
        config,
        &["index", "omega", "bracket_lo", "bracket_hi", "kind", "residual", "multiplicity"],
    );
    for (k, level) in result.levels.iter().enumerate() {
        env.rows.push(vec![
            Cell::from(k + 1),
            level.omega.into(),
            level.bracket.0.into(),
            level.bracket.1.into(),
            level_kind_name(level.kind).into(),
            level.residual.into(),
            level.multiplicity.into(),
        ]);
    }
    env.summary.insert("levels".into(), json!(result.eigenvalues().len()));
    env.summary.insert("scatterers".into(), json!(p.greens.len()));
    env.summary.insert("window_lo".into(), json!(window.lo));
    env.summary.insert("window_hi".into(), json!(window.hi));
    let d = &result.diagnostics;
    env.diagnostics.insert("gaps_searched".into(), json!(d.gaps_searched));
    env.diagnostics.insert("max_residual".into(), json!(d.max_residual));
    env.diagnostics.insert("grid_refinements".into(), json!(d.grid_refinements));
    env.diagnostics.insert("pole_conflicts".into(), json!(d.pole_conflicts));
    env.diagnostics.insert("notes".into(), json!(d.notes));
    if let Some(err) = truncation_estimate(&p, window.center()) {
        env.diagnostics.insert("truncation_error".into(), json!(err));
    }
    let warnings = p.greens.scatterers().symmetry_warnings(&p.spec);
    env.diagnostics.insert("symmetry_warnings".into(), json!(warnings));
    Ok(env)
}

/// Reads the levels (with multiplicity) from a `spectrum` output file.
pub fn read_levels(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_levels(&text)
}

pub fn parse_levels(text: &str) -> Result<Vec<f64>> {
    let bad = |m: String| Error::Config(vec![m]);
    let (omegas, mults): (Vec<f64>, Vec<usize>) = if text.trim_start().starts_with('{') {
        let env: ResultEnvelope = serde_json::from_str(text).map_err(|e| bad(format!("levels file: {e}")))?;
        if env.command != "spectrum" {
            return Err(bad(format!("levels file holds `{}` output, not `spectrum`", env.command)));
        }
        let o = env.numbers("omega");
        let m = env.numbers("multiplicity").iter().map(|&x| x as usize).collect();
        (o, m)
    } else {
        let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let headers = reader.headers().map_err(|e| bad(format!("levels file: {e}")))?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| bad(format!("levels file has no `{name}` column")))
        };
        let (co, cm) = (col("omega")?, col("multiplicity")?);
        let mut o = Vec::new();
        let mut m = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| bad(format!("levels file: {e}")))?;
            o.push(rec[co].parse::<f64>().map_err(|e| bad(format!("omega `{}`: {e}", &rec[co])))?);
            m.push(rec[cm].parse::<usize>().map_err(|e| bad(format!("multiplicity `{}`: {e}", &rec[cm])))?);
        }
        (o, m)
    };
    let mut levels: Vec<f64> = omegas
        .iter()
        .zip(&mults)
        .flat_map(|(&o, &m)| std::iter::repeat_n(o, m))
        .collect();
    levels.sort_by(f64::total_cmp);
    Ok(levels)
}

fn stats_report(
    config: &RunConfig,
    p: &Prepared,
    levels: &[f64],
    window_center: f64,
) -> Result<ResultEnvelope> {
    let kept = stats::exclude_lowest(levels, &p.table, config.stats.exclude_levels);
    if kept.len() < MIN_STATS_LEVELS {
        return Err(Error::InsufficientSample {
            needed: MIN_STATS_LEVELS,
            got: kept.len(),
        });
    }
    let u = stats::unfold(&kept, &p.spec)?;
    let hist = stats::spacing_distribution(&u, config.stats.bins)?;
    let cmp = stats::compare_references(&u)?;
    let mut env = ResultEnvelope::new(
        "stats",
        config,
        &["bin_lo", "bin_hi", "count", "density", "poisson", "goe"],
    );
    for k in 0..hist.counts.len() {
        let mid = 0.5 * (hist.edges[k] + hist.edges[k + 1]);
        env.rows.push(vec![
            hist.edges[k].into(),
            hist.edges[k + 1].into(),
            hist.counts[k].into(),
            hist.densities[k].into(),
            stats::reference_pdf(ReferenceKind::Poisson, mid)?.into(),
            stats::reference_pdf(ReferenceKind::Goe, mid)?.into(),
        ]);
    }
    env.summary.insert("levels_used".into(), json!(kept.len()));
    env.summary.insert("spacings".into(), json!(cmp.spacings));
    env.summary.insert("ks_poisson".into(), json!(cmp.ks_poisson));
    env.summary.insert("ks_goe".into(), json!(cmp.ks_goe));
    env.summary.insert("closer_to".into(), json!(cmp.closer_to.name()));
    if window_center > 0.0 {
        let pred = stats::predict_strong_coupling(p.greens.scatterers(), &p.spec, window_center)?;
        env.summary.insert("band_omega".into(), json!(pred.omega));
        env.summary.insert("band_vbar_inv_star".into(), json!(pred.vbar_inv_star));
        env.summary.insert("band_half_width".into(), json!(pred.half_width));
        env.summary.insert("in_strong_band".into(), json!(pred.in_strong_band));
    }
    if let Some(w) = hist.warning {
        env.diagnostics.insert("warning".into(), json!(w));
    }
    env.diagnostics.insert("excluded_levels".into(), json!(config.stats.exclude_levels));
    Ok(env)
}

/// Spacing statistics of a spectrum, from `input` or solved inline.
pub fn cmd_stats(config: &RunConfig, input: Option<&Path>) -> Result<ResultEnvelope> {
    let p = prepare(config)?;
    let (levels, center) = match input {
        Some(path) => {
            let levels = read_levels(path)?;
            let center = p.window.map(|w| w.center()).unwrap_or_else(|| {
                0.5 * (levels.first().copied().unwrap_or(0.0) + levels.last().copied().unwrap_or(0.0))
            });
            (levels, center)
        }
        None => {
            let window = p.window()?;
            let r = solver::solve(&p.greens, &window, &p.accuracy, &p.options)?;
            (r.eigenvalues(), window.center())
        }
    };
    stats_report(config, &p, &levels, center)
}

/// Spacing statistics for each inverse coupling in `grid`, applied to every
/// scatterer. Rows are computed concurrently; failures are recorded per row.
pub fn cmd_sweep(config: &RunConfig, grid: &[f64]) -> Result<ResultEnvelope> {
    let grid: Vec<f64> = if grid.is_empty() {
        config.sweep.vbar_inv.clone()
    } else {
        grid.to_vec()
    };
    if grid.is_empty() {
        return Err(Error::Config(vec!["sweep grid is empty ([sweep] vbar_inv or --grid)".into()]));
    }
    if let Some(v) = grid.iter().find(|v| !v.is_finite()) {
        return Err(Error::Config(vec![format!("sweep value {v} is not finite")]));
    }
    let p = prepare(config)?;
    if p.greens.is_empty() {
        return Err(Error::Config(vec!["sweep needs at least one scatterer".into()]));
    }
    let window = p.window()?;
    let rows: Vec<std::result::Result<stats::ReferenceComparison, String>> = grid
        .par_iter()
        .map(|&v| {
            let g = p
                .greens
                .with_inverse_couplings(vec![v; p.greens.len()])
                .map_err(|e| e.to_string())?;
            let r = solver::solve(&g, &window, &p.accuracy, &p.options).map_err(|e| e.to_string())?;
            let kept = stats::exclude_lowest(&r.eigenvalues(), &p.table, config.stats.exclude_levels);
            if kept.len() < MIN_STATS_LEVELS {
                return Err(Error::InsufficientSample {
                    needed: MIN_STATS_LEVELS,
                    got: kept.len(),
                }
                .to_string());
            }
            let u = stats::unfold(&kept, &p.spec).map_err(|e| e.to_string())?;
            stats::compare_references(&u).map_err(|e| e.to_string())
        })
        .collect();
    let mut env = ResultEnvelope::new(
        "sweep",
        config,
        &["vbar_inv", "spacings", "ks_poisson", "ks_goe", "closer_to", "error"],
    );
    let mut failures = 0;
    for (v, row) in grid.iter().zip(rows) {
        env.rows.push(match row {
            Ok(c) => vec![
                (*v).into(),
                c.spacings.into(),
                c.ks_poisson.into(),
                c.ks_goe.into(),
                c.closer_to.name().into(),
                Cell::Empty(None),
            ],
            Err(e) => {
                failures += 1;
                vec![(*v).into(), Cell::Empty(None), Cell::Empty(None), Cell::Empty(None), Cell::Empty(None), e.as_str().into()]
            }
        });
    }
    let center = window.center();
    if center > 0.0 {
        env.summary
            .insert("band_vbar_inv_star".into(), json!(stats::band_center(&p.spec, config.lambda, center)));
        env.summary.insert("band_half_width".into(), json!(PI * p.spec.mass / 4.0));
    }
    env.summary.insert("rows".into(), json!(grid.len()));
    env.diagnostics.insert("failed_rows".into(), json!(failures));
    Ok(env)
}

/// Inflection points of `Ḡ` in each gap of the window (single scatterer).
pub fn cmd_survey(config: &RunConfig) -> Result<ResultEnvelope> {
    let p = prepare(config)?;
    let window = p.window()?;
    let survey = stats::gbar_inflection_survey(&p.greens, &window, &p.accuracy)?;
    let mut env = ResultEnvelope::new(
        "survey",
        config,
        &["gap_lo", "gap_hi", "omega_tilde", "g_bar", "log_law", "abs_derivative"],
    );
    for r in &survey.rows {
        env.rows.push(vec![
            r.gap_lo.into(),
            r.gap_hi.into(),
            r.omega_tilde.into(),
            r.g_bar.into(),
            r.log_law.into(),
            r.abs_derivative.into(),
        ]);
    }
    env.summary.insert("gaps".into(), json!(survey.rows.len()));
    if let Some(m) = survey.median_log_offset() {
        env.summary.insert("median_log_offset".into(), json!(m));
    }
    if let Some(m) = survey.median_width(&p.spec) {
        env.summary.insert("median_width".into(), json!(m));
        env.summary.insert("width_estimate".into(), json!(PI * p.spec.mass / 2.0));
    }
    if let Some(m) = survey.median_midpoint_offset() {
        env.summary.insert("median_midpoint_offset".into(), json!(m));
    }
    env.diagnostics.insert("notes".into(), json!(survey.notes));
    Ok(env)
}

/// Strong-coupling band at `omega` (default: window centre).
pub fn cmd_predict(config: &RunConfig, omega: Option<f64>) -> Result<ResultEnvelope> {
    let p = prepare(config)?;
    let omega = match omega {
        Some(w) => w,
        None => p.window()?.center(),
    };
    let pred = stats::predict_strong_coupling(p.greens.scatterers(), &p.spec, omega)?;
    let mut env = ResultEnvelope::new(
        "predict",
        config,
        &["index", "x", "y", "vbar_inv", "detuning", "in_strong_band", "band_omega_lo", "band_omega_hi"],
    );
    let set = p.greens.scatterers();
    for (i, (pos, &v)) in set.positions.iter().zip(&set.inverse_couplings).enumerate() {
        let (lo, hi) = stats::band_energy_range(&p.spec, set.lambda, v);
        env.rows.push(vec![
            Cell::from(i),
            pos.x.into(),
            pos.y.into(),
            v.into(),
            (v - pred.vbar_inv_star).into(),
            pred.in_strong_band[i].into(),
            lo.into(),
            hi.into(),
        ]);
    }
    env.summary.insert("omega".into(), json!(pred.omega));
    env.summary.insert("vbar_inv_star".into(), json!(pred.vbar_inv_star));
    env.summary.insert("half_width".into(), json!(pred.half_width));
    Ok(env)
}

// ------------------------------------------------------------------ args

#[derive(Debug, Parser)]
#[command(name = "point-billiard", version, about = "Spectra of rectangular billiards with point scatterers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// TOML run configuration
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Energy window, overriding the config
    #[arg(long, global = true, value_name = "LO:HI", allow_hyphen_values = true)]
    pub window: Option<String>,
    /// Number of unperturbed modes in every series
    #[arg(long, global = true, value_name = "K")]
    pub nmax: Option<usize>,
    /// Absolute root tolerance
    #[arg(long, global = true, value_name = "T")]
    pub tol: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true, value_name = "W")]
    pub workers: Option<usize>,
    /// Output file (default: stdout)
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Include wall-clock timings (makes output non-reproducible)
    #[arg(long, global = true)]
    pub timings: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Perturbed eigenvalues in the window
    Spectrum,
    /// Spacing distribution and distances to the Poisson and GOE laws
    Stats {
        /// Levels from an earlier `spectrum` run (CSV or JSON)
        #[arg(long, value_name = "PATH")]
        input: Option<PathBuf>,
    },
    /// Statistics over a grid of inverse couplings
    Sweep {
        /// `a,b,c` or `LO:HI:COUNT`
        #[arg(long, value_name = "GRID", allow_hyphen_values = true)]
        grid: Option<String>,
    },
    /// Inflection points of the regularized Green's function
    Survey,
    /// Strong-coupling band for each scatterer
    Predict {
        #[arg(long)]
        omega: Option<f64>,
    },
}

pub fn parse_window(text: &str) -> Result<(f64, f64)> {
    let bad = || Error::Config(vec![format!("--window expects LO:HI, got `{text}`")]);
    let (a, b) = text.split_once(':').ok_or_else(bad)?;
    let lo = a.trim().parse::<f64>().map_err(|_| bad())?;
    let hi = b.trim().parse::<f64>().map_err(|_| bad())?;
    Ok((lo, hi))
}

pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(vec![format!("--grid expects a,b,c or LO:HI:COUNT, got `{text}`")]);
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let lo = parts[0].trim().parse::<f64>().map_err(|_| bad())?;
        let hi = parts[1].trim().parse::<f64>().map_err(|_| bad())?;
        let n = parts[2].trim().parse::<usize>().map_err(|_| bad())?;
        return Ok(match n {
            0 => Vec::new(),
            1 => vec![lo],
            _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
        });
    }
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
        .collect()
}

/// Loads the config file (if any) and applies the command-line overrides.
pub fn resolve_config(common: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(w) = &common.window {
        let (lo, hi) = parse_window(w)?;
        cfg.window = WindowSection {
            lo: Some(lo),
            hi: Some(hi),
            levels: None,
        };
    }
    if let Some(n) = common.nmax {
        cfg.accuracy.n_max = n;
    }
    if let Some(t) = common.tol {
        cfg.solver.tol = t;
    }
    if let Some(f) = common.format {
        cfg.output.format = f;
    }
    if let Some(o) = &common.out {
        cfg.output.path = Some(o.clone());
    }
    Ok(cfg)
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => EXIT_IO,
        e if e.is_validation() => EXIT_VALIDATION,
        _ => EXIT_NUMERICAL,
    }
}

/// Runs one command and returns the rendered output.
pub fn execute(cli: &Cli) -> Result<(RunConfig, String)> {
    let cfg = resolve_config(&cli.common)?;
    let workers = cli.common.workers.unwrap_or(0);
    if cli.common.workers == Some(0) {
        return Err(Error::Config(vec!["--workers must be at least 1".into()]));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(vec![format!("thread pool: {e}")]))?;
    let started = Instant::now();
    let mut env = pool.install(|| match &cli.command {
        Command::Spectrum => cmd_spectrum(&cfg),
        Command::Stats { input } => cmd_stats(&cfg, input.as_deref()),
        Command::Sweep { grid } => {
            let g = grid.as_deref().map(parse_grid).transpose()?.unwrap_or_default();
            cmd_sweep(&cfg, &g)
        }
        Command::Survey => cmd_survey(&cfg),
        Command::Predict { omega } => cmd_predict(&cfg, *omega),
    })?;
    if cli.common.timings {
        let mut t = BTreeMap::new();
        t.insert("total_seconds".to_string(), started.elapsed().as_secs_f64());
        env.timings = Some(t);
    }
    let text = env.render(cfg.output.format);
    Ok((cfg, text))
}

/// Entry point for the binary: parses arguments, runs, writes, and maps
/// errors to exit codes.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok((cfg, text)) => {
            let written = match &cfg.output.path {
                Some(path) => std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
                None => {
                    use std::io::Write;
                    std::io::stdout().write_all(text.as_bytes()).map_err(Error::from)
                }
            };
            match written {
                Ok(()) => EXIT_OK,
                Err(e) => {
                    eprintln!("error: {e}");
                    exit_code(&e)
                }
            }
        }
        Err(Error::Config(problems)) => {
            eprintln!("error: invalid configuration");
            for p in &problems {
                eprintln!("  - {p}");
            }
            EXIT_VALIDATION
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
