//! The JSON run configuration and its command-line overrides.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use conformal_core::corrector::{CorrectionOptions, SplineKind, DEFAULT_SLOPE_FLOOR, MAX_RETRIES};
use conformal_core::mapper::{MapOptions, DEFAULT_DELTA_RIM, DEFAULT_NQ, DEFAULT_NQ_SPLINE};
use conformal_core::pipeline::{DEFAULT_CORNER_THRESHOLD, DEFAULT_GRID, DEFAULT_ORDER};
use conformal_core::BoundarySpec;
use serde::{Deserialize, Serialize};

use crate::failure::Failure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BoundaryInput {
    /// Path to a boundary spec file, relative to the config file.
    File { file: PathBuf },
    Inline(BoundarySpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CornerMode {
    /// Corners listed in the boundary spec, else detected from speed dips.
    Auto,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerEntry {
    pub t0: f64,
    pub lambda: f64,
    /// Overrides the run-wide spline kind for this corner.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spline: Option<SplineKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CornerConfig {
    Mode(CornerMode),
    List(Vec<CornerEntry>),
}

impl Default for CornerConfig {
    fn default() -> Self {
        CornerConfig::Mode(CornerMode::Auto)
    }
}

/// Polar evaluation grid: the centre plus `radii x angles` points with radii
/// evenly spaced up to `max_radius`, followed by any explicit `points`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub radii: usize,
    pub angles: usize,
    pub max_radius: f64,
    pub points: Vec<[f64; 2]>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { radii: 8, angles: 64, max_radius: 0.9, points: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LevelLineSpec {
    pub radii: Vec<f64>,
    pub rays: usize,
    pub points: usize,
}

impl Default for LevelLineSpec {
    fn default() -> Self {
        Self { radii: vec![0.25, 0.5, 0.75, 0.99], rays: 16, points: 256 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub boundary: BoundaryInput,
    #[serde(rename = "M", default = "default_order")]
    pub order: usize,
    #[serde(rename = "N", default = "default_grid")]
    pub grid: usize,
    #[serde(rename = "Nq", default = "default_nq")]
    pub nq: usize,
    #[serde(rename = "Nq_spline", default = "default_nq_spline")]
    pub nq_spline: usize,
    #[serde(default)]
    pub corners: CornerConfig,
    #[serde(default = "default_corner_threshold")]
    pub corner_threshold: f64,
    #[serde(default = "default_spline")]
    pub spline: SplineKind,
    /// Whether folds at acute corners are repaired.
    #[serde(default = "default_true")]
    pub correction: bool,
    #[serde(default = "default_slope_floor")]
    pub slope_floor: f64,
    #[serde(default = "default_delta_rim")]
    pub delta_rim: f64,
    /// Largest accepted `|f(0)|`.
    #[serde(default = "default_f0_tolerance")]
    pub f0_tolerance: f64,
    /// Optional ceiling on the near-rim deviation outside corner arcs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_boundary_dev: Option<f64>,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub map_grid: GridSpec,
    #[serde(default)]
    pub level_lines: LevelLineSpec,
    /// Write the kernel grid as CSV during `solve`.
    #[serde(default)]
    pub dump_kernel: bool,
}

fn default_order() -> usize {
    DEFAULT_ORDER
}
fn default_grid() -> usize {
    DEFAULT_GRID
}
fn default_nq() -> usize {
    DEFAULT_NQ
}
fn default_nq_spline() -> usize {
    DEFAULT_NQ_SPLINE
}
fn default_corner_threshold() -> f64 {
    DEFAULT_CORNER_THRESHOLD
}
fn default_spline() -> SplineKind {
    SplineKind::Cubic
}
fn default_true() -> bool {
    true
}
fn default_slope_floor() -> f64 {
    DEFAULT_SLOPE_FLOOR
}
fn default_delta_rim() -> f64 {
    DEFAULT_DELTA_RIM
}
fn default_f0_tolerance() -> f64 {
    1e-3
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Flags that override config fields.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Truncation order of the solution
    #[arg(long = "M")]
    pub order: Option<usize>,
    /// Kernel grid size (power of two)
    #[arg(long = "N")]
    pub grid: Option<usize>,
    /// Quadrature nodes for the Cauchy integral
    #[arg(long = "Nq")]
    pub nq: Option<usize>,
    /// Spline kind used for fold repair
    #[arg(long)]
    pub spline: Option<SplineKind>,
    #[arg(long = "slope-floor")]
    pub slope_floor: Option<f64>,
    #[arg(long = "delta-rim")]
    pub delta_rim: Option<f64>,
    #[arg(long = "out-dir")]
    pub out_dir: Option<PathBuf>,
    /// Skip fold repair even when acute corners are present
    #[arg(long = "no-correction")]
    pub no_correction: bool,
    /// Dump the kernel grid as CSV during solve
    #[arg(long = "dump-kernel")]
    pub dump_kernel: bool,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, Failure> {
        serde_json::from_str(text).context("cannot parse run config").map_err(Failure::config)
    }

    /// Reads a config file; a boundary given by file name is resolved
    /// relative to the config's directory.
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))
            .map_err(Failure::config)?;
        let mut config = Self::from_json(&text)?;
        if let BoundaryInput::File { file } = &mut config.boundary {
            if file.is_relative() {
                if let Some(dir) = path.parent() {
                    *file = dir.join(&*file);
                }
            }
        }
        Ok(config)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.order {
            self.order = v;
        }
        if let Some(v) = o.grid {
            self.grid = v;
        }
        if let Some(v) = o.nq {
            self.nq = v;
        }
        if let Some(v) = o.spline {
            self.spline = v;
        }
        if let Some(v) = o.slope_floor {
            self.slope_floor = v;
        }
        if let Some(v) = o.delta_rim {
            self.delta_rim = v;
        }
        if let Some(v) = &o.out_dir {
            self.out_dir = v.clone();
        }
        if o.no_correction {
            self.correction = false;
        }
        if o.dump_kernel {
            self.dump_kernel = true;
        }
    }

    pub fn validate(&self) -> Result<(), Failure> {
        let bad = |m: String| Err(Failure::config(anyhow::anyhow!("invalid config: {m}")));
        if self.order == 0 || self.grid == 0 || self.nq == 0 || self.nq_spline == 0 {
            return bad("M, N, Nq and Nq_spline must be positive".into());
        }
        if self.order > self.grid / 4 {
            return bad(format!("M = {} exceeds N/4 = {}", self.order, self.grid / 4));
        }
        if self.nq < 2 || self.nq_spline < 2 {
            return bad("Nq and Nq_spline must be at least 2".into());
        }
        if !(self.slope_floor > 0.0 && self.slope_floor.is_finite()) {
            return bad(format!("slope_floor {} must be positive", self.slope_floor));
        }
        if !(self.delta_rim > 0.0 && self.delta_rim < 1.0) {
            return bad(format!("delta_rim {} not in (0, 1)", self.delta_rim));
        }
        if !(self.corner_threshold > 0.0) {
            return bad(format!("corner_threshold {} must be positive", self.corner_threshold));
        }
        if !(self.f0_tolerance > 0.0) {
            return bad(format!("f0_tolerance {} must be positive", self.f0_tolerance));
        }
        if !(self.map_grid.max_radius >= 0.0 && self.map_grid.max_radius < 1.0) {
            return bad(format!("map_grid.max_radius {} not in [0, 1)", self.map_grid.max_radius));
        }
        if self.level_lines.points == 0 {
            return bad("level_lines.points must be positive".into());
        }
        Ok(())
    }

    pub fn map_options(&self) -> MapOptions {
        MapOptions { nq: self.nq, nq_spline: self.nq_spline, delta_rim: self.delta_rim }
    }

    pub fn correction_options(&self, kind: Option<SplineKind>) -> CorrectionOptions {
        CorrectionOptions {
            kind: kind.unwrap_or(self.spline),
            slope_floor: self.slope_floor,
            max_retries: MAX_RETRIES,
        }
    }

    /// Config with all defaults around the given boundary.
    pub fn with_boundary(boundary: BoundaryInput) -> Self {
        Self {
            boundary,
            order: DEFAULT_ORDER,
            grid: DEFAULT_GRID,
            nq: DEFAULT_NQ,
            nq_spline: DEFAULT_NQ_SPLINE,
            corners: CornerConfig::default(),
            corner_threshold: DEFAULT_CORNER_THRESHOLD,
            spline: SplineKind::Cubic,
            correction: true,
            slope_floor: DEFAULT_SLOPE_FLOOR,
            delta_rim: DEFAULT_DELTA_RIM,
            f0_tolerance: default_f0_tolerance(),
            max_boundary_dev: None,
            out_dir: default_out_dir(),
            map_grid: GridSpec::default(),
            level_lines: LevelLineSpec::default(),
            dump_kernel: false,
        }
    }
}
