//! The four subcommands. Each writes its artifacts into the output directory
//! and returns the exit status the process should end with.

use std::f64::consts::TAU;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use conformal_core::corrector::{self, CorrectionRecord, CorrectionStatus, MonotonicityReport, SCAN_POINTS};
use conformal_core::fredholm::{self, BoundaryCorrespondence, FredholmSolution, RawCorrespondence};
use conformal_core::mapper::{DiskMap, LineFamily, MapReport, VerifyOptions};
use conformal_core::{AnglePoint, BoundarySpec, CorrectedCorrespondence, TrigBoundary};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{BoundaryInput, CornerConfig, CornerMode, RunConfig};
use crate::failure::{Exit, Failure, Stage};

/// Allowed deviation of `theta(2pi) - theta(0)` from `2pi`.
pub const INCREMENT_TOLERANCE: f64 = 1e-9;

pub const SOLUTION_FILE: &str = "solution.json";
pub const CORRECTION_FILE: &str = "correction.json";
pub const GRID_FILE: &str = "grid.csv";
pub const LEVEL_LINES_FILE: &str = "level_lines.csv";
pub const MAP_REPORT_FILE: &str = "report.json";
pub const MAP_ERRORS_FILE: &str = "map_errors.json";
pub const VERIFY_FILE: &str = "verify.json";
pub const BOUNDARY_FILE: &str = "boundary.json";
pub const FIT_REPORT_FILE: &str = "fit_report.json";

fn io_failure(e: std::io::Error, path: &Path) -> Failure {
    Failure::config(anyhow::Error::new(e).context(format!("cannot write {}", path.display())))
}

fn prepare_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| io_failure(e, dir))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("serializable output");
    fs::write(path, text + "\n").map_err(|e| io_failure(e, path))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| io_failure(e, path))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> Result<T, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {what} {}", path.display()))
        .map_err(Failure::config)?;
    serde_json::from_str(&text)
        .with_context(|| format!("cannot parse {what} {}", path.display()))
        .map_err(Failure::config)
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SampleFile {
    Bare(Vec<[f64; 2]>),
    Wrapped { samples: Vec<[f64; 2]> },
}

/// Reads boundary samples from JSON (`[[x, y], ...]` or `{"samples": ...}`)
/// or from CSV lines `x,y` (a non-numeric header line is skipped).
pub fn read_samples(path: &Path) -> Result<Vec<Complex64>, Failure> {
    let pairs = if path.extension().is_some_and(|e| e == "csv") {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read samples {}", path.display()))
            .map_err(Failure::config)?;
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed = match fields.as_slice() {
                [x, y] => x.parse::<f64>().ok().zip(y.parse::<f64>().ok()),
                _ => None,
            };
            match parsed {
                Some((x, y)) => pairs.push([x, y]),
                None if i == 0 => {}
                None => {
                    return Err(Failure::config(anyhow::anyhow!(
                        "{}:{}: expected 'x,y', found '{line}'",
                        path.display(),
                        i + 1
                    )))
                }
            }
        }
        pairs
    } else {
        match read_json::<SampleFile>(path, "samples")? {
            SampleFile::Bare(p) | SampleFile::Wrapped { samples: p } => p,
        }
    };
    Ok(pairs.into_iter().map(|[x, y]| Complex64::new(x, y)).collect())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FitSummary {
    pub m: usize,
    pub n: usize,
    pub samples: usize,
    pub residual: f64,
    pub corners: Vec<AnglePoint>,
}

/// Fits a trigonometric boundary to samples and writes its coefficient spec.
pub fn fit_boundary(samples: &Path, m: usize, n: usize, out_dir: &Path) -> Result<Exit, Failure> {
    let points = read_samples(samples)?;
    let fit = TrigBoundary::fit_from_samples(&points, m, n).stage("boundary")?;
    let corners = fit
        .boundary
        .detect_corners(conformal_core::pipeline::DEFAULT_CORNER_THRESHOLD)
        .stage("boundary")?;
    prepare_dir(out_dir)?;
    write_json(&out_dir.join(BOUNDARY_FILE), &BoundarySpec::from_boundary(&fit.boundary))?;
    let summary = FitSummary { m, n, samples: points.len(), residual: fit.residual, corners };
    write_json(&out_dir.join(FIT_REPORT_FILE), &summary)?;
    println!("fit residual = {:.6e} ({} samples, m={m}, n={n})", fit.residual, points.len());
    for c in &summary.corners {
        println!("near-corner at t0 = {:.6}, lambda = {:.4}", c.t0, c.lambda);
    }
    Ok(Exit::Success)
}

/// Boundary and per-corner correction settings resolved from a config.
pub struct Prepared {
    pub boundary: TrigBoundary,
    pub fit_residual: f64,
    pub corners: Vec<(AnglePoint, conformal_core::corrector::CorrectionOptions)>,
}

pub fn prepare(config: &RunConfig) -> Result<Prepared, Failure> {
    config.validate()?;
    let spec = match &config.boundary {
        BoundaryInput::Inline(spec) => spec.clone(),
        BoundaryInput::File { file } => read_json(file, "boundary spec")?,
    };
    let fit = spec.build().stage("boundary")?;
    let corners = match &config.corners {
        CornerConfig::Mode(CornerMode::None) => Vec::new(),
        CornerConfig::Mode(CornerMode::Auto) => {
            let points = match &spec.corners {
                Some(listed) => listed.clone(),
                None => fit.boundary.detect_corners(config.corner_threshold).stage("boundary")?,
            };
            points.into_iter().map(|p| (p, config.correction_options(None))).collect()
        }
        CornerConfig::List(entries) => entries
            .iter()
            .map(|e| Ok((AnglePoint::new(e.t0, e.lambda)?, config.correction_options(e.spline))))
            .collect::<conformal_core::Result<Vec<_>>>()
            .stage("boundary")?,
    };
    Ok(Prepared { boundary: fit.boundary, fit_residual: fit.residual, corners })
}

pub fn build_correspondence(
    config: &RunConfig,
    prepared: &Prepared,
    solution: &FredholmSolution,
) -> Result<(BoundaryCorrespondence, Vec<CorrectionRecord>), Failure> {
    let raw = RawCorrespondence::new(&prepared.boundary, solution).stage("fredholm")?;
    if !config.correction {
        return Ok((BoundaryCorrespondence::Raw(raw), Vec::new()));
    }
    let (corrected, records): (CorrectedCorrespondence, _) =
        corrector::correct_each(&raw, &prepared.corners).stage("corrector")?;
    Ok((BoundaryCorrespondence::Corrected(corrected), records))
}

fn monotone_ok(report: &MonotonicityReport) -> bool {
    report.strictly_increasing && (report.increment - TAU).abs() <= INCREMENT_TOLERANCE
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CorrectionReport {
    /// `corrected` when at least one spline was fitted, `no_fold` when none
    /// was needed, `disabled` when correction was switched off.
    pub status: String,
    pub corners: Vec<CorrectionRecord>,
    pub monotonicity: MonotonicityReport,
}

fn correction_report(config: &RunConfig, records: Vec<CorrectionRecord>, monotonicity: MonotonicityReport) -> CorrectionReport {
    let status = if !config.correction {
        "disabled"
    } else if records.iter().any(|r| r.status == CorrectionStatus::Corrected) {
        "corrected"
    } else {
        "no_fold"
    };
    CorrectionReport { status: status.into(), corners: records, monotonicity }
}

/// Solves for the boundary correspondence, repairs folds and writes the
/// solution and correction report.
pub fn solve(config: &RunConfig) -> Result<Exit, Failure> {
    let prepared = prepare(config)?;
    let system = fredholm::assemble_system(&prepared.boundary, config.order, config.grid).stage("kernels")?;
    prepare_dir(&config.out_dir)?;
    if config.dump_kernel {
        let path = config.out_dir.join("kernel_k.csv");
        system.grid.write_k_csv(create(&path)?).map_err(|e| io_failure(e, &path))?;
        let path = config.out_dir.join("kernel_p.csv");
        system.grid.write_p_csv(create(&path)?).map_err(|e| io_failure(e, &path))?;
    }
    let solution = fredholm::solve(&system).stage("fredholm")?;
    write_json(&config.out_dir.join(SOLUTION_FILE), &solution)?;

    let (correspondence, records) = build_correspondence(config, &prepared, &solution)?;
    let monotonicity = corrector::monotonicity(&correspondence, SCAN_POINTS);
    let ok = monotone_ok(&monotonicity);
    let report = correction_report(config, records, monotonicity);
    write_json(&config.out_dir.join(CORRECTION_FILE), &report)?;

    println!("M = {}, N = {}, residual = {:.3e}", solution.order, config.grid, solution.residual_norm);
    for r in &report.corners {
        println!("corner t0 = {:.6}: {:?}", r.t0, r.status);
    }
    if ok {
        println!("correspondence is strictly increasing ({})", report.status);
        Ok(Exit::Success)
    } else {
        eprintln!(
            "correspondence is not monotone: min step {:.3e}, folds near t = {:?}",
            report.monotonicity.min_step, report.monotonicity.folds
        );
        Ok(Exit::Invariant)
    }
}

fn load_solution(config: &RunConfig, path: Option<&Path>) -> Result<FredholmSolution, Failure> {
    let path: PathBuf = path.map(Path::to_path_buf).unwrap_or_else(|| config.out_dir.join(SOLUTION_FILE));
    if !path.exists() {
        return Err(Failure::config(anyhow::anyhow!(
            "solution {} not found; run `solve` first",
            path.display()
        )));
    }
    read_json(&path, "solution")
}

fn disk_map(config: &RunConfig, solution: Option<&Path>) -> Result<(Prepared, DiskMap, MonotonicityReport), Failure> {
    let prepared = prepare(config)?;
    let solution = load_solution(config, solution)?;
    let (correspondence, _) = build_correspondence(config, &prepared, &solution)?;
    let monotonicity = corrector::monotonicity(&correspondence, SCAN_POINTS);
    let map = DiskMap::new(&correspondence, config.map_options()).stage("mapper")?;
    Ok((prepared, map, monotonicity))
}

fn verify_options(prepared: &Prepared) -> VerifyOptions {
    VerifyOptions {
        corner_parameters: prepared.corners.iter().map(|(p, _)| p.t0).collect(),
        ..VerifyOptions::default()
    }
}

/// The polar grid of a config: the centre, then ring by ring, then extra points.
pub fn grid_points(config: &RunConfig) -> Vec<Complex64> {
    let g = &config.map_grid;
    let mut points = vec![Complex64::new(0.0, 0.0)];
    for i in 1..=g.radii {
        let r = g.max_radius * i as f64 / g.radii as f64;
        for k in 0..g.angles {
            points.push(Complex64::from_polar(r, TAU * k as f64 / g.angles as f64));
        }
    }
    points.extend(g.points.iter().map(|&[x, y]| Complex64::new(x, y)));
    points
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PointError {
    pub index: usize,
    pub re_zeta: f64,
    pub im_zeta: f64,
    pub error: String,
}

/// Evaluates the map on the configured grid and level lines; writes the grid
/// CSV, level-line CSV, per-point errors and the map report.
pub fn map(config: &RunConfig, solution: Option<&Path>) -> Result<Exit, Failure> {
    let (prepared, map, _) = disk_map(config, solution)?;
    prepare_dir(&config.out_dir)?;

    let points = grid_points(config);
    let values = map.map_grid(&points);
    let path = config.out_dir.join(GRID_FILE);
    let mut out = create(&path)?;
    let mut errors = Vec::new();
    let write_err = |e| io_failure(e, &path);
    writeln!(out, "re_zeta,im_zeta,re_f,im_f").map_err(write_err)?;
    for (index, (z, v)) in points.iter().zip(&values).enumerate() {
        match v {
            Ok(f) => writeln!(out, "{},{},{},{}", z.re, z.im, f.re, f.im).map_err(write_err)?,
            Err(e) => errors.push(PointError { index, re_zeta: z.re, im_zeta: z.im, error: e.to_string() }),
        }
    }
    out.flush().map_err(write_err)?;
    write_json(&config.out_dir.join(MAP_ERRORS_FILE), &errors)?;
    for e in &errors {
        eprintln!("[mapper] grid point {} ({}, {}): {}", e.index, e.re_zeta, e.im_zeta, e.error);
    }

    let spec = &config.level_lines;
    let lines = map.level_lines(&spec.radii, spec.rays, spec.points).stage("mapper")?;
    let path = config.out_dir.join(LEVEL_LINES_FILE);
    let mut out = create(&path)?;
    let write_err = |e| io_failure(e, &path);
    writeln!(out, "family,index,value,point,re,im").map_err(write_err)?;
    for line in &lines {
        let family = match line.family {
            LineFamily::Radius => "radius",
            LineFamily::Angle => "angle",
        };
        for (k, p) in line.points.iter().enumerate() {
            writeln!(out, "{family},{},{},{k},{},{}", line.index, line.value, p.re, p.im).map_err(write_err)?;
        }
    }
    out.flush().map_err(write_err)?;

    let report = map.verify(&verify_options(&prepared));
    write_json(&config.out_dir.join(MAP_REPORT_FILE), &report)?;
    println!(
        "mapped {} of {} grid points; |f(0)| = {:.3e}, winding = {}, boundary_dev = {:.3e}",
        points.len() - errors.len(),
        points.len(),
        report.f0_abs,
        report.winding,
        report.boundary_dev
    );
    if report.winding == 1 && report.f0_abs <= config.f0_tolerance {
        Ok(Exit::Success)
    } else {
        Ok(Exit::Invariant)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub limit: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct VerifyReport {
    pub report: MapReport,
    pub monotonicity: MonotonicityReport,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// Recomputes the map report and the monotonicity of the correspondence and
/// checks them against the configured limits.
pub fn verify(config: &RunConfig, solution: Option<&Path>) -> Result<Exit, Failure> {
    let (prepared, map, monotonicity) = disk_map(config, solution)?;
    let report = map.verify(&verify_options(&prepared));
    let check = |name: &str, passed: bool, value: f64, limit: f64| Check { name: name.into(), passed, value, limit };
    let mut checks = vec![
        check("winding", report.winding == 1, report.winding as f64, 1.0),
        check("f0_abs", report.f0_abs <= config.f0_tolerance, report.f0_abs, config.f0_tolerance),
        check("monotone", monotonicity.strictly_increasing, monotonicity.min_step, 0.0),
        check(
            "increment",
            (monotonicity.increment - TAU).abs() <= INCREMENT_TOLERANCE,
            monotonicity.increment - TAU,
            INCREMENT_TOLERANCE,
        ),
        check("cr_residual", report.cr_residual.is_finite(), report.cr_residual, f64::INFINITY),
    ];
    if let Some(limit) = config.max_boundary_dev {
        let v = report.boundary_dev_outside_corners;
        checks.push(check("boundary_dev_outside_corners", v <= limit, v, limit));
    }
    let passed = checks.iter().all(|c| c.passed);
    for c in &checks {
        println!("{} {:<30} {:.3e} (limit {:.3e})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.limit);
    }
    if !monotonicity.strictly_increasing {
        eprintln!("correspondence is not monotone; folds near t = {:?}", monotonicity.folds);
    }
    prepare_dir(&config.out_dir)?;
    write_json(&config.out_dir.join(VERIFY_FILE), &VerifyReport { report, monotonicity, checks, passed })?;
    Ok(if passed { Exit::Success } else { Exit::Invariant })
}
