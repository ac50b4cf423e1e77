//! End-to-end orchestration: solve, detect and repair folds, build the disk map.

use crate::boundary::{AnglePoint, TrigBoundary};
use crate::corrector::{self, CorrectionOptions, CorrectionRecord, MonotonicityReport, SCAN_POINTS};
use crate::error::Result;
use crate::fredholm::{self, BoundaryCorrespondence, FredholmSolution, RawCorrespondence};
use crate::mapper::{DiskMap, MapOptions};

pub const DEFAULT_ORDER: usize = 64;
pub const DEFAULT_GRID: usize = 1024;
pub const DEFAULT_CORNER_THRESHOLD: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub enum CornerSelection {
    /// Corners found by [`TrigBoundary::detect_corners`] with this threshold.
    Auto { threshold: f64 },
    Explicit(Vec<AnglePoint>),
}

impl CornerSelection {
    pub fn resolve(&self, boundary: &TrigBoundary) -> Result<Vec<AnglePoint>> {
        match self {
            CornerSelection::Auto { threshold } => boundary.detect_corners(*threshold),
            CornerSelection::Explicit(c) => Ok(c.clone()),
        }
    }
}

/// Runs the correction step on an existing solution. With `correction` unset
/// the raw correspondence is returned unchanged.
pub fn build_correspondence(
    boundary: &TrigBoundary,
    solution: &FredholmSolution,
    corners: &[AnglePoint],
    correction: Option<&CorrectionOptions>,
) -> Result<(BoundaryCorrespondence, Vec<CorrectionRecord>)> {
    let raw = RawCorrespondence::new(boundary, solution)?;
    match correction {
        None => Ok((BoundaryCorrespondence::Raw(raw), Vec::new())),
        Some(options) => {
            let (corrected, records) = corrector::correct(&raw, corners, options)?;
            Ok((BoundaryCorrespondence::Corrected(corrected), records))
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub solution: FredholmSolution,
    pub corners: Vec<AnglePoint>,
    pub records: Vec<CorrectionRecord>,
    pub correspondence: BoundaryCorrespondence,
    pub monotonicity: MonotonicityReport,
}

impl PipelineOutput {
    pub fn disk_map(&self, options: MapOptions) -> Result<DiskMap> {
        DiskMap::new(&self.correspondence, options)
    }
}

pub fn run(
    boundary: &TrigBoundary,
    order: usize,
    grid: usize,
    corners: &CornerSelection,
    correction: Option<&CorrectionOptions>,
) -> Result<PipelineOutput> {
    let solution = fredholm::solve_boundary(boundary, order, grid)?;
    let corners = corners.resolve(boundary)?;
    let (correspondence, records) = build_correspondence(boundary, &solution, &corners, correction)?;
    let monotonicity = corrector::monotonicity(&correspondence, SCAN_POINTS);
    Ok(PipelineOutput { solution, corners, records, correspondence, monotonicity })
}
