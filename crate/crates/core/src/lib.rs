//! Approximate conformal maps from the unit disk onto domains bounded by
//! trigonometric-polynomial curves.
//!
//! The pipeline solves a Fredholm equation of the second kind for the
//! boundary correspondence, repairs the non-monotone folds that appear near
//! acute corners with monotone splines, and evaluates the map inside the disk
//! through Cauchy integrals.

pub mod boundary;
pub mod corrector;
pub mod error;
pub mod fourier;
pub mod fredholm;
pub mod kernels;
pub mod mapper;
pub mod pipeline;
pub mod polyline;
pub mod shapes;

pub use boundary::{AnglePoint, BoundarySpec, TrigBoundary};
pub use corrector::{CorrectedCorrespondence, MonotoneSpline, SplineKind};
pub use error::{MapError, Result};
pub use fredholm::{BoundaryCorrespondence, FredholmSolution, RawCorrespondence};
pub use mapper::{DiskMap, MapReport};
