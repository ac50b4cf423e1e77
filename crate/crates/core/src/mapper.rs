//! Cauchy-integral evaluation of the disk map and its verification metrics.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{TrigBoundary, GUARD_POLYLINE_POINTS};
use crate::error::{MapError, Result};
use crate::fourier::wrap_signed;
use crate::fredholm::{BoundaryCorrespondence, Correspondence};
use crate::polyline::ClosedPolyline;

pub const DEFAULT_NQ: usize = 1024;
pub const DEFAULT_NQ_SPLINE: usize = 256;
pub const DEFAULT_DELTA_RIM: f64 = 5e-3;

#[derive(Debug, Clone, Copy)]
pub struct MapOptions {
    /// Trapezoidal nodes per period on the uncorrected part of the boundary.
    pub nq: usize,
    /// Uniform nodes in `phi` on each corrected segment.
    pub nq_spline: usize,
    /// Evaluation is trusted for `|zeta| <= 1 - delta_rim`.
    pub delta_rim: f64,
}

impl Default for MapOptions {
    fn default() -> Self {
        Self { nq: DEFAULT_NQ, nq_spline: DEFAULT_NQ_SPLINE, delta_rim: DEFAULT_DELTA_RIM }
    }
}

/// One quadrature node of the Cauchy integral: the weighted numerator
/// `z0 e^{i theta} dtheta / 2pi` and the circle point `e^{i theta}`.
#[derive(Debug, Clone, Copy)]
struct Node {
    numerator: Complex64,
    circle: Complex64,
    dtheta: f64,
}

/// Quadrature data for `f(zeta) = (1/2pi) int z0(t) e^{i theta} theta' dt / (e^{i theta} - zeta)`.
#[derive(Debug, Clone)]
pub struct DiskMap {
    boundary: TrigBoundary,
    correspondence: BoundaryCorrespondence,
    nodes: Vec<Node>,
    options: MapOptions,
}

impl DiskMap {
    pub fn new(correspondence: &BoundaryCorrespondence, options: MapOptions) -> Result<Self> {
        if options.nq < 2 || options.nq_spline < 2 {
            return Err(MapError::InvalidInput("quadrature sizes must be at least 2".into()));
        }
        if !(options.delta_rim > 0.0 && options.delta_rim < 1.0) {
            return Err(MapError::InvalidInput(format!("delta_rim {} not in (0, 1)", options.delta_rim)));
        }
        let boundary = correspondence.boundary().clone();
        let mut nodes = Vec::new();
        match correspondence {
            BoundaryCorrespondence::Raw(raw) => {
                let w = TAU / options.nq as f64;
                for j in 0..options.nq {
                    nodes.push(smooth_node(&boundary, raw, w * j as f64, w));
                }
            }
            BoundaryCorrespondence::Corrected(corrected) => {
                let raw = corrected.raw();
                let splines = corrected.splines();
                if splines.is_empty() {
                    let w = TAU / options.nq as f64;
                    for j in 0..options.nq {
                        nodes.push(smooth_node(&boundary, raw, w * j as f64, w));
                    }
                }
                for (i, s) in splines.iter().enumerate() {
                    // smooth arc from the end of this interval to the start of the next
                    let start = s.start().rem_euclid(TAU);
                    let from = start + s.eps1 + s.eps2;
                    let next = &splines[(i + 1) % splines.len()];
                    let mut to = next.start().rem_euclid(TAU);
                    if i + 1 == splines.len() {
                        to += TAU;
                    }
                    let intervals = ((options.nq as f64 * (to - from) / TAU).ceil() as usize).max(2);
                    let h = (to - from) / intervals as f64;
                    for k in 0..=intervals {
                        let w = if k == 0 || k == intervals { 0.5 * h } else { h };
                        nodes.push(smooth_node(&boundary, raw, from + h * k as f64, w));
                    }

                    let (lo, hi) = s.value_range();
                    let h = (hi - lo) / options.nq_spline as f64;
                    for k in 0..=options.nq_spline {
                        let phi = lo + h * k as f64;
                        let t = s.invert(phi)?;
                        let w = if k == 0 || k == options.nq_spline { 0.5 * h } else { h };
                        let circle = Complex64::from_polar(1.0, phi);
                        nodes.push(Node {
                            numerator: boundary.eval(t) * circle * (w / TAU),
                            circle,
                            dtheta: w,
                        });
                    }
                }
            }
        }
        Ok(Self { boundary, correspondence: correspondence.clone(), nodes, options })
    }

    pub fn boundary(&self) -> &TrigBoundary {
        &self.boundary
    }

    pub fn correspondence(&self) -> &BoundaryCorrespondence {
        &self.correspondence
    }

    pub fn options(&self) -> &MapOptions {
        &self.options
    }

    /// Sum of the `dtheta` quadrature weights: one period of the image circle.
    pub fn covered_angle(&self) -> f64 {
        self.nodes.iter().map(|n| n.dtheta).sum()
    }

    pub fn trusted_radius(&self) -> f64 {
        1.0 - self.options.delta_rim
    }

    pub fn map_point(&self, zeta: Complex64) -> Result<Complex64> {
        let limit = self.trusted_radius();
        if !(zeta.norm() <= limit) {
            return Err(MapError::OutsideTrustedRegion { re: zeta.re, im: zeta.im, limit });
        }
        Ok(self.cauchy_sum(zeta))
    }

    /// Quadrature of the Cauchy integral divided by the same quadrature applied
    /// to the constant 1. The division cancels the leading near-rim error of
    /// the trapezoid sums; for a circle the denominator is exactly 1.
    fn cauchy_sum(&self, zeta: Complex64) -> Complex64 {
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = Complex64::new(0.0, 0.0);
        for n in &self.nodes {
            let c = 1.0 / (n.circle - zeta);
            num += n.numerator * c;
            den += n.circle * c * (n.dtheta / TAU);
        }
        num / den
    }

    /// Maps every point; errors are reported per point in input order.
    pub fn map_grid(&self, points: &[Complex64]) -> Vec<Result<Complex64>> {
        points.par_iter().map(|&z| self.map_point(z)).collect()
    }

    /// Boundary value read directly from the correspondence: `f(e^{i theta(t)}) = z0(t)`.
    pub fn boundary_readout(&self, t: f64) -> (f64, Complex64) {
        (self.correspondence.theta(t), self.boundary.eval(t))
    }

    pub fn verify(&self, options: &VerifyOptions) -> MapReport {
        let l0 = self.boundary.polyline(GUARD_POLYLINE_POINTS);
        let r = self.trusted_radius();
        let angles: Vec<f64> = (0..options.rim_samples)
            .map(|k| TAU * k as f64 / options.rim_samples as f64)
            .collect();
        let image: Vec<Complex64> = angles
            .par_iter()
            .map(|&a| self.cauchy_sum(Complex64::from_polar(r, a)))
            .collect();
        let distances: Vec<f64> = image.par_iter().map(|&p| l0.distance_to(p)).collect();
        let corner_angles: Vec<f64> = options
            .corner_parameters
            .iter()
            .map(|&t| self.correspondence.theta(t))
            .collect();
        let near_corner = |a: f64| {
            corner_angles
                .iter()
                .any(|&c| wrap_signed(a - c).abs() < options.corner_exclusion)
        };
        let boundary_dev = distances.iter().cloned().fold(0.0, f64::max);
        let boundary_dev_outside_corners = angles
            .iter()
            .zip(&distances)
            .filter(|(a, _)| !near_corner(**a))
            .map(|(_, d)| *d)
            .fold(0.0, f64::max);
        let winding = ClosedPolyline::new(image).winding_number(Complex64::new(0.0, 0.0));

        let h = options.cr_step;
        let cr_residual = cr_sample_points()
            .par_iter()
            .map(|&z| {
                let dx = (self.cauchy_sum(z + h) - self.cauchy_sum(z - h)) / (2.0 * h);
                let ih = Complex64::new(0.0, h);
                let dy = (self.cauchy_sum(z + ih) - self.cauchy_sum(z - ih)) / (2.0 * h);
                (dx + Complex64::i() * dy).norm()
            })
            .reduce(|| 0.0, f64::max);

        MapReport {
            f0_abs: self.cauchy_sum(Complex64::new(0.0, 0.0)).norm(),
            boundary_dev,
            boundary_dev_outside_corners,
            winding,
            cr_residual,
        }
    }

    /// Images of the circles `|zeta| = r` and of radial rays, for plotting.
    pub fn level_lines(&self, radii: &[f64], rays: usize, points_per_line: usize) -> Result<Vec<LevelLine>> {
        let mut lines = Vec::new();
        for (index, &r) in radii.iter().enumerate() {
            let zetas: Vec<Complex64> = (0..=points_per_line)
                .map(|k| Complex64::from_polar(r, TAU * k as f64 / points_per_line as f64))
                .collect();
            let points = self.map_grid(&zetas).into_iter().collect::<Result<Vec<_>>>()?;
            lines.push(LevelLine { family: LineFamily::Radius, index, value: r, points });
        }
        let reach = radii.iter().cloned().fold(0.0, f64::max);
        for index in 0..rays {
            let angle = TAU * index as f64 / rays as f64;
            let zetas: Vec<Complex64> = (0..=points_per_line)
                .map(|k| Complex64::from_polar(reach * k as f64 / points_per_line as f64, angle))
                .collect();
            let points = self.map_grid(&zetas).into_iter().collect::<Result<Vec<_>>>()?;
            lines.push(LevelLine { family: LineFamily::Angle, index, value: angle, points });
        }
        Ok(lines)
    }
}

fn smooth_node(boundary: &TrigBoundary, theta: &dyn Correspondence, t: f64, weight: f64) -> Node {
    let circle = Complex64::from_polar(1.0, theta.theta(t));
    let dtheta = theta.theta_prime(t) * weight;
    Node { numerator: boundary.eval(t) * circle * (dtheta / TAU), circle, dtheta }
}

fn cr_sample_points() -> Vec<Complex64> {
    let mut pts = vec![Complex64::new(0.0, 0.0)];
    for r in [0.2, 0.4, 0.6, 0.8, 0.9] {
        for k in 0..16 {
            pts.push(Complex64::from_polar(r, TAU * (k as f64 + 0.5) / 16.0));
        }
    }
    pts
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub rim_samples: usize,
    /// Boundary parameters of corners whose images are excluded from
    /// `boundary_dev_outside_corners`.
    pub corner_parameters: Vec<f64>,
    /// Angular radius of the excluded arcs on the circle.
    pub corner_exclusion: f64,
    pub cr_step: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { rim_samples: 1024, corner_parameters: Vec::new(), corner_exclusion: 0.1, cr_step: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapReport {
    pub f0_abs: f64,
    /// Max distance from the image of `|zeta| = 1 - delta` to the boundary polyline.
    pub boundary_dev: f64,
    pub boundary_dev_outside_corners: f64,
    pub winding: i64,
    /// Max discrete Cauchy-Riemann residual `|f_x + i f_y|` over interior samples.
    pub cr_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineFamily {
    Radius,
    Angle,
}

#[derive(Debug, Clone)]
pub struct LevelLine {
    pub family: LineFamily,
    pub index: usize,
    pub value: f64,
    pub points: Vec<Complex64>,
}
