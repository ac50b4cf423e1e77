//! Trigonometric-polynomial boundary curves `z0(t) = sum_{k=-m}^{n} d_k e^{ikt}`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{MapError, Result};
use crate::fourier::{forward_complex, uniform_nodes, wrap_angle};
use crate::polyline::ClosedPolyline;

/// Polyline resolution used by the simple-curve and winding guards.
pub const GUARD_POLYLINE_POINTS: usize = 4096;

/// A closed curve given by its Laurent coefficients `d_{-m} .. d_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigBoundary {
    m: usize,
    n: usize,
    /// `coeffs[k + m] = d_k`.
    coeffs: Vec<Complex64>,
}

/// An acute corner of the target geometry: parameter `t0` and interior angle `lambda * pi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnglePoint {
    pub t0: f64,
    pub lambda: f64,
}

impl AnglePoint {
    pub fn new(t0: f64, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 2.0) || !t0.is_finite() {
            return Err(MapError::InvalidInput(format!(
                "corner (t0={t0}, lambda={lambda}) is not a valid angle point"
            )));
        }
        Ok(Self { t0: wrap_angle(t0), lambda })
    }

    /// Only interior angles below pi receive the spline correction.
    pub fn is_acute(&self) -> bool {
        self.lambda < 1.0
    }
}

#[derive(Debug, Clone)]
pub struct FitReport {
    pub boundary: TrigBoundary,
    /// max |fit - sample| over the input samples.
    pub residual: f64,
}

impl TrigBoundary {
    /// `coeffs` must hold `m + n + 1` values ordered from `d_{-m}` to `d_n`.
    pub fn new(m: usize, n: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if n == 0 {
            return Err(MapError::InvalidInput("n must be positive".into()));
        }
        if coeffs.len() != m + n + 1 {
            return Err(MapError::InvalidInput(format!(
                "expected {} coefficients for m={m}, n={n}, got {}",
                m + n + 1,
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(MapError::InvalidInput("non-finite coefficient".into()));
        }
        Ok(Self { m, n, coeffs })
    }

    /// Builds a boundary from sparse `(k, d_k)` terms; missing indices are zero.
    pub fn from_terms(terms: &[(i64, Complex64)]) -> Result<Self> {
        let m = terms.iter().map(|&(k, _)| (-k).max(0)).max().unwrap_or(0) as usize;
        let n = terms.iter().map(|&(k, _)| k.max(0)).max().unwrap_or(0) as usize;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); m + n + 1];
        for &(k, d) in terms {
            coeffs[(k + m as i64) as usize] += d;
        }
        Self::new(m, n, coeffs)
    }

    pub fn unit_circle() -> Self {
        Self::circle(1.0)
    }

    pub fn circle(radius: f64) -> Self {
        Self::from_terms(&[(1, Complex64::new(radius, 0.0))]).expect("valid circle")
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        let idx = k + self.m as i64;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[idx as usize]
        }
    }

    /// `(k, d_k)` for every stored index.
    pub fn terms(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, &d)| (i as i64 - self.m as i64, d))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            m: self.m,
            n: self.n,
            coeffs: self.coeffs.iter().map(|&d| d * factor).collect(),
        }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.eval_with_derivatives(t).0
    }

    /// `sum (ik)^order d_k e^{ikt}` for order 1 or 2.
    pub fn derivative(&self, t: f64, order: u32) -> Result<Complex64> {
        let (_, d1, d2) = self.eval_with_derivatives(t);
        match order {
            1 => Ok(d1),
            2 => Ok(d2),
            _ => Err(MapError::InvalidInput(format!("derivative order {order} not in {{1, 2}}"))),
        }
    }

    /// `(z0, z0', z0'')` at `t` in a single pass.
    pub fn eval_with_derivatives(&self, t: f64) -> (Complex64, Complex64, Complex64) {
        let t = wrap_angle(t);
        let step = Complex64::from_polar(1.0, t);
        let mut e = Complex64::from_polar(1.0, -(self.m as f64) * t);
        let (mut z, mut dz, mut d2z) = (Complex64::default(), Complex64::default(), Complex64::default());
        for (i, &d) in self.coeffs.iter().enumerate() {
            let k = i as f64 - self.m as f64;
            let term = d * e;
            z += term;
            dz += term * Complex64::new(0.0, k);
            d2z += term * (-k * k);
            e *= step;
        }
        (z, dz, d2z)
    }

    pub fn polyline(&self, points: usize) -> ClosedPolyline {
        ClosedPolyline::new(uniform_nodes(points).into_iter().map(|t| self.eval(t)).collect())
    }

    /// Fits `d_{-m}..d_n` to boundary samples taken at uniform parameter spacing.
    pub fn fit_from_samples(points: &[Complex64], m: usize, n: usize) -> Result<FitReport> {
        let count = points.len();
        if count < 2 * (m + n) + 1 {
            return Err(MapError::Resolution(format!(
                "{count} samples cannot resolve m={m}, n={n}: need at least 2(m+n)+1 = {}",
                2 * (m + n) + 1
            )));
        }
        let mut spectrum = points.to_vec();
        forward_complex(&mut spectrum);
        let scale = 1.0 / count as f64;
        let coeffs = (-(m as i64)..=n as i64)
            .map(|k| spectrum[k.rem_euclid(count as i64) as usize] * scale)
            .collect();
        let boundary = Self::new(m, n, coeffs)?;
        let residual = uniform_nodes(count)
            .iter()
            .zip(points)
            .map(|(&t, &p)| (boundary.eval(t) - p).norm())
            .fold(0.0, f64::max);
        boundary.validate()?;
        Ok(FitReport { boundary, residual })
    }

    /// Checks the admissibility guards: nonvanishing speed, simple trace, and
    /// counterclockwise winding about the origin.
    pub fn validate(&self) -> Result<()> {
        let speeds: Vec<f64> = uniform_nodes(GUARD_POLYLINE_POINTS)
            .iter()
            .map(|&t| self.eval_with_derivatives(t).1.norm())
            .collect();
        let max_speed = speeds.iter().cloned().fold(0.0, f64::max);
        let min_speed = speeds.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(max_speed > 0.0) || min_speed <= 1e-12 * max_speed {
            return Err(MapError::Boundary(format!(
                "|z0'| vanishes on the guard grid (min {min_speed:.3e}, max {max_speed:.3e})"
            )));
        }
        let poly = self.polyline(GUARD_POLYLINE_POINTS);
        if let Some((i, j)) = poly.find_self_intersection() {
            return Err(MapError::Boundary(format!(
                "curve self-intersects between polyline segments {i} and {j}"
            )));
        }
        let w = self.winding_number(Complex64::new(0.0, 0.0))?;
        if w != 1 {
            return Err(MapError::Boundary(format!(
                "winding number about the origin is {w}, expected +1"
            )));
        }
        Ok(())
    }

    pub fn winding_number(&self, point: Complex64) -> Result<i64> {
        let poly = self.polyline(GUARD_POLYLINE_POINTS);
        let distance = poly.distance_to(point);
        if distance <= 1e-9 * poly.diameter_bound().max(1.0) {
            return Err(MapError::OnCurve { distance });
        }
        Ok(poly.winding_number(point))
    }

    /// Corner candidates: local minimizers of |z0'| below `threshold * max |z0'|`.
    ///
    /// Each candidate's `lambda` comes from the turning of the tangent between
    /// `t0 - delta` and `t0 + delta`, with `delta` twice the spacing of the
    /// `2(m+n)+1` samples that determine the polynomial.
    pub fn detect_corners(&self, threshold: f64) -> Result<Vec<AnglePoint>> {
        if !(threshold > 0.0) {
            return Err(MapError::InvalidInput("corner threshold must be positive".into()));
        }
        const SCAN: usize = 10_000;
        let nodes = uniform_nodes(SCAN);
        let speed: Vec<f64> = nodes.iter().map(|&t| self.speed(t)).collect();
        let max_speed = speed.iter().cloned().fold(0.0, f64::max);
        let h = TAU / SCAN as f64;
        let delta = 2.0 * TAU / (2 * (self.m + self.n) + 1) as f64;
        let mut corners = Vec::new();
        for i in 0..SCAN {
            let prev = speed[(i + SCAN - 1) % SCAN];
            let next = speed[(i + 1) % SCAN];
            let here = speed[i];
            if here <= prev && here < next && here < threshold * max_speed {
                let t0 = self.refine_speed_minimum(nodes[i] - h, nodes[i] + h);
                let incoming = self.eval_with_derivatives(t0 - delta).1;
                let outgoing = self.eval_with_derivatives(t0 + delta).1;
                let turn = (outgoing / incoming).arg();
                corners.push(AnglePoint {
                    t0: wrap_angle(t0),
                    lambda: 1.0 - turn / PI,
                });
            }
        }
        Ok(corners)
    }

    fn speed(&self, t: f64) -> f64 {
        self.eval_with_derivatives(t).1.norm()
    }

    fn refine_speed_minimum(&self, mut lo: f64, mut hi: f64) -> f64 {
        let ratio = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = hi - ratio * (hi - lo);
        let mut x2 = lo + ratio * (hi - lo);
        let (mut f1, mut f2) = (self.speed(x1), self.speed(x2));
        for _ in 0..80 {
            if f1 < f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - ratio * (hi - lo);
                f1 = self.speed(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + ratio * (hi - lo);
                f2 = self.speed(x2);
            }
        }
        0.5 * (lo + hi)
    }
}

/// JSON boundary description: explicit coefficients or uniform samples to fit,
/// plus optional corner metadata.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BoundarySpec {
    #[serde(flatten)]
    pub source: BoundarySource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corners: Option<Vec<AnglePoint>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum BoundarySource {
    Coeffs { coeffs: Vec<CoeffEntry> },
    Samples { samples: Vec<[f64; 2]>, m: usize, n: usize },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct CoeffEntry {
    pub k: i64,
    pub re: f64,
    pub im: f64,
}

impl BoundarySpec {
    pub fn from_boundary(b: &TrigBoundary) -> Self {
        let coeffs = b
            .terms()
            .filter(|(_, d)| *d != Complex64::new(0.0, 0.0))
            .map(|(k, d)| CoeffEntry { k, re: d.re, im: d.im })
            .collect();
        Self {
            source: BoundarySource::Coeffs { coeffs },
            corners: None,
        }
    }

    /// Resolves this description into a validated boundary; sample sources are fitted.
    pub fn build(&self) -> Result<FitReport> {
        match &self.source {
            BoundarySource::Coeffs { coeffs } => {
                let terms: Vec<(i64, Complex64)> = coeffs
                    .iter()
                    .map(|c| (c.k, Complex64::new(c.re, c.im)))
                    .collect();
                let boundary = TrigBoundary::from_terms(&terms)?;
                boundary.validate()?;
                Ok(FitReport { boundary, residual: 0.0 })
            }
            BoundarySource::Samples { samples, m, n } => {
                let points: Vec<Complex64> =
                    samples.iter().map(|&[x, y]| Complex64::new(x, y)).collect();
                TrigBoundary::fit_from_samples(&points, *m, *n)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eval_examples() {
        let circle = TrigBoundary::unit_circle();
        assert!((circle.eval(0.0) - c(1.0, 0.0)).norm() < 1e-15);
        let ex3 = shapes::example3();
        assert!((ex3.eval(0.0) - c(1.25, 0.125)).norm() < 1e-15);
        assert!((ex3.eval(PI) - c(-0.75, -0.125)).norm() < 1e-15);
    }

    #[test]
    fn derivative_examples() {
        let circle = TrigBoundary::unit_circle();
        assert!((circle.derivative(0.0, 1).unwrap() - c(0.0, 1.0)).norm() < 1e-15);
        assert!((circle.derivative(0.0, 2).unwrap() - c(-1.0, 0.0)).norm() < 1e-15);
        let ex3 = shapes::example3();
        assert!((ex3.derivative(0.0, 1).unwrap() - c(0.375, 0.5)).norm() < 1e-15);
        assert!(circle.derivative(0.0, 3).is_err());
    }

    #[test]
    fn derivatives_match_central_differences() {
        let h = 1e-5;
        for b in [shapes::example3(), shapes::ellipse_like(), TrigBoundary::circle(2.0)] {
            for &t in &[0.0, 0.4, 1.7, 3.0, 5.9] {
                let (_, d1, d2) = b.eval_with_derivatives(t);
                let fd1 = (b.eval(t + h) - b.eval(t - h)) / (2.0 * h);
                let fd2 = (b.eval_with_derivatives(t + h).1 - b.eval_with_derivatives(t - h).1) / (2.0 * h);
                assert!((fd1 - d1).norm() <= 1e-7 * d1.norm().max(1.0));
                assert!((fd2 - d2).norm() <= 1e-7 * d2.norm().max(1.0));
            }
        }
    }

    #[test]
    fn fit_reproduces_unit_circle() {
        let pts: Vec<Complex64> = uniform_nodes(64).iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
        let fit = TrigBoundary::fit_from_samples(&pts, 0, 1).unwrap();
        assert!((fit.boundary.coeff(1) - c(1.0, 0.0)).norm() < 1e-14);
        assert!(fit.residual <= 1e-14);
    }

    #[test]
    fn fit_recovers_example3_coefficients() {
        let ex3 = shapes::example3();
        let pts: Vec<Complex64> = uniform_nodes(256).iter().map(|&t| ex3.eval(t)).collect();
        let fit = TrigBoundary::fit_from_samples(&pts, 3, 1).unwrap();
        assert!((fit.boundary.coeff(1) - c(1.0, 0.0)).norm() < 1e-12);
        assert!((fit.boundary.coeff(-2) - c(0.25, 0.0)).norm() < 1e-12);
        assert!((fit.boundary.coeff(-3) - c(0.0, 0.125)).norm() < 1e-12);
        assert!(fit.boundary.coeff(-1).norm() < 1e-12);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn fit_semidisk_keeps_origin_inside() {
        let pts = shapes::semidisk_samples(256);
        let fit = TrigBoundary::fit_from_samples(&pts, 16, 16).unwrap();
        assert!(fit.residual.is_finite() && fit.residual < 0.1);
        assert_eq!(fit.boundary.winding_number(c(0.0, 0.0)).unwrap(), 1);
    }

    #[test]
    fn fit_rejects_too_few_samples() {
        let pts: Vec<Complex64> = uniform_nodes(8).iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
        let err = TrigBoundary::fit_from_samples(&pts, 2, 2).unwrap_err();
        assert!(err.to_string().contains("2(m+n)+1"));
    }

    #[test]
    fn fit_rejects_clockwise_trace() {
        let pts: Vec<Complex64> = uniform_nodes(64).iter().map(|&t| Complex64::from_polar(1.0, -t)).collect();
        assert!(TrigBoundary::fit_from_samples(&pts, 1, 1).is_err());
    }

    #[test]
    fn self_intersecting_curve_is_rejected() {
        // limacon with an inner loop
        let b = TrigBoundary::from_terms(&[(1, c(1.0, 0.0)), (2, c(1.0, 0.0))]).unwrap();
        assert!(matches!(b.validate(), Err(MapError::Boundary(_))));
    }

    #[test]
    fn winding_examples() {
        let circle = TrigBoundary::unit_circle();
        assert_eq!(circle.winding_number(c(0.0, 0.0)).unwrap(), 1);
        assert_eq!(circle.winding_number(c(2.0, 0.0)).unwrap(), 0);
        assert_eq!(shapes::example3().winding_number(c(0.0, 0.0)).unwrap(), 1);
        assert!(matches!(circle.winding_number(c(1.0, 0.0)), Err(MapError::OnCurve { .. })));
    }

    #[test]
    fn circle_has_no_corners() {
        assert!(TrigBoundary::unit_circle().detect_corners(0.1).unwrap().is_empty());
        assert!(shapes::ellipse_like().detect_corners(0.1).unwrap().is_empty());
    }

    #[test]
    fn semidisk_corners_are_right_angles() {
        let fit = TrigBoundary::fit_from_samples(&shapes::semidisk_samples(256), 16, 16).unwrap();
        let corners = fit.boundary.detect_corners(0.2).unwrap();
        assert_eq!(corners.len(), 2, "{corners:?}");
        let expected = shapes::semidisk_corner_parameters();
        for (corner, t) in corners.iter().zip(expected) {
            assert!((corner.t0 - t).abs() < 0.05, "{corner:?} vs {t}");
            assert!((corner.lambda - 0.5).abs() < 0.1, "{corner:?}");
        }
    }

    #[test]
    fn example3_corner_candidates_match_dense_scan() {
        let ex3 = shapes::example3();
        let found = ex3.detect_corners(0.2).unwrap();
        // oracle: discrete local minima of |z0'| on a 10^4 grid under the threshold
        let grid = uniform_nodes(10_000);
        let speed: Vec<f64> = grid.iter().map(|&t| ex3.derivative(t, 1).unwrap().norm()).collect();
        let max = speed.iter().cloned().fold(0.0, f64::max);
        let mut oracle = Vec::new();
        for i in 0..speed.len() {
            let (p, q) = (speed[(i + speed.len() - 1) % speed.len()], speed[(i + 1) % speed.len()]);
            if speed[i] <= p && speed[i] < q && speed[i] < 0.2 * max {
                oracle.push(grid[i]);
            }
        }
        assert_eq!(found.len(), oracle.len());
        for (f, o) in found.iter().zip(&oracle) {
            assert!((f.t0 - o).abs() < 2.0 * TAU / 10_000.0);
        }
    }

    #[test]
    fn spec_json_round_trip() {
        let json = r#"{"coeffs":[{"k":1,"re":1.0,"im":0.0},{"k":-2,"re":0.25,"im":0.0},{"k":-3,"re":0.0,"im":0.125}],
                       "corners":[{"t0":1.0,"lambda":0.5}]}"#;
        let spec: BoundarySpec = serde_json::from_str(json).unwrap();
        let built = spec.build().unwrap().boundary;
        assert_eq!(built, shapes::example3());
        assert_eq!(spec.corners.as_ref().unwrap()[0].lambda, 0.5);
        let samples = r#"{"samples":[[1,0],[0,1],[-1,0],[0,-1],[0.7071067811865476,-0.7071067811865476]],"m":0,"n":1}"#;
        let spec: BoundarySpec = serde_json::from_str(samples).unwrap();
        assert!(matches!(spec.source, BoundarySource::Samples { m: 0, n: 1, .. }));
    }
}
