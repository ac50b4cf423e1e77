//! Reference geometries used in tests, the acceptance suite, and CLI examples.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::boundary::TrigBoundary;

/// `e^{it} + e^{-2it}/4 + i e^{-3it}/8`.
pub fn example3() -> TrigBoundary {
    TrigBoundary::from_terms(&[
        (1, Complex64::new(1.0, 0.0)),
        (-2, Complex64::new(0.25, 0.0)),
        (-3, Complex64::new(0.0, 0.125)),
    ])
    .expect("valid coefficients")
}

/// `e^{it} + 0.3 e^{-it}`, an ellipse with semi-axes 1.3 and 0.7.
pub fn ellipse_like() -> TrigBoundary {
    TrigBoundary::from_terms(&[(1, Complex64::new(1.0, 0.0)), (-1, Complex64::new(0.3, 0.0))])
        .expect("valid coefficients")
}

/// Vertical offset that places the origin at the centroid of the unit upper
/// semidisk.
pub const SEMIDISK_SHIFT: f64 = 4.0 / (3.0 * PI);

const SEMIDISK_PERIMETER: f64 = PI + 2.0;

/// Share of the parameter period spent on the diameter; the rest traces the arc.
const DIAMETER_SPAN: f64 = TAU * 2.0 / SEMIDISK_PERIMETER;

const EASE_POWER: f64 = 1.3;

/// `u^p / (u^p + (1 - u)^p)`: monotone on [0, 1] with slope vanishing like
/// `u^(p - 1)` at both ends. A mild `p` slows the curve enough for the corners
/// to show up as speed dips while keeping the correspondence near them close
/// to quadratic, which a zero-slope cubic can still follow monotonically.
fn ease(u: f64) -> f64 {
    let a = u.powf(EASE_POWER);
    a / (a + (1.0 - u).powf(EASE_POWER))
}

/// Samples of the unit upper semidisk shifted down by [`SEMIDISK_SHIFT`], at
/// uniform parameter spacing, traced counterclockwise from the midpoint of the
/// diameter.
///
/// Each side is traversed with speed that vanishes at its endpoints, so the two
/// right-angle corners become near-corners of any trigonometric fit: points
/// where `|z0'|` dips close to zero.
pub fn semidisk_samples(count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|j| semidisk_point(TAU * j as f64 / count as f64))
        .collect()
}

fn semidisk_point(t: f64) -> Complex64 {
    let [c1, c2] = semidisk_corner_parameters();
    let w = if t < c1 || t >= c2 {
        // diameter from -1 to 1, entered at c2 and left at c1 + 2pi
        let u = ((t - c2).rem_euclid(TAU)) / DIAMETER_SPAN;
        Complex64::new(-1.0 + 2.0 * ease(u), 0.0)
    } else {
        let u = (t - c1) / (c2 - c1);
        Complex64::from_polar(1.0, PI * ease(u))
    };
    w - Complex64::new(0.0, SEMIDISK_SHIFT)
}

/// Parameters of the two right-angle corners in the sampling of [`semidisk_samples`].
pub fn semidisk_corner_parameters() -> [f64; 2] {
    [DIAMETER_SPAN / 2.0, TAU - DIAMETER_SPAN / 2.0]
}

/// The exact semidisk boundary (shifted) as a polyline with `count` arc points
/// and `count` diameter points.
pub fn semidisk_polyline(count: usize) -> crate::polyline::ClosedPolyline {
    let shift = Complex64::new(0.0, SEMIDISK_SHIFT);
    let arc = (0..count).map(|k| Complex64::from_polar(1.0, PI * k as f64 / count as f64));
    let diameter = (0..count).map(|k| Complex64::new(-1.0 + 2.0 * k as f64 / count as f64, 0.0));
    crate::polyline::ClosedPolyline::new(arc.chain(diameter).map(|w| w - shift).collect())
}
