//! Local monotone-spline repair of the boundary correspondence near acute corners.
//!
//! A truncated solution develops a non-monotone fold around each acute corner
//! preimage `t0`. The fold is cut out of `[t0 - eps1, t0 + eps2]` and replaced
//! by a spline `phi` that is strictly increasing there, with `phi'(t0) = 0` for
//! the cubic kind.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::boundary::AnglePoint;
use crate::error::{MapError, Result};
use crate::fredholm::{Correspondence, RawCorrespondence};

/// Resolution of the scans used for fold detection and monotonicity checks.
pub const SCAN_POINTS: usize = 16_384;

pub const DEFAULT_SLOPE_FLOOR: f64 = 0.05;
pub const MAX_RETRIES: usize = 8;
const WIDEN_FACTOR: f64 = 1.25;
const SAMPLES_PER_PIECE: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplineKind {
    Linear,
    Cubic,
}

impl std::str::FromStr for SplineKind {
    type Err = MapError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(SplineKind::Linear),
            "cubic" => Ok(SplineKind::Cubic),
            other => Err(MapError::InvalidInput(format!("unknown spline kind '{other}'"))),
        }
    }
}

/// Two polynomial pieces on `[t0 - eps1, t0]` and `[t0, t0 + eps2]`, each
/// stored as coefficients `c0 + c1 s + c2 s^2 + c3 s^3` in `s = t - t0`.
///
/// The interval may extend below 0 or above 2pi; callers shift `t` by whole
/// periods before evaluating.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneSpline {
    pub t0: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub kind: SplineKind,
    pub theta_star: f64,
    pub left: [f64; 4],
    pub right: [f64; 4],
}

impl MonotoneSpline {
    pub fn start(&self) -> f64 {
        self.t0 - self.eps1
    }

    pub fn end(&self) -> f64 {
        self.t0 + self.eps2
    }

    fn piece(&self, t: f64) -> &[f64; 4] {
        if t < self.t0 {
            &self.left
        } else {
            &self.right
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let c = self.piece(t);
        let s = t - self.t0;
        c[0] + s * (c[1] + s * (c[2] + s * c[3]))
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let c = self.piece(t);
        let s = t - self.t0;
        c[1] + s * (2.0 * c[2] + 3.0 * s * c[3])
    }

    /// `phi'(t0)` read off the coefficients of both pieces.
    pub fn slope_at_t0(&self) -> (f64, f64) {
        (self.left[1], self.right[1])
    }

    pub fn value_range(&self) -> (f64, f64) {
        (self.eval(self.start()), self.eval(self.end()))
    }

    /// The `t` in the interval with `phi(t) = phi`, by Newton's method
    /// safeguarded with bisection (which also handles the flat point at `t0`).
    pub fn invert(&self, phi: f64) -> Result<f64> {
        let (lo_v, hi_v) = self.value_range();
        let slack = 1e-14 * hi_v.abs().max(1.0);
        if !(phi >= lo_v - slack && phi <= hi_v + slack) {
            return Err(MapError::OutOfRange { value: phi, lo: lo_v, hi: hi_v });
        }
        let (mut lo, mut hi) = if phi <= self.theta_star {
            (self.start(), self.t0)
        } else {
            (self.t0, self.end())
        };
        let tol = 1e-13 * phi.abs().max(1.0);
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let f = self.eval(x) - phi;
            if f.abs() <= tol {
                return Ok(x);
            }
            if f < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let d = self.derivative(x);
            let newton = if d > 0.0 { x - f / d } else { f64::NAN };
            x = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
                break;
            }
        }
        let candidates = [lo, hi, x];
        Ok(candidates
            .into_iter()
            .min_by(|a, b| (self.eval(*a) - phi).abs().total_cmp(&(self.eval(*b) - phi).abs()))
            .expect("non-empty"))
    }

    /// Strict monotonicity on the interval, `phi'(t0) = 0` excepted for the
    /// cubic kind: `phi'` sampled densely per piece plus at the interior
    /// critical point of each quadratic `phi'`.
    fn check_monotone(&self) -> Result<()> {
        let fail = |reason: String| MapError::NotMonotone { a: self.start(), b: self.end(), reason };
        let pieces = [(self.start(), self.t0), (self.t0, self.end())];
        for (idx, &(a, b)) in pieces.iter().enumerate() {
            let c = if idx == 0 { &self.left } else { &self.right };
            let mut probes: Vec<f64> = (0..=SAMPLES_PER_PIECE)
                .map(|k| a + (b - a) * k as f64 / SAMPLES_PER_PIECE as f64)
                .collect();
            if c[3] != 0.0 {
                // phi'(s) = c1 + 2 c2 s + 3 c3 s^2 is extremal at s = -c2 / (3 c3)
                let s = -c[2] / (3.0 * c[3]);
                let t = self.t0 + s;
                if t > a && t < b {
                    probes.push(t);
                }
            }
            for t in probes {
                let at_knot = t == self.t0;
                let d = if at_knot {
                    c[1]
                } else {
                    let s = t - self.t0;
                    c[1] + s * (2.0 * c[2] + 3.0 * s * c[3])
                };
                let allowed_zero = at_knot && self.kind == SplineKind::Cubic;
                if d < 0.0 || (d == 0.0 && !allowed_zero) {
                    return Err(fail(format!("phi'({t:.6}) = {d:.3e}")));
                }
            }
        }
        Ok(())
    }
}

/// Replaces `theta` on `[t0 - eps1, t0 + eps2]`; `phi(t0)` is the midpoint of
/// the endpoint values.
pub fn build_spline(
    theta: &dyn Correspondence,
    t0: f64,
    eps1: f64,
    eps2: f64,
    kind: SplineKind,
) -> Result<MonotoneSpline> {
    if !(eps1 > 0.0 && eps2 > 0.0) {
        return Err(MapError::InvalidInput(format!("eps1={eps1}, eps2={eps2} must be positive")));
    }
    let (a, b) = (t0 - eps1, t0 + eps2);
    let (va, vb) = (theta.theta(a), theta.theta(b));
    let (da, db) = (theta.theta_prime(a), theta.theta_prime(b));
    let fail = |reason: String| MapError::NotMonotone { a, b, reason };
    if !(vb > va) {
        return Err(fail(format!("theta({b:.6}) = {vb} does not exceed theta({a:.6}) = {va}")));
    }
    let star = 0.5 * (va + vb);
    let (left, right) = match kind {
        SplineKind::Linear => (
            [star, (star - va) / eps1, 0.0, 0.0],
            [star, (vb - star) / eps2, 0.0, 0.0],
        ),
        SplineKind::Cubic => {
            if !(da > 0.0 && db > 0.0) {
                return Err(fail(format!("endpoint slopes {da:.3e}, {db:.3e} are not positive")));
            }
            let secant_left = (star - va) / eps1;
            let secant_right = (vb - star) / eps2;
            if da > 3.0 * secant_left || db > 3.0 * secant_right {
                return Err(fail(format!(
                    "endpoint slopes ({da:.3e}, {db:.3e}) exceed 3x secants ({secant_left:.3e}, {secant_right:.3e})"
                )));
            }
            let (l2, l3) = hermite_to_knot(va - star, da, eps1);
            let (r2, r3) = hermite_from_knot(vb - star, db, eps2);
            ([star, 0.0, l2, l3], [star, 0.0, r2, r3])
        }
    };
    let spline = MonotoneSpline { t0, eps1, eps2, kind, theta_star: star, left, right };
    spline.check_monotone()?;
    Ok(spline)
}

/// Cubic on `s in [-e, 0]` with value `0` and slope `0` at `s = 0`, value `drop`
/// and slope `slope` at `s = -e`; returns `(c2, c3)`.
fn hermite_to_knot(drop: f64, slope: f64, e: f64) -> (f64, f64) {
    let c2 = 3.0 * drop / (e * e) + slope / e;
    let c3 = (2.0 * drop + slope * e) / (e * e * e);
    (c2, c3)
}

/// Cubic on `s in [0, e]` with value `0` and slope `0` at `s = 0`, value `rise`
/// and slope `slope` at `s = e`.
fn hermite_from_knot(rise: f64, slope: f64, e: f64) -> (f64, f64) {
    let c2 = 3.0 * rise / (e * e) - slope / e;
    let c3 = (slope * e - 2.0 * rise) / (e * e * e);
    (c2, c3)
}

/// Finds the interval `[t0 - eps1, t0 + eps2]` that cuts the fold near `t0`:
/// it covers every nearby point where `theta' < slope_floor`, has
/// `theta' >= slope_floor` at both ends, and `theta(t0 + eps2) > theta(t0 - eps1)`.
///
/// Returns `None` when `theta'` stays above the floor within a quarter period.
pub fn detect_fold(theta: &dyn Correspondence, t0: f64, slope_floor: f64) -> Result<Option<(f64, f64)>> {
    if !(slope_floor > 0.0) {
        return Err(MapError::InvalidInput("slope floor must be positive".into()));
    }
    let h = TAU / SCAN_POINTS as f64;
    let low = |s: f64| theta.theta_prime(t0 + s) < slope_floor;
    let reach = (SCAN_POINTS / 8) as i64;

    let Some(first) = (0..=reach)
        .flat_map(|k| [k, -k])
        .find(|&k| low(k as f64 * h))
    else {
        return Ok(None);
    };

    // integer offsets from t0 in units of h
    let (mut left, mut right) = (first.min(0), first.max(0));
    let limit = (SCAN_POINTS / 2) as i64;
    loop {
        absorb_low_runs(&low, h, &mut left, &mut right, limit)
            .ok_or(MapError::FoldNotLocalizable { t0 })?;
        let (a, b) = (left - 1, right + 1);
        if theta.theta(t0 + b as f64 * h) > theta.theta(t0 + a as f64 * h) {
            return Ok(Some((-(a as f64) * h, b as f64 * h)));
        }
        let grow = (((right - left) as f64) * (WIDEN_FACTOR - 1.0) / 2.0).ceil().max(1.0) as i64;
        left -= grow;
        right += grow;
        if right - left > limit {
            return Err(MapError::FoldNotLocalizable { t0 });
        }
    }
}

/// Extends `[left, right]` over low points lying within half the current
/// width (at least 8 steps) of either end, until no more are found.
fn absorb_low_runs(low: &dyn Fn(f64) -> bool, h: f64, left: &mut i64, right: &mut i64, limit: i64) -> Option<()> {
    loop {
        let gap = ((*right - *left) / 2).max(8);
        let mut changed = false;
        if let Some(k) = (1..=gap).rev().find(|&k| low((*right + k) as f64 * h)) {
            *right += k;
            changed = true;
        }
        if let Some(k) = (1..=gap).rev().find(|&k| low((*left - k) as f64 * h)) {
            *left -= k;
            changed = true;
        }
        if *right - *left > limit {
            return None;
        }
        if !changed {
            return Some(());
        }
    }
}

/// `theta` with spline replacements on disjoint intervals.
#[derive(Debug, Clone)]
pub struct CorrectedCorrespondence {
    raw: RawCorrespondence,
    splines: Vec<MonotoneSpline>,
}

impl CorrectedCorrespondence {
    /// Fails if two replacement intervals overlap modulo 2pi.
    pub fn new(raw: RawCorrespondence, mut splines: Vec<MonotoneSpline>) -> Result<Self> {
        splines.sort_by(|a, b| a.start().rem_euclid(TAU).total_cmp(&b.start().rem_euclid(TAU)));
        for (i, s) in splines.iter().enumerate() {
            if splines.len() < 2 {
                break;
            }
            let next = &splines[(i + 1) % splines.len()];
            let start = s.start().rem_euclid(TAU);
            let mut next_start = next.start().rem_euclid(TAU);
            if i + 1 == splines.len() {
                next_start += TAU;
            }
            if start + s.eps1 + s.eps2 >= next_start {
                return Err(MapError::OverlappingCorrections { first: s.t0, second: next.t0 });
            }
        }
        Ok(Self { raw, splines })
    }

    pub fn raw(&self) -> &RawCorrespondence {
        &self.raw
    }

    /// Splines ordered by the position of their interval start in [0, 2pi).
    pub fn splines(&self) -> &[MonotoneSpline] {
        &self.splines
    }

    /// The spline covering `t` and the whole-period shift that brings `t` into
    /// its interval.
    fn covering(&self, t: f64) -> Option<(&MonotoneSpline, f64)> {
        self.splines.iter().find_map(|s| {
            let shift = ((t - s.start()) / TAU).floor() * TAU;
            (t - shift <= s.end()).then_some((s, shift))
        })
    }
}

impl Correspondence for CorrectedCorrespondence {
    fn theta(&self, t: f64) -> f64 {
        match self.covering(t) {
            Some((s, shift)) => s.eval(t - shift) + shift,
            None => self.raw.theta(t),
        }
    }

    fn theta_prime(&self, t: f64) -> f64 {
        match self.covering(t) {
            Some((s, shift)) => s.derivative(t - shift),
            None => self.raw.theta_prime(t),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CorrectionOptions {
    pub kind: SplineKind,
    pub slope_floor: f64,
    pub max_retries: usize,
}

impl Default for CorrectionOptions {
    fn default() -> Self {
        Self { kind: SplineKind::Cubic, slope_floor: DEFAULT_SLOPE_FLOOR, max_retries: MAX_RETRIES }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectionStatus {
    Corrected,
    NoFold,
    /// Interior angle at least pi: left to the uncorrected solution.
    NotAcute,
}

/// One line of the correction report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionRecord {
    pub t0: f64,
    pub lambda: f64,
    pub status: CorrectionStatus,
    pub eps1: Option<f64>,
    pub eps2: Option<f64>,
    pub kind: Option<SplineKind>,
    pub theta_star: Option<f64>,
    pub retries: usize,
}

/// Detects the fold near `t0` and fits a spline over it, widening the interval
/// by 25% after each failed monotonicity check. Returns the spline and the
/// number of retries, or `None` when there is no fold.
pub fn repair_fold(
    theta: &dyn Correspondence,
    t0: f64,
    options: &CorrectionOptions,
) -> Result<Option<(MonotoneSpline, usize)>> {
    let Some((mut eps1, mut eps2)) = detect_fold(theta, t0, options.slope_floor)? else {
        return Ok(None);
    };
    let mut retries = 0;
    loop {
        match build_spline(theta, t0, eps1, eps2, options.kind) {
            Ok(s) => return Ok(Some((s, retries))),
            Err(MapError::NotMonotone { .. }) if retries < options.max_retries => {
                retries += 1;
                eps1 *= WIDEN_FACTOR;
                eps2 *= WIDEN_FACTOR;
                if eps1 + eps2 > PI {
                    return Err(MapError::FoldNotLocalizable { t0 });
                }
            }
            Err(e) => return Err(e),
        }
    }
}

/// Detects and repairs the fold at every acute corner independently.
pub fn correct(
    raw: &RawCorrespondence,
    corners: &[AnglePoint],
    options: &CorrectionOptions,
) -> Result<(CorrectedCorrespondence, Vec<CorrectionRecord>)> {
    let each: Vec<(AnglePoint, CorrectionOptions)> = corners.iter().map(|c| (*c, *options)).collect();
    correct_each(raw, &each)
}

/// Like [`correct`], with separate options per corner.
pub fn correct_each(
    raw: &RawCorrespondence,
    corners: &[(AnglePoint, CorrectionOptions)],
) -> Result<(CorrectedCorrespondence, Vec<CorrectionRecord>)> {
    let mut splines = Vec::new();
    let mut records = Vec::new();
    for (corner, options) in corners {
        let mut record = CorrectionRecord {
            t0: corner.t0,
            lambda: corner.lambda,
            status: CorrectionStatus::NotAcute,
            eps1: None,
            eps2: None,
            kind: None,
            theta_star: None,
            retries: 0,
        };
        if !corner.is_acute() {
            records.push(record);
            continue;
        }
        let Some((spline, retries)) = repair_fold(raw, corner.t0, options)? else {
            record.status = CorrectionStatus::NoFold;
            records.push(record);
            continue;
        };
        record.retries = retries;
        record.status = CorrectionStatus::Corrected;
        record.eps1 = Some(spline.eps1);
        record.eps2 = Some(spline.eps2);
        record.kind = Some(spline.kind);
        record.theta_star = Some(spline.theta_star);
        records.push(record);
        splines.push(spline);
    }
    Ok((CorrectedCorrespondence::new(raw.clone(), splines)?, records))
}

/// Forward differences of `theta` on a uniform grid over one period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub strictly_increasing: bool,
    pub min_step: f64,
    /// `theta(2pi) - theta(0)`.
    pub increment: f64,
    /// Parameter midpoints of maximal runs of non-positive steps.
    pub folds: Vec<f64>,
}

pub fn monotonicity(theta: &dyn Correspondence, points: usize) -> MonotonicityReport {
    let values: Vec<f64> = (0..=points).map(|j| theta.theta(TAU * j as f64 / points as f64)).collect();
    let steps: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let min_step = steps.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut folds = Vec::new();
    let mut run_start: Option<usize> = None;
    for (j, &s) in steps.iter().enumerate() {
        match (s <= 0.0, run_start) {
            (true, None) => run_start = Some(j),
            (false, Some(r)) => {
                folds.push(TAU * (r + j) as f64 / (2 * points) as f64);
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(r) = run_start {
        folds.push(TAU * (r + points) as f64 / (2 * points) as f64);
    }
    MonotonicityReport {
        strictly_increasing: min_step > 0.0,
        min_step,
        increment: values[points] - values[0],
        folds,
    }
}
