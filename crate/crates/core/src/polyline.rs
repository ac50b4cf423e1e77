//! Closed polylines: winding numbers, distances, and a self-intersection guard.

use std::f64::consts::TAU;

use num_complex::Complex64;

/// A closed polygon; the last vertex connects back to the first.
#[derive(Debug, Clone)]
pub struct ClosedPolyline {
    pub points: Vec<Complex64>,
}

impl ClosedPolyline {
    pub fn new(points: Vec<Complex64>) -> Self {
        Self { points }
    }

    fn segments(&self) -> impl Iterator<Item = (Complex64, Complex64)> + '_ {
        let n = self.points.len();
        (0..n).map(move |i| (self.points[i], self.points[(i + 1) % n]))
    }

    /// Winding number about `p`, accumulated from signed vertex-angle increments.
    pub fn winding_number(&self, p: Complex64) -> i64 {
        let total: f64 = self
            .segments()
            .map(|(a, b)| ((b - p) / (a - p)).arg())
            .sum();
        (total / TAU).round() as i64
    }

    pub fn distance_to(&self, p: Complex64) -> f64 {
        self.segments()
            .map(|(a, b)| segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Symmetric Hausdorff distance between the two vertex sets measured against
    /// the other polyline's segments.
    pub fn hausdorff(&self, other: &ClosedPolyline) -> f64 {
        let forward = self
            .points
            .iter()
            .map(|&p| other.distance_to(p))
            .fold(0.0, f64::max);
        let backward = other
            .points
            .iter()
            .map(|&p| self.distance_to(p))
            .fold(0.0, f64::max);
        forward.max(backward)
    }

    pub fn diameter_bound(&self) -> f64 {
        let (mut lo, mut hi) = (
            Complex64::new(f64::INFINITY, f64::INFINITY),
            Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        );
        for p in &self.points {
            lo.re = lo.re.min(p.re);
            lo.im = lo.im.min(p.im);
            hi.re = hi.re.max(p.re);
            hi.im = hi.im.max(p.im);
        }
        (hi - lo).norm()
    }

    /// Returns the index pair of the first two non-adjacent segments found to
    /// intersect, or `None` for a simple polygon.
    ///
    /// Segments are sorted by their left x-extent and swept left to right; only
    /// segments with overlapping x-ranges are compared.
    pub fn find_self_intersection(&self) -> Option<(usize, usize)> {
        let n = self.points.len();
        if n < 4 {
            return None;
        }
        let mut order: Vec<usize> = (0..n).collect();
        let x_range = |i: usize| {
            let (a, b) = (self.points[i], self.points[(i + 1) % n]);
            (a.re.min(b.re), a.re.max(b.re))
        };
        order.sort_by(|&i, &j| x_range(i).0.total_cmp(&x_range(j).0));
        let mut active: Vec<usize> = Vec::new();
        for &i in &order {
            let (lo, _) = x_range(i);
            active.retain(|&j| x_range(j).1 >= lo);
            for &j in &active {
                let adjacent = (i + 1) % n == j || (j + 1) % n == i;
                if adjacent {
                    continue;
                }
                let (a, b) = (self.points[i], self.points[(i + 1) % n]);
                let (c, d) = (self.points[j], self.points[(j + 1) % n]);
                if segments_intersect(a, b, c, d) {
                    return Some((i.min(j), i.max(j)));
                }
            }
            active.push(i);
        }
        None
    }
}

pub fn segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let s = ((p - a) * ab.conj()).re / len2;
    let s = s.clamp(0.0, 1.0);
    (p - (a + ab * s)).norm()
}

fn cross(u: Complex64, v: Complex64) -> f64 {
    u.re * v.im - u.im * v.re
}

fn segments_intersect(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> bool {
    let d1 = cross(b - a, c - a);
    let d2 = cross(b - a, d - a);
    let d3 = cross(d - c, a - c);
    let d4 = cross(d - c, b - c);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: Complex64, q: Complex64, r: Complex64, o: f64| {
        o == 0.0
            && r.re >= p.re.min(q.re)
            && r.re <= p.re.max(q.re)
            && r.im >= p.im.min(q.im)
            && r.im <= p.im.max(q.im)
    };
    on(a, b, c, d1) || on(a, b, d, d2) || on(c, d, a, d3) || on(c, d, b, d4)
}
