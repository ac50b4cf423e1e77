//! Real trigonometric series on [0, 2pi) and the discrete transforms that produce them.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rustfft::FftPlanner;

/// `a0 + sum_l (a[l-1] cos lt + b[l-1] sin lt)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigSeries {
    pub a0: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl TrigSeries {
    pub fn new(a0: f64, a: Vec<f64>, b: Vec<f64>) -> Self {
        assert_eq!(a.len(), b.len(), "cos and sin coefficient lists differ in length");
        Self { a0, a, b }
    }

    pub fn zero(degree: usize) -> Self {
        Self::new(0.0, vec![0.0; degree], vec![0.0; degree])
    }

    pub fn degree(&self) -> usize {
        self.a.len()
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut acc = self.a0;
        for (l, (&a, &b)) in self.a.iter().zip(&self.b).enumerate() {
            let (s, c) = ((l + 1) as f64 * t).sin_cos();
            acc += a * c + b * s;
        }
        acc
    }

    pub fn derivative(&self) -> TrigSeries {
        let mut a = Vec::with_capacity(self.degree());
        let mut b = Vec::with_capacity(self.degree());
        for (l, (&al, &bl)) in self.a.iter().zip(&self.b).enumerate() {
            let l = (l + 1) as f64;
            a.push(l * bl);
            b.push(-l * al);
        }
        TrigSeries::new(0.0, a, b)
    }

    /// Coefficients of the samples `values[j] = g(2 pi j / N)`, truncated to `degree`
    /// harmonics. The Nyquist harmonic (even N) is dropped.
    pub fn from_samples(values: &[f64], degree: usize) -> Self {
        let n = values.len();
        assert!(n > 0);
        let max_degree = (n - 1) / 2;
        let degree = degree.min(max_degree);
        let spectrum = forward_real(values);
        let scale = 2.0 / n as f64;
        let a = (1..=degree).map(|l| scale * spectrum[l].re).collect();
        let b = (1..=degree).map(|l| -scale * spectrum[l].im).collect();
        TrigSeries::new(spectrum[0].re / n as f64, a, b)
    }

    /// Values at the N uniform nodes `2 pi j / N`.
    pub fn sample(&self, n: usize) -> Vec<f64> {
        assert!(self.degree() < n.div_ceil(2) || n == 0, "degree aliases on {n} nodes");
        let mut spectrum = vec![Complex64::new(0.0, 0.0); n];
        if n == 0 {
            return Vec::new();
        }
        spectrum[0] = Complex64::new(self.a0, 0.0);
        for l in 1..=self.degree() {
            let c = 0.5 * Complex64::new(self.a[l - 1], -self.b[l - 1]);
            spectrum[l] += c;
            spectrum[n - l] += c.conj();
        }
        let mut planner = FftPlanner::new();
        planner.plan_fft_inverse(n).process(&mut spectrum);
        spectrum.iter().map(|c| c.re).collect()
    }
}

/// Unnormalized forward DFT `G_l = sum_j g_j e^{-i l t_j}` of real samples.
pub fn forward_real(values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward_complex(&mut buf);
    buf
}

pub fn forward_complex(buf: &mut [Complex64]) {
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(buf.len()).process(buf);
}

/// In-place unnormalized forward 2D DFT of a row-major `rows x cols` array:
/// `E(p, q) = sum_i sum_j x_ij e^{-i p s_i} e^{-i q t_j}`.
pub fn forward_2d(data: &mut [Complex64], rows: usize, cols: usize) {
    assert_eq!(data.len(), rows * cols);
    let mut planner = FftPlanner::new();
    let row_fft = planner.plan_fft_forward(cols);
    for row in data.chunks_exact_mut(cols) {
        row_fft.process(row);
    }
    let col_fft = planner.plan_fft_forward(rows);
    let mut column = vec![Complex64::new(0.0, 0.0); rows];
    for j in 0..cols {
        for i in 0..rows {
            column[i] = data[i * cols + j];
        }
        col_fft.process(&mut column);
        for i in 0..rows {
            data[i * cols + j] = column[i];
        }
    }
}

/// Uniform nodes `2 pi j / n`, j = 0..n.
pub fn uniform_nodes(n: usize) -> Vec<f64> {
    (0..n).map(|j| TAU * j as f64 / n as f64).collect()
}

/// Representative of `t` in [0, 2pi).
pub fn wrap_angle(t: f64) -> f64 {
    let r = t.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Representative of `t` in (-pi, pi].
pub fn wrap_signed(t: f64) -> f64 {
    let r = wrap_angle(t + PI) - PI;
    if r <= -PI {
        r + TAU
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_samples_recovers_known_series() {
        let s = TrigSeries::new(0.3, vec![1.0, 0.0, -0.25], vec![0.0, 0.5, 0.125]);
        let samples: Vec<f64> = uniform_nodes(32).iter().map(|&t| s.eval(t)).collect();
        let back = TrigSeries::from_samples(&samples, 3);
        assert!((back.a0 - 0.3).abs() < 1e-14);
        for l in 0..3 {
            assert!((back.a[l] - s.a[l]).abs() < 1e-14);
            assert!((back.b[l] - s.b[l]).abs() < 1e-14);
        }
        let resampled = back.sample(32);
        for (x, y) in resampled.iter().zip(&samples) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn derivative_of_sin_is_cos() {
        let s = TrigSeries::new(0.0, vec![0.0, 0.0], vec![0.0, 1.0]);
        let d = s.derivative();
        assert_eq!(d.a, vec![0.0, 2.0]);
        assert_eq!(d.b, vec![0.0, 0.0]);
    }

    #[test]
    fn forward_2d_matches_direct_sum() {
        let (r, c) = (4, 8);
        let x: Vec<Complex64> = (0..r * c).map(|k| Complex64::new((k as f64).sin(), 0.0)).collect();
        let mut y = x.clone();
        forward_2d(&mut y, r, c);
        for p in 0..r {
            for q in 0..c {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..r {
                    for j in 0..c {
                        let ph = -TAU * (p * i) as f64 / r as f64 - TAU * (q * j) as f64 / c as f64;
                        acc += x[i * c + j] * Complex64::from_polar(1.0, ph);
                    }
                }
                assert!((acc - y[p * c + q]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn wrapping() {
        assert_eq!(wrap_angle(-0.5), TAU - 0.5);
        assert!((wrap_angle(7.0) - (7.0 - TAU)).abs() < 1e-15);
        assert!((wrap_signed(3.5) - (3.5 - TAU)).abs() < 1e-15);
    }

    proptest::proptest! {
        #[test]
        fn sample_then_fit_round_trips(
            a0 in -2.0f64..2.0,
            a in proptest::collection::vec(-1.0f64..1.0, 1..12),
            b in proptest::collection::vec(-1.0f64..1.0, 12),
        ) {
            let b = b[..a.len()].to_vec();
            let s = TrigSeries::new(a0, a, b);
            let back = TrigSeries::from_samples(&s.sample(64), s.degree());
            approx::assert_abs_diff_eq!(back.a0, s.a0, epsilon = 1e-12);
            for l in 0..s.degree() {
                approx::assert_abs_diff_eq!(back.a[l], s.a[l], epsilon = 1e-12);
                approx::assert_abs_diff_eq!(back.b[l], s.b[l], epsilon = 1e-12);
            }
        }

        #[test]
        fn wrapped_angles_stay_in_range(t in -100.0f64..100.0) {
            let w = wrap_angle(t);
            proptest::prop_assert!((0.0..std::f64::consts::TAU).contains(&w));
            let k = ((t - w) / std::f64::consts::TAU).round();
            approx::assert_abs_diff_eq!(t - w, k * std::f64::consts::TAU, epsilon = 1e-9);
            let s = wrap_signed(t);
            proptest::prop_assert!(s > -std::f64::consts::PI && s <= std::f64::consts::PI);
        }
    }
}
