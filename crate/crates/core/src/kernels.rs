//! Kernels of the boundary integral equation, the conjugate-function operator,
//! and the forcing term.
//!
//! With `h = tau - t` the chord factors as
//! `z0(tau) - z0(t) = 2i sin(h/2) e^{i(tau+t)/2} R(tau, t)`, where `R` is a
//! trigonometric polynomial in both arguments. `log|R|` is the regular part of
//! `log|z0(tau) - z0(t)|`; the remaining `log|2 sin(h/2)|` produces the
//! `-cot(h/2)/2` singularity, which is only ever applied in Fourier space.

use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::boundary::TrigBoundary;
use crate::error::{MapError, Result};
use crate::fourier::{uniform_nodes, wrap_signed, TrigSeries};

/// `K(tau, t) = -d/dt arg(z0(tau) - z0(t))`.
///
/// On the diagonal the Taylor limit `-Im(z0''(t) / (2 z0'(t)))` is used.
pub fn kernel_k(b: &TrigBoundary, tau: f64, t: f64) -> Result<f64> {
    let (zt, dzt, d2zt) = b.eval_with_derivatives(t);
    if wrap_signed(tau - t) == 0.0 {
        return kernel_k_diagonal(dzt, d2zt, t);
    }
    let chord = b.eval(tau) - zt;
    kernel_k_off_diagonal(chord, dzt, tau, t)
}

fn kernel_k_diagonal(dz: Complex64, d2z: Complex64, t: f64) -> Result<f64> {
    let v = -(d2z / (2.0 * dz)).im;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(MapError::NonFiniteKernel { tau: t, t })
    }
}

fn kernel_k_off_diagonal(chord: Complex64, dzt: Complex64, tau: f64, t: f64) -> Result<f64> {
    if chord.norm() == 0.0 {
        return Err(MapError::Boundary(format!(
            "z0({tau}) = z0({t}) at distinct parameters: curve is not simple"
        )));
    }
    let v = (dzt / chord).im;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(MapError::NonFiniteKernel { tau, t })
    }
}

/// The regular chord factor `R(tau, t)` and its partial derivative in `t`.
pub fn regular_factor(b: &TrigBoundary, tau: f64, t: f64) -> (Complex64, Complex64) {
    let i = Complex64::i();
    let h = tau - t;
    let w = Complex64::from_polar(1.0, h);
    let e_t = Complex64::from_polar(1.0, t);
    let e_tau_inv = Complex64::from_polar(1.0, -tau);
    let e_t_inv = e_t.conj();

    let (mut r, mut r_t) = (Complex64::default(), Complex64::default());
    // S_k = sum_{l<k} w^l and dS_k/dh = sum_{l<k} i l w^l, built incrementally.
    let (mut s, mut ds) = (Complex64::default(), Complex64::default());
    let mut w_pow = Complex64::new(1.0, 0.0);
    let mut e_pos = Complex64::new(1.0, 0.0); // e^{i(k-1)t}
    let mut e_neg = e_tau_inv; // e^{-ik tau}
    for k in 1..=b.n().max(b.m()) {
        let l = (k - 1) as f64;
        s += w_pow;
        ds += i * l * w_pow;
        w_pow *= w;
        if k <= b.n() {
            let d = b.coeff(k as i64);
            r += d * e_pos * s;
            r_t += d * e_pos * (i * l * s - ds);
        }
        if k <= b.m() {
            let d = b.coeff(-(k as i64));
            let base = d * e_neg * e_t_inv;
            r -= base * s;
            r_t -= base * (-i * s - ds);
        }
        e_pos *= e_t;
        e_neg *= e_tau_inv;
    }
    (r, r_t)
}

/// `L(tau, t) + cot((tau - t)/2) / 2`, i.e. `d/dt log|R(tau, t)|`.
///
/// `R` is a trigonometric polynomial, so the diagonal is evaluated directly.
pub fn kernel_l_regular(b: &TrigBoundary, tau: f64, t: f64) -> Result<f64> {
    let (r, r_t) = regular_factor(b, tau, t);
    if r.norm() <= 1e-14 * b.terms().map(|(_, d)| d.norm()).sum::<f64>() {
        return Err(MapError::Degenerate { tau, t });
    }
    Ok((r_t / r).re)
}

/// Conjugate function: `a cos lt + b sin lt -> a sin lt - b cos lt`, constant
/// term dropped. Equals `(1/2pi) PV int g(tau) cot((t - tau)/2) dtau`.
pub fn hilbert_conjugate(g: &TrigSeries) -> TrigSeries {
    let a = g.b.iter().map(|b| -b).collect();
    let b = g.a.clone();
    TrigSeries::new(0.0, a, b)
}

/// Samples of `d/dt log|z0(t)|` at the `n` uniform nodes.
pub fn log_modulus_derivative(b: &TrigBoundary, n: usize) -> Vec<f64> {
    uniform_nodes(n)
        .iter()
        .map(|&t| {
            let (z, dz, _) = b.eval_with_derivatives(t);
            (dz / z).re
        })
        .collect()
}

fn check_grid_size(b: &TrigBoundary, n: usize) -> Result<()> {
    let need = (4 * (b.m() + b.n())).max(4);
    if !n.is_power_of_two() || n < need {
        return Err(MapError::Resolution(format!(
            "grid size {n} must be a power of two and at least 4(m+n) = {need}"
        )));
    }
    Ok(())
}

/// `P(t) = (1/pi) int [log|z0(tau)|]' L(tau, t) dtau` at the `n` uniform nodes.
pub fn compute_p(b: &TrigBoundary, n: usize) -> Result<Vec<f64>> {
    check_grid_size(b, n)?;
    let g = log_modulus_derivative(b, n);
    let conjugate = hilbert_conjugate(&TrigSeries::from_samples(&g, (n - 1) / 2)).sample(n);
    let nodes = uniform_nodes(n);
    let weight = 2.0 / n as f64;
    nodes
        .par_iter()
        .zip(conjugate.par_iter())
        .map(|(&t, &conj)| {
            let mut acc = 0.0;
            for (&tau, &gi) in nodes.iter().zip(&g) {
                acc += gi * kernel_l_regular(b, tau, t)?;
            }
            Ok(conj + weight * acc)
        })
        .collect()
}

/// Kernel `K` and forcing `P` sampled on a uniform `n x n` grid.
///
/// `k_values[i * n + j] = K(tau_i, t_j)`.
#[derive(Debug, Clone)]
pub struct KernelGrid {
    pub n: usize,
    pub nodes: Vec<f64>,
    pub k_values: Vec<f64>,
    pub p_values: Vec<f64>,
}

impl KernelGrid {
    pub fn build(b: &TrigBoundary, n: usize) -> Result<Self> {
        check_grid_size(b, n)?;
        let nodes = uniform_nodes(n);
        let samples: Vec<_> = nodes.iter().map(|&t| b.eval_with_derivatives(t)).collect();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let z_tau = samples[i].0;
                (0..n)
                    .map(|j| {
                        let (z_t, dz_t, d2z_t) = samples[j];
                        if i == j {
                            kernel_k_diagonal(dz_t, d2z_t, nodes[j])
                        } else {
                            kernel_k_off_diagonal(z_tau - z_t, dz_t, nodes[i], nodes[j])
                        }
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        let k_values = rows.concat();
        let p_values = compute_p(b, n)?;
        Ok(Self { n, nodes, k_values, p_values })
    }

    pub fn k(&self, i: usize, j: usize) -> f64 {
        self.k_values[i * self.n + j]
    }

    /// Writes K as `n` comma-separated rows (row index = tau node).
    pub fn write_k_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for row in self.k_values.chunks_exact(self.n) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn write_p_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,P")?;
        for (t, p) in self.nodes.iter().zip(&self.p_values) {
            writeln!(w, "{t:.17e},{p:.17e}")?;
        }
        Ok(())
    }
}
