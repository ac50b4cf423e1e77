//! Truncated Fourier-Galerkin system for `q'(t)` and the raw boundary
//! correspondence `theta(t) = arg z0(t) - q(t)`.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::boundary::TrigBoundary;
use crate::corrector::CorrectedCorrespondence;
use crate::error::{MapError, Result};
use crate::fourier::{forward_2d, forward_real, uniform_nodes, TrigSeries};
use crate::kernels::KernelGrid;

/// Condition numbers above this are treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// The assembled `2M x 2M` system with the kernel grid it was built from.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub order: usize,
    /// Rows `0..M` are the cosine equations, rows `M..2M` the sine equations;
    /// columns `0..M` multiply alpha, `M..2M` multiply beta.
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub grid: KernelGrid,
}

/// Fourier coefficients of `q'(t) = sum alpha_l cos lt + beta_l sin lt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FredholmSolution {
    #[serde(rename = "M")]
    pub order: usize,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    #[serde(rename = "residual")]
    pub residual_norm: f64,
}

/// Assembles the truncated system of order `order` from an `n x n` kernel grid.
///
/// The double cosine/sine moments of `K` all come out of one 2D FFT of the grid.
pub fn assemble_system(b: &TrigBoundary, order: usize, n: usize) -> Result<LinearSystem> {
    if order == 0 {
        return Err(MapError::InvalidInput("truncation order must be positive".into()));
    }
    let need = (2 * (2 * order + 1)).max(4 * (b.m() + b.n()));
    if n < need {
        return Err(MapError::Resolution(format!(
            "grid size {n} too small for M={order}: need at least {need}"
        )));
    }
    let grid = KernelGrid::build(b, n)?;
    let (matrix, rhs) = system_from_grid(&grid, order);
    Ok(LinearSystem { order, matrix, rhs, grid })
}

fn system_from_grid(grid: &KernelGrid, order: usize) -> (DMatrix<f64>, DVector<f64>) {
    let n = grid.n;
    let mut spectrum: Vec<Complex64> = grid.k_values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward_2d(&mut spectrum, n, n);
    let e = |p: usize, q: usize| spectrum[p * n + q];
    let scale = 4.0 / (n * n) as f64;

    let mut matrix = DMatrix::<f64>::identity(2 * order, 2 * order);
    for j in 1..=order {
        for k in 1..=order {
            let plus = e(k, j);
            let minus = e(k, n - j);
            let cc = 0.5 * (plus.re + minus.re);
            let ss = 0.5 * (minus.re - plus.re);
            let cs = 0.5 * (minus.im - plus.im);
            let sc = -0.5 * (plus.im + minus.im);
            let (r, c) = (j - 1, k - 1);
            matrix[(r, c)] -= scale * cc;
            matrix[(r, order + c)] -= scale * sc;
            matrix[(order + r, c)] -= scale * cs;
            matrix[(order + r, order + c)] -= scale * ss;
        }
    }

    let p_hat = forward_real(&grid.p_values);
    let weight = 2.0 / n as f64;
    let mut rhs = DVector::<f64>::zeros(2 * order);
    for j in 1..=order {
        rhs[j - 1] = weight * p_hat[j].re;
        rhs[order + j - 1] = -weight * p_hat[j].im;
    }
    (matrix, rhs)
}

/// Dense LU solve with a singular-value condition check, followed by the
/// residual of the integral equation on the kernel grid.
pub fn solve(system: &LinearSystem) -> Result<FredholmSolution> {
    let order = system.order;
    let singular = system.matrix.singular_values();
    let smax = singular.max();
    let smin = singular.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(MapError::Singular {
            condition,
            diagnostics: format!(
                "M={order}, N={}, max |K| = {:.3e}",
                system.grid.n,
                system.grid.k_values.iter().fold(0.0f64, |a, v| a.max(v.abs()))
            ),
        });
    }
    let x = system
        .matrix
        .clone()
        .lu()
        .solve(&system.rhs)
        .ok_or(MapError::Singular { condition, diagnostics: "LU factorization failed".into() })?;
    let alpha = x.rows(0, order).iter().copied().collect();
    let beta = x.rows(order, order).iter().copied().collect();
    let mut solution = FredholmSolution { order, alpha, beta, residual_norm: f64::NAN };
    solution.residual_norm = equation_residual(&system.grid, &solution);
    Ok(solution)
}

/// `max_j |q'(t_j) - (1/pi) int K(tau, t_j) q'(tau) dtau - P(t_j)|` by the
/// trapezoidal rule on the grid nodes.
pub fn equation_residual(grid: &KernelGrid, solution: &FredholmSolution) -> f64 {
    let n = grid.n;
    let qp = solution.q_prime_series().sample(n);
    let weight = 2.0 / n as f64;
    (0..n)
        .map(|j| {
            let integral: f64 = (0..n).map(|i| grid.k(i, j) * qp[i]).sum();
            (qp[j] - weight * integral - grid.p_values[j]).abs()
        })
        .fold(0.0, f64::max)
}

impl FredholmSolution {
    pub fn q_prime_series(&self) -> TrigSeries {
        TrigSeries::new(0.0, self.alpha.clone(), self.beta.clone())
    }

    /// Antiderivative of `q'` with the constant of integration set to zero.
    pub fn q_series(&self) -> TrigSeries {
        let (a, b) = self
            .alpha
            .iter()
            .zip(&self.beta)
            .enumerate()
            .map(|(l, (&al, &bl))| {
                let l = (l + 1) as f64;
                (-bl / l, al / l)
            })
            .unzip();
        TrigSeries::new(0.0, a, b)
    }
}

/// `arg z0(t)` tracked continuously: a dense grid of unwrapped values selects
/// the branch of the principal argument at any `t`.
#[derive(Debug, Clone)]
pub struct UnwrappedArg {
    boundary: TrigBoundary,
    values: Vec<f64>,
}

impl UnwrappedArg {
    pub fn new(boundary: &TrigBoundary) -> Result<Self> {
        let mut size = 4096;
        loop {
            let nodes = uniform_nodes(size);
            let mut values = Vec::with_capacity(size + 1);
            let mut prev = boundary.eval(0.0).arg();
            values.push(prev);
            let mut max_step: f64 = 0.0;
            for &t in nodes.iter().skip(1).chain(std::iter::once(&TAU)) {
                let principal = boundary.eval(t).arg();
                let next = principal + TAU * ((prev - principal) / TAU).round();
                max_step = max_step.max((next - prev).abs());
                values.push(next);
                prev = next;
            }
            let turns = (values[size] - values[0]) / TAU;
            if max_step < 0.5 {
                if (turns - 1.0).abs() > 1e-9 {
                    return Err(MapError::Boundary(format!(
                        "arg z0 gains {turns} turns per period, expected 1"
                    )));
                }
                return Ok(Self { boundary: boundary.clone(), values });
            }
            if size >= 1 << 20 {
                return Err(MapError::Boundary("arg z0 varies too fast to unwrap".into()));
            }
            size *= 2;
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let size = self.values.len() - 1;
        let turns = (t / TAU).floor();
        let r = t - turns * TAU;
        let j = ((r / TAU * size as f64) as usize).min(size);
        let principal = self.boundary.eval(r).arg();
        let reference = self.values[j];
        principal + TAU * ((reference - principal) / TAU).round() + TAU * turns
    }

    /// `d/dt arg z0(t) = Im(z0'/z0)`.
    pub fn derivative(&self, t: f64) -> f64 {
        let (z, dz, _) = self.boundary.eval_with_derivatives(t);
        (dz / z).im
    }
}

/// A boundary correspondence `t -> theta(t)` on the whole real line with
/// `theta(t + 2pi) = theta(t) + 2pi`.
pub trait Correspondence {
    fn theta(&self, t: f64) -> f64;
    fn theta_prime(&self, t: f64) -> f64;
}

/// `theta(t) = arg z0(t) - q(t)` from a solved system.
#[derive(Debug, Clone)]
pub struct RawCorrespondence {
    boundary: TrigBoundary,
    solution: FredholmSolution,
    arg: UnwrappedArg,
    q: TrigSeries,
    q_prime: TrigSeries,
}

impl RawCorrespondence {
    pub fn new(boundary: &TrigBoundary, solution: &FredholmSolution) -> Result<Self> {
        if solution.alpha.len() != solution.order || solution.beta.len() != solution.order {
            return Err(MapError::InvalidInput(format!(
                "solution vectors must have length M={}",
                solution.order
            )));
        }
        Ok(Self {
            boundary: boundary.clone(),
            solution: solution.clone(),
            arg: UnwrappedArg::new(boundary)?,
            q: solution.q_series(),
            q_prime: solution.q_prime_series(),
        })
    }

    pub fn boundary(&self) -> &TrigBoundary {
        &self.boundary
    }

    pub fn solution(&self) -> &FredholmSolution {
        &self.solution
    }

    pub fn q(&self, t: f64) -> f64 {
        self.q.eval(t)
    }
}

impl Correspondence for RawCorrespondence {
    fn theta(&self, t: f64) -> f64 {
        self.arg.eval(t) - self.q.eval(t)
    }

    fn theta_prime(&self, t: f64) -> f64 {
        self.arg.derivative(t) - self.q_prime.eval(t)
    }
}

/// Either the raw solution or its spline-corrected form.
#[derive(Debug, Clone)]
pub enum BoundaryCorrespondence {
    Raw(RawCorrespondence),
    Corrected(CorrectedCorrespondence),
}

impl BoundaryCorrespondence {
    pub fn raw(&self) -> &RawCorrespondence {
        match self {
            BoundaryCorrespondence::Raw(r) => r,
            BoundaryCorrespondence::Corrected(c) => c.raw(),
        }
    }

    pub fn boundary(&self) -> &TrigBoundary {
        self.raw().boundary()
    }
}

impl Correspondence for BoundaryCorrespondence {
    fn theta(&self, t: f64) -> f64 {
        match self {
            BoundaryCorrespondence::Raw(r) => r.theta(t),
            BoundaryCorrespondence::Corrected(c) => c.theta(t),
        }
    }

    fn theta_prime(&self, t: f64) -> f64 {
        match self {
            BoundaryCorrespondence::Raw(r) => r.theta_prime(t),
            BoundaryCorrespondence::Corrected(c) => c.theta_prime(t),
        }
    }
}

/// Solves the system for `boundary` at truncation `order` on an `n`-point grid.
pub fn solve_boundary(boundary: &TrigBoundary, order: usize, n: usize) -> Result<FredholmSolution> {
    solve(&assemble_system(boundary, order, n)?)
}
