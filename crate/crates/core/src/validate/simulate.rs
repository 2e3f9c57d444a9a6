//! Time-stepping cross-validation: the heterogeneous PDE on a fine periodic
//! grid against a homogenized PDE integrated exactly per Fourier mode.

use std::f64::consts::TAU;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::NumericField;
use crate::constructor::{Construction, NumericPde, RegularizedModel};
use crate::error::{Error, Result};
use crate::heterogeneity::{kappa_exact, kappa_min, Family};
use crate::trigpoly::Valuation;

/// Flux-form second-order finite differences with `κ` at half points,
/// Crank–Nicolson in time.
#[derive(Clone, Debug)]
pub struct HeterogeneousSolver {
    h: f64,
    dt: f64,
    kappa_half: Vec<f64>,
}

impl HeterogeneousSolver {
    pub fn new(a: f64, length: f64, points: usize, dt: f64) -> Result<Self> {
        kappa_min(a, 0.0)?;
        let h = length / points as f64;
        let kappa_half = (0..points)
            .map(|j| kappa_exact(a, 0.0, 1.0, 1.0, (j as f64 + 0.5) * h, 0.0))
            .collect();
        Ok(Self { h, dt, kappa_half })
    }

    fn apply(&self, u: &[f64], out: &mut [f64]) {
        let n = u.len();
        let r = 1.0 / (self.h * self.h);
        for j in 0..n {
            let (jm, jp) = ((j + n - 1) % n, (j + 1) % n);
            let fp = self.kappa_half[j] * (u[jp] - u[j]);
            let fm = self.kappa_half[jm] * (u[j] - u[jm]);
            out[j] = r * (fp - fm);
        }
    }

    /// One step `(I − dt/2 A) u⁺ = (I + dt/2 A) u`.
    pub fn step(&self, u: &mut Vec<f64>) {
        let n = u.len();
        let c = 0.5 * self.dt / (self.h * self.h);
        let mut au = vec![0.0; n];
        self.apply(u, &mut au);
        let rhs: Vec<f64> = u.iter().zip(&au).map(|(v, a)| v + 0.5 * self.dt * a).collect();
        let lower: Vec<f64> = (0..n).map(|j| -c * self.kappa_half[(j + n - 1) % n]).collect();
        let upper: Vec<f64> = (0..n).map(|j| -c * self.kappa_half[j]).collect();
        let diag: Vec<f64> = (0..n).map(|j| 1.0 - lower[j] - upper[j]).collect();
        *u = solve_periodic_tridiagonal(&lower, &diag, &upper, &rhs);
    }
}

/// Thomas algorithm on the cyclic system via Sherman–Morrison; `lower[0]`
/// couples row 0 to the last unknown and `upper[n−1]` the last row to the first.
fn solve_periodic_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let gamma = -diag[0];
    let mut b = diag.to_vec();
    b[0] -= gamma;
    b[n - 1] -= lower[0] * upper[n - 1] / gamma;
    let x = thomas(lower, &b, upper, rhs);
    let mut w = vec![0.0; n];
    w[0] = gamma;
    w[n - 1] = upper[n - 1];
    let z = thomas(lower, &b, upper, &w);
    let fact = (x[0] + lower[0] * x[n - 1] / gamma) / (1.0 + z[0] + lower[0] * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
}

fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        c[i] = upper[i] / m;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    d
}

/// Homogenized evolution `U_t = L(∂x) U` by its Fourier symbol.
#[derive(Clone, Debug, PartialEq)]
pub enum HomogenizedModel {
    /// `Σ_{n≤N} K_n ∂x^n`.
    Truncated { pde: NumericPde, order: usize },
    Regularized(RegularizedModel),
}

impl HomogenizedModel {
    pub fn symbol(&self, k: f64) -> f64 {
        match self {
            HomogenizedModel::Truncated { pde, order } => pde.symbol(k, *order),
            HomogenizedModel::Regularized(r) => r.symbol(k),
        }
    }

    pub fn label(&self) -> String {
        match self {
            HomogenizedModel::Truncated { order, .. } => format!("N{order}"),
            HomogenizedModel::Regularized(_) => "reg".into(),
        }
    }

    /// Exact solution at time `t` on a uniform periodic grid of length `length`.
    pub fn evolve(&self, u0: &[f64], length: f64, t: f64) -> Vec<f64> {
        self.evolve_derivatives(u0, length, t, 0).swap_remove(0)
    }

    /// The solution at time `t` and its spatial derivatives up to `max_order`,
    /// all spectrally.
    pub fn evolve_derivatives(&self, u0: &[f64], length: f64, t: f64, max_order: usize) -> Vec<Vec<f64>> {
        let n = u0.len();
        let mut planner = FftPlanner::<f64>::new();
        let inverse = planner.plan_fft_inverse(n);
        let mut hat: Vec<Complex<f64>> = u0.iter().map(|&v| Complex::new(v, 0.0)).collect();
        planner.plan_fft_forward(n).process(&mut hat);
        for (j, c) in hat.iter_mut().enumerate() {
            *c *= (self.symbol(wavenumber(j, n, length)) * t).exp() / n as f64;
        }
        (0..=max_order)
            .map(|d| {
                let mut buf: Vec<Complex<f64>> = hat
                    .iter()
                    .enumerate()
                    .map(|(j, c)| {
                        if d % 2 == 1 && 2 * j == n {
                            return Complex::new(0.0, 0.0);
                        }
                        c * Complex::new(0.0, wavenumber(j, n, length)).powu(d as u32)
                    })
                    .collect();
                inverse.process(&mut buf);
                buf.iter().map(|c| c.re).collect()
            })
            .collect()
    }

    /// Largest growth rate among resolved grid modes.
    pub fn max_growth(&self, n: usize, length: f64) -> f64 {
        (1..n).map(|j| self.symbol(wavenumber(j, n, length))).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn wavenumber(j: usize, n: usize, length: f64) -> f64 {
    let s = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
    TAU * s / length
}

/// Periodic moving average over `window` samples (trapezoidal end weights).
fn window_mean(u: &[f64], window: usize) -> Vec<f64> {
    let n = u.len();
    let half = window / 2;
    (0..n)
        .map(|j| {
            let at = |o: isize| u[(j as isize + o).rem_euclid(n as isize) as usize];
            let mut s = 0.5 * (at(-(half as isize)) + at(half as isize));
            for o in -(half as isize) + 1..half as isize {
                s += at(o);
            }
            s / window as f64
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossValidation {
    pub a: f64,
    /// `L/ℓ1`, the domain length in microscale periods.
    pub periods: usize,
    pub points_per_period: usize,
    pub dt: f64,
    /// Comparison instants after the transient cutoff.
    pub samples: usize,
}

impl CrossValidation {
    pub fn new(a: f64, periods: usize) -> Self {
        Self {
            a,
            periods,
            points_per_period: 64,
            dt: 0.01,
            samples: 20,
        }
    }

    pub fn length(&self) -> f64 {
        TAU * self.periods as f64
    }

    fn points(&self) -> usize {
        self.periods * self.points_per_period
    }

    /// `5/β1` with `β1 = κ_min`.
    pub fn transient(&self) -> Result<f64> {
        Ok(5.0 / kappa_min(self.a, 0.0)?)
    }

    /// Comparison ends one macroscale decay time `(L/2π)²` after the transient.
    pub fn horizon(&self) -> Result<f64> {
        Ok(self.transient()? + (self.periods as f64).powi(2))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    pub model: String,
    pub times: Vec<f64>,
    /// Relative L2 error of the window means at each time.
    pub errors: Vec<f64>,
    /// Spatial mean of the heterogeneous solution at each time.
    pub means: Vec<f64>,
}

impl ErrorReport {
    pub fn max_error(&self) -> f64 {
        self.errors.iter().copied().fold(0.0, f64::max)
    }
}

/// Evolve the heterogeneous PDE from the slow-manifold lift of
/// `U = sin(2πx/L)` and compare its window mean, after the transient, with
/// the window mean of the lift of the homogenized solution.
pub fn cross_validate(cfg: &CrossValidation, lift: &Construction, model: &HomogenizedModel) -> Result<ErrorReport> {
    if lift.pde.family != Family::SinglePeriod {
        return Err(Error::Unsupported("cross-validation needs a single-period construction".into()));
    }
    let n = cfg.points();
    let length = cfg.length();
    let growth = model.max_growth(n, length);
    if growth > 0.0 {
        return Err(Error::Unstable(format!(
            "model {} amplifies resolved modes at rate {growth:.3e}; use the regularized model",
            model.label()
        )));
    }
    let q = TAU / length;
    let v = Valuation { a1: cfg.a, a2: 0.0, k1: 1.0, k2: 1.0 };
    let field = NumericField::new(&lift.manifold.u, &v);
    let x: Vec<f64> = (0..n).map(|j| j as f64 * length / n as f64).collect();
    let coeffs: Vec<Vec<f64>> = x.iter().map(|&xi| field.eval_diag(xi, 0.0).iter().map(|w| w[0]).collect()).collect();
    let lifted = |derivs: &[Vec<f64>]| -> Vec<f64> {
        (0..n)
            .map(|j| coeffs[j].iter().zip(derivs).map(|(c, dv)| c * dv[j]).sum())
            .collect()
    };
    let mean0: Vec<f64> = x.iter().map(|xi| (q * xi).sin()).collect();
    let orders = field.max_d();
    let mut u = lifted(&model.evolve_derivatives(&mean0, length, 0.0, orders));

    let solver = HeterogeneousSolver::new(cfg.a, length, n, cfg.dt)?;
    let t0 = cfg.transient()?;
    let t1 = cfg.horizon()?;
    let targets: Vec<f64> = (0..cfg.samples)
        .map(|i| t0 + (t1 - t0) * i as f64 / (cfg.samples - 1).max(1) as f64)
        .collect();
    let mut report = ErrorReport {
        model: model.label(),
        times: Vec::new(),
        errors: Vec::new(),
        means: Vec::new(),
    };
    let mut step = 0usize;
    for &target in &targets {
        let steps_to = (target / cfg.dt).round() as usize;
        while step < steps_to {
            solver.step(&mut u);
            step += 1;
        }
        let t = step as f64 * cfg.dt;
        let wu = window_mean(&u, cfg.points_per_period);
        let wh = window_mean(&lifted(&model.evolve_derivatives(&mean0, length, t, orders)), cfg.points_per_period);
        let num: f64 = wu.iter().zip(&wh).map(|(a, b)| (a - b).powi(2)).sum();
        let den: f64 = wh.iter().map(|b| b * b).sum();
        report.times.push(t);
        report.errors.push((num / den).sqrt());
        report.means.push(u.iter().sum::<f64>() / n as f64);
    }
    Ok(report)
}
