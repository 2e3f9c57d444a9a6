//! Numerical oracles for constructed homogenizations: Bloch–Floquet
//! dispersion, phase-shift residual scaling and time-stepping
//! cross-validation.

pub mod bloch;
pub mod phase;
pub mod simulate;

pub use bloch::{bloch_branch, kappa_fourier, modes_for, BlochMatrix, DispersionRow, DispersionTable};
pub use phase::{phase_shift_residual, phase_shift_scaling, PhaseScalingReport, PhaseTrial};
pub use simulate::{cross_validate, CrossValidation, ErrorReport, HeterogeneousSolver, HomogenizedModel};

use crate::trigpoly::{FieldSeries, Parity, Valuation, Wavenumbers};

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[derive(Clone, Copy, Debug)]
struct NumericTerm {
    d: usize,
    w1: f64,
    w2: f64,
    parity: Parity,
    c: f64,
}

/// A field series with every coefficient evaluated, for fast pointwise use.
#[derive(Clone, Debug)]
pub struct NumericField {
    terms: Vec<NumericTerm>,
    max_d: usize,
}

impl NumericField {
    pub fn new(f: &FieldSeries, v: &Valuation<f64>) -> Self {
        let k1 = match f.wavenumbers() {
            Wavenumbers::Symbolic => v.k1,
            Wavenumbers::UnitK1 => 1.0,
        };
        let terms: Vec<NumericTerm> = f
            .iter()
            .map(|((d, h), c)| NumericTerm {
                d: *d as usize,
                w1: h.m() as f64 * k1,
                w2: h.n() as f64 * v.k2,
                parity: h.parity(),
                c: c.eval_f64(v),
            })
            .filter(|t| t.c != 0.0)
            .collect();
        let max_d = terms.iter().map(|t| t.d).max().unwrap_or(0);
        Self { terms, max_d }
    }

    pub fn max_d(&self) -> usize {
        self.max_d
    }

    /// Coefficient functions at `(x1, x2)` and their first two derivatives
    /// along `∂x1 + ∂x2`, indexed by derivative order of `U`.
    pub fn eval_diag(&self, x1: f64, x2: f64) -> Vec<[f64; 3]> {
        let mut out = vec![[0.0; 3]; self.max_d + 1];
        for t in &self.terms {
            let (s, c) = (t.w1 * x1 + t.w2 * x2).sin_cos();
            let om = t.w1 + t.w2;
            let v = match t.parity {
                Parity::Cos => [c, -om * s, -om * om * c],
                Parity::Sin => [s, om * c, -om * om * s],
            };
            for j in 0..3 {
                out[t.d][j] += t.c * v[j];
            }
        }
        out
    }
}
