//! Pointwise residual of the one-dimensional heterogeneous PDE for a
//! constructed field restricted to a phase-shifted line.

use std::f64::consts::FRAC_PI_2;

use super::{loglog_slope, NumericField};
use crate::constructor::Construction;
use crate::error::{Error, Result};
use crate::heterogeneity::{kappa_exact, kappa_min};
use crate::trigpoly::Valuation;

/// Sample points per wavelength of the test mean field.
pub const SAMPLES_PER_WAVELENGTH: usize = 400;

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseTrial {
    pub phi: (f64, f64),
    /// Max residual per `q`.
    pub residuals: Vec<f64>,
    pub exponent: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseScalingReport {
    pub order: u32,
    pub q: Vec<f64>,
    pub trials: Vec<PhaseTrial>,
}

impl PhaseScalingReport {
    pub fn exponent_range(&self) -> (f64, f64) {
        self.trials
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| (lo.min(t.exponent), hi.max(t.exponent)))
    }
}

/// Pointwise evaluator of `u_t − ∂x(κ ∂x u)` along `x1 = x + φ1`, `x2 = x + φ2`
/// for `U = sin(qx)` evolving by the truncated homogenized PDE.
struct LineResidual {
    u: NumericField,
    k: Vec<f64>,
    v: Valuation<f64>,
}

impl LineResidual {
    fn new(c: &Construction, v: &Valuation<f64>) -> Self {
        Self {
            u: NumericField::new(&c.manifold.u, v),
            k: c.pde.coeffs.iter().map(|e| e.eval_f64(v)).collect(),
            v: v.clone(),
        }
    }

    fn at(&self, x: f64, phi: (f64, f64), q: f64) -> f64 {
        let (x1, x2) = (x + phi.0, x + phi.1);
        let dmax = self.u.max_d() + self.k.len() + 2;
        // ∂x^j sin(qx) = q^j sin(qx + jπ/2)
        let du: Vec<f64> = (0..=dmax)
            .map(|j| q.powi(j as i32) * (q * x + j as f64 * FRAC_PI_2).sin())
            .collect();
        let v = &self.v;
        let kappa = kappa_exact(v.a1, v.a2, v.k1, v.k2, x1, x2);
        let dkappa = kappa * kappa * (v.a1 * v.k1 * (v.k1 * x1).sin() + v.a2 * v.k2 * (v.k2 * x2).sin());
        let (mut u_t, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for (d, w) in self.u.eval_diag(x1, x2).iter().enumerate() {
            for (n, kn) in self.k.iter().enumerate() {
                u_t += w[0] * kn * du[d + n];
            }
            s1 += w[1] * du[d] + w[0] * du[d + 1];
            s2 += w[2] * du[d] + 2.0 * w[1] * du[d + 1] + w[0] * du[d + 2];
        }
        u_t - (dkappa * s1 + kappa * s2)
    }
}

/// Max of the residual over one wavelength of `U`.
pub fn phase_shift_residual(c: &Construction, v: &Valuation<f64>, phi: (f64, f64), q: f64) -> f64 {
    line_max(&LineResidual::new(c, v), phi, q)
}

fn line_max(r: &LineResidual, phi: (f64, f64), q: f64) -> f64 {
    let len = std::f64::consts::TAU / q;
    (0..SAMPLES_PER_WAVELENGTH)
        .map(|i| r.at(len * i as f64 / SAMPLES_PER_WAVELENGTH as f64, phi, q).abs())
        .fold(0.0, f64::max)
}

/// Residual scaling in `q` for each phase pair; the exponent is the log-log
/// slope of the max residual.
pub fn phase_shift_scaling(
    c: &Construction,
    v: &Valuation<f64>,
    phases: &[(f64, f64)],
    qs: &[f64],
) -> Result<PhaseScalingReport> {
    kappa_min(v.a1, v.a2)?;
    if qs.len() < 2 || qs.iter().any(|q| q.is_nan() || *q <= 0.0) {
        return Err(Error::Unsupported("need at least two positive wavenumbers".into()));
    }
    let r = LineResidual::new(c, v);
    let trials = phases
        .iter()
        .map(|&phi| {
            let residuals: Vec<f64> = qs.iter().map(|&q| line_max(&r, phi, q)).collect();
            PhaseTrial {
                phi,
                exponent: loglog_slope(qs, &residuals),
                residuals,
            }
        })
        .collect();
    Ok(PhaseScalingReport {
        order: c.pde.orders.0,
        q: qs.to_vec(),
        trials,
    })
}
