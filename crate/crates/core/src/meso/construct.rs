//! Slow manifold of diffusion through `κ = 1/(b(x1) + a2 cos k2x2)`, averaging
//! over the fast phase only.

use std::time::{Duration, Instant};

use serde_json::{json, Value};

use super::ring::{Basis, MesoMonomial, MesoRingElement};
use super::series::{MesoFieldSeries, MesoTruncation};
use crate::error::{Error, Result};
use crate::trigpoly::poly::int;
use crate::trigpoly::{Harmonic, Parity, SeriesKind};

/// Field `u` in terms of the mean `U(t, x, x1)` and its evolution `∂t U = g`.
#[derive(Clone, Debug, PartialEq)]
pub struct MesoSlowManifold {
    pub u: MesoFieldSeries,
    pub g: MesoFieldSeries,
}

/// `∂t U = Σ g_{ij} ∂x^i ∂x1^j U` with coefficients in `b_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct MesoPDE {
    /// `(N_slow, N_a)`.
    pub orders: (u32, u32),
    pub evolution: MesoFieldSeries,
}

impl MesoPDE {
    pub fn to_json(&self, basis: Basis) -> Value {
        json!({
            "family": "meso",
            "orders": [self.orders.0, self.orders.1],
            "basis": basis.letter().to_string(),
            "K": self.evolution.to_json(basis),
        })
    }
}

#[derive(Clone, Debug)]
pub struct MesoConstruction {
    pub manifold: MesoSlowManifold,
    pub pde: MesoPDE,
    pub iterations: usize,
    /// Residual of the final state at the target orders: zero on success.
    pub residual: MesoFieldSeries,
    pub elapsed: Duration,
}

/// `κ = Σ_{n ≤ N_a} (−a2 cos k2x2)^n / b0^{n+1}`.
pub fn meso_kappa(t: MesoTruncation) -> MesoFieldSeries {
    let step = MesoFieldSeries::scalar(
        MesoRingElement::monomial(MesoMonomial::new(1, 0, -1, &[]), int(-1)),
        1,
        Parity::Cos,
        t,
    );
    let mut power = MesoFieldSeries::scalar(
        MesoRingElement::monomial(MesoMonomial::new(0, 0, -1, &[]), int(1)),
        0,
        Parity::Cos,
        t,
    );
    let mut kappa = power.clone();
    for _ in 0..t.max_a {
        power = power.mul(&step).expect("scalar product");
        kappa = kappa.add(&power);
    }
    kappa
}

/// `1/κ = b0 + a2 cos k2x2`.
pub fn meso_rkappa(t: MesoTruncation) -> MesoFieldSeries {
    MesoFieldSeries::scalar(MesoRingElement::symbol(0), 0, Parity::Cos, t).add(&MesoFieldSeries::scalar(
        MesoRingElement::monomial(MesoMonomial::new(1, 0, 0, &[]), int(1)),
        1,
        Parity::Cos,
        t,
    ))
}

/// Residual of `u_t = ∇·(κ∇u)` with `∇ = (∂x + ∂x1, ∂x2)` folded onto the
/// slow and fast directions.
pub fn meso_residual(u: &MesoFieldSeries, g: &MesoFieldSeries, kappa: &MesoFieldSeries) -> Result<MesoFieldSeries> {
    let grad = u.d_x().add(&u.d_x1()).add(&u.d_x2());
    let flux = kappa.mul(&grad)?.neg();
    Ok(u.apply_evolution(g)?
        .add(&flux.d_x())
        .add(&flux.d_x1())
        .add(&flux.d_x2()))
}

/// One update: the fast-phase mean of the residual corrects the evolution;
/// the field correction integrates twice in `x2`, removing the secular part
/// with the kernel element `x2 + a2 sin(k2x2)/(k2 b0)`.
pub fn meso_iterate_once(
    state: &MesoSlowManifold,
    kappa: &MesoFieldSeries,
    rkappa: &MesoFieldSeries,
) -> Result<(MesoSlowManifold, MesoFieldSeries)> {
    let t = state.u.truncation();
    let res = meso_residual(&state.u, &state.g, kappa)?;
    let gd = res.mean().neg();
    let g = state.g.add(&gd);
    let w = res.add(&gd).antiderivative_x2()?;
    let p = w.mul(rkappa)?;
    let m = p.mean();
    let periodic = p.sub(&m).antiderivative_x2()?;
    let secular = MesoFieldSeries::scalar(
        MesoRingElement::monomial(MesoMonomial::new(1, -1, -1, &[]), int(1)),
        1,
        Parity::Sin,
        t,
    );
    let u = state.u.add(&periodic).sub(&m.mul(&secular)?);
    Ok((MesoSlowManifold { u, g }, res))
}

pub fn meso_iteration_cap(n_slow: u32, n_a: u32) -> usize {
    (n_slow + n_a) as usize + 10
}

/// Default `a2` truncation: two above the slow order, enough for every `a2`
/// power that survives at that slow order.
pub fn default_amplitude_order(n_slow: u32) -> u32 {
    n_slow + 2
}

/// Construct to errors `O(∂^{N_slow+1}, a2^{N_a+1})`, where `∂` counts every
/// slow derivative in `x` or `x1`, including those on `b`.
pub fn meso_construct(n_slow: u32, n_a: u32) -> Result<MesoConstruction> {
    if n_slow < 2 {
        return Err(Error::InvalidOrder(format!("slow order {n_slow} must be at least 2")));
    }
    if n_a < 1 {
        return Err(Error::InvalidOrder("amplitude order must be at least 1".into()));
    }
    let start = Instant::now();
    let target = MesoTruncation::new(n_slow, n_a);
    let kappa_full = meso_kappa(target);
    let rkappa_full = meso_rkappa(target);
    let mut state = MesoSlowManifold {
        u: MesoFieldSeries::mean_field(target),
        g: MesoFieldSeries::zero(SeriesKind::Field, target),
    };
    let mut last = MesoFieldSeries::zero(SeriesKind::Field, target);
    for it in 1..=meso_iteration_cap(n_slow, n_a) {
        let t = MesoTruncation::new(n_slow.min(it as u32), n_a);
        state = MesoSlowManifold {
            u: state.u.with_truncation(t),
            g: state.g.with_truncation(t),
        };
        let (next, res) = meso_iterate_once(&state, &kappa_full.with_truncation(t), &rkappa_full.with_truncation(t))?;
        let done = res.is_zero() && it >= n_slow as usize;
        last = res;
        if done {
            if state.u.mean() != MesoFieldSeries::mean_field(target) {
                return Err(Error::Unsupported("field mean drifted from U".into()));
            }
            return Ok(MesoConstruction {
                pde: MesoPDE {
                    orders: (n_slow, n_a),
                    evolution: state.g.clone(),
                },
                manifold: state,
                iterations: it,
                residual: last,
                elapsed: start.elapsed(),
            });
        }
        state = next;
    }
    Err(Error::IterationFailure {
        iterations: meso_iteration_cap(n_slow, n_a),
        residual_terms: last.len(),
    })
}

/// Coefficient of `∂x^i ∂x1^j U` in the evolution.
pub fn evolution_coefficient(pde: &MesoPDE, i: u32, j: u32) -> MesoRingElement {
    pde.evolution
        .coefficient(i, j, Harmonic::CONST)
        .cloned()
        .unwrap_or_else(MesoRingElement::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::One;

    #[test]
    fn kappa_times_reciprocal_is_one() {
        let t = MesoTruncation::new(4, 5);
        let prod = meso_kappa(t).mul(&meso_rkappa(t)).unwrap();
        let one = MesoFieldSeries::scalar(MesoRingElement::one(), 0, Parity::Cos, t);
        assert_eq!(prod, one);
    }

    #[test]
    fn secular_kernel_is_annihilated() {
        // κ ∂x2 (a2 sin(k2x2)/(k2 b0)) + κ = 1/b0: constant flux.
        let t = MesoTruncation::new(2, 4);
        let v = MesoFieldSeries::scalar(
            MesoRingElement::monomial(MesoMonomial::new(1, -1, -1, &[]), int(1)),
            1,
            Parity::Sin,
            t,
        );
        let one = MesoFieldSeries::scalar(MesoRingElement::one(), 0, Parity::Cos, t);
        let flux = meso_kappa(t).mul(&v.d_x2().add(&one)).unwrap();
        let b0inv = MesoFieldSeries::scalar(
            MesoRingElement::monomial(MesoMonomial::new(0, 0, -1, &[]), int(1)),
            0,
            Parity::Cos,
            t,
        );
        assert_eq!(flux, b0inv);
    }

    #[test]
    fn leading_evolution_is_harmonic_mean() {
        let c = meso_construct(2, 3).unwrap();
        assert!(c.residual.is_zero());
        let inv = MesoRingElement::monomial(MesoMonomial::new(0, 0, -1, &[]), One::one());
        assert_eq!(evolution_coefficient(&c.pde, 2, 0), inv);
    }
}
