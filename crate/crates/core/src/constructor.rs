//! Iterative construction of the slow manifold and its homogenized PDE.
//!
//! Each iteration computes the residual of the embedding PDE
//! `u_t + (∂x + ∂x1 + ∂x2) f = 0` with flux `f = −κ (∂x + ∂x1 + ∂x2) u`,
//! moves its mean into the evolution `∂t U = g`, and corrects the field by two
//! integrations along the diagonal `∂x1 + ∂x2`.

use std::time::{Duration, Instant};

use num::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::heterogeneity::{build_kappa, build_rkappa, Family, HeterogeneitySpec};
use crate::trigpoly::json::{ring_from_json, ring_to_json};
use crate::trigpoly::poly::rational_to_f64;
use crate::trigpoly::{FieldSeries, RingElement, SeriesKind, Truncation, Valuation, Wavenumbers};
use crate::trigpoly::Rational;

/// Field `u` parametrized by the mean `U`, and its evolution `∂t U = g`.
#[derive(Clone, Debug, PartialEq)]
pub struct SlowManifold {
    pub u: FieldSeries,
    pub g: FieldSeries,
}

impl SlowManifold {
    pub fn trivial(wavenumbers: Wavenumbers, truncation: Truncation) -> Self {
        Self {
            u: FieldSeries::mean_field(wavenumbers, truncation),
            g: FieldSeries::zero(SeriesKind::Field, wavenumbers, truncation),
        }
    }

    fn truncated(&self, t: Truncation) -> Self {
        Self {
            u: self.u.with_truncation(t),
            g: self.g.with_truncation(t),
        }
    }
}

#[derive(Clone, Debug)]
pub struct IterationRecord {
    pub iteration: usize,
    pub truncation: Truncation,
    pub residual_terms: usize,
    pub residual_monomials: usize,
    /// Mean obstructions discarded in the second diagonal integral.
    pub dropped_means: usize,
    pub elapsed: Duration,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Converged,
    Failed,
}

#[derive(Clone, Debug)]
pub struct IterationReport {
    pub records: Vec<IterationRecord>,
    pub status: Status,
    pub elapsed: Duration,
}

impl IterationReport {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn dropped_means(&self) -> usize {
        self.records.iter().map(|r| r.dropped_means).sum()
    }
}

/// `∂t U = Σ_n K_n ∂x^n U`.
#[derive(Clone, Debug, PartialEq)]
pub struct HomogenizedPDE {
    pub family: Family,
    /// `(N_d, N_a)`.
    pub orders: (u32, u32),
    /// `K_0 ..= K_{N_d}`.
    pub coeffs: Vec<RingElement>,
}

/// Numeric coefficients at a parameter point.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericPde {
    /// `K_0 ..= K_N`.
    pub k: Vec<f64>,
    /// `c_j = (−1)^j K_{2j}`: coefficients of the symbol `Σ K_n (ik)^n` in `z = k²`.
    pub c: Vec<f64>,
}

impl NumericPde {
    /// Partial sum `Σ_{n≤N} K_n (ik)^n` (real for even-only series).
    pub fn symbol(&self, k: f64, max_n: usize) -> f64 {
        let z = -k * k;
        let mut acc = 0.0;
        let mut zp = 1.0;
        for j in 0..=max_n / 2 {
            if let Some(kn) = self.k.get(2 * j) {
                acc += kn * zp;
            }
            zp *= z;
        }
        acc
    }
}

impl HomogenizedPDE {
    pub fn coefficient(&self, n: usize) -> RingElement {
        self.coeffs.get(n).cloned().unwrap_or_default()
    }

    /// Exact evaluation of every `K_n`, then conversion to floating point.
    pub fn evaluate_exact(&self, v: &Valuation<Rational>) -> Result<(Vec<Rational>, NumericPde)> {
        let s = v.a1.abs() + v.a2.abs();
        if s >= Rational::one() {
            return Err(Error::PhysicalRange(format!(
                "|a1| + |a2| = {} must be below 1",
                rational_to_f64(&s)
            )));
        }
        let exact: Vec<Rational> = self.coeffs.iter().map(|c| c.eval_exact(v)).collect::<Result<_>>()?;
        let k: Vec<f64> = exact.iter().map(rational_to_f64).collect();
        let c = k
            .iter()
            .step_by(2)
            .enumerate()
            .map(|(j, kn)| if j % 2 == 0 { *kn } else { -kn })
            .collect();
        Ok((exact, NumericPde { k, c }))
    }

    pub fn evaluate(&self, v: &Valuation<Rational>) -> Result<NumericPde> {
        Ok(self.evaluate_exact(v)?.1)
    }

    /// Single-period shortcut: `a1 = a`, everything else irrelevant.
    pub fn evaluate_single(&self, a: &Rational) -> Result<NumericPde> {
        self.evaluate(&Valuation {
            a1: a.clone(),
            a2: Rational::zero(),
            k1: Rational::one(),
            k2: Rational::one(),
        })
    }

    pub fn to_json(&self) -> Value {
        let ks: Vec<Value> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(n, c)| {
                let mut v = ring_to_json(c);
                v.as_object_mut().expect("object").insert("n".into(), json!(n));
                v
            })
            .collect();
        json!({
            "family": self.family.name(),
            "orders": [self.orders.0, self.orders.1],
            "K": ks,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let family: Family = v
            .get("family")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Format("missing `family`".into()))?
            .parse()?;
        let orders = v
            .get("orders")
            .and_then(Value::as_array)
            .filter(|a| a.len() == 2)
            .and_then(|a| Some((a[0].as_u64()? as u32, a[1].as_u64()? as u32)))
            .ok_or_else(|| Error::Format("`orders` must be a pair of integers".into()))?;
        let mut coeffs = vec![RingElement::zero(); orders.0 as usize + 1];
        for k in v
            .get("K")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Format("missing `K` array".into()))?
        {
            let n = k
                .get("n")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::Format("coefficient without `n`".into()))? as usize;
            if n >= coeffs.len() {
                return Err(Error::Format(format!("K_{n} beyond the declared order")));
            }
            coeffs[n] = ring_from_json(k)?;
        }
        Ok(Self {
            family,
            orders,
            coeffs,
        })
    }
}

/// Outcome of a full construction, including the final residual certificate.
#[derive(Clone, Debug)]
pub struct Construction {
    pub manifold: SlowManifold,
    pub pde: HomogenizedPDE,
    pub report: IterationReport,
    /// Residual of the final `(u, g)` at the target orders: zero on success.
    pub residual: FieldSeries,
    /// Non-fatal observations (odd coefficients, surviving divisors, degree pattern).
    pub warnings: Vec<String>,
}

/// Residual of the embedding PDE for the current field and evolution.
pub fn residual(u: &FieldSeries, g: &FieldSeries, kappa: &FieldSeries) -> Result<FieldSeries> {
    let u_t = u.apply_evolution(g)?;
    let grad = u.d_x().add(&u.d_z());
    let flux = kappa.mul(&grad)?.neg();
    Ok(u_t.add(&flux.d_x()).add(&flux.d_z()))
}

/// One solvability update of the evolution followed by the two diagonal
/// integrations for the field correction. Returns the residual that drove the
/// update and how many mean obstructions were discarded.
pub fn iterate_once(
    state: &SlowManifold,
    kappa: &FieldSeries,
    rkappa: &FieldSeries,
) -> Result<(SlowManifold, FieldSeries, usize)> {
    let res = residual(&state.u, &state.g, kappa)?;
    let g_prime = res.mean().neg();
    let g = state.g.add(&g_prime);
    let rhs = res.add(&g_prime);
    let w = rhs.solve_diag()?;
    let (u_prime, dropped) = w.mul(rkappa)?.solve_diag_dropping_mean()?;
    let u = state.u.add(&u_prime);
    Ok((SlowManifold { u, g }, res, dropped))
}

pub fn iteration_cap(n_d: u32, n_a: u32) -> usize {
    2 * n_d.max(n_a) as usize + 10
}

/// Construct the slow manifold to errors `O(∂x^{N_d+1}, a^{N_a+1})`.
pub fn construct(family: Family, n_d: u32, n_a: u32) -> Result<Construction> {
    construct_with(family, n_d, n_a, |_| {})
}

/// As [`construct`], calling `progress` after every iteration.
pub fn construct_with(
    family: Family,
    n_d: u32,
    n_a: u32,
    mut progress: impl FnMut(&IterationRecord),
) -> Result<Construction> {
    if n_d < 2 {
        return Err(Error::InvalidOrder(format!("derivative order {n_d} must be at least 2")));
    }
    if family == Family::SinglePeriod && n_a < n_d {
        return Err(Error::InvalidOrder(format!(
            "single-period construction needs amplitude order {n_a} >= derivative order {n_d}"
        )));
    }
    let spec = HeterogeneitySpec::new(family, n_a + 1);
    let wn = spec.wavenumbers()?;
    let target = Truncation::new(n_d, n_a);
    let kappa_full = build_kappa(&spec)?.with_truncation(target);
    let rkappa_full = build_rkappa(&spec)?.with_truncation(target);
    let start = Instant::now();
    let mut state = SlowManifold::trivial(wn, Truncation::new(1, 1));
    let mut records = Vec::new();
    let final_iteration = n_d.max(n_a) as usize;
    let mut converged = false;
    let mut last_residual = FieldSeries::zero(SeriesKind::Field, wn, target);
    for it in 1..=iteration_cap(n_d, n_a) {
        let t0 = Instant::now();
        let t = Truncation::new(n_d.min(it as u32), n_a.min(it as u32));
        state = state.truncated(t);
        let kappa = kappa_full.truncated(t);
        let rkappa = rkappa_full.truncated(t);
        let (next, res, dropped) = iterate_once(&state, &kappa, &rkappa)?;
        let record = IterationRecord {
            iteration: it,
            truncation: t,
            residual_terms: res.len(),
            residual_monomials: res.monomial_count(),
            dropped_means: dropped,
            elapsed: t0.elapsed(),
        };
        progress(&record);
        records.push(record);
        let done = res.is_zero() && it >= final_iteration;
        if !done {
            state = next;
        }
        last_residual = res;
        if done {
            converged = true;
            break;
        }
    }
    let report = IterationReport {
        records,
        status: if converged { Status::Converged } else { Status::Failed },
        elapsed: start.elapsed(),
    };
    if !converged {
        return Err(Error::IterationFailure {
            iterations: report.iterations(),
            residual_terms: last_residual.len(),
        });
    }
    if state.u.mean() != FieldSeries::mean_field(wn, state.u.truncation()) {
        return Err(Error::Unsupported("field mean drifted from U".into()));
    }
    let (pde, warnings) = extract_pde(family, &state.g, n_d, n_a)?;
    Ok(Construction {
        manifold: state,
        pde,
        report,
        residual: last_residual,
        warnings,
    })
}

fn extract_pde(family: Family, g: &FieldSeries, n_d: u32, n_a: u32) -> Result<(HomogenizedPDE, Vec<String>)> {
    let mut coeffs = vec![RingElement::zero(); n_d as usize + 1];
    for (d, c) in g.mean_coefficients() {
        coeffs[d as usize] = c;
    }
    if !coeffs[0].is_zero() || !coeffs[1].is_zero() {
        return Err(Error::Unsupported("homogenized PDE has drift or decay terms".into()));
    }
    let mut warnings = Vec::new();
    for (n, c) in coeffs.iter().enumerate() {
        if !c.is_divisor_free() {
            warnings.push(format!("K_{n} retains divisor factors: {c}"));
        }
        if n % 2 == 1 && !c.is_zero() {
            warnings.push(format!("odd coefficient K_{n} is nonzero: {c}"));
        }
        if family == Family::SinglePeriod && n >= 2 {
            if let Some(deg) = c.max_amplitude_degree() {
                if deg > (n as u32).saturating_sub(2) {
                    warnings.push(format!("K_{n} has amplitude degree {deg} > {}", n - 2));
                }
            }
        }
    }
    Ok((
        HomogenizedPDE {
            family,
            orders: (n_d, n_a),
            coeffs,
        },
        warnings,
    ))
}

/// Regularized order-4 model `(1 − α²∂x²) U_t = K_2 U_xx`, `α² = K_4/K_2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularizedModel {
    pub k2: f64,
    pub alpha2: f64,
}

impl RegularizedModel {
    pub fn alpha(&self) -> f64 {
        self.alpha2.sqrt()
    }

    /// Fourier symbol `−K_2 k² / (1 + α² k²)`.
    pub fn symbol(&self, k: f64) -> f64 {
        -self.k2 * k * k / (1.0 + self.alpha2 * k * k)
    }
}

pub fn regularize(pde: &NumericPde) -> Result<RegularizedModel> {
    let k2 = pde.k.get(2).copied().unwrap_or(0.0);
    let k4 = pde.k.get(4).copied().unwrap_or(0.0);
    if k4 < 0.0 {
        return Err(Error::RegularizationInapplicable(k4));
    }
    if k2 <= 0.0 {
        return Err(Error::PhysicalRange(format!("leading diffusivity K_2 = {k2} is not positive")));
    }
    Ok(RegularizedModel { k2, alpha2: k4 / k2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trigpoly::poly::{frac, int};
    use crate::trigpoly::series::coeff;
    use crate::trigpoly::Parity;

    #[test]
    fn verified_leading_pair_leaves_third_order_residual() {
        let wn = Wavenumbers::Symbolic;
        let t = Truncation::new(3, 3);
        let mut u = FieldSeries::mean_field(wn, t);
        u.add_term(1, 1, 0, Parity::Sin, coeff(1, 0, -1, 0, int(1)));
        u.add_term(1, 0, 1, Parity::Sin, coeff(0, 1, 0, -1, int(1)));
        u.add_term(2, 1, 0, Parity::Cos, coeff(1, 0, -2, 0, int(1)));
        u.add_term(2, 0, 1, Parity::Cos, coeff(0, 1, 0, -2, int(1)));
        let mut g = FieldSeries::zero(SeriesKind::Field, wn, t);
        g.add_term(2, 0, 0, Parity::Cos, RingElement::one());
        let kappa = build_kappa(&HeterogeneitySpec::new(Family::QuasiPeriodic, 4))
            .unwrap()
            .with_truncation(t);
        let res = residual(&u, &g, &kappa).unwrap();
        assert!(!res.is_zero());
        assert!(res.iter().all(|((d, _), _)| *d >= 3));
    }

    #[test]
    fn constant_diffusivity_has_zero_residual() {
        let wn = Wavenumbers::Symbolic;
        let t = Truncation::new(6, 6);
        let u = FieldSeries::mean_field(wn, t);
        let mut g = FieldSeries::zero(SeriesKind::Field, wn, t);
        g.add_term(2, 0, 0, Parity::Cos, RingElement::constant(frac(3, 2)));
        let mut kappa = FieldSeries::zero(SeriesKind::Scalar, wn, t);
        kappa.add_term(0, 0, 0, Parity::Cos, RingElement::constant(frac(3, 2)));
        assert!(residual(&u, &g, &kappa).unwrap().is_zero());
    }

    #[test]
    fn first_iteration_gives_leading_field() {
        let spec = HeterogeneitySpec::new(Family::QuasiPeriodic, 2);
        let t = Truncation::new(1, 1);
        let kappa = build_kappa(&spec).unwrap().with_truncation(t);
        let rkappa = build_rkappa(&spec).unwrap().with_truncation(t);
        let s = SlowManifold::trivial(Wavenumbers::Symbolic, t);
        let (next, _, _) = iterate_once(&s, &kappa, &rkappa).unwrap();
        let mut want = FieldSeries::mean_field(Wavenumbers::Symbolic, t);
        want.add_term(1, 1, 0, Parity::Sin, coeff(1, 0, -1, 0, int(1)));
        want.add_term(1, 0, 1, Parity::Sin, coeff(0, 1, 0, -1, int(1)));
        assert_eq!(next.u, want);
        assert!(next.g.is_zero());
    }

    #[test]
    fn quasi_order_four() {
        let c = construct(Family::QuasiPeriodic, 4, 4).unwrap();
        assert_eq!(c.pde.coefficient(2), RingElement::one());
        let k4 = coeff(2, 0, -2, 0, frac(1, 2)).add(&coeff(0, 2, 0, -2, frac(1, 2)));
        assert_eq!(c.pde.coefficient(4), k4);
        assert!(c.residual.is_zero());
        assert_eq!(c.report.status, Status::Converged);
    }

    #[test]
    fn order_must_be_at_least_two() {
        assert!(matches!(construct(Family::QuasiPeriodic, 1, 1), Err(Error::InvalidOrder(_))));
        assert!(matches!(construct(Family::SinglePeriod, 6, 4), Err(Error::InvalidOrder(_))));
    }

    #[test]
    fn regularized_symbol() {
        let pde = NumericPde {
            k: vec![0.0, 0.0, 1.0, 0.0, 0.125],
            c: vec![],
        };
        let r = regularize(&pde).unwrap();
        assert!((r.alpha2 - 0.125).abs() < 1e-15);
        let k: f64 = 1e-2;
        let taylor = -k * k + 0.125 * k.powi(4);
        assert!((r.symbol(k) - taylor).abs() < 1e-11);
        let bad = NumericPde {
            k: vec![0.0, 0.0, 1.0, 0.0, -0.5],
            c: vec![],
        };
        assert!(matches!(regularize(&bad), Err(Error::RegularizationInapplicable(_))));
    }
}
