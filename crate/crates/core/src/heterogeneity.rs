//! Microscale diffusivity `κ = 1/(1 + a1 cos k1x1 + a2 cos k2x2)` and its
//! truncated reciprocal expansion.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::trigpoly::series::coeff;
use crate::trigpoly::poly::int;
use crate::trigpoly::{FieldSeries, Parity, Truncation, Wavenumbers};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// Two incommensurate phases with symbolic `a1, a2, k1, k2`.
    QuasiPeriodic,
    /// `κ = 1/(1 + a cos x)`: `a2 = 0`, `a1 = a`, `k1 = 1`.
    SinglePeriod,
    /// `κ = 1/(1 + a1 cos k1x1)` with symbolic `k1`; the outer step of the
    /// two-step mesoscale route.
    FirstPhase,
    /// Slowly varying mesoscale diffusivity; built by [`crate::meso`].
    Mesoscale,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::QuasiPeriodic => "quasi",
            Family::SinglePeriod => "single",
            Family::FirstPhase => "first_phase",
            Family::Mesoscale => "meso",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quasi" => Ok(Family::QuasiPeriodic),
            "single" => Ok(Family::SinglePeriod),
            "first_phase" => Ok(Family::FirstPhase),
            "meso" => Ok(Family::Mesoscale),
            other => Err(Error::Unsupported(format!("unknown heterogeneity family `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HeterogeneitySpec {
    pub family: Family,
    /// `N_a`: the reciprocal expansion keeps amplitude degrees below this.
    pub amplitude_order: u32,
}

impl HeterogeneitySpec {
    pub fn new(family: Family, amplitude_order: u32) -> Self {
        Self {
            family,
            amplitude_order,
        }
    }

    pub fn wavenumbers(&self) -> Result<Wavenumbers> {
        match self.family {
            Family::QuasiPeriodic | Family::FirstPhase => Ok(Wavenumbers::Symbolic),
            Family::SinglePeriod => Ok(Wavenumbers::UnitK1),
            Family::Mesoscale => Err(Error::Unsupported(
                "the mesoscale family is constructed by the meso module".into(),
            )),
        }
    }

    fn truncation(&self) -> Truncation {
        Truncation::new(0, self.amplitude_order)
    }
}

/// `1/κ = 1 + a1 cos k1x1 + a2 cos k2x2`, with absent terms per family.
pub fn build_rkappa(spec: &HeterogeneitySpec) -> Result<FieldSeries> {
    let wn = spec.wavenumbers()?;
    let mut r = FieldSeries::scalar_one(wn, spec.truncation());
    r.add_term(0, 1, 0, Parity::Cos, coeff(1, 0, 0, 0, int(1)));
    if spec.family == Family::QuasiPeriodic {
        r.add_term(0, 0, 1, Parity::Cos, coeff(0, 1, 0, 0, int(1)));
    }
    Ok(r)
}

/// `κ = Σ_{n<N_a} (1 − 1/κ)^n`, exact to amplitude degree `N_a − 1`.
pub fn build_kappa(spec: &HeterogeneitySpec) -> Result<FieldSeries> {
    if spec.amplitude_order == 0 {
        return Err(Error::InvalidOrder("amplitude order must be at least 1".into()));
    }
    let t = Truncation::new(0, spec.amplitude_order - 1);
    let one = FieldSeries::scalar_one(spec.wavenumbers()?, t);
    let minus_prime = one.sub(&build_rkappa(spec)?.truncated(t));
    let mut kappa = one.clone();
    let mut power = one;
    for _ in 1..spec.amplitude_order {
        power = power.mul(&minus_prime)?;
        kappa = kappa.add(&power);
    }
    Ok(kappa)
}

/// Minimum of `κ` over all phases; requires `|a1| + |a2| < 1`.
pub fn kappa_min(a1: f64, a2: f64) -> Result<f64> {
    let s = a1.abs() + a2.abs();
    if s.is_nan() || s >= 1.0 {
        return Err(Error::PhysicalRange(format!("|a1| + |a2| = {s} must be below 1")));
    }
    Ok(1.0 / (1.0 + s))
}

/// `κ` evaluated in closed form.
pub fn kappa_exact(a1: f64, a2: f64, k1: f64, k2: f64, x1: f64, x2: f64) -> f64 {
    1.0 / (1.0 + a1 * (k1 * x1).cos() + a2 * (k2 * x2).cos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trigpoly::poly::frac;
    use crate::trigpoly::Valuation;

    #[test]
    fn reciprocal_forms() {
        let q = build_rkappa(&HeterogeneitySpec::new(Family::QuasiPeriodic, 3)).unwrap();
        assert_eq!(q.len(), 3);
        let s = build_rkappa(&HeterogeneitySpec::new(Family::SinglePeriod, 3)).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.wavenumbers(), Wavenumbers::UnitK1);
    }

    #[test]
    fn first_order_kappa() {
        let k = build_kappa(&HeterogeneitySpec::new(Family::QuasiPeriodic, 2)).unwrap();
        let mut want = FieldSeries::scalar_one(Wavenumbers::Symbolic, Truncation::new(0, 1));
        want.add_term(0, 1, 0, Parity::Cos, coeff(1, 0, 0, 0, int(-1)));
        want.add_term(0, 0, 1, Parity::Cos, coeff(0, 1, 0, 0, int(-1)));
        assert_eq!(k, want);
    }

    #[test]
    fn second_order_single_period_kappa() {
        let k = build_kappa(&HeterogeneitySpec::new(Family::SinglePeriod, 3)).unwrap();
        let mut want = FieldSeries::scalar_one(Wavenumbers::UnitK1, Truncation::new(0, 2));
        want.add_term(0, 1, 0, Parity::Cos, coeff(1, 0, 0, 0, int(-1)));
        want.add_term(0, 0, 0, Parity::Cos, coeff(2, 0, 0, 0, frac(1, 2)));
        want.add_term(0, 2, 0, Parity::Cos, coeff(2, 0, 0, 0, frac(1, 2)));
        assert_eq!(k, want);
        // Pointwise against the closed form: error is third order in a.
        for a in [0.02, 0.01] {
            let v = Valuation { a1: a, a2: 0.0, k1: 1.0, k2: 1.0 };
            let err = (0..16)
                .map(|i| {
                    let x = i as f64 * 0.4;
                    (k.eval_f64(&v, x, 0.0)[&0] - kappa_exact(a, 0.0, 1.0, 1.0, x, 0.0)).abs()
                })
                .fold(0.0, f64::max);
            assert!(err < 2.0 * a * a * a, "a={a}: {err}");
        }
    }

    #[test]
    fn reciprocal_product_residual_starts_at_truncation_order() {
        for family in [Family::QuasiPeriodic, Family::SinglePeriod] {
            for na in 1..6 {
                let spec = HeterogeneitySpec::new(family, na);
                let wide = Truncation::new(0, 2 * na);
                let k = build_kappa(&spec).unwrap().with_truncation(wide);
                let r = build_rkappa(&spec).unwrap().with_truncation(wide);
                let res = k.mul(&r).unwrap().sub(&FieldSeries::scalar_one(k.wavenumbers(), wide));
                assert!(!res.is_zero());
                assert!(res.iter().all(|(_, c)| c.min_amplitude_degree().unwrap() >= na));
            }
        }
    }

    #[test]
    fn physical_range() {
        assert!((kappa_min(0.9, 0.0).unwrap() - 1.0 / 1.9).abs() < 1e-15);
        assert!(matches!(kappa_min(0.6, -0.5), Err(Error::PhysicalRange(_))));
    }
}
