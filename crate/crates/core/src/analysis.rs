//! Convergence analysis of the wavenumber series of a homogenized PDE.
//!
//! Ratio-type estimators extrapolate in `1/n` to locate the singularity
//! nearest the origin of `Σ f_n z^n`, `z = k²`: Domb–Sykes for a dominant
//! real singularity and Mercer–Roberts for a complex-conjugate pair.

use std::fmt;
use std::str::FromStr;

use crate::constructor::{HomogenizedPDE, NumericPde};
use crate::error::{Error, Result};
use crate::trigpoly::Rational;

/// Relative RMS residual of the extrapolation fit above which an estimate is
/// marked unreliable.
pub const RELIABLE_FIT_RMS: f64 = 0.02;

/// Relative size of a 2×2 recurrence determinant below which the solve for
/// that index is considered degenerate.
const DEGENERATE_DET: f64 = 1e-12;

/// Power series `Σ f_n z^n` with floating-point coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesInZ {
    coeffs: Vec<f64>,
}

impl SeriesInZ {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    /// The symbol `Σ K_n (ik)^n` divided by its leading `−k²`, as a series in
    /// `z = k²`: `f_n = (−1)^n K_{2n+2}`, so `f_0 = K_2`.
    pub fn from_pde(pde: &NumericPde) -> Self {
        let coeffs = pde
            .c
            .iter()
            .skip(1)
            .map(|c| -c)
            .collect();
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `f_n → s^n f_n`, moving every singularity from `z` to `z/s`.
    pub fn scaled(&self, s: f64) -> Self {
        let mut p = 1.0;
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let v = c * p;
                p *= s;
                v
            })
            .collect();
        Self { coeffs }
    }

    /// Start of the longest suffix free of zero coefficients.
    fn clean_start(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|c| *c == 0.0 || !c.is_finite())
            .map_or(0, |i| i + 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Dominant singularity on the real `z` axis (Domb–Sykes).
    RealAxis,
    /// Dominant complex-conjugate pair (Mercer–Roberts).
    ConjugatePair,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::RealAxis => "ds",
            Mode::ConjugatePair => "mr",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Estimator choice for [`estimate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum ModeChoice {
    #[default]
    Auto,
    Fixed(Mode),
}

impl FromStr for ModeChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(ModeChoice::Auto),
            "ds" => Ok(ModeChoice::Fixed(Mode::RealAxis)),
            "mr" => Ok(ModeChoice::Fixed(Mode::ConjugatePair)),
            other => Err(Error::Unsupported(format!("unknown estimator mode `{other}`"))),
        }
    }
}

/// One index of a ratio plot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioRecord {
    pub n: usize,
    /// `f_n / f_{n−1}` (Domb–Sykes) or `B_n`, the inverse-radius estimate (Mercer–Roberts).
    pub value: f64,
    /// Per-index angle estimate in the `z` plane; zero for Domb–Sykes.
    pub theta_z: f64,
    /// Excluded from fitting (degenerate solve or real recurrence roots).
    pub excluded: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingularityEstimate {
    pub mode: Mode,
    pub records: Vec<RatioRecord>,
    /// Distance of the singularity from the origin in the `z = k²` plane.
    pub z_radius: f64,
    /// `sqrt(z_radius)`: radius of convergence in wavenumber.
    pub k_star: f64,
    /// Angle of the singularity in the `z` plane.
    pub theta_z: f64,
    /// Angle in the wavenumber plane, `theta_z / 2`.
    pub theta_k: f64,
    /// For real-axis estimates, the sign of the singular `z`.
    pub z_sign: f64,
    /// Indices `n` used in the extrapolation fit.
    pub window: (usize, usize),
    /// RMS residual of the radius fit relative to its intercept.
    pub fit_rms: f64,
    pub reliable: bool,
}

impl SingularityEstimate {
    /// Reported angle: the wavenumber-plane angle.
    pub fn theta_star(&self) -> f64 {
        self.theta_k
    }
}

/// Least-squares line `y ≈ a + b x`; returns `(a, b, rms residual)`.
fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - b * mx;
    let rss: f64 = x.iter().zip(y).map(|(xi, yi)| (yi - a - b * xi).powi(2)).sum();
    (a, b, (rss / n).sqrt())
}

/// Number of trailing points used by the extrapolation fits.
pub fn window_len(count: usize) -> usize {
    (2 * count / 3).max(4).min(count)
}

fn ratios(series: &SeriesInZ) -> Vec<RatioRecord> {
    let f = series.coeffs();
    (series.clean_start() + 1..f.len())
        .map(|n| RatioRecord {
            n,
            value: f[n] / f[n - 1],
            theta_z: 0.0,
            excluded: false,
        })
        .collect()
}

/// Mode implied by the sign pattern of the ratios the Domb–Sykes fit would use:
/// a single sign means one real singularity dominates.
pub fn select_mode(series: &SeriesInZ) -> Mode {
    let r = ratios(series);
    let w = window_len(r.len());
    let tail = &r[r.len() - w..];
    let positive = tail.iter().filter(|x| x.value > 0.0).count();
    if positive == 0 || positive == tail.len() {
        Mode::RealAxis
    } else {
        Mode::ConjugatePair
    }
}

pub fn domb_sykes(series: &SeriesInZ) -> Result<SingularityEstimate> {
    let records = ratios(series);
    if records.len() < 5 {
        return Err(Error::InsufficientCoefficients {
            needed: 6,
            have: records.len() + 1,
        });
    }
    let w = window_len(records.len());
    let tail = &records[records.len() - w..];
    let positive = tail.iter().filter(|x| x.value > 0.0).count();
    if positive != 0 && positive != tail.len() {
        return Err(Error::ModeMismatch {
            estimator: "domb-sykes",
            reason: "ratios change sign inside the fit window".into(),
        });
    }
    let x: Vec<f64> = tail.iter().map(|r| 1.0 / r.n as f64).collect();
    let y: Vec<f64> = tail.iter().map(|r| r.value).collect();
    let (a, _, rms) = fit_line(&x, &y);
    let z_radius = 1.0 / a.abs();
    let fit_rms = rms / a.abs();
    Ok(SingularityEstimate {
        mode: Mode::RealAxis,
        window: (tail[0].n, tail[w - 1].n),
        z_radius,
        k_star: z_radius.sqrt(),
        theta_z: 0.0,
        theta_k: 0.0,
        z_sign: a.signum(),
        fit_rms,
        reliable: a.is_finite() && a != 0.0 && fit_rms <= RELIABLE_FIT_RMS,
        records,
    })
}

/// Per-index two-term recurrence `f_{n+1} = p f_n + q f_{n−1}`,
/// `f_n = p f_{n−1} + q f_{n−2}`: `B_n = sqrt(−q)` and `cos θ_n = p / (2 B_n)`.
fn recurrence_records(series: &SeriesInZ) -> Vec<RatioRecord> {
    let f = series.coeffs();
    let start = series.clean_start();
    let mut out = Vec::new();
    for n in (start + 2)..f.len().saturating_sub(1) {
        let det = f[n - 1] * f[n - 1] - f[n] * f[n - 2];
        let scale = (f[n - 1] * f[n - 1]).abs() + (f[n] * f[n - 2]).abs();
        let mut rec = RatioRecord {
            n,
            value: f64::NAN,
            theta_z: f64::NAN,
            excluded: true,
        };
        if det.abs() > DEGENERATE_DET * scale {
            let p = (f[n] * f[n - 1] - f[n + 1] * f[n - 2]) / det;
            let q = (f[n - 1] * f[n + 1] - f[n] * f[n]) / det;
            if q < 0.0 {
                let b = (-q).sqrt();
                rec.value = b;
                rec.theta_z = (p / (2.0 * b)).clamp(-1.0, 1.0).acos();
                rec.excluded = false;
            }
        }
        out.push(rec);
    }
    out
}

/// Classical Mercer–Roberts form of `cos θ_n`, equal to `p / (2 B_n)`.
pub fn mercer_roberts_cos(f: &[f64], n: usize, b: f64) -> f64 {
    0.5 * (f[n - 1] * b / f[n] + f[n + 1] / (b * f[n]))
}

pub fn mercer_roberts(series: &SeriesInZ) -> Result<SingularityEstimate> {
    let records = recurrence_records(series);
    let clean = series.len() - series.clean_start();
    if clean < 8 {
        return Err(Error::InsufficientCoefficients { needed: 8, have: clean });
    }
    let valid: Vec<&RatioRecord> = records.iter().filter(|r| !r.excluded).collect();
    if valid.len() < 4 {
        return Err(Error::ModeMismatch {
            estimator: "mercer-roberts",
            reason: "recurrence roots are real; no conjugate pair".into(),
        });
    }
    let w = window_len(valid.len());
    let tail = &valid[valid.len() - w..];
    let inv_n: Vec<f64> = tail.iter().map(|r| 1.0 / r.n as f64).collect();
    let inv_n2: Vec<f64> = inv_n.iter().map(|x| x * x).collect();
    let b: Vec<f64> = tail.iter().map(|r| r.value).collect();
    let cos: Vec<f64> = tail.iter().map(|r| r.theta_z.cos()).collect();
    let (b_inf, _, rms) = fit_line(&inv_n, &b);
    // Angle estimates converge one order faster than the radius.
    let (cos_inf, _, _) = fit_line(&inv_n2, &cos);
    let z_radius = 1.0 / b_inf;
    let theta_z = cos_inf.clamp(-1.0, 1.0).acos();
    let fit_rms = rms / b_inf.abs();
    Ok(SingularityEstimate {
        mode: Mode::ConjugatePair,
        window: (tail[0].n, tail[w - 1].n),
        z_radius,
        k_star: z_radius.abs().sqrt(),
        theta_z,
        theta_k: theta_z / 2.0,
        z_sign: 1.0,
        fit_rms,
        reliable: b_inf > 0.0 && fit_rms <= RELIABLE_FIT_RMS,
        records,
    })
}

pub fn estimate(series: &SeriesInZ, choice: ModeChoice) -> Result<SingularityEstimate> {
    let mode = match choice {
        ModeChoice::Auto => select_mode(series),
        ModeChoice::Fixed(m) => m,
    };
    match mode {
        Mode::RealAxis => domb_sykes(series),
        Mode::ConjugatePair => mercer_roberts(series),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub a: Rational,
    pub estimate: SingularityEstimate,
}

/// Estimate the singularity for each amplitude of a single-period homogenization.
pub fn sweep(pde: &HomogenizedPDE, amplitudes: &[Rational], choice: ModeChoice) -> Result<Vec<SweepRow>> {
    amplitudes
        .iter()
        .map(|a| {
            let numeric = pde.evaluate_single(a)?;
            let estimate = estimate(&SeriesInZ::from_pde(&numeric), choice)?;
            Ok(SweepRow {
                a: a.clone(),
                estimate,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometric(r: f64, n: usize) -> SeriesInZ {
        SeriesInZ::new((0..n).map(|j| r.powi(-(j as i32))).collect())
    }

    #[test]
    fn geometric_series_radius_is_exact() {
        let e = domb_sykes(&geometric(0.25, 17)).unwrap();
        assert!((e.z_radius - 0.25).abs() < 1e-12);
        assert!((e.k_star - 0.5).abs() < 1e-12);
        assert_eq!(e.z_sign, 1.0);
        assert!(e.reliable);
    }

    #[test]
    fn alternating_series_is_real_axis_with_negative_sign() {
        let s = SeriesInZ::new((0..17).map(|j| (-4.0f64).powi(j)).collect());
        assert_eq!(select_mode(&s), Mode::RealAxis);
        let e = domb_sykes(&s).unwrap();
        assert_eq!(e.z_sign, -1.0);
        assert!((e.z_radius - 0.25).abs() < 1e-12);
    }

    #[test]
    fn short_series_is_rejected() {
        assert!(matches!(
            domb_sykes(&geometric(0.5, 4)),
            Err(Error::InsufficientCoefficients { .. })
        ));
        assert!(matches!(
            mercer_roberts(&geometric(0.5, 6)),
            Err(Error::InsufficientCoefficients { .. })
        ));
    }

    #[test]
    fn real_roots_defer_to_domb_sykes() {
        assert!(matches!(
            mercer_roberts(&geometric(0.5, 17)),
            Err(Error::ModeMismatch { .. }) | Err(Error::InsufficientCoefficients { .. })
        ));
    }

    #[test]
    fn zero_coefficients_truncate_the_chain() {
        let mut c: Vec<f64> = (0..20).map(|j| 4f64.powi(j)).collect();
        c[2] = 0.0;
        let e = domb_sykes(&SeriesInZ::new(c)).unwrap();
        assert!(e.records.iter().all(|r| r.n > 3));
    }

    #[test]
    fn cosine_forms_agree() {
        let (r, th) = (0.28f64, 0.45f64);
        let f: Vec<f64> = (0..17)
            .map(|n| r.powi(-n) * ((n as f64 + 1.0) * th).sin() / th.sin())
            .collect();
        let e = mercer_roberts(&SeriesInZ::new(f.clone())).unwrap();
        for rec in e.records.iter().filter(|r| !r.excluded) {
            let c = mercer_roberts_cos(&f, rec.n, rec.value);
            assert!((c - rec.theta_z.cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("ds".parse::<ModeChoice>().unwrap(), ModeChoice::Fixed(Mode::RealAxis));
        assert!("xx".parse::<ModeChoice>().is_err());
    }
}
