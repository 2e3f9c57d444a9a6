//! Bloch–Floquet dispersion of `∂x(κ ∂x)` with `κ = 1/(1 + a cos x)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::constructor::{regularize, NumericPde};
use crate::error::{Error, Result};
use crate::heterogeneity::kappa_min;

/// Trapezoidal quadrature points for the Fourier coefficients of `κ`.
pub const QUAD_POINTS: usize = 4096;
/// Largest admissible step of the branch-tracking walk in `k`.
pub const MAX_TRACK_STEP: f64 = 0.01;
/// Eigenvector overlap below which a tracked row is flagged.
pub const MIN_OVERLAP: f64 = 0.9;
const COEFF_CUTOFF: f64 = 1e-14;
const MIN_MODES: usize = 8;

/// Cosine coefficients `κ̂_0 ..< κ̂_count` of `1/(1 + a cos x)`.
pub fn kappa_fourier(a: f64, count: usize) -> Vec<f64> {
    let h = std::f64::consts::TAU / QUAD_POINTS as f64;
    let samples: Vec<(f64, f64)> = (0..QUAD_POINTS)
        .map(|j| {
            let x = j as f64 * h;
            (x, 1.0 / (1.0 + a * x.cos()))
        })
        .collect();
    (0..count)
        .map(|m| samples.iter().map(|(x, k)| k * (m as f64 * x).cos()).sum::<f64>() / QUAD_POINTS as f64)
        .collect()
}

/// Smallest truncation `M` with `|κ̂_M| < 1e−14`.
pub fn modes_for(a: f64) -> usize {
    let hat = kappa_fourier(a, QUAD_POINTS / 4);
    let m = hat.iter().position(|c| c.abs() < COEFF_CUTOFF).unwrap_or(hat.len() - 1);
    m.max(MIN_MODES)
}

/// Galerkin matrix of the Bloch operator on modes `−M..=M`.
#[derive(Clone, Debug)]
pub struct BlochMatrix {
    modes: usize,
    kappa_hat: Vec<f64>,
}

impl BlochMatrix {
    pub fn new(a: f64, modes: usize) -> Result<Self> {
        kappa_min(a, 0.0)?;
        if 2 * modes >= QUAD_POINTS / 2 {
            return Err(Error::Unsupported(format!("{modes} Bloch modes exceed the quadrature resolution")));
        }
        Ok(Self {
            modes,
            kappa_hat: kappa_fourier(a, 2 * modes + 1),
        })
    }

    pub fn auto(a: f64) -> Result<Self> {
        kappa_min(a, 0.0)?;
        Self::new(a, modes_for(a))
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        2 * self.modes + 1
    }

    pub fn kappa_hat(&self) -> &[f64] {
        &self.kappa_hat
    }

    /// `A_{mn} = −(k+m) κ̂_{m−n} (k+n)`; real symmetric since `κ` is even.
    pub fn assemble(&self, k: f64) -> DMatrix<f64> {
        let m0 = self.modes as i64;
        DMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            let (m, n) = (i as i64 - m0, j as i64 - m0);
            -self.kappa_hat[(m - n).unsigned_abs() as usize] * ((k + m as f64) * (k + n as f64))
        })
    }

    /// All eigenvalues, descending.
    pub fn eigenvalues(&self, k: f64) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.assemble(k)).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    /// Newton iteration on the Schur complement of the zero mode,
    /// `A_00 − λ − bᵀ(R − λ)⁻¹b = 0`, which resolves the small branch
    /// eigenvalue to relative rather than absolute accuracy.
    fn refine(&self, a_mat: &DMatrix<f64>, guess: f64) -> Option<f64> {
        let c = self.modes;
        let n = self.dim();
        let keep: Vec<usize> = (0..n).filter(|&i| i != c).collect();
        let r = a_mat.select_rows(&keep).select_columns(&keep);
        let b = DVector::from_iterator(n - 1, keep.iter().map(|&i| a_mat[(i, c)]));
        let a00 = a_mat[(c, c)];
        let mut lambda = guess;
        for _ in 0..50 {
            let mut shifted = r.clone();
            for i in 0..n - 1 {
                shifted[(i, i)] -= lambda;
            }
            let y = shifted.lu().solve(&b)?;
            let f = a00 - lambda - b.dot(&y);
            let df = -1.0 - y.dot(&y);
            let step = f / df;
            lambda -= step;
            if step.abs() <= 1e-16 * lambda.abs().max(f64::MIN_POSITIVE) {
                return Some(lambda);
            }
        }
        Some(lambda)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DispersionRow {
    pub k: f64,
    pub lambda_bloch: f64,
    /// Smallest eigenvector overlap along the tracking walk to this `k`.
    pub overlap: f64,
    pub flagged: bool,
    /// Partial sums `Σ_{n≤N} K_n (ik)^n`, one per requested truncation.
    pub series: Vec<f64>,
    pub regularized: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DispersionTable {
    pub a: f64,
    pub modes: usize,
    pub truncations: Vec<usize>,
    pub rows: Vec<DispersionRow>,
}

impl DispersionTable {
    /// Attach series partial sums and the regularized symbol.
    pub fn with_series(mut self, pde: &NumericPde, truncations: &[usize]) -> Self {
        let reg = regularize(pde).ok();
        for row in &mut self.rows {
            row.series = truncations.iter().map(|&n| pde.symbol(row.k, n)).collect();
            row.regularized = reg.map(|r| r.symbol(row.k));
        }
        self.truncations = truncations.to_vec();
        self
    }
}

/// Track the branch through `λ(0) = 0` to every `k` in turn, walking in
/// steps of at most [`MAX_TRACK_STEP`] and following the eigenvector of
/// largest overlap with the previous step.
pub fn bloch_branch(a: f64, ks: &[f64], modes: Option<usize>) -> Result<DispersionTable> {
    let mat = match modes {
        Some(m) => BlochMatrix::new(a, m)?,
        None => BlochMatrix::auto(a)?,
    };
    let dim = mat.dim();
    let mut k_prev = 0.0;
    let mut v_prev = DVector::from_fn(dim, |i, _| if i == mat.modes { 1.0 } else { 0.0 });
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        let steps = ((k - k_prev).abs() / MAX_TRACK_STEP).ceil().max(1.0) as usize;
        let mut worst = 1.0f64;
        let mut lambda = 0.0;
        for s in 1..=steps {
            let ks = k_prev + (k - k_prev) * s as f64 / steps as f64;
            let eig = SymmetricEigen::new(mat.assemble(ks));
            let (best, ov) = (0..dim)
                .map(|j| (j, eig.eigenvectors.column(j).dot(&v_prev).abs()))
                .max_by(|x, y| x.1.total_cmp(&y.1))
                .expect("nonempty spectrum");
            worst = worst.min(ov);
            lambda = eig.eigenvalues[best];
            v_prev = eig.eigenvectors.column(best).into_owned();
        }
        if let Some(r) = mat.refine(&mat.assemble(k), lambda) {
            if (r - lambda).abs() <= 1e-8 * (1.0 + lambda.abs()) {
                lambda = r;
            }
        }
        rows.push(DispersionRow {
            k,
            lambda_bloch: lambda,
            overlap: worst,
            flagged: worst < MIN_OVERLAP,
            series: Vec::new(),
            regularized: None,
        });
        k_prev = k;
    }
    Ok(DispersionTable {
        a,
        modes: mat.modes,
        truncations: Vec::new(),
        rows,
    })
}
