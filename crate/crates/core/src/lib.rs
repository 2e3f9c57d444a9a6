//! Slow-manifold homogenization of one-dimensional heterogeneous diffusion.
//!
//! The [`constructor`] iterates the embedding PDE to an exact homogenized PDE
//! in the symbolic algebra of [`trigpoly`]; [`analysis`] estimates the
//! convergence radius of its coefficient series; [`validate`] checks the
//! results against Bloch dispersion, direct residual evaluation and time
//! stepping; [`meso`] handles the three-scale mesoscale variant.

pub mod analysis;
pub mod constructor;
pub mod error;
pub mod heterogeneity;
pub mod meso;
pub mod trigpoly;
pub mod validate;

pub use error::{Error, Result};
pub use constructor::{construct, Construction, HomogenizedPDE, NumericPde};
pub use heterogeneity::Family;
pub use trigpoly::{
    FieldSeries, Harmonic, Parity, Rational, RingElement, SeriesKind, Substitution, Truncation, Valuation, Wavenumbers,
};
