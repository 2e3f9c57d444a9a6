//! Three-scale homogenization: a fast phase `x2` averaged out in the presence
//! of a slowly varying, symbolic mesoscale diffusivity `𝒦(x1) = 1/b(x1)`.

pub mod compact;
pub mod construct;
pub mod ring;
pub mod series;
pub mod two_step;

pub use compact::{expand_compact, EVOLUTION_COMPACT, FIELD_COMPACT};
pub use construct::{
    default_amplitude_order, evolution_coefficient, meso_construct, meso_kappa, meso_residual, MesoConstruction,
    MesoPDE, MesoSlowManifold,
};
pub use ring::{Basis, MesoMonomial, MesoRingElement};
pub use series::{MesoFieldSeries, MesoKey, MesoTruncation};
pub use two_step::{two_step_vs_one_step, TwoStepComparison};
