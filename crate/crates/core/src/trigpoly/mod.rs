//! Exact algebra of trigonometric polynomials in two microscale phases.

pub mod json;
pub mod poly;
pub mod ring;
pub mod series;

pub use poly::{format_rational, parse_decimal, parse_rational, rational_to_f64, Rational};
pub use ring::{CoeffMonomial, LinearForm, RingElement, Substitution, Valuation, Wavenumbers};
pub use series::{FieldSeries, Harmonic, Parity, SeriesKind, Truncation};
