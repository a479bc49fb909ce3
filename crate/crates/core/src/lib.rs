//! Exact scattering diagrams on integral affine surfaces with focus-focus
//! singularities, broken lines, and the relative invariants they encode.
//!
//! The series layer is generic over the coefficient ring; the aliases below
//! fix the common choices.

pub mod affine;
pub mod broken_lines;
pub mod error;
pub mod poly;
pub mod relative_gw;
pub mod scalar;
pub mod scattering;
pub mod series;

pub use error::{Error, Result};
pub use scalar::{Rat, Scalar};

/// Exact series over the rationals.
pub type Series = series::FormalSeries<Rat>;
/// Floating-point series.
pub type SeriesF64 = series::FormalSeries<f64>;
/// Series with symbolic polynomial coefficients.
pub type SymbolicSeries = series::FormalSeries<poly::Poly>;
/// Exact wall function.
pub type Wall = series::WallFunction<Rat>;
