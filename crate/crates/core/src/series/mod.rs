//! Formal series, wall functions, wall-crossing automorphisms and the
//! invariants extracted from them.

mod formal;
mod omega;
mod wall;

pub use formal::{ClassExponent, FormalSeries, SeriesTerm};
pub use omega::{extract_omega_tilde, mobius, mobius_invert, omega_by_multiple, BpsValue};
pub use wall::{compose_apply, WallCrossing, WallFunction};
