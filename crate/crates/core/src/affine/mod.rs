//! The integral affine base: charts, singularities, cuts and transport.

mod base;
mod lattice;
mod trace;

pub use base::{
    strictly_between, AffineBase, CutRay, CutSide, HalfPlane, Region, RegionKind, RegionLabel, Singularity,
};
pub use lattice::{GluingMatrix, IntVec2, RatPoint, RatVec};
pub use trace::{
    fixed_direction, monodromy_at_infinity, trace_ray, transport, walk, CutCrossing, Segment, SegmentEnd,
    TransportPath, Walk,
};
