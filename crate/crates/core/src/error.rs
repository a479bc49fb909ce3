use thiserror::Error;

use crate::affine::{IntVec2, RatPoint};

pub type Result<T> = std::result::Result<T, Error>;

/// Domain errors reported by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid base: {0}")]
    InvalidBase(String),
    #[error("singularity {index} has unsupported monodromy type (trace {trace})")]
    UnsupportedSingularityType { index: usize, trace: i64 },
    #[error("path from {from} in direction {dir} passes through singular point {point}")]
    RayHitsSingularity { from: Box<RatPoint>, dir: String, point: Box<RatPoint> },
    #[error("path runs along a cut near {0}")]
    PathAlongCut(Box<RatPoint>),
    #[error("point {0} lies on a branch cut")]
    PointOnCut(Box<RatPoint>),
    #[error("point {0} lies in a discarded sector")]
    InDiscardedSector(Box<RatPoint>),
    #[error("point {0} lies on a region boundary or outside every region")]
    OnBoundary(Box<RatPoint>),
    #[error("collision point {0} lies on a branch cut")]
    CollisionOnCut(Box<RatPoint>),
    #[error("series does not have constant term 1 with nilpotent remainder")]
    BadConstantTerm,
    #[error("not a wall function: {0}")]
    NotAWallFunction(String),
    #[error("endpoint {point} is not generic; try {suggestion}")]
    NonGenericEndpoint { point: Box<RatPoint>, suggestion: Box<RatPoint> },
    #[error("points are not in adjacent chambers: {0}")]
    NotAdjacent(String),
    #[error("degree {d} count not stabilized: {before} at order {order}, {after} at order {next}")]
    NotStabilized { d: u32, order: u32, next: u32, before: String, after: String },
    #[error("base has no invariant direction at infinity")]
    NoInvariantDirection,
    #[error("direction {0} is not a valid ray direction")]
    BadDirection(IntVec2),
    #[error("no ray of the requested class passes through {0}")]
    NoRayThroughPoint(Box<RatPoint>),
    #[error("bounding radius {0} is too small for the requested computation")]
    RadiusExceeded(String),
    #[error("malformed input: {0}")]
    Malformed(String),
}

impl Error {
    /// Stable machine-readable name of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidBase(_) => "InvalidBase",
            Error::UnsupportedSingularityType { .. } => "UnsupportedSingularityType",
            Error::RayHitsSingularity { .. } => "RayHitsSingularity",
            Error::PathAlongCut(_) => "PathAlongCut",
            Error::PointOnCut(_) => "PointOnCut",
            Error::InDiscardedSector(_) => "InDiscardedSector",
            Error::OnBoundary(_) => "OnBoundary",
            Error::CollisionOnCut(_) => "CollisionOnCut",
            Error::BadConstantTerm => "BadConstantTerm",
            Error::NotAWallFunction(_) => "NotAWallFunction",
            Error::NonGenericEndpoint { .. } => "NonGenericEndpoint",
            Error::NotAdjacent(_) => "NotAdjacent",
            Error::NotStabilized { .. } => "NotStabilized",
            Error::NoInvariantDirection => "NoInvariantDirection",
            Error::BadDirection(_) => "BadDirection",
            Error::NoRayThroughPoint(_) => "NoRayThroughPoint",
            Error::RadiusExceeded(_) => "RadiusExceeded",
            Error::Malformed(_) => "Malformed",
        }
    }
}
