//! Scattering diagrams: initial data, loop automorphisms, completion and
//! tropical disc decompositions.

mod complete;
mod diagram;
mod discs;
mod index;
mod ray;
mod theta;

pub use complete::{complete, provenance_consistent, CompletionOptions};
pub use diagram::{type_ii_rays, ScatteringDiagram, SeedRay};
pub use discs::{direction_at, omega_trop, tropical_discs, DiscTree};
pub use ray::{InitialSource, ParentFactor, Provenance, ProvenanceMonomial, Ray, Seed, TermKey, TermProvenance};
pub use theta::{consistency_check, theta_loop, Defect, DefectTerm, LoopAutomorphism, LoopCrossing};
