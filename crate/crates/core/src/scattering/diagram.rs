//! Scattering diagrams, their initial data and serialization.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::affine::{trace_ray, AffineBase, IntVec2, RatPoint};
use crate::error::{Error, Result};
use crate::scalar::{fmt_rat, int, parse_rat, serde_rat, Rat};
use crate::series::SeriesTerm;

use super::ray::{InitialSource, Provenance, Ray, Seed, TermKey};

/// Rays on an affine base, consistent up to `order`, clipped to the box
/// `|x|, |y| <= radius`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScatteringDiagram {
    pub base: AffineBase,
    pub radius: Rat,
    pub order: u32,
    pub rays: Vec<Ray>,
}

/// Description of a seeded ray.
#[derive(Clone, Debug)]
pub struct SeedRay {
    pub origin: RatPoint,
    pub dir: IntVec2,
    pub seed: Seed,
    pub source: InitialSource,
}

impl ScatteringDiagram {
    /// A diagram made of seeded rays only.
    pub fn from_seeds(base: AffineBase, radius: Rat, seeds: Vec<SeedRay>) -> Result<Self> {
        base.validate()?;
        let mut d = ScatteringDiagram { base, radius, order: 1, rays: Vec::new() };
        for s in seeds {
            let (dir, _) = s.dir.primitive();
            let segments = trace_ray(&d.base, &s.origin, dir, &d.radius)?;
            let mut ray = Ray {
                id: d.rays.len(),
                origin: s.origin,
                dir,
                segments,
                omega: BTreeMap::new(),
                seed: Some(s.seed),
                provenance: Provenance::Initial { source: s.source },
            };
            ray.extend_seed(1);
            d.rays.push(ray);
        }
        Ok(d)
    }

    /// The two rays `1 + t z^(+-v)` along the invariant line of every
    /// singularity.
    pub fn initial(base: &AffineBase, radius: Rat) -> Result<Self> {
        base.validate()?;
        let mut seeds = Vec::new();
        for (i, s) in base.singularities.iter().enumerate() {
            if s.matrix.trace() != 2 || s.matrix.is_identity() {
                return Err(Error::UnsupportedSingularityType { index: i, trace: s.matrix.trace() });
            }
            for sign in [1i8, -1] {
                seeds.push(SeedRay {
                    origin: s.position.clone(),
                    dir: s.invariant_dir.scale(sign as i64),
                    seed: Seed { coeff: int(1), grade: 1 },
                    source: InitialSource::Singularity { index: i, sign },
                });
            }
        }
        Self::from_seeds(base.clone(), radius, seeds)
    }

    /// Two crossing walls `1 + t x` along the x-axis from `(-1,0)` and
    /// `1 + t y` along the y-axis from `(0,-1)` on a flat base.
    pub fn toy_two_wall(radius: Rat) -> Result<Self> {
        let seed = Seed { coeff: int(1), grade: 1 };
        Self::from_seeds(
            AffineBase::flat("toy-two-wall"),
            radius,
            vec![
                SeedRay {
                    origin: RatPoint::from_ints(-1, 0),
                    dir: IntVec2::new(1, 0),
                    seed: seed.clone(),
                    source: InitialSource::Seeded { index: 0 },
                },
                SeedRay {
                    origin: RatPoint::from_ints(0, -1),
                    dir: IntVec2::new(0, 1),
                    seed,
                    source: InitialSource::Seeded { index: 1 },
                },
            ],
        )
    }

    pub fn ray(&self, id: usize) -> &Ray {
        &self.rays[id]
    }

    /// Rays whose origin is `p`.
    pub fn rays_from(&self, p: &RatPoint) -> impl Iterator<Item = &Ray> {
        let p = p.clone();
        self.rays.iter().filter(move |r| r.origin == p)
    }

    pub fn to_json(&self) -> String {
        let doc = DiagramJson {
            format: FORMAT.into(),
            order: self.order,
            radius: self.radius.clone(),
            base: self.base.clone(),
            rays: self.rays.iter().map(|r| RayJson::from_ray(r, self.order)).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("diagram serializes")
    }

    /// Parses a diagram, re-tracing every ray and checking it against the
    /// stored polyline and wall function.
    pub fn from_json(s: &str) -> Result<Self> {
        let doc: DiagramJson = serde_json::from_str(s).map_err(|e| Error::Malformed(e.to_string()))?;
        if doc.format != FORMAT {
            return Err(Error::Malformed(format!("unknown format {:?}", doc.format)));
        }
        doc.base.validate()?;
        let mut rays = Vec::with_capacity(doc.rays.len());
        for (i, rj) in doc.rays.into_iter().enumerate() {
            if rj.id != i {
                return Err(Error::Malformed(format!("ray ids must be consecutive, found {} at {i}", rj.id)));
            }
            let ray = rj.into_ray(&doc.base, &doc.radius, doc.order)?;
            rays.push(ray);
        }
        Ok(ScatteringDiagram { base: doc.base, radius: doc.radius, order: doc.order, rays })
    }
}

/// The five rays emanating from a singularity of type II, given the basis
/// `g1, g2` in which its counterclockwise monodromy is `[[0,1],[-1,1]]`.
pub fn type_ii_rays(
    base: &AffineBase,
    position: &RatPoint,
    g1: IntVec2,
    g2: IntVec2,
    radius: &Rat,
    grade: u32,
) -> Result<Vec<Ray>> {
    let classes = [-g1, g2, g1 + g2, g1, -g2];
    let mut rays = Vec::new();
    for (k, c) in classes.iter().enumerate() {
        let (dir, _) = c.primitive();
        let segments = trace_ray(base, position, dir, radius)?;
        let mut ray = Ray {
            id: k,
            origin: position.clone(),
            dir,
            segments,
            omega: BTreeMap::new(),
            seed: Some(Seed { coeff: int(1), grade }),
            provenance: Provenance::Initial { source: InitialSource::Seeded { index: k } },
        };
        ray.extend_seed(grade);
        rays.push(ray);
    }
    Ok(rays)
}

const FORMAT: &str = "tropscat-diagram/1";

#[derive(Serialize, Deserialize)]
struct DiagramJson {
    format: String,
    order: u32,
    #[serde(with = "serde_rat")]
    radius: Rat,
    base: AffineBase,
    rays: Vec<RayJson>,
}

#[derive(Serialize, Deserialize)]
struct OmegaJson {
    j: u32,
    a: u32,
    value: String,
}

#[derive(Serialize, Deserialize)]
struct RayJson {
    id: usize,
    origin: RatPoint,
    dir: IntVec2,
    seed: Option<Seed>,
    omega: Vec<OmegaJson>,
    wall: Vec<SeriesTerm>,
    polyline: Vec<RatPoint>,
    provenance: Provenance,
}

impl RayJson {
    fn from_ray(r: &Ray, order: u32) -> RayJson {
        let polyline = r.segments.iter().flat_map(|s| [s.start.clone(), s.end.clone()]).collect();
        RayJson {
            id: r.id,
            origin: r.origin.clone(),
            dir: r.dir,
            seed: r.seed.clone(),
            omega: r.omega.iter().map(|(&(j, a), v)| OmegaJson { j, a, value: fmt_rat(v) }).collect(),
            wall: r.wall(order).series().to_term_list(),
            polyline,
            provenance: r.provenance.clone(),
        }
    }

    fn into_ray(self, base: &AffineBase, radius: &Rat, order: u32) -> Result<Ray> {
        let segments = trace_ray(base, &self.origin, self.dir, radius)?;
        let mut omega: BTreeMap<TermKey, Rat> = BTreeMap::new();
        for o in &self.omega {
            let v = parse_rat(&o.value).ok_or_else(|| Error::Malformed(format!("bad value {:?}", o.value)))?;
            omega.insert((o.j, o.a), v);
        }
        let ray = Ray {
            id: self.id,
            origin: self.origin,
            dir: self.dir,
            segments,
            omega,
            seed: self.seed,
            provenance: self.provenance,
        };
        let expected = RayJson::from_ray(&ray, order);
        if expected.polyline != self.polyline {
            return Err(Error::Malformed(format!("ray {} polyline does not match its trace", ray.id)));
        }
        if expected.wall != self.wall {
            return Err(Error::Malformed(format!("ray {} wall does not match its invariants", ray.id)));
        }
        Ok(ray)
    }
}
