//! Order-by-order completion of a scattering diagram.

use std::collections::BTreeMap;

use num_traits::Zero;
use rayon::prelude::*;

use crate::affine::{trace_ray, IntVec2, RatPoint};
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::Rat;
use crate::series::{WallCrossing, WallFunction};

use super::diagram::ScatteringDiagram;
use super::index::SegmentIndex;
use super::ray::{poly_to_provenance, provenance_poly, Provenance, Ray, TermProvenance};
use super::theta::{collision_points, loop_crossings, rational_crossings, LoopAutomorphism, LoopCrossing};

/// Knobs of [`complete`].
#[derive(Clone, Debug)]
pub struct CompletionOptions {
    /// Record how every new term is built from its parents.
    pub provenance: bool,
    /// Visit collision points in reverse order. The result must not change.
    pub reverse_points: bool,
}

impl Default for CompletionOptions {
    fn default() -> Self {
        CompletionOptions { provenance: true, reverse_points: false }
    }
}

/// A term created at a collision point.
struct NewTerm {
    m: IntVec2,
    omega: Rat,
    provenance: Option<TermProvenance>,
}

/// Extends `initial` to a diagram consistent modulo `t^(order+1)` at every
/// point away from the singularities.
pub fn complete(initial: &ScatteringDiagram, order: u32, opts: &CompletionOptions) -> Result<ScatteringDiagram> {
    let mut d = initial.clone();
    for k in d.order + 1..=order {
        step(&mut d, k, opts)?;
    }
    Ok(d)
}

/// Adds the rays needed for consistency at grade `k`.
fn step(d: &mut ScatteringDiagram, k: u32, opts: &CompletionOptions) -> Result<()> {
    for r in &mut d.rays {
        r.extend_seed(k);
    }
    let index = SegmentIndex::build(&d.rays);
    let grades: Vec<u32> = d.rays.iter().map(|r| r.min_grade().unwrap_or(u32::MAX / 2)).collect();
    let keep = |a: usize, b: usize| grades[a] + grades[b] <= k;
    let mut points = collision_points(d, &index, &keep);
    if opts.reverse_points {
        points.reverse();
    }
    let snapshot: &ScatteringDiagram = d;
    let results: Vec<Result<(RatPoint, Vec<NewTerm>)>> = points
        .par_iter()
        .map(|p| scatter_at(snapshot, &index, p, k, opts.provenance).map(|t| (p.clone(), t)))
        .collect();
    let mut found: BTreeMap<RatPoint, Vec<NewTerm>> = BTreeMap::new();
    for r in results {
        let (p, terms) = r?;
        if !terms.is_empty() {
            found.insert(p, terms);
        }
    }
    let mut fresh: BTreeMap<(RatPoint, IntVec2), Ray> = BTreeMap::new();
    for (p, terms) in found {
        for t in terms {
            let (dir, j) = t.m.primitive();
            let key = (j as u32, k);
            let existing = d.rays.iter_mut().find(|r| r.origin == p && r.dir == dir && r.seed.is_none());
            let ray = match existing {
                Some(r) => r,
                None => fresh.entry((p.clone(), dir)).or_insert_with(|| Ray {
                    id: 0,
                    origin: p.clone(),
                    dir,
                    segments: Vec::new(),
                    omega: BTreeMap::new(),
                    seed: None,
                    provenance: Provenance::Scattered { point: p.clone(), terms: Vec::new() },
                }),
            };
            ray.omega.insert(key, t.omega);
            if let (Some(tp), Provenance::Scattered { terms, .. }) = (t.provenance, &mut ray.provenance) {
                terms.push(tp);
            }
        }
    }
    for (_, mut ray) in fresh {
        ray.id = d.rays.len();
        ray.segments = trace_ray(&d.base, &ray.origin, ray.dir, &d.radius)?;
        d.rays.push(ray);
    }
    d.order = k;
    Ok(())
}

/// The new terms needed at `p` to cancel the grade-`k` part of the loop
/// automorphism.
fn scatter_at(
    d: &ScatteringDiagram,
    index: &SegmentIndex,
    p: &RatPoint,
    k: u32,
    provenance: bool,
) -> Result<Vec<NewTerm>> {
    let crossings = loop_crossings(d, index, p)?;
    let walls = rational_crossings(d, &crossings, k);
    let theta = LoopAutomorphism::from_crossings(&walls, k);
    if let Some(g) = theta.first_deviation() {
        if g < k {
            return Err(Error::Malformed(format!("diagram is inconsistent at {p} in grade {g}")));
        }
    }
    let log = theta.log_at_grade(k);
    if log.is_empty() {
        return Ok(Vec::new());
    }
    let symbolic = if provenance { Some(symbolic_log(d, &crossings, p, k)) } else { None };
    let mut out = Vec::new();
    for (m, c) in log {
        let (_, j) = m.primitive();
        let provenance = symbolic.as_ref().map(|(table, polys)| {
            let poly = polys.get(&m).cloned().unwrap_or_else(Poly::zero).neg();
            poly_to_provenance(j as u32, k, &poly, table)
        });
        out.push(NewTerm { m, omega: -c, provenance });
    }
    Ok(out)
}

/// A term of a ray's invariant: ray index, multiple and grade.
type TermRef = (usize, u32, u32);

/// The grade-`k` part of `log theta` at `p` with every term of an incoming
/// ray replaced by a variable and every term of a ray born at `p` replaced
/// by its recorded provenance. Returns the variable table and the
/// coefficients.
fn symbolic_log(
    d: &ScatteringDiagram,
    crossings: &[LoopCrossing],
    p: &RatPoint,
    k: u32,
) -> (Vec<TermRef>, BTreeMap<IntVec2, Poly>) {
    let mut table: Vec<TermRef> = Vec::new();
    let mut rays: Vec<usize> = crossings.iter().map(|c| c.ray).collect();
    rays.sort();
    rays.dedup();
    for &r in &rays {
        let ray = &d.rays[r];
        if is_born_at(ray, p) {
            continue;
        }
        for &(j, a) in ray.omega.keys() {
            if a < k {
                table.push((r, j, a));
            }
        }
    }
    let lookup = |r: usize, j: u32, a: u32| -> Poly {
        let v = table.iter().position(|&t| t == (r, j, a)).expect("parent term in table");
        Poly::var(v as u32)
    };
    let mut walls: BTreeMap<usize, BTreeMap<(u32, u32), Poly>> = BTreeMap::new();
    for &r in &rays {
        let ray = &d.rays[r];
        let mut coeffs = BTreeMap::new();
        for (&(j, a), _) in ray.omega.iter().filter(|((_, a), _)| *a < k) {
            let c = if is_born_at(ray, p) {
                let tp = ray.provenance.term((j, a)).expect("scattered term has provenance");
                provenance_poly(tp, &lookup)
            } else {
                lookup(r, j, a)
            };
            coeffs.insert((j, a), c);
        }
        walls.insert(r, coeffs);
    }
    let symbolic: Vec<WallCrossing<Poly>> = crossings
        .iter()
        .map(|c| {
            let dir = c.dir(d);
            let coeffs = walls[&c.ray].iter().map(|(key, v)| (*key, v.clone()));
            WallCrossing::new(WallFunction::from_omega(dir, coeffs, k), c.sign)
        })
        .collect();
    let theta = LoopAutomorphism::from_crossings(&symbolic, k);
    (table, theta.log_at_grade(k))
}

fn is_born_at(ray: &Ray, p: &RatPoint) -> bool {
    ray.seed.is_none() && &ray.origin == p
}

/// Checks that every recorded provenance evaluates to the stored invariant.
pub fn provenance_consistent(d: &ScatteringDiagram) -> bool {
    d.rays.iter().all(|ray| match &ray.provenance {
        Provenance::Initial { .. } => true,
        Provenance::Scattered { terms, .. } => terms.iter().all(|t| {
            let value = provenance_poly(t, &|r, j, a| {
                Poly::constant(d.rays[r].omega.get(&(j, a)).cloned().unwrap_or_else(Rat::zero))
            });
            let expected = ray.omega.get(&(t.j, t.a)).cloned().unwrap_or_else(Rat::zero);
            value == Poly::constant(expected)
        }),
    })
}
