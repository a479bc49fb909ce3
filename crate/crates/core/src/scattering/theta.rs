//! Path-ordered products around a point of a diagram.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::affine::{GluingMatrix, IntVec2, RatPoint, SegmentEnd};
use crate::error::{Error, Result};
use crate::scalar::{Rat, Scalar};
use crate::series::{compose_apply, ClassExponent, FormalSeries, WallCrossing, WallFunction};

use super::diagram::ScatteringDiagram;
use super::index::SegmentIndex;

/// One crossing of a small counterclockwise loop around a point: the loop
/// meets ray `ray` (segment `seg`) on the half-line leaving the point in
/// direction `toward`. Outgoing half-lines are crossed with sign `+1`,
/// incoming ones with `-1`. `chart` carries the segment's vectors into the
/// chart of the point; it differs from the identity only for segments met at
/// the glued partner of a point on a cut.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopCrossing {
    pub ray: usize,
    pub seg: usize,
    pub toward: IntVec2,
    pub sign: i64,
    pub chart: GluingMatrix,
}

impl LoopCrossing {
    /// Direction of the crossed segment in the chart of the point.
    pub fn dir(&self, d: &ScatteringDiagram) -> IntVec2 {
        self.chart.apply(d.rays[self.ray].segments[self.seg].dir)
    }
}

/// The crossings of a small loop around `p`, in counterclockwise order
/// starting from the positive x-axis. A point on a cut is seen through both
/// of its representatives, glued into the chart at `p`.
pub(crate) fn loop_crossings(d: &ScatteringDiagram, index: &SegmentIndex, p: &RatPoint) -> Result<Vec<LoopCrossing>> {
    if d.base.singularity_at(p).is_some() {
        return Err(Error::Malformed(format!("{p} is a singular point")));
    }
    let mut reps = vec![(p.clone(), GluingMatrix::IDENTITY)];
    reps.extend(d.base.partner(p));
    let on_cut = reps.len() > 1;
    let mut out = Vec::new();
    for (q, chart) in &reps {
        for (r, s) in index.segments_at(&d.rays, q) {
            let seg = &d.rays[r].segments[s];
            let t = seg.locate(q).expect("segment contains point");
            let dir = chart.apply(seg.dir);
            let half = |toward: IntVec2, sign: i64| LoopCrossing { ray: r, seg: s, toward, sign, chart: *chart };
            if t.is_zero() {
                out.push(half(dir, 1));
            } else if t.is_one() {
                match seg.end_kind {
                    SegmentEnd::Boundary => {}
                    SegmentEnd::Cut(_) => out.push(half(-dir, -1)),
                    // The continuation lands outside the box; it still leaves `p`.
                    SegmentEnd::Clipped(_) => {
                        out.push(half(dir, 1));
                        out.push(half(-dir, -1));
                    }
                }
            } else if on_cut && !along_cut(d, q, seg.dir) {
                return Err(Error::CollisionOnCut(Box::new(p.clone())));
            } else {
                out.push(half(dir, 1));
                out.push(half(-dir, -1));
            }
        }
    }
    out.sort_by(|a, b| {
        a.toward.to_rat().angle_cmp(&b.toward.to_rat()).then(a.ray.cmp(&b.ray)).then(a.sign.cmp(&b.sign))
    });
    Ok(out)
}

fn along_cut(d: &ScatteringDiagram, q: &RatPoint, v: IntVec2) -> bool {
    d.base.cut_at(q).is_some_and(|(i, side)| {
        let c = d.base.singularities[i].cut(side).direction;
        c.x * v.y - c.y * v.x == 0
    })
}

/// An automorphism recorded by its images of `z^(1,0)` and `z^(0,1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopAutomorphism<S> {
    pub image_x: FormalSeries<S>,
    pub image_y: FormalSeries<S>,
}

fn generator<S: Scalar>(m: IntVec2, order: u32) -> FormalSeries<S> {
    FormalSeries::monomial(ClassExponent::new(m, 0), S::one(), order)
}

impl<S: Scalar> LoopAutomorphism<S> {
    /// Composes `K_1 o ... o K_s` for crossings listed in loop order.
    pub fn from_crossings(crossings: &[WallCrossing<S>], order: u32) -> Self {
        LoopAutomorphism {
            image_x: compose_apply(crossings, &generator(IntVec2::new(1, 0), order)),
            image_y: compose_apply(crossings, &generator(IntVec2::new(0, 1), order)),
        }
    }

    /// `theta(z^e) - z^e` for both generators.
    pub fn deviations(&self) -> [FormalSeries<S>; 2] {
        let order = self.image_x.order();
        [
            self.image_x.sub(&generator(IntVec2::new(1, 0), order)),
            self.image_y.sub(&generator(IntVec2::new(0, 1), order)),
        ]
    }

    pub fn is_identity(&self) -> bool {
        self.deviations().iter().all(|s| s.is_empty())
    }

    /// Lowest grade at which the automorphism differs from the identity.
    pub fn first_deviation(&self) -> Option<u32> {
        self.deviations().iter().filter_map(|s| s.min_grade()).min()
    }

    /// The coefficients `c_m` of `log theta = sum c_m L_m` at grade `k`,
    /// assuming `theta` is the identity below grade `k`. Here
    /// `L_m(z^e) = <e, m> z^(e+m)`.
    pub fn log_at_grade(&self, k: u32) -> BTreeMap<IntVec2, S> {
        let [dx, dy] = self.deviations();
        let mut out: BTreeMap<IntVec2, S> = BTreeMap::new();
        for (e, c) in dx.terms().filter(|(e, _)| e.a == k) {
            let m = e.m - IntVec2::new(1, 0);
            if m.y != 0 {
                out.insert(m, c.scale_rat(&Rat::new(1.into(), m.y.into())));
            }
        }
        for (e, c) in dy.terms().filter(|(e, _)| e.a == k) {
            let m = e.m - IntVec2::new(0, 1);
            if m.y == 0 && m.x != 0 {
                out.insert(m, c.scale_rat(&Rat::new((-1).into(), m.x.into())));
            }
        }
        out
    }
}

/// The walls crossed by a small loop around `p`, truncated at `order`.
pub(crate) fn rational_crossings(
    d: &ScatteringDiagram,
    crossings: &[LoopCrossing],
    order: u32,
) -> Vec<WallCrossing<Rat>> {
    let mut cache: BTreeMap<(usize, usize), WallFunction<Rat>> = BTreeMap::new();
    crossings
        .iter()
        .map(|c| {
            let w = cache
                .entry((c.ray, c.seg))
                .or_insert_with(|| d.rays[c.ray].wall_on(&d.rays[c.ray].segments[c.seg], order))
                .clone();
            let w = if c.chart == GluingMatrix::IDENTITY { w } else { w.transported(&c.chart) };
            WallCrossing::new(w, c.sign)
        })
        .collect()
}

/// The path-ordered product of a small counterclockwise loop around `p`,
/// modulo `t^(order+1)`.
pub fn theta_loop(d: &ScatteringDiagram, p: &RatPoint, order: u32) -> Result<LoopAutomorphism<Rat>> {
    let index = SegmentIndex::build(&d.rays);
    theta_with_index(d, &index, p, order)
}

pub(crate) fn theta_with_index(
    d: &ScatteringDiagram,
    index: &SegmentIndex,
    p: &RatPoint,
    order: u32,
) -> Result<LoopAutomorphism<Rat>> {
    let crossings = loop_crossings(d, index, p)?;
    let walls = rational_crossings(d, &crossings, order);
    Ok(LoopAutomorphism::from_crossings(&walls, order))
}

/// A point where the loop automorphism is not the identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Defect {
    pub point: RatPoint,
    pub grade: u32,
    pub terms: Vec<DefectTerm>,
}

/// One term `c L_m` of the leading part of `log theta`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DefectTerm {
    pub m: IntVec2,
    #[serde(with = "crate::scalar::serde_rat")]
    pub coeff: Rat,
}

/// Points of `d` (including ray origins and crossings, excluding singular
/// points) where the loop automorphism differs from the identity modulo
/// `t^(order+1)`.
pub fn consistency_check(d: &ScatteringDiagram, order: u32) -> Result<Vec<Defect>> {
    use rayon::prelude::*;
    let mut d = d.clone();
    for r in &mut d.rays {
        r.extend_seed(order);
    }
    let index = SegmentIndex::build(&d.rays);
    let grades: Vec<u32> = d.rays.iter().map(|r| r.min_grade().unwrap_or(u32::MAX / 2)).collect();
    let keep = |a: usize, b: usize| grades[a] + grades[b] <= order;
    let points = collision_points(&d, &index, &keep);
    let results: Vec<Result<Option<Defect>>> = points
        .par_iter()
        .map(|p| {
            let theta = theta_with_index(&d, &index, p, order)?;
            Ok(theta.first_deviation().map(|k| Defect {
                point: p.clone(),
                grade: k,
                terms: theta.log_at_grade(k).into_iter().map(|(m, coeff)| DefectTerm { m, coeff }).collect(),
            }))
        })
        .collect();
    let mut out = Vec::new();
    for r in results {
        if let Some(defect) = r? {
            out.push(defect);
        }
    }
    Ok(out)
}

/// Candidate collision points accepted by `keep`, one representative per
/// glued point, singular points excluded.
pub(crate) fn collision_points(
    d: &ScatteringDiagram,
    index: &SegmentIndex,
    keep: &(dyn Fn(usize, usize) -> bool + Sync),
) -> Vec<RatPoint> {
    let points: std::collections::BTreeSet<RatPoint> = index
        .crossing_points(&d.rays, &d.radius, keep)
        .into_iter()
        .filter(|p| d.base.singularity_at(p).is_none())
        .map(|p| d.base.canonical(&p))
        .collect();
    points.into_iter().collect()
}
