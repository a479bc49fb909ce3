//! Tracing straight paths through branch cuts.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::base::{AffineBase, CutSide};
use super::lattice::{GluingMatrix, IntVec2, RatPoint, RatVec};
use crate::error::{Error, Result};
use crate::scalar::Rat;

/// A crossing of a branch cut: the path reaches `hit` and continues from
/// `landing` on the partner cut.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutCrossing {
    pub singularity: usize,
    pub side: CutSide,
    pub hit: RatPoint,
    pub landing: RatPoint,
}

/// How a traced segment ends.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentEnd {
    /// The path jumps across a cut; the next segment starts at the landing point.
    Cut(CutCrossing),
    /// The path leaves the bounding box.
    Boundary,
    /// The path jumps across a cut but lands outside the bounding box.
    Clipped(CutCrossing),
}

/// A straight piece of a traced ray, with the linear map carrying tangent
/// vectors at the ray's start to tangent vectors on this piece.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub start: RatPoint,
    pub end: RatPoint,
    pub dir: IntVec2,
    pub transform: GluingMatrix,
    pub end_kind: SegmentEnd,
}

impl Segment {
    /// Parameter `t` with `p = start + t (end - start)`, if `p` is on the segment.
    pub fn locate(&self, p: &RatPoint) -> Option<Rat> {
        let u = self.end.sub(&self.start);
        let w = p.sub(&self.start);
        if u.is_zero() {
            return w.is_zero().then(Rat::zero);
        }
        if !u.cross(&w).is_zero() {
            return None;
        }
        let t = w.dot(&u) / u.dot(&u);
        (!t.is_negative() && t <= Rat::one()).then_some(t)
    }

    pub fn contains(&self, p: &RatPoint) -> bool {
        self.locate(p).is_some()
    }
}

/// The first cut met by `q + t w` for `0 < t <= t_max`.
fn first_cut_hit(base: &AffineBase, q: &RatPoint, w: &RatVec, t_max: &Rat) -> Result<Option<(Rat, usize, CutSide)>> {
    let mut best: Option<(Rat, usize, CutSide)> = None;
    for (i, s) in base.singularities.iter().enumerate() {
        let to_sing = s.position.sub(q);
        if w.cross(&to_sing).is_zero() {
            let t = to_sing.dot(w) / w.dot(w);
            if t.is_positive() && &t <= t_max {
                return Err(Error::RayHitsSingularity {
                    from: Box::new(q.clone()),
                    dir: format!("({},{})", crate::scalar::fmt_rat(&w.x), crate::scalar::fmt_rat(&w.y)),
                    point: Box::new(s.position.clone()),
                });
            }
        }
        for side in [CutSide::Plus, CutSide::Minus] {
            let cut = s.cut(side);
            let d = cut.direction.to_rat();
            let denom = w.cross(&d);
            let oq = cut.origin.sub(q);
            if denom.is_zero() {
                if oq.cross(w).is_zero() {
                    // Collinear with the cut line: reject if some t in (0, t_max] lies on the ray,
                    // unless the path runs outward along a plus cut, which is the seam itself.
                    let dd = d.dot(&d);
                    let s0 = -oq.dot(&d) / &dd;
                    let s_end = w.scale(t_max).dot(&d) / &dd + &s0;
                    let on_seam = side == CutSide::Plus && !s0.is_negative() && w.dot(&d).is_positive();
                    if !on_seam && (s0.is_positive() || !s_end.is_negative()) {
                        return Err(Error::PathAlongCut(Box::new(q.clone())));
                    }
                }
                continue;
            }
            let t = oq.cross(&d) / &denom;
            let sp = oq.cross(w) / &denom;
            if !t.is_positive() || &t > t_max || sp.is_negative() {
                continue;
            }
            if best.as_ref().is_none_or(|b| t < b.0) {
                best = Some((t, i, side));
            }
        }
    }
    Ok(best)
}

/// Largest `t` keeping `q + t w` in the box `|x|, |y| <= radius`.
fn box_exit(q: &RatPoint, w: &RatVec, radius: &Rat) -> Rat {
    let mut t_exit: Option<Rat> = None;
    for (c, v) in [(&q.x, &w.x), (&q.y, &w.y)] {
        let t = if v.is_positive() {
            (radius - c) / v
        } else if v.is_negative() {
            (-radius - c) / v
        } else {
            continue;
        };
        if t_exit.as_ref().is_none_or(|e| &t < e) {
            t_exit = Some(t);
        }
    }
    t_exit.expect("nonzero direction")
}

/// Traces the ray from `start` in direction `dir` until it leaves the box of
/// the given radius, jumping across cuts on the way.
pub fn trace_ray(base: &AffineBase, start: &RatPoint, dir: IntVec2, radius: &Rat) -> Result<Vec<Segment>> {
    if dir.is_zero() {
        return Err(Error::BadDirection(dir));
    }
    if base.discarding_singularity(start).is_some() {
        return Err(Error::InDiscardedSector(Box::new(start.clone())));
    }
    if let Some(i) = base.singularity_at(start) {
        if base.singularities[i].direction_discarded(&dir.to_rat()) {
            return Err(Error::BadDirection(dir));
        }
    }
    let mut segments = Vec::new();
    let mut q = start.clone();
    let mut v = dir;
    let mut transform = GluingMatrix::IDENTITY;
    if base.singularity_at(start).is_none() {
        if let Some((i, side)) = base.cut_at(start) {
            // A ray born on a cut and heading into the discarded side starts on the partner cut.
            let s = &base.singularities[i];
            let c = s.cut(side).direction.to_rat();
            let w = dir.to_rat();
            let turn = c.cross(&w);
            // Along a cut: outward on the minus cut is moved to the seam on the plus cut;
            // inward runs into the singular point and is reported below.
            let into_sector = match side {
                CutSide::Plus => turn.is_negative(),
                CutSide::Minus => turn.is_positive() || (turn.is_zero() && c.dot(&w).is_positive()),
            };
            if into_sector {
                let m = s.jump(side);
                let landing = s.position.offset(&m.apply_rat(&start.sub(&s.position)));
                if landing.max_norm() >= *radius {
                    // Only the point of birth is inside the box.
                    let crossing = CutCrossing { singularity: i, side, hit: start.clone(), landing };
                    let end_kind = SegmentEnd::Clipped(crossing);
                    return Ok(vec![Segment { start: start.clone(), end: start.clone(), dir, transform, end_kind }]);
                }
                q = landing;
                v = m.apply(dir);
                transform = m;
            }
        }
    }
    for _ in 0..10_000 {
        let w = v.to_rat();
        let t_exit = box_exit(&q, &w, radius);
        let hit = if t_exit.is_positive() { first_cut_hit(base, &q, &w, &t_exit)? } else { None };
        match hit {
            Some((t, sing, side)) if t < t_exit => {
                let end = q.along(&w, &t);
                let s = &base.singularities[sing];
                let m = s.jump(side);
                let landing = s.position.offset(&m.apply_rat(&end.sub(&s.position)));
                let crossing = CutCrossing { singularity: sing, side, hit: end.clone(), landing: landing.clone() };
                let v_next = m.apply(v);
                let inside = landing.max_norm() < *radius;
                let end_kind = if inside { SegmentEnd::Cut(crossing) } else { SegmentEnd::Clipped(crossing) };
                segments.push(Segment { start: q.clone(), end, dir: v, transform, end_kind });
                if !inside {
                    return Ok(segments);
                }
                let next_cut = if side == CutSide::Plus { CutSide::Minus } else { CutSide::Plus };
                let partner = s.cut(next_cut).direction.to_rat();
                let step = v_next.to_rat();
                // The continuation must leave the partner cut away from the discarded sector.
                let into_sector = match next_cut {
                    CutSide::Minus => partner.cross(&step).is_positive(),
                    CutSide::Plus => step.cross(&partner).is_positive(),
                };
                if into_sector {
                    return Err(Error::InvalidBase(format!(
                        "gluing of singularity {sing} sends a crossing path into its discarded sector"
                    )));
                }
                q = landing;
                v = v_next;
                transform = m * transform;
            }
            _ => {
                let end = q.along(&w, &t_exit);
                segments.push(Segment { start: q.clone(), end, dir: v, transform, end_kind: SegmentEnd::Boundary });
                return Ok(segments);
            }
        }
    }
    Err(Error::InvalidBase("ray does not leave the bounding box".into()))
}

/// A piecewise straight path given by a start point and successive chart
/// displacements. When a leg meets a cut, its remainder continues from the
/// landing point transformed by the gluing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransportPath {
    pub start: RatPoint,
    pub legs: Vec<RatVec>,
}

impl TransportPath {
    /// The path through the given waypoints, valid when no cut is crossed.
    pub fn through(points: &[RatPoint]) -> TransportPath {
        TransportPath { start: points[0].clone(), legs: points.windows(2).map(|w| w[1].sub(&w[0])).collect() }
    }
}

/// The outcome of walking a transport path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Walk {
    pub end: RatPoint,
    pub crossings: Vec<CutCrossing>,
    pub monodromy: GluingMatrix,
}

/// Walks `path`, recording every cut crossing.
pub fn walk(base: &AffineBase, path: &TransportPath) -> Result<Walk> {
    if base.discarding_singularity(&path.start).is_some() {
        return Err(Error::InDiscardedSector(Box::new(path.start.clone())));
    }
    let mut q = path.start.clone();
    let mut monodromy = GluingMatrix::IDENTITY;
    let mut crossings = Vec::new();
    for leg in &path.legs {
        let mut w = leg.clone();
        if w.is_zero() {
            continue;
        }
        let mut remaining = Rat::one();
        loop {
            match first_cut_hit(base, &q, &w, &remaining)? {
                Some((t, _, _)) if t == remaining => return Err(Error::PointOnCut(Box::new(q.along(&w, &t)))),
                Some((t, sing, side)) => {
                    let hit = q.along(&w, &t);
                    let s = &base.singularities[sing];
                    let m = s.jump(side);
                    let landing = s.position.offset(&m.apply_rat(&hit.sub(&s.position)));
                    crossings.push(CutCrossing { singularity: sing, side, hit, landing: landing.clone() });
                    q = landing;
                    w = m.apply_rat(&w);
                    remaining -= t;
                    monodromy = m * monodromy;
                }
                None => {
                    q = q.along(&w, &remaining);
                    break;
                }
            }
        }
    }
    Ok(Walk { end: q, crossings, monodromy })
}

/// Parallel transport of `v` along `path`.
pub fn transport(base: &AffineBase, path: &TransportPath, v: IntVec2) -> Result<IntVec2> {
    Ok(walk(base, path)?.monodromy.apply(v))
}

/// Monodromy of a large counterclockwise loop enclosing every singularity,
/// acting on tangent vectors at a point far out in direction `start`.
pub fn monodromy_at_infinity(base: &AffineBase, start: IntVec2) -> GluingMatrix {
    let reference = start.to_rat();
    let mut order: Vec<(RatVec, usize)> = base
        .singularities
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut v = s.position.sub(&base.center);
            if v.is_zero() {
                v = s.cut_minus.direction.to_rat();
            }
            (rotate_into_frame(&v, &reference), i)
        })
        .collect();
    order.sort_by(|a, b| a.0.angle_cmp(&b.0));
    order.iter().fold(GluingMatrix::IDENTITY, |acc, &(_, i)| base.singularities[i].jump(CutSide::Minus) * acc)
}

/// Expresses `v` in a frame whose positive x-axis is `reference`.
fn rotate_into_frame(v: &RatVec, reference: &RatVec) -> RatVec {
    RatVec::new(v.dot(reference), reference.cross(v))
}

/// Primitive generator of the kernel of `m - 1`, if it has rank one.
pub fn fixed_direction(m: &GluingMatrix) -> Option<IntVec2> {
    let (a, b, c, d) = (m.a - 1, m.b, m.c, m.d - 1);
    let candidates = [IntVec2::new(b, -a), IntVec2::new(d, -c)];
    let v = candidates.into_iter().find(|v| !v.is_zero())?;
    let v = v.primitive().0;
    (m.apply(v) == v).then_some(v)
}
