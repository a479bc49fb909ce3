//! Wall-crossing covariance of the superpotential.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::affine::{IntVec2, RatPoint};
use crate::error::{Error, Result};
use crate::scalar::{int, rat, Rat};
use crate::scattering::ScatteringDiagram;
use crate::series::{compose_apply, WallCrossing};

use super::BandFamily;

/// Two endpoints on either side of a wall of `ray`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WallPair {
    pub u1: RatPoint,
    pub u2: RatPoint,
    pub ray: usize,
}

/// Walls met by the segment `u1 u2`, as `(ray, segment)`, provided they all
/// lie on one line through a single crossing point.
fn crossed_walls(d: &ScatteringDiagram, u1: &RatPoint, u2: &RatPoint) -> Result<Vec<(usize, usize)>> {
    let v = u2.sub(u1);
    let not_adj = |why: &str| Error::NotAdjacent(format!("{u1} and {u2}: {why}"));
    for s in &d.base.singularities {
        for cut in [&s.cut_plus, &s.cut_minus] {
            let e = cut.direction.to_rat();
            let den = v.cross(&e);
            let op = cut.origin.sub(u1);
            if den.is_zero() {
                continue;
            }
            let t = op.cross(&e) / &den;
            let r = op.cross(&v) / &den;
            if !t.is_negative() && t <= Rat::one() && !r.is_negative() {
                return Err(not_adj("the segment meets a cut"));
            }
        }
    }
    let mut hits: Vec<(Rat, usize, usize, IntVec2)> = Vec::new();
    for (ri, ray) in d.rays.iter().enumerate() {
        for (si, s) in ray.segments.iter().enumerate() {
            let e = s.end.sub(&s.start);
            if e.is_zero() {
                continue;
            }
            let den = v.cross(&e);
            let op = s.start.sub(u1);
            if den.is_zero() {
                if op.cross(&v).is_zero() {
                    return Err(not_adj("the segment runs along a wall"));
                }
                continue;
            }
            let t = op.cross(&e) / &den;
            let r = op.cross(&v) / &den;
            if t.is_negative() || t > Rat::one() || r.is_negative() || r > Rat::one() {
                continue;
            }
            if r.is_zero() || r == Rat::one() {
                return Err(not_adj("the segment passes through the end of a wall"));
            }
            hits.push((t, ri, si, s.dir));
        }
    }
    let Some(first) = hits.first() else { return Err(not_adj("no wall between the points")) };
    if hits.iter().any(|h| h.0 != first.0 || h.3.pairing(first.3) != 0) {
        return Err(not_adj("more than one wall between the points"));
    }
    Ok(hits.iter().map(|h| (h.1, h.2)).collect())
}

/// Checks `W(u1) = K W(u2)` where `K` is the automorphism of the wall of
/// `ray` between the two points, with sign `sign <d, u1 - u2>`.
pub fn wallcross_check(
    d: &ScatteringDiagram,
    family: &BandFamily,
    u1: &RatPoint,
    u2: &RatPoint,
    ray: usize,
) -> Result<bool> {
    let w1 = family.superpotential(d, u1)?;
    let w2 = family.superpotential(d, u2)?;
    if u1 == u2 {
        return Ok(w1 == w2);
    }
    let walls = crossed_walls(d, u1, u2)?;
    if family.crosses_seam(u1, u2) {
        return Err(Error::NotAdjacent(format!(
            "{u1} and {u2} are separated by a line through a singular point or the box"
        )));
    }
    if !walls.iter().any(|w| w.0 == ray) {
        return Err(Error::NotAdjacent(format!("{u1} and {u2} are not separated by ray {ray}")));
    }
    let order = family.order;
    let crossings: Vec<WallCrossing<Rat>> = walls
        .iter()
        .map(|&(r, s)| {
            let seg = &d.rays[r].segments[s];
            let sign = if seg.dir.to_rat().cross(&u1.sub(u2)).is_positive() { -1 } else { 1 };
            WallCrossing::new(d.rays[r].wall_on(seg, order), sign)
        })
        .collect();
    let moved = compose_apply(&crossings, &w2.series);
    Ok(moved.sub(&w1.series).truncate(order).is_empty())
}

/// Up to `count` deterministic pairs of generic points straddling walls,
/// spread over the rays of the diagram.
pub fn wallcross_samples(d: &ScatteringDiagram, family: &BandFamily, count: usize) -> Vec<WallPair> {
    let fractions = [rat(1, 3), rat(3, 5), rat(2, 7), rat(5, 8)];
    let delta = rat(1, 997);
    let mut out = Vec::new();
    for f in &fractions {
        for (ri, ray) in d.rays.iter().enumerate() {
            if out.len() >= count {
                return out;
            }
            let Some(seg) = ray.segments.iter().find(|s| s.start != s.end) else { continue };
            let p = seg.start.along(&seg.end.sub(&seg.start), f);
            let n = seg.dir.rot90().to_rat();
            let norm = n.dot(&n);
            let step = n.scale(&(&delta / norm));
            let u1 = p.offset(&step);
            let u2 = p.offset(&step.scale(&int(-1)));
            let ok = crossed_walls(d, &u1, &u2).is_ok_and(|w| w.iter().any(|w| w.0 == ri))
                && !family.crosses_seam(&u1, &u2)
                && family.superpotential(d, &u1).is_ok()
                && family.superpotential(d, &u2).is_ok();
            if ok && !out.iter().any(|q: &WallPair| q.u1 == u1) {
                out.push(WallPair { u1, u2, ray: ri });
            }
        }
    }
    out
}
