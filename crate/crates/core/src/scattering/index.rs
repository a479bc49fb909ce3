//! Uniform grid over ray segments for exact intersection queries.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::affine::{RatPoint, Segment};
use crate::scalar::Rat;

use super::ray::Ray;

pub(crate) type SegRef = (usize, usize);

fn floor_i64(r: &Rat) -> i64 {
    let f: BigInt = r.floor().to_integer();
    f.to_i64().expect("coordinate fits in i64")
}

pub(crate) struct SegmentIndex {
    cells: HashMap<(i64, i64), Vec<SegRef>>,
}

impl SegmentIndex {
    pub fn build(rays: &[Ray]) -> Self {
        let mut cells: HashMap<(i64, i64), Vec<SegRef>> = HashMap::new();
        for (r, ray) in rays.iter().enumerate() {
            for (s, seg) in ray.segments.iter().enumerate() {
                for c in cells_of(seg) {
                    cells.entry(c).or_default().push((r, s));
                }
            }
        }
        SegmentIndex { cells }
    }

    /// Segments containing `p`.
    pub fn segments_at(&self, rays: &[Ray], p: &RatPoint) -> Vec<SegRef> {
        let (cx, cy) = (floor_i64(&p.x), floor_i64(&p.y));
        let mut out = BTreeSet::new();
        // A point on a cell edge may be registered only in the neighbouring cell.
        for dx in [-1, 0] {
            for dy in [-1, 0] {
                if let Some(list) = self.cells.get(&(cx + dx, cy + dy)) {
                    for &(r, s) in list {
                        if rays[r].segments[s].contains(p) {
                            out.insert((r, s));
                        }
                    }
                }
            }
        }
        out.into_iter().collect()
    }

    /// Intersection points strictly inside the box of pairs of non-parallel
    /// segments accepted by `keep`.
    pub fn crossing_points(
        &self,
        rays: &[Ray],
        radius: &Rat,
        keep: &(dyn Fn(usize, usize) -> bool + Sync),
    ) -> BTreeSet<RatPoint> {
        let mut out = BTreeSet::new();
        let mut keys: Vec<_> = self.cells.keys().copied().collect();
        keys.sort();
        for key in keys {
            let list = &self.cells[&key];
            for (i, &(r1, s1)) in list.iter().enumerate() {
                for &(r2, s2) in &list[i + 1..] {
                    if (r1, s1) == (r2, s2) || !keep(r1, r2) {
                        continue;
                    }
                    let a = &rays[r1].segments[s1];
                    let b = &rays[r2].segments[s2];
                    if let Some(p) = intersect(a, b) {
                        if &p.max_norm() < radius {
                            out.insert(p);
                        }
                    }
                }
            }
        }
        out
    }
}

/// Intersection point of two non-parallel closed segments.
pub(crate) fn intersect(a: &Segment, b: &Segment) -> Option<RatPoint> {
    let u = a.end.sub(&a.start);
    let w = b.end.sub(&b.start);
    let den = u.cross(&w);
    if den.is_zero() {
        return None;
    }
    let ca = b.start.sub(&a.start);
    let t = ca.cross(&w) / &den;
    let s = ca.cross(&u) / &den;
    let unit = Rat::one();
    if t.is_negative() || t > unit || s.is_negative() || s > unit {
        return None;
    }
    Some(a.start.along(&u, &t))
}

/// Grid cells met by a segment.
fn cells_of(seg: &Segment) -> Vec<(i64, i64)> {
    let (p, q) = if seg.start.x <= seg.end.x { (&seg.start, &seg.end) } else { (&seg.end, &seg.start) };
    let x0 = floor_i64(&p.x);
    let x1 = floor_i64(&q.x);
    let mut out = Vec::new();
    let dx = &q.x - &p.x;
    let y_at = |x: &Rat| -> Rat {
        if dx.is_zero() {
            p.y.clone()
        } else {
            &p.y + (&q.y - &p.y) * (x - &p.x) / &dx
        }
    };
    for cx in x0..=x1 {
        let lo_x = Rat::from_integer(cx.into()).max(p.x.clone());
        let hi_x = Rat::from_integer((cx + 1).into()).min(q.x.clone());
        let (ya, yb) = if dx.is_zero() { (p.y.clone(), q.y.clone()) } else { (y_at(&lo_x), y_at(&hi_x)) };
        let (ylo, yhi) = if ya <= yb { (ya, yb) } else { (yb, ya) };
        for cy in floor_i64(&ylo)..=floor_i64(&yhi) {
            out.push((cx, cy));
        }
    }
    out
}
