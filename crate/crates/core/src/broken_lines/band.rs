//! Families of parallel broken-line pieces swept forward from infinity.
//!
//! A band is the set of lines `y + s w`, `s >= 0`, with `y` on a source
//! segment and `w = m` the travel direction of the attached class. Each
//! band is split into trapezoids bounded by the first obstacle (box edge or
//! cut) met by its lines. Walls crossing a trapezoid spawn bent bands, cuts
//! spawn landing bands on the glued side.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::affine::{AffineBase, CutSide, GluingMatrix, IntVec2, RatPoint, RatVec};
use crate::error::{Error, Result};
use crate::scalar::{int, Rat};
use crate::scattering::ScatteringDiagram;
use crate::series::{ClassExponent, FormalSeries};

/// An affine function `c0 + c1 x`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Aff {
    pub c0: Rat,
    pub c1: Rat,
}

impl Aff {
    fn new(c0: Rat, c1: Rat) -> Self {
        Aff { c0, c1 }
    }

    pub fn at(&self, x: &Rat) -> Rat {
        &self.c0 + &self.c1 * x
    }

    fn sub(&self, o: &Aff) -> Aff {
        Aff::new(&self.c0 - &o.c0, &self.c1 - &o.c1)
    }

    fn root(&self) -> Option<Rat> {
        (!self.c1.is_zero()).then(|| -&self.c0 / &self.c1)
    }

    fn is_zero(&self) -> bool {
        self.c0.is_zero() && self.c1.is_zero()
    }
}

/// What stops the lines of a trapezoid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Obstacle {
    Boundary,
    Cut { singularity: usize, side: CutSide },
}

/// The lines with source parameter in `[lo, hi]`, each running until `far`.
#[derive(Clone, Debug)]
pub struct Piece {
    pub lo: Rat,
    pub hi: Rat,
    pub far: Obstacle,
    /// Travel length to the obstacle as a function of the source parameter.
    pub(crate) reach: Aff,
    /// Whether the side lines at `lo` and `hi` are seams: lines through a
    /// singular point or cut off by the box, across which counts may jump.
    pub seams: (bool, bool),
    bbox: [f64; 4],
}

/// How a band came into being.
#[derive(Clone, Debug, PartialEq)]
pub enum BandOrigin {
    /// Lines entering from the boundary of the box.
    Entry,
    /// Lines leaving a bend on `rays` after picking the term `term` with
    /// coefficient `coeff`. With `jump` set, the bend lies on the plus cut of
    /// that singularity and the lines continue on the glued side.
    Bend { rays: Vec<usize>, term: ClassExponent, coeff: Rat, jump: Option<usize> },
    /// Lines continuing after hitting cut `side` of `singularity`.
    Landing { singularity: usize, side: CutSide },
}

#[derive(Clone, Debug)]
pub struct Band {
    pub parent: Option<usize>,
    pub origin: BandOrigin,
    pub source: (RatPoint, RatPoint),
    pub m: IntVec2,
    pub coeff: Rat,
    pub grade: u32,
    pub bends: u32,
    pub pieces: Vec<Piece>,
    /// Seam flags of the two source endpoints.
    pub seams: (bool, bool),
    hops: u32,
}

impl Band {
    pub fn travel(&self) -> RatVec {
        self.m.to_rat()
    }

    /// Source parameter and travel length of `p` in this band's frame.
    pub(crate) fn coords(&self, p: &RatPoint) -> (Rat, Rat) {
        let d = self.source.1.sub(&self.source.0);
        let w = self.travel();
        let v = p.sub(&self.source.0);
        let den = d.cross(&w);
        (v.cross(&w) / &den, d.cross(&v) / den)
    }

    pub(crate) fn source_point(&self, lambda: &Rat) -> RatPoint {
        let d = self.source.1.sub(&self.source.0);
        self.source.0.along(&d, lambda)
    }
}

/// All bands of total grade at most `order` for a diagram.
#[derive(Clone, Debug)]
pub struct BandFamily {
    pub order: u32,
    pub bands: Vec<Band>,
}

/// A direction `out` towards infinity; lines of class `-out` enter through
/// `source`.
#[derive(Clone, Debug)]
pub struct Asymptote {
    pub out: IntVec2,
    pub source: (RatPoint, RatPoint),
}

const MAX_HOPS: u32 = 64;
const MAX_BANDS: usize = 2_000_000;

/// Cache key for wall-function powers: the wall segments, the exponent and the grade budget.
type PowerKey = (Vec<(usize, usize)>, i64, u32);
/// A wall crossed inside a piece, with the parameter range of the crossing.
type WallHit = (usize, Rat, Rat);

#[derive(Clone, Debug)]
struct WallSeg {
    ray: usize,
    seg: usize,
    start: RatPoint,
    end: RatPoint,
    dir: IntVec2,
    line: (IntVec2, Rat),
    bbox: [f64; 4],
}

fn f(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn bbox(points: &[&RatPoint]) -> [f64; 4] {
    let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
    for p in points {
        let (x, y) = (f(&p.x), f(&p.y));
        b[0] = b[0].min(x);
        b[1] = b[1].min(y);
        b[2] = b[2].max(x);
        b[3] = b[3].max(y);
    }
    let eps = 1e-9 * (1.0 + b[2].abs().max(b[3].abs()));
    [b[0] - eps, b[1] - eps, b[2] + eps, b[3] + eps]
}

fn overlaps(a: &[f64; 4], b: &[f64; 4]) -> bool {
    a[0] <= b[2] && b[0] <= a[2] && a[1] <= b[3] && b[1] <= a[3]
}

/// Supporting line of a segment: a normalized primitive direction and the
/// offset `dir x p`.
fn line_key(p: &RatPoint, dir: IntVec2) -> (IntVec2, Rat) {
    let d = if dir.x < 0 || (dir.x == 0 && dir.y < 0) { -dir } else { dir };
    let off = d.to_rat().cross(&RatVec::new(p.x.clone(), p.y.clone()));
    (d, off)
}

/// Clips `t in [0, 1]` against the constraints `g(t) >= 0`.
fn clip(constraints: &[Aff]) -> Option<(Rat, Rat)> {
    let mut lo = Rat::zero();
    let mut hi = Rat::one();
    for g in constraints {
        if g.c1.is_zero() {
            if g.c0.is_negative() {
                return None;
            }
        } else {
            let r = -&g.c0 / &g.c1;
            if g.c1.is_positive() {
                if r > lo {
                    lo = r;
                }
            } else if r < hi {
                hi = r;
            }
        }
        if lo >= hi {
            return None;
        }
    }
    Some((lo, hi))
}

/// Clips the segment `a b` to the box `[-r, r]^2`.
fn clip_to_box(a: &RatPoint, b: &RatPoint, r: &Rat) -> Option<(RatPoint, RatPoint)> {
    let v = b.sub(a);
    let cons = [
        Aff::new(r - &a.x, -v.x.clone()),
        Aff::new(r + &a.x, v.x.clone()),
        Aff::new(r - &a.y, -v.y.clone()),
        Aff::new(r + &a.y, v.y.clone()),
    ];
    let (t0, t1) = clip(&cons)?;
    Some((a.along(&v, &t0), a.along(&v, &t1)))
}

fn glue(base: &AffineBase, sing: usize, m: &GluingMatrix, p: &RatPoint) -> RatPoint {
    let c = &base.singularities[sing].position;
    c.offset(&m.apply_rat(&p.sub(c)))
}

/// The default incoming monomials: for each region, the box edges facing its
/// outgoing direction, clipped to the closure of the region. Without region
/// data, the distinct directions of the initial rays over whole box edges.
pub fn default_asymptotes(d: &ScatteringDiagram) -> Vec<Asymptote> {
    let r = &d.radius;
    let corners = [
        RatPoint::new(r.clone(), -r),
        RatPoint::new(r.clone(), r.clone()),
        RatPoint::new(-r, r.clone()),
        RatPoint::new(-r, -r),
    ];
    let normals = [IntVec2::new(1, 0), IntVec2::new(0, 1), IntVec2::new(-1, 0), IntVec2::new(0, -1)];
    let edges: Vec<(IntVec2, RatPoint, RatPoint)> =
        (0..4).map(|i| (normals[i], corners[i].clone(), corners[(i + 1) % 4].clone())).collect();
    let mut out = Vec::new();
    if d.base.regions.is_empty() {
        let mut dirs: Vec<IntVec2> = Vec::new();
        for ray in d.rays.iter().filter(|r| matches!(r.provenance, crate::scattering::Provenance::Initial { .. })) {
            if !dirs.contains(&ray.dir) {
                dirs.push(ray.dir);
            }
        }
        for m in dirs {
            for (n, a, b) in &edges {
                if n.dot(m) > 0 {
                    out.push(Asymptote { out: m, source: (a.clone(), b.clone()) });
                }
            }
        }
        return out;
    }
    for region in &d.base.regions {
        for (n, a, b) in &edges {
            if n.dot(region.m_out) <= 0 {
                continue;
            }
            let v = b.sub(a);
            let cons: Vec<Aff> = region
                .constraints
                .iter()
                .map(|h| {
                    let nv = h.normal.to_rat();
                    Aff::new(nv.dot(&RatVec::new(a.x.clone(), a.y.clone())) - &h.offset, nv.dot(&v))
                })
                .collect();
            if let Some((t0, t1)) = clip(&cons) {
                out.push(Asymptote { out: region.m_out, source: (a.along(&v, &t0), a.along(&v, &t1)) });
            }
        }
    }
    out
}

impl BandFamily {
    /// Sweeps all bands of grade at most `order` from the default asymptotes.
    pub fn build(d: &ScatteringDiagram, order: u32) -> Result<BandFamily> {
        Self::build_from(d, order, &default_asymptotes(d))
    }

    pub fn build_from(d: &ScatteringDiagram, order: u32, asymptotes: &[Asymptote]) -> Result<BandFamily> {
        if order > d.order {
            return Err(Error::Malformed(format!(
                "broken lines of order {order} need a diagram of order {order}, have {}",
                d.order
            )));
        }
        let mut b = Builder::new(d, order);
        for a in asymptotes {
            b.push(Band {
                parent: None,
                origin: BandOrigin::Entry,
                source: a.source.clone(),
                m: -a.out,
                coeff: Rat::one(),
                grade: 0,
                bends: 0,
                pieces: Vec::new(),
                seams: (true, true),
                hops: 0,
            });
        }
        let mut i = 0;
        while i < b.bands.len() {
            b.expand(i)?;
            i += 1;
        }
        Ok(BandFamily { order, bands: b.bands })
    }

    /// Pieces containing `p + e (1, d)` for infinitesimals `0 < d << e`, so
    /// that a point on a side shared by two pieces lands in exactly one.
    pub(crate) fn containing(&self, p: &RatPoint) -> Vec<(usize, usize)> {
        let (px, py) = (f(&p.x), f(&p.y));
        let mut out = Vec::new();
        for (bi, band) in self.bands.iter().enumerate() {
            for (pi, piece) in band.pieces.iter().enumerate() {
                let bb = &piece.bbox;
                if px < bb[0] || px > bb[2] || py < bb[1] || py > bb[3] {
                    continue;
                }
                if inside(band, piece, p) {
                    out.push((bi, pi));
                }
            }
        }
        out
    }
}

impl BandFamily {
    /// True when the segment `a b` meets a seam side of some piece.
    pub(crate) fn crosses_seam(&self, a: &RatPoint, b: &RatPoint) -> bool {
        let sb = bbox(&[a, b]);
        for band in &self.bands {
            let w = band.travel();
            for piece in band.pieces.iter().filter(|p| overlaps(&p.bbox, &sb)) {
                for (lam, seam) in [(&piece.lo, piece.seams.0), (&piece.hi, piece.seams.1)] {
                    if !seam {
                        continue;
                    }
                    let y = band.source_point(lam);
                    let z = y.along(&w, &piece.reach.at(lam));
                    if segments_meet(a, b, &y, &z) {
                        return true;
                    }
                }
            }
        }
        false
    }
}

/// Closed segments `a b` and `c d` share a point.
fn segments_meet(a: &RatPoint, b: &RatPoint, c: &RatPoint, d: &RatPoint) -> bool {
    let side = |p: &RatPoint, q: &RatPoint, r: &RatPoint| q.sub(p).cross(&r.sub(p));
    let (d1, d2) = (side(a, b, c), side(a, b, d));
    let (d3, d4) = (side(c, d, a), side(c, d, b));
    let opposite = |x: &Rat, y: &Rat| !(x.is_positive() && y.is_positive()) && !(x.is_negative() && y.is_negative());
    if d1.is_zero() && d2.is_zero() {
        let within = |p: &RatPoint| {
            let (lo, hi) = (a.sub(p), b.sub(p));
            !lo.dot(&hi).is_positive()
        };
        return within(c) || within(d) || {
            let (u, v) = (c.sub(a), d.sub(a));
            !u.dot(&v).is_positive()
        };
    }
    opposite(&d1, &d2) && opposite(&d3, &d4)
}

/// Whether `p + e (1, d)` lies in the piece, for infinitesimals
/// `0 < d << e`.
pub(crate) fn inside(band: &Band, piece: &Piece, p: &RatPoint) -> bool {
    let (l, s) = band.coords(p);
    let o = &band.source.0;
    let (a0, b0) = band.coords(o);
    let rate = |v: RatVec| {
        let (a, b) = band.coords(&o.offset(&v));
        (a - &a0, b - &b0)
    };
    let (lx, sx) = rate(RatVec::new(Rat::one(), Rat::zero()));
    let (ly, sy) = rate(RatVec::new(Rat::zero(), Rat::one()));
    let c1 = &piece.reach.c1;
    let sides = [
        (&l - &piece.lo, lx.clone(), ly.clone()),
        (&piece.hi - &l, -&lx, -&ly),
        (s.clone(), sx.clone(), sy.clone()),
        (piece.reach.at(&l) - &s, c1 * &lx - &sx, c1 * &ly - &sy),
    ];
    sides
        .iter()
        .all(|(g, gx, gy)| g.is_positive() || (g.is_zero() && (gx.is_positive() || (gx.is_zero() && gy.is_positive()))))
}

struct Builder<'a> {
    d: &'a ScatteringDiagram,
    order: u32,
    walls: Vec<WallSeg>,
    bands: Vec<Band>,
    powers: HashMap<PowerKey, FormalSeries<Rat>>,
}

/// A candidate obstacle: travel length and, for cuts, position along the cut.
struct Candidate {
    kind: Obstacle,
    s: Aff,
    r: Option<Aff>,
}

impl<'a> Builder<'a> {
    fn new(d: &'a ScatteringDiagram, order: u32) -> Self {
        let mut walls = Vec::new();
        for (ri, ray) in d.rays.iter().enumerate() {
            if ray.min_grade().is_none_or(|g| g > order) {
                continue;
            }
            for (si, s) in ray.segments.iter().enumerate() {
                if s.start == s.end {
                    continue;
                }
                walls.push(WallSeg {
                    ray: ri,
                    seg: si,
                    start: s.start.clone(),
                    end: s.end.clone(),
                    dir: s.dir,
                    line: line_key(&s.start, s.dir),
                    bbox: bbox(&[&s.start, &s.end]),
                });
            }
        }
        Builder { d, order, walls, bands: Vec::new(), powers: HashMap::new() }
    }

    fn push(&mut self, b: Band) {
        self.bands.push(b);
    }

    fn candidates(&self, band: &Band) -> Vec<Candidate> {
        let p = &band.source.0;
        let dv = band.source.1.sub(p);
        let w = band.travel();
        let r = &self.d.radius;
        let mut out = Vec::new();
        for (wc, pc, dc) in [(&w.x, &p.x, &dv.x), (&w.y, &p.y, &dv.y)] {
            if wc.is_zero() {
                continue;
            }
            let wall = if wc.is_positive() { r.clone() } else { -r };
            out.push(Candidate { kind: Obstacle::Boundary, s: Aff::new((wall - pc) / wc, -dc / wc), r: None });
        }
        for (i, sing) in self.d.base.singularities.iter().enumerate() {
            for side in [CutSide::Plus, CutSide::Minus] {
                let cut = sing.cut(side);
                let e = cut.direction.to_rat();
                let den = w.cross(&e);
                let op = cut.origin.sub(p);
                if den.is_zero() {
                    // Parallel lines: only the line along the cut matters.
                    out.push(Candidate {
                        kind: Obstacle::Cut { singularity: i, side },
                        s: Aff::new(int(-1), Rat::zero()),
                        r: Some(Aff::new(op.cross(&e), -dv.cross(&e))),
                    });
                    continue;
                }
                out.push(Candidate {
                    kind: Obstacle::Cut { singularity: i, side },
                    s: Aff::new(op.cross(&e) / &den, -dv.cross(&e) / &den),
                    r: Some(Aff::new(op.cross(&w) / &den, -dv.cross(&w) / &den)),
                });
            }
        }
        out
    }

    /// Splits a band into trapezoids with a single first obstacle each.
    fn pieces(&self, band: &Band) -> Vec<Piece> {
        let cands = self.candidates(band);
        let mut breaks = vec![Rat::zero(), Rat::one()];
        let mut add = |x: Option<Rat>| {
            if let Some(x) = x {
                if x.is_positive() && x < Rat::one() {
                    breaks.push(x);
                }
            }
        };
        for (i, c) in cands.iter().enumerate() {
            if let Some(r) = &c.r {
                add(r.root());
            }
            add(c.s.root());
            for c2 in &cands[..i] {
                add(c.s.sub(&c2.s).root());
            }
        }
        breaks.sort();
        breaks.dedup();
        let w = band.travel();
        let mut out: Vec<Piece> = Vec::new();
        for pair in breaks.windows(2) {
            let (lo, hi) = (&pair[0], &pair[1]);
            let mid = (lo + hi) / int(2);
            let mut best: Option<(&Candidate, Rat)> = None;
            for c in &cands {
                let s = c.s.at(&mid);
                if !s.is_positive() {
                    continue;
                }
                if let Some(r) = &c.r {
                    if !r.at(&mid).is_positive() {
                        continue;
                    }
                }
                if best.as_ref().is_none_or(|(_, b)| s < *b) {
                    best = Some((c, s));
                }
            }
            let Some((c, _)) = best else { continue };
            if let Some(last) = out.last_mut() {
                if last.far == c.kind && last.reach == c.s && &last.hi == lo {
                    last.hi = hi.clone();
                    continue;
                }
            }
            out.push(Piece {
                lo: lo.clone(),
                hi: hi.clone(),
                far: c.kind,
                reach: c.s.clone(),
                seams: (true, true),
                bbox: [0.0; 4],
            });
        }
        for piece in &mut out {
            let a = band.source_point(&piece.lo);
            let b = band.source_point(&piece.hi);
            let a2 = a.along(&w, &piece.reach.at(&piece.lo));
            let b2 = b.along(&w, &piece.reach.at(&piece.hi));
            piece.bbox = bbox(&[&a, &b, &a2, &b2]);
            piece.seams = (
                if piece.lo.is_zero() { band.seams.0 } else { true },
                if piece.hi.is_one() { band.seams.1 } else { true },
            );
        }
        out
    }

    fn expand(&mut self, bi: usize) -> Result<()> {
        let band = self.bands[bi].clone();
        if band.source.0 == band.source.1 || band.source.1.sub(&band.source.0).cross(&band.travel()).is_zero() {
            return Ok(());
        }
        let pieces = self.pieces(&band);
        self.bands[bi].pieces = pieces.clone();
        for piece in &pieces {
            if band.grade < self.order {
                self.bend(bi, &band, piece)?;
            }
            if let Obstacle::Cut { singularity, side } = piece.far {
                self.land(bi, &band, piece, singularity, side);
            }
        }
        if self.bands.len() > MAX_BANDS {
            return Err(Error::RadiusExceeded(format!("more than {MAX_BANDS} broken-line bands")));
        }
        Ok(())
    }

    fn land(&mut self, bi: usize, band: &Band, piece: &Piece, sing: usize, side: CutSide) {
        if band.hops >= MAX_HOPS {
            return;
        }
        let w = band.travel();
        let a = band.source_point(&piece.lo).along(&w, &piece.reach.at(&piece.lo));
        let b = band.source_point(&piece.hi).along(&w, &piece.reach.at(&piece.hi));
        let m = self.d.base.singularities[sing].jump(side);
        let (a, b) = (glue(&self.d.base, sing, &m, &a), glue(&self.d.base, sing, &m, &b));
        let Some(source) = clip_to_box(&a, &b, &self.d.radius) else { return };
        if source.0 == source.1 {
            return;
        }
        let seams = (piece.seams.0 || source.0 != a, piece.seams.1 || source.1 != b);
        self.push(Band {
            parent: Some(bi),
            origin: BandOrigin::Landing { singularity: sing, side },
            source,
            m: m.apply(band.m),
            coeff: band.coeff.clone(),
            grade: band.grade,
            bends: band.bends,
            pieces: Vec::new(),
            seams,
            hops: band.hops + 1,
        });
    }

    /// Spawns the bent bands of every wall crossing inside `piece`.
    fn bend(&mut self, bi: usize, band: &Band, piece: &Piece) -> Result<()> {
        let mut groups: BTreeMap<(IntVec2, Rat), Vec<WallHit>> = BTreeMap::new();
        let seam_far = matches!(piece.far, Obstacle::Cut { side: CutSide::Plus, .. });
        let seam_source = matches!(band.origin, BandOrigin::Landing { side: CutSide::Minus, .. });
        for (wi, wall) in self.walls.iter().enumerate() {
            if !overlaps(&wall.bbox, &piece.bbox) || band.m.pairing(wall.dir) == 0 {
                continue;
            }
            let (l0, s0) = band.coords(&wall.start);
            let (l1, s1) = band.coords(&wall.end);
            let lam = Aff::new(l0.clone(), &l1 - &l0);
            let s = Aff::new(s0.clone(), &s1 - &s0);
            let reach = Aff::new(piece.reach.at(&l0), piece.reach.at(&l1) - piece.reach.at(&l0));
            let gap = reach.sub(&s);
            if s.is_zero() && !seam_source {
                continue;
            }
            if gap.is_zero() && !seam_far {
                continue;
            }
            let cons = [Aff::new(&l0 - &piece.lo, lam.c1.clone()), Aff::new(&piece.hi - &l0, -lam.c1.clone()), s, gap];
            let Some((t0, t1)) = clip(&cons) else { continue };
            groups.entry(wall.line.clone()).or_default().push((wi, t0, t1));
        }
        for (key, hits) in groups {
            self.bend_group(bi, band, piece, key.0, hits)?;
        }
        Ok(())
    }

    fn bend_group(
        &mut self,
        bi: usize,
        band: &Band,
        piece: &Piece,
        dir: IntVec2,
        hits: Vec<(usize, Rat, Rat)>,
    ) -> Result<()> {
        // Parametrize the common line by `dir . p` to merge overlapping walls.
        let dr = dir.to_rat();
        let pos = |p: &RatPoint| dr.dot(&RatVec::new(p.x.clone(), p.y.clone()));
        let mut spans = Vec::new();
        for (wi, t0, t1) in &hits {
            let wall = &self.walls[*wi];
            let v = wall.end.sub(&wall.start);
            let (p0, p1) = (wall.start.along(&v, t0), wall.start.along(&v, t1));
            let (u0, u1) = (pos(&p0), pos(&p1));
            let (u0, u1, p0, p1) = if u0 <= u1 { (u0, u1, p0, p1) } else { (u1, u0, p1, p0) };
            spans.push((*wi, u0, u1, p0, p1));
        }
        let mut cuts: Vec<Rat> = spans.iter().flat_map(|s| [s.1.clone(), s.2.clone()]).collect();
        cuts.sort();
        cuts.dedup();
        let on_far = spans.iter().all(|sp| {
            [&sp.3, &sp.4].iter().all(|p| {
                let (l, s) = band.coords(p);
                s == piece.reach.at(&l) && !s.is_zero()
            })
        });
        let jump = match (on_far, piece.far) {
            (true, Obstacle::Cut { singularity, side: CutSide::Plus }) => Some(singularity),
            _ => None,
        };
        let budget = self.order - band.grade;
        for pair in cuts.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            let cover: Vec<&(usize, Rat, Rat, RatPoint, RatPoint)> =
                spans.iter().filter(|s| &s.1 <= a && b <= &s.2).collect();
            if cover.is_empty() {
                continue;
            }
            let base = cover[0];
            let v = base.4.sub(&base.3);
            let span = &base.2 - &base.1;
            let ja = base.3.along(&v, &((a - &base.1) / &span));
            let jb = base.3.along(&v, &((b - &base.1) / &span));
            let mut refs: Vec<(usize, usize)> =
                cover.iter().map(|c| (self.walls[c.0].ray, self.walls[c.0].seg)).collect();
            refs.sort();
            let k = band.m.pairing(dir).abs();
            let series = self.power(&refs, k, budget)?;
            let rays: Vec<usize> = refs.iter().map(|r| r.0).collect();
            let seams = (self.seam_at(band, piece, &ja), self.seam_at(band, piece, &jb));
            for (e, c) in series.terms() {
                if e.a == 0 || e.a > budget {
                    continue;
                }
                let mut m = band.m + e.m;
                if m.is_zero() {
                    continue;
                }
                let mut source = (ja.clone(), jb.clone());
                if let Some(s) = jump {
                    let g = self.d.base.singularities[s].jump(CutSide::Plus);
                    source = (glue(&self.d.base, s, &g, &ja), glue(&self.d.base, s, &g, &jb));
                    m = g.apply(m);
                }
                self.push(Band {
                    parent: Some(bi),
                    origin: BandOrigin::Bend { rays: rays.clone(), term: *e, coeff: c.clone(), jump },
                    source,
                    m,
                    coeff: &band.coeff * c,
                    grade: band.grade + e.a,
                    bends: band.bends + 1,
                    pieces: Vec::new(),
                    seams,
                    hops: band.hops,
                });
            }
        }
        Ok(())
    }

    /// Whether the lines leaving a bend at `x` border a seam.
    fn seam_at(&self, band: &Band, piece: &Piece, x: &RatPoint) -> bool {
        if self.d.base.singularity_at(x).is_some() || x.max_norm() >= self.d.radius {
            return true;
        }
        let (l, _) = band.coords(x);
        (l == piece.lo && piece.seams.0) || (l == piece.hi && piece.seams.1)
    }

    /// `prod f_i^k` over the walls `refs`, truncated at `budget`.
    fn power(&mut self, refs: &[(usize, usize)], k: i64, budget: u32) -> Result<FormalSeries<Rat>> {
        let key = (refs.to_vec(), k, budget);
        if let Some(s) = self.powers.get(&key) {
            return Ok(s.clone());
        }
        let mut acc = FormalSeries::one(budget);
        for &(r, s) in refs {
            let ray = &self.d.rays[r];
            let wall = ray.wall_on(&ray.segments[s], budget);
            acc = acc.mul(&wall.series().truncate(budget).pow(k)?);
        }
        self.powers.insert(key, acc.clone());
        Ok(acc)
    }
}
