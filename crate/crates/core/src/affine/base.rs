//! Integral affine bases with focus-focus singularities and radial cuts.

use serde::{Deserialize, Serialize};

use num_traits::{Signed, Zero};

use super::lattice::{GluingMatrix, IntVec2, RatPoint, RatVec};
use crate::error::{Error, Result};
use crate::scalar::{int, rat, serde_rat, Rat};

/// Which of the two cut rays of a singularity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutSide {
    Plus,
    Minus,
}

/// The ray `origin + s direction`, `s >= 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutRay {
    pub origin: RatPoint,
    pub direction: IntVec2,
}

impl CutRay {
    pub fn contains(&self, q: &RatPoint) -> bool {
        let w = q.sub(&self.origin);
        let d = self.direction.to_rat();
        w.cross(&d).is_zero() && !w.dot(&d).is_negative()
    }
}

/// A focus-focus singularity. The open sector swept counterclockwise from
/// `cut_minus` to `cut_plus` is discarded; crossing `cut_plus` applies
/// `matrix`, crossing `cut_minus` applies its inverse.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Singularity {
    pub position: RatPoint,
    pub cut_plus: CutRay,
    pub cut_minus: CutRay,
    pub matrix: GluingMatrix,
    pub invariant_dir: IntVec2,
}

impl Singularity {
    /// The gluing matrix applied when a path hits the given cut.
    pub fn jump(&self, side: CutSide) -> GluingMatrix {
        match side {
            CutSide::Plus => self.matrix,
            CutSide::Minus => self.matrix.inverse(),
        }
    }

    pub fn cut(&self, side: CutSide) -> &CutRay {
        match side {
            CutSide::Plus => &self.cut_plus,
            CutSide::Minus => &self.cut_minus,
        }
    }

    /// True when the direction `v` based at the singular point points strictly
    /// into the discarded sector.
    pub fn direction_discarded(&self, v: &RatVec) -> bool {
        strictly_between(&self.cut_minus.direction.to_rat(), &self.cut_plus.direction.to_rat(), v)
    }

    /// True when `q` lies in the open discarded sector.
    pub fn discards(&self, q: &RatPoint) -> bool {
        let v = q.sub(&self.position);
        !v.is_zero() && self.direction_discarded(&v)
    }
}

/// True when `v` lies strictly inside the sector swept counterclockwise from
/// `a` to `b`.
pub fn strictly_between(a: &RatVec, b: &RatVec, v: &RatVec) -> bool {
    let ab = a.cross(b);
    let av = a.cross(v);
    let vb = v.cross(b);
    if ab.is_positive() {
        av.is_positive() && vb.is_positive()
    } else if ab.is_negative() {
        !(!b.cross(v).is_negative() && !v.cross(a).is_negative())
    } else if a.dot(b).is_negative() {
        av.is_positive()
    } else {
        !(av.is_zero() && a.dot(v).is_positive())
    }
}

/// The three chambers at infinity of the CPS base.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RegionKind {
    #[serde(rename = "x")]
    X,
    #[serde(rename = "y")]
    Y,
    #[serde(rename = "xy_inv")]
    XYInv,
}

/// The strict inequality `normal . p > offset`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfPlane {
    pub normal: IntVec2,
    #[serde(with = "serde_rat")]
    pub offset: Rat,
}

impl HalfPlane {
    fn value(&self, p: &RatPoint) -> Rat {
        &p.x * int(self.normal.x) + &p.y * int(self.normal.y) - &self.offset
    }
}

/// A convex region bounded by half-planes, with the covector measuring scale
/// and the invariant direction towards infinity inside it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub kind: RegionKind,
    pub constraints: Vec<HalfPlane>,
    pub scale_covector: IntVec2,
    pub m_out: IntVec2,
}

/// Result of locating a point among the regions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionLabel {
    In(RegionKind),
    OnBoundary,
}

/// A base with finitely many singularities, their cuts and optional region
/// metadata for the chambers at infinity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineBase {
    pub name: String,
    pub center: RatPoint,
    pub singularities: Vec<Singularity>,
    #[serde(default)]
    pub regions: Vec<Region>,
}

impl AffineBase {
    /// The base of the projective plane with singularities at `(1/2,1/2)`,
    /// `(0,-1/2)` and `(-1/2,0)`.
    pub fn cps_p2() -> AffineBase {
        let p = |x: Rat, y: Rat| RatPoint::new(x, y);
        let h = rat(1, 2);
        let u1 = p(h.clone(), h.clone());
        let u2 = p(int(0), -h.clone());
        let u3 = p(-h.clone(), int(0));
        let sing =
            |pos: &RatPoint, plus: (i64, i64), minus: (i64, i64), m: GluingMatrix, inv: (i64, i64)| Singularity {
                position: pos.clone(),
                cut_plus: CutRay { origin: pos.clone(), direction: IntVec2::new(plus.0, plus.1) },
                cut_minus: CutRay { origin: pos.clone(), direction: IntVec2::new(minus.0, minus.1) },
                matrix: m,
                invariant_dir: IntVec2::new(inv.0, inv.1),
            };
        let hp = |nx: i64, ny: i64, c: Rat| HalfPlane { normal: IntVec2::new(nx, ny), offset: c };
        AffineBase {
            name: "cps-p2".into(),
            center: RatPoint::origin(),
            singularities: vec![
                sing(&u1, (0, 1), (1, 0), GluingMatrix::new(2, 1, -1, 0), (1, -1)),
                sing(&u2, (1, 0), (-1, -1), GluingMatrix::new(-1, 4, -1, 3), (2, 1)),
                sing(&u3, (-1, -1), (0, 1), GluingMatrix::new(-1, 1, -4, 3), (1, 2)),
            ],
            regions: vec![
                Region {
                    kind: RegionKind::X,
                    constraints: vec![hp(0, -1, -h.clone()), hp(0, 1, -h.clone()), hp(1, -1, int(0)), hp(1, 0, int(0))],
                    scale_covector: IntVec2::new(1, 0),
                    m_out: IntVec2::new(1, 0),
                },
                Region {
                    kind: RegionKind::Y,
                    constraints: vec![hp(-1, 0, -h.clone()), hp(1, 0, -h.clone()), hp(-1, 1, int(0)), hp(0, 1, int(0))],
                    scale_covector: IntVec2::new(0, 1),
                    m_out: IntVec2::new(0, 1),
                },
                Region {
                    kind: RegionKind::XYInv,
                    constraints: vec![hp(-1, 0, int(0)), hp(0, -1, int(0)), hp(-1, 1, -h.clone()), hp(1, -1, -h)],
                    scale_covector: IntVec2::new(-1, -1),
                    m_out: IntVec2::new(-1, -1),
                },
            ],
        }
    }

    /// A base without singularities.
    pub fn flat(name: &str) -> AffineBase {
        AffineBase { name: name.into(), center: RatPoint::origin(), singularities: Vec::new(), regions: Vec::new() }
    }

    /// Checks the structural invariants of every singularity.
    pub fn validate(&self) -> Result<()> {
        for (i, s) in self.singularities.iter().enumerate() {
            let bad = |msg: &str| Err(Error::InvalidBase(format!("singularity {i}: {msg}")));
            if s.matrix.det() != 1 {
                return bad("gluing matrix must have determinant 1");
            }
            if s.cut_plus.origin != s.position || s.cut_minus.origin != s.position {
                return bad("cuts must start at the singular point");
            }
            if s.cut_plus.direction.is_zero() || s.cut_minus.direction.is_zero() {
                return bad("cut directions must be nonzero");
            }
            if s.invariant_dir.is_zero() || s.matrix.apply(s.invariant_dir) != s.invariant_dir {
                return bad("invariant direction is not fixed by the gluing matrix");
            }
            if !s.matrix.apply(s.cut_plus.direction).positively_parallel(s.cut_minus.direction) {
                return bad("gluing matrix must map the plus cut onto the minus cut");
            }
        }
        Ok(())
    }

    /// Index of a singularity whose discarded sector contains `q`.
    pub fn discarding_singularity(&self, q: &RatPoint) -> Option<usize> {
        self.singularities.iter().position(|s| s.discards(q))
    }

    /// The cut containing `q`, if any. The singular point itself is reported
    /// on its plus cut.
    pub fn cut_at(&self, q: &RatPoint) -> Option<(usize, CutSide)> {
        for (i, s) in self.singularities.iter().enumerate() {
            if s.cut_plus.contains(q) {
                return Some((i, CutSide::Plus));
            }
            if s.cut_minus.contains(q) {
                return Some((i, CutSide::Minus));
            }
        }
        None
    }

    /// For a non-singular point on a cut, the glued point on the partner cut
    /// and the matrix taking tangent vectors there back to the chart at `q`.
    pub fn partner(&self, q: &RatPoint) -> Option<(RatPoint, GluingMatrix)> {
        if self.singularity_at(q).is_some() {
            return None;
        }
        let (i, side) = self.cut_at(q)?;
        let s = &self.singularities[i];
        let m = s.jump(side);
        let image = s.position.offset(&m.apply_rat(&q.sub(&s.position)));
        Some((image, m.inverse()))
    }

    /// The representative of `q` used for bookkeeping: points on a minus cut
    /// are replaced by their partner on the plus cut.
    pub fn canonical(&self, q: &RatPoint) -> RatPoint {
        match self.cut_at(q) {
            Some((_, CutSide::Minus)) if self.singularity_at(q).is_none() => {
                self.partner(q).map(|(p, _)| p).unwrap_or_else(|| q.clone())
            }
            _ => q.clone(),
        }
    }

    pub fn singularity_at(&self, q: &RatPoint) -> Option<usize> {
        self.singularities.iter().position(|s| &s.position == q)
    }

    /// Applies the gluing of singularity `sing` for a crossing of `side` to
    /// the tangent vector `v`.
    pub fn cross_cut(&self, sing: usize, side: CutSide, v: IntVec2) -> IntVec2 {
        self.singularities[sing].jump(side).apply(v)
    }

    pub fn region(&self, kind: RegionKind) -> Option<&Region> {
        self.regions.iter().find(|r| r.kind == kind)
    }

    /// Locates `p` among the regions.
    pub fn region_of(&self, p: &RatPoint) -> Result<RegionLabel> {
        if self.discarding_singularity(p).is_some() {
            return Err(Error::InDiscardedSector(Box::new(p.clone())));
        }
        let mut on_closure = false;
        for r in &self.regions {
            let values: Vec<Rat> = r.constraints.iter().map(|h| h.value(p)).collect();
            if values.iter().all(|v| v.is_positive()) {
                return Ok(RegionLabel::In(r.kind));
            }
            if values.iter().all(|v| !v.is_negative()) {
                on_closure = true;
            }
        }
        if on_closure {
            Ok(RegionLabel::OnBoundary)
        } else {
            Err(Error::OnBoundary(Box::new(p.clone())))
        }
    }

    /// Scale of the tangent vector `v` measured in region `kind`.
    pub fn scale(&self, kind: RegionKind, v: IntVec2) -> Option<i64> {
        self.region(kind).map(|r| r.scale_covector.dot(v))
    }

    /// The base obtained by applying the linear map `g` to every chart.
    pub fn conjugated(&self, g: GluingMatrix) -> AffineBase {
        let gi = g.inverse();
        let pt = |p: &RatPoint| {
            let v = g.apply_rat(&RatVec::new(p.x.clone(), p.y.clone()));
            RatPoint::new(v.x, v.y)
        };
        let cut = |c: &CutRay| CutRay { origin: pt(&c.origin), direction: g.apply(c.direction) };
        AffineBase {
            name: format!("{}-conjugated", self.name),
            center: pt(&self.center),
            singularities: self
                .singularities
                .iter()
                .map(|s| Singularity {
                    position: pt(&s.position),
                    cut_plus: cut(&s.cut_plus),
                    cut_minus: cut(&s.cut_minus),
                    matrix: g * s.matrix * gi,
                    invariant_dir: g.apply(s.invariant_dir),
                })
                .collect(),
            regions: self
                .regions
                .iter()
                .map(|r| Region {
                    kind: r.kind,
                    constraints: r
                        .constraints
                        .iter()
                        .map(|h| HalfPlane { normal: g.apply_covector(h.normal), offset: h.offset.clone() })
                        .collect(),
                    scale_covector: g.apply_covector(r.scale_covector),
                    m_out: g.apply(r.m_out),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("base serializes")
    }

    pub fn from_json(s: &str) -> Result<AffineBase> {
        let base: AffineBase = serde_json::from_str(s).map_err(|e| Error::Malformed(e.to_string()))?;
        base.validate()?;
        Ok(base)
    }
}
