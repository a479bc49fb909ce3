//! Broken lines, the tropical superpotential and its wall-crossing
//! covariance.

mod band;
mod check;

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Serialize;

use crate::affine::{IntVec2, RatPoint};
use crate::error::{Error, Result};
use crate::scalar::{fmt_rat, rat, serde_rat, Rat};
use crate::scattering::ScatteringDiagram;
use crate::series::{ClassExponent, FormalSeries};

pub use band::{default_asymptotes, Asymptote, Band, BandFamily, BandOrigin, Obstacle, Piece};
pub use check::{wallcross_check, wallcross_samples, WallPair};

/// A straight piece of a broken line with its attached exponent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BrokenSegment {
    pub start: RatPoint,
    pub end: RatPoint,
    pub m: IntVec2,
}

/// A bend: the rays crossed and the chosen wall-function term.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BendRecord {
    pub point: RatPoint,
    pub rays: Vec<usize>,
    pub term: ClassExponent,
    #[serde(with = "serde_rat")]
    pub coeff: Rat,
}

/// A broken line from infinity to `endpoint`, segments in travel order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BrokenLine {
    pub endpoint: RatPoint,
    pub segments: Vec<BrokenSegment>,
    pub bends: Vec<BendRecord>,
    /// Final exponent and total grade.
    pub class: ClassExponent,
    #[serde(with = "serde_rat")]
    pub weight: Rat,
}

impl BrokenLine {
    pub fn initial(&self) -> IntVec2 {
        self.segments[0].m
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }
}

/// `W(u) = sum n(beta; u) z^beta t^grade` truncated at `order`.
#[derive(Clone, Debug, PartialEq)]
pub struct Superpotential {
    pub point: RatPoint,
    pub order: u32,
    pub series: FormalSeries<Rat>,
}

impl Superpotential {
    pub fn coeff(&self, m: IntVec2, a: u32) -> Rat {
        self.series.coeff(&ClassExponent::new(m, a)).cloned().unwrap_or_else(Rat::zero)
    }

    /// Grade-0 part as a class map.
    pub fn leading(&self) -> BTreeMap<IntVec2, Rat> {
        self.series.terms().filter(|(e, _)| e.a == 0).map(|(e, c)| (e.m, c.clone())).collect()
    }

    /// The series with every class negated: exponents become the boundary
    /// directions pointing to infinity, so the three lines at the origin of
    /// the projective plane read `x + y + 1/xy`.
    pub fn outward(&self) -> FormalSeries<Rat> {
        self.series.map_classes(|m| m.scale(-1))
    }

    /// JSON object mapping `"m_x,m_y;grade"` to `"p/q"`.
    pub fn to_json(&self) -> String {
        let terms: BTreeMap<String, String> =
            self.series.terms().map(|(e, c)| (format!("{},{};{}", e.m.x, e.m.y, e.a), fmt_rat(c))).collect();
        serde_json::json!({
            "point": [fmt_rat(&self.point.x), fmt_rat(&self.point.y)],
            "order": self.order,
            "terms": terms,
        })
        .to_string()
    }
}

/// A nearby point off every wall, used as the suggested replacement for a
/// non-generic endpoint.
pub fn nudge(u: &RatPoint) -> RatPoint {
    RatPoint::new(&u.x + rat(1, 1009), &u.y + rat(1, 1013))
}

impl BandFamily {
    fn check_endpoint(&self, d: &ScatteringDiagram, u: &RatPoint) -> Result<()> {
        if u.max_norm() >= d.radius {
            return Err(Error::RadiusExceeded(format!(
                "endpoint {u} lies outside the box of radius {}",
                fmt_rat(&d.radius)
            )));
        }
        if d.base.discarding_singularity(u).is_some() {
            return Err(Error::InDiscardedSector(Box::new(u.clone())));
        }
        if d.base.cut_at(u).is_some() {
            return Err(Error::PointOnCut(Box::new(u.clone())));
        }
        if d.rays.iter().any(|r| r.segments.iter().any(|s| s.contains(u))) {
            return Err(Error::NonGenericEndpoint { point: Box::new(u.clone()), suggestion: Box::new(nudge(u)) });
        }
        Ok(())
    }

    /// All broken lines ending at `u`.
    pub fn lines_at(&self, d: &ScatteringDiagram, u: &RatPoint) -> Result<Vec<BrokenLine>> {
        self.check_endpoint(d, u)?;
        let hits = self.containing(u);
        let mut out: Vec<BrokenLine> = hits.into_iter().map(|(b, _)| self.trace_back(d, b, u)).collect();
        out.sort_by(|a, b| a.class.cmp(&b.class).then_with(|| a.segments.len().cmp(&b.segments.len())));
        Ok(out)
    }

    /// Follows parents from band `b` at `u` back to infinity.
    fn trace_back(&self, d: &ScatteringDiagram, b: usize, u: &RatPoint) -> BrokenLine {
        let last = &self.bands[b];
        let class = ClassExponent::new(last.m, last.grade);
        let weight = last.coeff.clone();
        let mut segments = Vec::new();
        let mut bends = Vec::new();
        let mut cur = b;
        let mut end = u.clone();
        loop {
            let band = &self.bands[cur];
            let (l, _) = band.coords(&end);
            let start = band.source_point(&l);
            segments.push(BrokenSegment { start: start.clone(), end, m: band.m });
            let Some(parent) = band.parent else { break };
            end = match &band.origin {
                BandOrigin::Entry => unreachable!("entry bands have no parent"),
                BandOrigin::Bend { rays, term, coeff, jump } => {
                    let point = match jump {
                        Some(s) => unglue(d, *s, crate::affine::CutSide::Plus, &start),
                        None => start,
                    };
                    bends.push(BendRecord {
                        point: point.clone(),
                        rays: rays.clone(),
                        term: *term,
                        coeff: coeff.clone(),
                    });
                    point
                }
                BandOrigin::Landing { singularity, side } => unglue(d, *singularity, *side, &start),
            };
            cur = parent;
        }
        segments.reverse();
        bends.reverse();
        debug_assert!(bends.len() as u32 <= class.a, "every bend raises the grade");
        BrokenLine { endpoint: u.clone(), segments, bends, class, weight }
    }

    pub fn superpotential(&self, d: &ScatteringDiagram, u: &RatPoint) -> Result<Superpotential> {
        self.check_endpoint(d, u)?;
        let hits = self.containing(u);
        let mut series = FormalSeries::zero(self.order);
        for (b, _) in hits {
            let band = &self.bands[b];
            series.add_term(ClassExponent::new(band.m, band.grade), band.coeff.clone());
        }
        Ok(Superpotential { point: u.clone(), order: self.order, series })
    }
}

/// Inverts the gluing of a crossing of cut `side`.
fn unglue(d: &ScatteringDiagram, sing: usize, side: crate::affine::CutSide, p: &RatPoint) -> RatPoint {
    let s = &d.base.singularities[sing];
    let m = s.jump(side).inverse();
    s.position.offset(&m.apply_rat(&p.sub(&s.position)))
}

/// All broken lines of grade at most `order` ending at `u`.
pub fn enumerate_broken_lines(d: &ScatteringDiagram, u: &RatPoint, order: u32) -> Result<Vec<BrokenLine>> {
    BandFamily::build(d, order)?.lines_at(d, u)
}

/// The weighted count of broken lines of class `beta` ending at `u`.
pub fn n_trop(d: &ScatteringDiagram, u: &RatPoint, beta: ClassExponent) -> Result<Rat> {
    let w = superpotential(d, u, beta.a)?;
    Ok(w.coeff(beta.m, beta.a))
}

pub fn superpotential(d: &ScatteringDiagram, u: &RatPoint, order: u32) -> Result<Superpotential> {
    BandFamily::build(d, order)?.superpotential(d, u)
}
