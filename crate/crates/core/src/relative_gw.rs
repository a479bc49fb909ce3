//! Admissible rays, the outgoing wall function `f_out` and the relative
//! invariants of the projective plane read off from it.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::affine::{fixed_direction, monodromy_at_infinity, AffineBase, IntVec2, RatPoint, RegionKind, SegmentEnd};
use crate::error::{Error, Result};
use crate::scalar::{fmt_rat, int, is_integral, serde_rat, Rat};
use crate::scattering::ScatteringDiagram;
use crate::series::{mobius_invert, FormalSeries};

/// Tangency with the boundary divisor per unit of degree: the cubic meets a
/// curve of degree `d` in `3d` points.
pub const TANGENCY_PER_DEGREE: u32 = 3;

/// A ray escaping to infinity along the monodromy-invariant direction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdmissibleRay {
    pub ray: usize,
    /// Direction of the last segment, in the chart where it leaves the box.
    pub exit_dir: IntVec2,
    pub region: Option<RegionKind>,
    /// Tangency `w` of the primitive term; the ray belongs to `w`-torsion.
    pub torsion: u32,
    /// `Omega~` of the primitive term.
    #[serde(with = "serde_rat")]
    pub multiplicity: Rat,
    /// `Omega~` by tangency `j`, summed over grades.
    #[serde(serialize_with = "ser_rat_map")]
    pub omega: BTreeMap<u32, Rat>,
}

fn ser_rat_map<S: serde::Serializer>(m: &BTreeMap<u32, Rat>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(m.len()))?;
    for (k, v) in m {
        map.serialize_entry(k, &fmt_rat(v))?;
    }
    map.end()
}

/// The primitive eigenvector of the monodromy around all singularities.
///
/// With region data the frame is the first region and the sign points along
/// its outgoing direction; a single singularity gives its invariant line.
pub fn infinity_direction(base: &AffineBase) -> Result<IntVec2> {
    let reference = match (base.regions.first(), base.singularities.first()) {
        (Some(r), _) => r.m_out,
        (None, Some(s)) => s.invariant_dir,
        (None, None) => return Err(Error::NoInvariantDirection),
    };
    let m = monodromy_at_infinity(base, reference);
    if m.is_identity() {
        return Err(Error::NoInvariantDirection);
    }
    let v = fixed_direction(&m).ok_or(Error::NoInvariantDirection)?;
    Ok(if v.dot(reference) < 0 || (v.dot(reference) == 0 && v.pairing(reference) < 0) { v.scale(-1) } else { v })
}

/// Regions whose closure contains `p`.
fn regions_at(base: &AffineBase, p: &RatPoint) -> Vec<(RegionKind, IntVec2)> {
    base.regions
        .iter()
        .filter(|r| {
            r.constraints.iter().all(|h| !(&p.x * int(h.normal.x) + &p.y * int(h.normal.y) - &h.offset).is_negative())
        })
        .map(|r| (r.kind, r.m_out))
        .collect()
}

/// Rays whose last segment leaves the box along the outgoing direction of
/// the region it runs in. Rays running along a region boundary count for
/// either adjacent region.
pub fn admissible_rays(d: &ScatteringDiagram) -> Vec<AdmissibleRay> {
    let global = if d.base.regions.is_empty() { infinity_direction(&d.base).ok() } else { None };
    if d.base.regions.is_empty() && global.is_none() {
        return Vec::new();
    }
    let mut out = Vec::new();
    for ray in &d.rays {
        let Some(last) = ray.segments.last() else { continue };
        if last.end_kind != SegmentEnd::Boundary || last.start == last.end {
            continue;
        }
        let region = if let Some(m) = global {
            if !m.positively_parallel(last.dir) {
                continue;
            }
            None
        } else {
            let mid = last.start.along(&last.end.sub(&last.start), &crate::scalar::rat(1, 2));
            let here = regions_at(&d.base, &mid);
            match here.iter().find(|(_, m)| m.positively_parallel(last.dir)) {
                Some((k, _)) => Some(*k),
                None => continue,
            }
        };
        let mut omega: BTreeMap<u32, Rat> = BTreeMap::new();
        for (&(j, _), v) in &ray.omega {
            if !v.is_zero() {
                *omega.entry(j).or_insert_with(Rat::zero) += v;
            }
        }
        omega.retain(|_, v| !v.is_zero());
        let Some((&torsion, mult)) = omega.iter().next() else { continue };
        out.push(AdmissibleRay {
            ray: ray.id,
            exit_dir: last.dir,
            region,
            torsion,
            multiplicity: mult.clone(),
            omega: omega.clone(),
        });
    }
    out
}

/// Admissible rays whose primitive class has degree `degree`, i.e. the
/// rays attached to `3d`-torsion points.
pub fn rays_of_degree(rays: &[AdmissibleRay], degree: u32) -> Vec<&AdmissibleRay> {
    rays.iter().filter(|a| a.torsion == TANGENCY_PER_DEGREE * degree).collect()
}

/// The product of the wall functions of all admissible rays, written in the
/// single outgoing direction: the term `t^a x^j` is stored with class
/// `-j m_out` and grade `a`, where `m_out` is [`infinity_direction`] (or
/// `(1,0)` when the base has none).
pub fn f_out(d: &ScatteringDiagram, order: u32) -> FormalSeries<Rat> {
    let m_ref = m_ref(&d.base);
    let mut acc = FormalSeries::one(order);
    for a in admissible_rays(d) {
        let ray = &d.rays[a.ray];
        let last = ray.segments.last().expect("admissible rays have segments");
        let wall = ray.wall_on(last, order);
        let f = wall.series().map_classes(|m| m_ref.scale(-m.index()));
        acc = acc.mul(&f);
    }
    acc
}

/// `N_{0,d}` from the logarithm of `f_out`: the coefficient of the tangency
/// `3d` slot divided by `3d`.
pub fn relative_gw_from_log(d: &ScatteringDiagram, degree: u32) -> Result<Rat> {
    let log = f_out(d, d.order).log()?;
    Ok(log_slot(d, &log, degree))
}

fn log_slot(d: &ScatteringDiagram, log: &FormalSeries<Rat>, degree: u32) -> Rat {
    let w = TANGENCY_PER_DEGREE * degree;
    let slot = m_ref(&d.base).scale(-(w as i64));
    let total = log.terms().filter(|(e, _)| e.m == slot).fold(Rat::zero(), |acc, (_, c)| acc + c);
    total / int(w as i64)
}

fn m_ref(base: &AffineBase) -> IntVec2 {
    infinity_direction(base).unwrap_or(IntVec2::new(1, 0))
}

/// `N_{0,d}` as the sum of `Omega~` over admissible rays at tangency `3d`.
pub fn relative_gw_from_omega(d: &ScatteringDiagram, degree: u32) -> Rat {
    let w = TANGENCY_PER_DEGREE * degree;
    admissible_rays(d).iter().filter_map(|a| a.omega.get(&w)).fold(Rat::zero(), |acc, v| acc + v)
}

/// The genus-zero relative invariant of degree `degree`.
///
/// Both extraction paths are computed; a disagreement is a defect and is
/// reported as [`Error::Malformed`]. A diagram completed below order `3d`
/// is rejected with [`Error::NotStabilized`].
pub fn relative_gw(d: &ScatteringDiagram, degree: u32) -> Result<Rat> {
    let needed = TANGENCY_PER_DEGREE * degree;
    let by_omega = relative_gw_from_omega(d, degree);
    if d.order < needed {
        return Err(Error::NotStabilized {
            d: degree,
            order: d.order,
            next: needed,
            before: fmt_rat(&by_omega),
            after: "not computed".into(),
        });
    }
    let by_log = relative_gw_from_log(d, degree)?;
    if by_log != by_omega {
        return Err(Error::Malformed(format!(
            "degree {degree}: log f_out gives {} but the sum of Omega~ gives {}",
            fmt_rat(&by_log),
            fmt_rat(&by_omega)
        )));
    }
    Ok(by_omega)
}

/// Compares the degree-`degree` invariant of two completions of the same
/// initial data.
pub fn check_stabilized(lo: &ScatteringDiagram, hi: &ScatteringDiagram, degree: u32) -> Result<Rat> {
    let a = relative_gw_from_omega(lo, degree);
    let b = relative_gw_from_omega(hi, degree);
    if a != b {
        return Err(Error::NotStabilized {
            d: degree,
            order: lo.order,
            next: hi.order,
            before: fmt_rat(&a),
            after: fmt_rat(&b),
        });
    }
    Ok(a)
}

/// Contribution of one admissible ray to one degree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RayContribution {
    pub ray: usize,
    pub torsion: u32,
    #[serde(with = "serde_rat")]
    pub omega_tilde: Rat,
    #[serde(with = "serde_rat")]
    pub bps: Rat,
}

/// One row of [`RelGwTable`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelGwRow {
    pub degree: u32,
    #[serde(with = "serde_rat")]
    pub n: Rat,
    /// The same invariant read off `log f_out`.
    #[serde(with = "serde_rat")]
    pub n_from_log: Rat,
    #[serde(with = "serde_rat")]
    pub bps: Rat,
    pub integral: bool,
    pub rays: Vec<RayContribution>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelGwTable {
    pub order: u32,
    pub rows: Vec<RelGwRow>,
}

impl RelGwTable {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    /// `degree,n,n_from_log,bps,integral` per row.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["degree", "n", "n_from_log", "bps", "integral"]).expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.degree.to_string(),
                fmt_rat(&r.n),
                fmt_rat(&r.n_from_log),
                fmt_rat(&r.bps),
                r.integral.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }
}

/// Relative invariants and their integer counts for degrees `1..=d_max`.
///
/// On each admissible ray the invariants of the multiples `k gamma` of the
/// primitive class are inverted with refinement `c = (-1)^deg gamma`; the
/// count of degree `d` is the sum over rays.
pub fn bps_counts(d: &ScatteringDiagram, d_max: u32) -> Result<RelGwTable> {
    let rays = admissible_rays(d);
    let mut rows: Vec<RelGwRow> = (1..=d_max)
        .map(|degree| RelGwRow {
            degree,
            n: Rat::zero(),
            n_from_log: Rat::zero(),
            bps: Rat::zero(),
            integral: true,
            rays: Vec::new(),
        })
        .collect();
    for a in &rays {
        let w0 = a.torsion;
        let by_multiple: BTreeMap<u32, Rat> =
            a.omega.iter().filter(|(j, _)| *j % w0 == 0).map(|(j, v)| (j / w0, v.clone())).collect();
        let c = if (w0 / TANGENCY_PER_DEGREE) % 2 == 1 { -1 } else { 1 };
        let inverted = mobius_invert(&by_multiple, c);
        for (k, v) in inverted {
            let j = k * w0;
            if j % TANGENCY_PER_DEGREE != 0 {
                continue;
            }
            let degree = j / TANGENCY_PER_DEGREE;
            if degree == 0 || degree > d_max {
                continue;
            }
            let row = &mut rows[(degree - 1) as usize];
            let omega_tilde = a.omega.get(&j).cloned().unwrap_or_else(Rat::zero);
            if omega_tilde.is_zero() && v.value.is_zero() {
                continue;
            }
            row.n += &omega_tilde;
            row.bps += &v.value;
            row.rays.push(RayContribution { ray: a.ray, torsion: w0, omega_tilde, bps: v.value });
        }
    }
    let log = f_out(d, d.order).log()?;
    for row in &mut rows {
        row.n_from_log = log_slot(d, &log, row.degree);
        row.integral = is_integral(&row.bps);
    }
    Ok(RelGwTable { order: d.order, rows })
}
