use std::collections::BTreeMap;
use std::sync::OnceLock;

use tropscat::affine::{AffineBase, GluingMatrix, IntVec2, RatPoint};
use tropscat::broken_lines::{wallcross_check, wallcross_samples, BandFamily};
use tropscat::relative_gw::{admissible_rays, bps_counts, rays_of_degree, relative_gw};
use tropscat::scalar::{int, rat, Rat};
use tropscat::scattering::{
    complete, consistency_check, provenance_consistent, tropical_discs, CompletionOptions, ScatteringDiagram,
};
use tropscat::Error;

fn p2(order: u32) -> ScatteringDiagram {
    let d0 = ScatteringDiagram::initial(&AffineBase::cps_p2(), int(8)).unwrap();
    complete(&d0, order, &CompletionOptions::default()).unwrap()
}

fn order3() -> &'static (ScatteringDiagram, BandFamily) {
    static CELL: OnceLock<(ScatteringDiagram, BandFamily)> = OnceLock::new();
    CELL.get_or_init(|| {
        let d = p2(3);
        let family = BandFamily::build(&d, 3).unwrap();
        (d, family)
    })
}

fn pt(x: Rat, y: Rat) -> RatPoint {
    RatPoint::new(x, y)
}

#[test]
fn six_initial_rays() {
    let d = p2(1);
    assert_eq!(d.rays.len(), 6);
    assert!(d.rays.iter().all(|r| r.omega.get(&(1, 1)) == Some(&rat(1, 1))));
}

#[test]
fn completion_is_consistent_and_reproducible() {
    let (d, _) = order3();
    assert!(consistency_check(d, 3).unwrap().is_empty());
    assert!(provenance_consistent(d));
    let d0 = ScatteringDiagram::initial(&AffineBase::cps_p2(), int(8)).unwrap();
    let rev = complete(&d0, 3, &CompletionOptions { reverse_points: true, ..Default::default() }).unwrap();
    assert_eq!(rev.to_json(), d.to_json());
    assert_eq!(ScatteringDiagram::from_json(&d.to_json()).unwrap().to_json(), d.to_json());
}

#[test]
fn every_disc_tree_is_balanced_and_sums_to_the_invariant() {
    let (d, _) = order3();
    for ray in d.rays.iter().filter(|r| r.seed.is_none()) {
        for (key, omega) in &ray.omega {
            let trees = tropical_discs(d, ray.id, *key);
            assert!(trees.iter().all(|t| t.is_balanced(d)));
            let total = trees.iter().fold(rat(0, 1), |acc, t| acc + &t.weight);
            assert_eq!(&total, omega, "ray {} term {key:?}", ray.id);
        }
    }
}

#[test]
fn degree_one_invariant() {
    let (d, _) = order3();
    let rays = admissible_rays(d);
    let deg1 = rays_of_degree(&rays, 1);
    assert_eq!(deg1.len(), 3);
    assert!(deg1.iter().all(|a| a.multiplicity == rat(3, 1)));
    assert_eq!(relative_gw(d, 1).unwrap(), rat(9, 1));
    assert!(matches!(relative_gw(d, 2), Err(Error::NotStabilized { .. })));
    let table = bps_counts(d, 1).unwrap();
    assert_eq!(table.rows[0].bps, rat(9, 1));
    assert!(table.rows[0].rays.iter().all(|r| r.bps == rat(3, 1)));
}

#[test]
fn admissible_rays_follow_a_change_of_chart() {
    let g = GluingMatrix::new(2, 1, 1, 1);
    let base = AffineBase::cps_p2().conjugated(g);
    let d0 = ScatteringDiagram::initial(&base, int(24)).unwrap();
    let moved = complete(&d0, 3, &CompletionOptions::default()).unwrap();
    let count = |d: &ScatteringDiagram| {
        let mut by_torsion: BTreeMap<u32, Vec<Rat>> = BTreeMap::new();
        for a in admissible_rays(d) {
            by_torsion.entry(a.torsion).or_default().push(a.multiplicity);
        }
        by_torsion.values_mut().for_each(|v| v.sort());
        by_torsion
    };
    let (d, _) = order3();
    assert_eq!(count(&moved)[&3], count(d)[&3]);
    assert_eq!(relative_gw(&moved, 1).unwrap(), rat(9, 1));
}

#[test]
fn superpotential_near_the_origin() {
    let (d, family) = order3();
    for u in [pt(rat(1, 100), rat(1, 100)), pt(rat(1, 37), rat(-1, 41))] {
        let lines = family.lines_at(d, &u).unwrap();
        assert_eq!(lines.len(), 3);
        assert!(lines.iter().all(|l| l.class.a == 0 && l.weight == rat(1, 1) && l.bends.is_empty()));
        let w = family.superpotential(d, &u).unwrap();
        let outward: Vec<_> = w.outward().terms().map(|(e, c)| (e.m, e.a, c.clone())).collect();
        let mut want = vec![
            (IntVec2::new(1, 0), 0, rat(1, 1)),
            (IntVec2::new(0, 1), 0, rat(1, 1)),
            (IntVec2::new(-1, -1), 0, rat(1, 1)),
        ];
        want.sort();
        let mut got = outward;
        got.sort();
        assert_eq!(got, want);
    }
}

#[test]
fn one_straight_line_near_infinity() {
    let (d, family) = order3();
    for (u, m) in [
        (pt(rat(15, 2), rat(1, 7)), IntVec2::new(-1, 0)),
        (pt(rat(1, 7), rat(15, 2)), IntVec2::new(0, -1)),
        (pt(rat(-22, 3), rat(-51, 7)), IntVec2::new(1, 1)),
    ] {
        let lines = family.lines_at(d, &u).unwrap();
        let of_class: Vec<_> = lines.iter().filter(|l| l.class.m == m).collect();
        assert_eq!(of_class.len(), 1, "at {u}");
        assert_eq!(of_class[0].class.a, 0);
        assert!(of_class[0].bends.is_empty());
        assert_eq!(of_class[0].weight, rat(1, 1));
    }
}

#[test]
fn endpoint_errors() {
    let (d, family) = order3();
    let on_wall = d.rays[0].segments[0].start.along(&d.rays[0].dir.to_rat(), &rat(1, 3));
    assert!(matches!(family.superpotential(d, &on_wall), Err(Error::NonGenericEndpoint { .. })));
    assert!(matches!(family.superpotential(d, &pt(int(9), int(0))), Err(Error::RadiusExceeded(_))));
}

#[test]
fn sampled_wall_crossings_hold() {
    let (d, family) = order3();
    let pairs = wallcross_samples(d, family, 24);
    assert!(pairs.len() >= 20, "only {} pairs", pairs.len());
    for p in &pairs {
        assert!(wallcross_check(d, family, &p.u1, &p.u2, p.ray).unwrap(), "ray {} at {} / {}", p.ray, p.u1, p.u2);
    }
}
