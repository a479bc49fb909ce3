//! End-to-end checks of the published numbers, one line per criterion.

use std::collections::BTreeMap;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use num_traits::Signed;
use tropscat::affine::{monodromy_at_infinity, AffineBase, CutSide, GluingMatrix, IntVec2, RatPoint};
use tropscat::broken_lines::{wallcross_check, wallcross_samples, BandFamily};
use tropscat::relative_gw::{admissible_rays, bps_counts, rays_of_degree, relative_gw};
use tropscat::scalar::{fmt_rat, int, rat, Rat};
use tropscat::scattering::{
    complete, consistency_check, theta_loop, tropical_discs, CompletionOptions, ScatteringDiagram,
};
use tropscat::series::{extract_omega_tilde, mobius_invert, ClassExponent, FormalSeries, WallFunction};

const FAST: Duration = Duration::from_secs(1);
const SECONDS: Duration = Duration::from_secs(30);
const MINUTES: Duration = Duration::from_secs(600);

/// Minimum number of sampled wall-crossing pairs.
const WALLCROSS_PAIRS: usize = 20;
/// Grade of the broken lines used for sampled wall crossings.
const WALLCROSS_ORDER: u32 = 5;

fn report(n: u32, name: &str, start: Instant, limit: Duration, checks: &[(&str, bool)]) {
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let ok = in_time && checks.iter().all(|c| c.1);
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    let detail = if failed.is_empty() { String::new() } else { format!(" failed: {}", failed.join("; ")) };
    let timing = if in_time { String::new() } else { format!(" over the {limit:?} limit") };
    println!(
        "acceptance {n} {name}: {} ({:.2}s){detail}{timing}",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    assert!(ok, "criterion {n}:{detail}{timing}");
}

fn p2(order: u32, reverse: bool) -> ScatteringDiagram {
    let d0 = ScatteringDiagram::initial(&AffineBase::cps_p2(), int(8)).unwrap();
    complete(&d0, order, &CompletionOptions { reverse_points: reverse, ..Default::default() }).unwrap()
}

fn order6() -> &'static ScatteringDiagram {
    static CELL: OnceLock<ScatteringDiagram> = OnceLock::new();
    CELL.get_or_init(|| p2(6, false))
}

/// `k` with `m` conjugate in SL(2,Z) to `[[1,k],[0,1]]`, or `None` when `m`
/// is not a nontrivial unipotent.
fn shear_of(m: GluingMatrix) -> Option<i64> {
    if m.det() != 1 || m.trace() != 2 || m.is_identity() {
        return None;
    }
    let (n11, n12, n21, n22) = (m.a - 1, m.b, m.c, m.d - 1);
    let (vx, vy) = if (n11, n12) != (0, 0) { (n12, -n11) } else { (n22, -n21) };
    let g = num_integer::gcd(vx, vy);
    let (vx, vy) = (vx / g, vy / g);
    let e = num_integer::Integer::extended_gcd(&vx, &vy);
    let (wx, wy) = (-e.y * e.gcd, e.x * e.gcd);
    let mw = (m.a * wx + m.b * wy, m.c * wx + m.d * wy);
    Some(wy * mw.0 - wx * mw.1)
}

#[test]
fn monodromy() {
    let start = Instant::now();
    let base = AffineBase::cps_p2();
    let cuts = base.singularities.iter().all(|s| shear_of(s.jump(CutSide::Plus)) == Some(1));
    let total = shear_of(monodromy_at_infinity(&base, IntVec2::new(1, 0))).map(i64::abs) == Some(9);
    report(
        1,
        "monodromy",
        start,
        FAST,
        &[("each cut is a unit shear", cuts), ("loop at infinity is a 9-fold shear", total)],
    );
}

#[test]
fn toy_scattering() {
    let start = Instant::now();
    let d0 = ScatteringDiagram::toy_two_wall(int(8)).unwrap();
    let d = complete(&d0, 2, &CompletionOptions::default()).unwrap();
    let new: Vec<_> = d.rays.iter().filter(|r| r.seed.is_none()).collect();
    let single = new.len() == 1
        && new[0].dir == IntVec2::new(1, 1)
        && new[0].origin == RatPoint::origin()
        && new[0].omega == BTreeMap::from([((1, 2), rat(1, 1))]);
    let trivial = theta_loop(&d, &RatPoint::origin(), 2).map(|t| t.is_identity()).unwrap_or(false);
    report(
        2,
        "toy scattering",
        start,
        FAST,
        &[("one new wall 1 + t^2 xy", single), ("loop is the identity mod t^3", trivial)],
    );
}

#[test]
fn multiple_cover_values() {
    let start = Instant::now();
    let order = 10;
    let f = WallFunction::new(
        IntVec2::new(1, 0),
        FormalSeries::from_terms(
            [
                (ClassExponent::new(IntVec2::new(0, 0), 0), rat(1, 1)),
                (ClassExponent::new(IntVec2::new(1, 0), 1), rat(1, 1)),
            ],
            order,
        ),
    )
    .unwrap();
    let omega = extract_omega_tilde(&f, ClassExponent::new(IntVec2::new(1, 0), 1));
    let values = (1..=10i64).all(|d| {
        let sign = if d % 2 == 1 { 1 } else { -1 };
        omega.get(&(d as u32)) == Some(&rat(sign, d * d))
    });
    let inverted = mobius_invert(&omega, -1);
    let bps = inverted.iter().all(|(d, v)| v.value == if *d == 1 { rat(1, 1) } else { rat(0, 1) });
    report(
        3,
        "multiple covers",
        start,
        FAST,
        &[("(-1)^(d-1)/d^2 for d <= 10", values), ("inversion gives 1, 0, 0, ...", bps)],
    );
}

#[test]
fn degree_one() {
    let start = Instant::now();
    let d = p2(3, false);
    let rays = admissible_rays(&d);
    let deg1 = rays_of_degree(&rays, 1);
    let three = deg1.len() == 3 && deg1.iter().all(|a| a.multiplicity == rat(3, 1));
    let n = relative_gw(&d, 1).ok() == Some(rat(9, 1));
    report(4, "degree one", start, SECONDS, &[("three rays of multiplicity 3", three), ("N_1 = 9", n)]);
}

#[test]
fn degree_two() {
    let start = Instant::now();
    let d = order6();
    let rays = admissible_rays(d);
    let six: Vec<_> = rays.iter().filter(|a| a.torsion == 6).collect();
    let six_ok = six.len() == 3 && six.iter().all(|a| a.multiplicity == rat(6, 1));
    let expected: Vec<Rat> = {
        let mut v = vec![rat(3, 4), rat(-9, 2), rat(-9, 2), rat(21, 4)];
        v.sort();
        v
    };
    let weights: Vec<(usize, Vec<Rat>)> = rays_of_degree(&rays, 1)
        .iter()
        .map(|a| {
            let mut w: Vec<Rat> = tropical_discs(d, a.ray, (6, 4)).into_iter().map(|t| t.weight).collect();
            w.sort();
            (a.ray, w)
        })
        .collect();
    let trees_ok = weights.len() == 3 && weights.iter().all(|(_, w)| *w == expected);
    for (ray, w) in &weights {
        println!("  tree weights on 3-torsion ray {ray}: {{{}}}", w.iter().map(fmt_rat).collect::<Vec<_>>().join(", "));
    }
    let table = bps_counts(d, 2).unwrap();
    let three_torsion: Vec<_> = table.rows[1].rays.iter().filter(|r| r.torsion == 3).collect();
    let inversion = three_torsion.len() == 3
        && three_torsion.iter().all(|r| r.omega_tilde == rat(21, 4) && r.bps.abs() == rat(6, 1));
    let n2 = relative_gw(d, 2).ok();
    println!("  N_2 = {}", n2.as_ref().map(fmt_rat).unwrap_or_default());
    report(
        5,
        "degree two",
        start,
        MINUTES,
        &[
            ("three multiplicity-6 rays in 6-torsion directions", six_ok),
            ("four trees {3/4, -9/2, -9/2, 21/4} on each 3-torsion ray", trees_ok),
            ("(21/4 + 3/4) inverts to 6 curves", inversion),
        ],
    );
}

#[test]
fn superpotential() {
    let start = Instant::now();
    let d = p2(3, false);
    let family = BandFamily::build(&d, 3).unwrap();
    let u = RatPoint::new(rat(1, 100), rat(1, 100));
    let lines = family.lines_at(&d, &u).unwrap();
    let minimal: Vec<_> = lines.iter().filter(|l| l.class.a == 0).collect();
    let three = minimal.len() == 3 && minimal.iter().all(|l| l.weight == rat(1, 1));
    let w = family.superpotential(&d, &u).unwrap().outward();
    let mut terms: Vec<_> = w.terms().map(|(e, c)| (e.m, e.a, c.clone())).collect();
    terms.sort();
    let mut want = vec![
        (IntVec2::new(1, 0), 0, rat(1, 1)),
        (IntVec2::new(0, 1), 0, rat(1, 1)),
        (IntVec2::new(-1, -1), 0, rat(1, 1)),
    ];
    want.sort();
    report(
        6,
        "superpotential",
        start,
        SECONDS,
        &[("three weight-1 lines", three), ("W = x + y + 1/xy", terms == want)],
    );
}

#[test]
fn consistency_suite() {
    let start = Instant::now();
    let d = order6();
    let defects = consistency_check(d, 6).unwrap();
    let family = BandFamily::build(d, WALLCROSS_ORDER).unwrap();
    let pairs = wallcross_samples(d, &family, WALLCROSS_PAIRS + 4);
    let held = pairs.iter().filter(|p| wallcross_check(d, &family, &p.u1, &p.u2, p.ray).unwrap_or(false)).count();
    println!("  {} defects, {held}/{} wall-crossing pairs hold", defects.len(), pairs.len());
    report(
        7,
        "consistency",
        start,
        MINUTES,
        &[
            ("no defects at order 6", defects.is_empty()),
            ("at least 20 pairs sampled", pairs.len() >= WALLCROSS_PAIRS),
            ("every sampled pair crosses correctly", held == pairs.len()),
        ],
    );
}

fn scatter(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_tropscat")).args(args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

#[test]
fn determinism() {
    let start = Instant::now();
    let one = scatter(&["--threads", "1", "scatter", "--order", "6"]);
    let eight = scatter(&["--threads", "8", "scatter", "--order", "6"]);
    let reversed = scatter(&["--threads", "8", "scatter", "--order", "6", "--reverse"]);
    let library = p2(6, true).to_json();
    report(
        8,
        "determinism",
        start,
        MINUTES,
        &[
            ("1 and 8 threads agree", one == eight),
            ("reversed collision order agrees", one == reversed),
            ("library output matches", String::from_utf8_lossy(&one).trim_end() == library.trim_end()),
        ],
    );
}
