use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use tropscat::affine::{IntVec2, RatPoint};
use tropscat::broken_lines::BandFamily;
use tropscat::scalar::{int, rat, Rat};
use tropscat::scattering::{complete, CompletionOptions, ScatteringDiagram};

const RADIUS: i64 = 8;

/// A wall `origin + s dir`, `0 < s`, inside the box, with function
/// `1 + t^grade z^dir`.
struct Wall {
    origin: (Rat, Rat),
    dir: (i64, i64),
    grade: u32,
}

fn toy_walls() -> Vec<Wall> {
    vec![
        Wall { origin: (int(-1), int(0)), dir: (1, 0), grade: 1 },
        Wall { origin: (int(0), int(-1)), dir: (0, 1), grade: 1 },
        Wall { origin: (int(0), int(0)), dir: (1, 1), grade: 2 },
    ]
}

fn binomial(n: i64, k: i64) -> i64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Traces a broken line backwards from `p`, where its current class is `m`:
/// the segment ending at `p` runs along `+m`. Adds `coeff t^a z^m_final` to
/// `out` for every way of reaching an incoming end.
#[allow(clippy::too_many_arguments)]
fn back(
    walls: &[Wall],
    p: (Rat, Rat),
    m: (i64, i64),
    a: u32,
    coeff: i64,
    last: (i64, i64, u32),
    order: u32,
    out: &mut BTreeMap<(i64, i64, u32), i64>,
) {
    if m == (-1, 0) || m == (0, -1) {
        *out.entry(last).or_insert(0) += coeff;
    }
    for w in walls {
        let det = m.0 * w.dir.1 - m.1 * w.dir.0;
        if det == 0 {
            continue;
        }
        // p - s m = origin + r dir.
        let (dx, dy) = (&p.0 - &w.origin.0, &p.1 - &w.origin.1);
        let den = int(det);
        let r = (int(m.0) * &dy - int(m.1) * &dx) / &den;
        let s = (int(w.dir.0) * &dy - int(w.dir.1) * &dx) / &den;
        let s = -s;
        if !s.is_positive() || !r.is_positive() {
            continue;
        }
        let q = (&w.origin.0 + &r * int(w.dir.0), &w.origin.1 + &r * int(w.dir.1));
        if q.0.abs() > int(RADIUS) || q.1.abs() > int(RADIUS) {
            continue;
        }
        let k = det.abs();
        for j in 1..=k {
            let grade = a + j as u32 * w.grade;
            if grade > order {
                break;
            }
            let prev = (m.0 - j * w.dir.0, m.1 - j * w.dir.1);
            if prev == (0, 0) {
                continue;
            }
            back(walls, q.clone(), prev, grade, coeff * binomial(k, j), (last.0, last.1, grade), order, out);
        }
    }
}

fn oracle(p: (Rat, Rat), order: u32) -> BTreeMap<(i64, i64, u32), i64> {
    let walls = toy_walls();
    let mut out = BTreeMap::new();
    // Every bend adds a nonnegative combination of the wall directions, each
    // costing at least one grade.
    let n = order as i64;
    let finals: BTreeSet<(i64, i64)> = [(-1, 0), (0, -1)]
        .into_iter()
        .flat_map(|(ex, ey)| (0..=n).flat_map(move |i| (0..=n - i).map(move |j| (ex + i, ey + j))))
        .filter(|m| *m != (0, 0))
        .collect();
    for m in finals {
        back(&walls, p.clone(), m, 0, 1, (m.0, m.1, 0), order, &mut out);
    }
    out.retain(|_, c| *c != 0);
    out
}

const POINTS: [(i64, i64, i64, i64); 8] = [
    (3, 7, 2, 11),
    (2, 11, 3, 7),
    (-3, 7, 5, 11),
    (-5, 7, -3, 11),
    (5, 7, -3, 11),
    (-13, 7, -17, 11),
    (-3, 7, -13, 11),
    (31, 7, 1, 13),
];

#[test]
fn band_propagation_matches_backward_enumeration() {
    let mut bent = 0;
    for order in [2, 3, 4] {
        let d0 = ScatteringDiagram::toy_two_wall(int(RADIUS)).unwrap();
        let d = complete(&d0, order, &CompletionOptions::default()).unwrap();
        let family = BandFamily::build(&d, order).unwrap();
        for (a, b, c, e) in POINTS {
            let p = (rat(a, b), rat(c, e));
            let w = family.superpotential(&d, &RatPoint::new(p.0.clone(), p.1.clone())).unwrap();
            let got: BTreeMap<(i64, i64, u32), i64> =
                w.series.terms().map(|(e, c)| ((e.m.x, e.m.y, e.a), c.to_integer().try_into().unwrap())).collect();
            let want = oracle(p, order);
            bent += want.keys().filter(|k| k.2 > 0).count();
            assert_eq!(got, want, "order {order} at ({a}/{b},{c}/{e})");
        }
    }
    assert!(bent >= 10, "only {bent} bent terms");
}

#[test]
fn far_from_the_walls_only_the_incoming_monomials_survive() {
    let d0 = ScatteringDiagram::toy_two_wall(int(RADIUS)).unwrap();
    let d = complete(&d0, 3, &CompletionOptions::default()).unwrap();
    let family = BandFamily::build(&d, 3).unwrap();
    let w = family.superpotential(&d, &RatPoint::new(rat(-7, 2), rat(-11, 3))).unwrap();
    let classes: Vec<_> = w.series.terms().map(|(e, c)| (e.m, e.a, c.clone())).collect();
    assert_eq!(classes, vec![(IntVec2::new(-1, 0), 0, rat(1, 1)), (IntVec2::new(0, -1), 0, rat(1, 1))]);
    assert!(w.series.terms().all(|(_, c)| !c.is_zero()));
}
