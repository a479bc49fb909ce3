use std::collections::BTreeMap;

use num_traits::Zero;
use tropscat::affine::{IntVec2, RatPoint};
use tropscat::scalar::{int, rat, Rat};
use tropscat::scattering::{complete, theta_loop, CompletionOptions, ScatteringDiagram};

/// Polynomials in `x, y, t` truncated above `t^2`, keyed by `(i, j, a)` for
/// `x^i y^j t^a`.
type Poly = BTreeMap<(i64, i64, u32), Rat>;

const MAX_T: u32 = 2;

fn one() -> Poly {
    Poly::from([((0, 0, 0), rat(1, 1))])
}

fn mul(p: &Poly, q: &Poly) -> Poly {
    let mut out = Poly::new();
    for (&(i, j, a), c) in p {
        for (&(k, l, b), d) in q {
            if a + b <= MAX_T {
                *out.entry((i + k, j + l, a + b)).or_insert_with(Rat::zero) += c * d;
            }
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// `f^n` for `f = 1 + g` with `g` of positive `t`-degree.
fn pow(f: &Poly, n: i64) -> Poly {
    let base = if n >= 0 {
        f.clone()
    } else {
        let mut g = f.clone();
        g.remove(&(0, 0, 0));
        let neg_g: Poly = g.iter().map(|(k, c)| (*k, -c)).collect();
        let mut inv = one();
        let mut term = one();
        for _ in 0..MAX_T {
            term = mul(&term, &neg_g);
            for (k, c) in &term {
                *inv.entry(*k).or_insert_with(Rat::zero) += c;
            }
        }
        inv
    };
    (0..n.abs()).fold(one(), |acc, _| mul(&acc, &base))
}

/// A wall through the origin crossed by a counterclockwise loop.
struct Crossing {
    f: Poly,
    /// Primitive covector vanishing on the wall, positive on the velocity.
    n: (i64, i64),
}

fn apply(k: &Crossing, p: &Poly) -> Poly {
    let mut out = Poly::new();
    for (&(i, j, a), c) in p {
        let e = k.n.0 * i + k.n.1 * j;
        let mono = Poly::from([((i, j, a), c.clone())]);
        for (key, v) in mul(&mono, &pow(&k.f, e)) {
            *out.entry(key).or_insert_with(Rat::zero) += v;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// Images of `x` and `y` after going once around the origin.
fn loop_images(with_new_wall: bool) -> (Poly, Poly) {
    let fx = Poly::from([((0, 0, 0), rat(1, 1)), ((1, 0, 1), rat(1, 1))]);
    let fy = Poly::from([((0, 0, 0), rat(1, 1)), ((0, 1, 1), rat(1, 1))]);
    let fxy = Poly::from([((0, 0, 0), rat(1, 1)), ((1, 1, 2), rat(1, 1))]);
    // Angles 0, pi/4, pi/2, pi, 3pi/2 with velocities (0,1), (-1,1), (-1,0),
    // (0,-1), (1,0).
    let mut walls = vec![Crossing { f: fx.clone(), n: (0, 1) }];
    if with_new_wall {
        walls.push(Crossing { f: fxy, n: (-1, 1) });
    }
    walls.push(Crossing { f: fy.clone(), n: (-1, 0) });
    walls.push(Crossing { f: fx, n: (0, -1) });
    walls.push(Crossing { f: fy, n: (1, 0) });
    let run = |p: Poly| walls.iter().fold(p, |acc, k| apply(k, &acc));
    (run(Poly::from([((1, 0, 0), rat(1, 1))])), run(Poly::from([((0, 1, 0), rat(1, 1))])))
}

#[test]
fn oracle_needs_exactly_the_diagonal_wall() {
    let x = Poly::from([((1, 0, 0), rat(1, 1))]);
    let y = Poly::from([((0, 1, 0), rat(1, 1))]);
    assert_eq!(loop_images(true), (x.clone(), y.clone()));
    assert_ne!(loop_images(false), (x, y));
}

fn toy(order: u32) -> ScatteringDiagram {
    let d0 = ScatteringDiagram::toy_two_wall(int(8)).unwrap();
    complete(&d0, order, &CompletionOptions::default()).unwrap()
}

#[test]
fn completion_adds_the_single_diagonal_wall() {
    let d = toy(2);
    assert_eq!(d.rays.len(), 3);
    let new = &d.rays[2];
    assert_eq!(new.origin, RatPoint::origin());
    assert_eq!(new.dir, IntVec2::new(1, 1));
    assert_eq!(new.omega, BTreeMap::from([((1, 2), rat(1, 1))]));
    let series = new.wall_on(&new.segments[0], 2).series().clone();
    let terms: Vec<_> = series.terms().map(|(e, c)| (e.m, e.a, c.clone())).collect();
    assert_eq!(terms, vec![(IntVec2::new(0, 0), 0, rat(1, 1)), (IntVec2::new(1, 1), 2, rat(1, 1))]);
}

#[test]
fn loop_around_the_collision_is_trivial() {
    let d = toy(2);
    assert!(theta_loop(&d, &RatPoint::origin(), 2).unwrap().is_identity());
    let d0 = ScatteringDiagram::toy_two_wall(int(8)).unwrap();
    assert_eq!(theta_loop(&d0, &RatPoint::origin(), 2).unwrap().first_deviation(), Some(2));
}

#[test]
fn higher_orders_add_nothing() {
    let d = toy(6);
    assert_eq!(d.rays.len(), 3);
    assert!(theta_loop(&d, &RatPoint::origin(), 6).unwrap().is_identity());
}

#[test]
fn reversed_processing_gives_the_same_diagram() {
    let d0 = ScatteringDiagram::toy_two_wall(int(8)).unwrap();
    let rev = complete(&d0, 4, &CompletionOptions { reverse_points: true, ..Default::default() }).unwrap();
    assert_eq!(rev.to_json(), toy(4).to_json());
}

#[test]
fn diagram_json_round_trip() {
    let d = toy(3);
    let back = ScatteringDiagram::from_json(&d.to_json()).unwrap();
    assert_eq!(back.to_json(), d.to_json());
}
