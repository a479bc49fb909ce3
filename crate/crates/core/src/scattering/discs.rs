//! Tropical disc trees recovered from provenance, and the invariants
//! `Omega~trop` read off the walls through a point.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::affine::{GluingMatrix, IntVec2, RatPoint};
use crate::error::{Error, Result};
use crate::scalar::{int, Rat};
use crate::series::{extract_omega_tilde, ClassExponent, WallFunction};

use super::diagram::ScatteringDiagram;
use super::ray::{Provenance, TermKey};

/// A rooted tree of rays: the root is term `(j, a)` of ray `ray`, the
/// children are the parent terms consumed at the root's origin, repeated
/// according to their exponent. Leaves are terms of initial rays.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiscTree {
    pub ray: usize,
    pub j: u32,
    pub a: u32,
    #[serde(with = "crate::scalar::serde_rat")]
    pub weight: Rat,
    pub children: Vec<DiscTree>,
}

impl DiscTree {
    /// Number of edges, one per node.
    pub fn edges(&self) -> usize {
        1 + self.children.iter().map(DiscTree::edges).sum::<usize>()
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Checks at every vertex that the outgoing class is the sum of the
    /// incoming classes, all read in the chart at the vertex.
    pub fn is_balanced(&self, d: &ScatteringDiagram) -> bool {
        let ray = &d.rays[self.ray];
        let point = match &ray.provenance {
            Provenance::Initial { .. } => return self.is_leaf(),
            Provenance::Scattered { point, .. } => point,
        };
        let mut total = IntVec2::new(0, 0);
        for c in &self.children {
            match direction_at(d, c.ray, point) {
                Some(v) => total = total + v.scale(c.j as i64),
                None => return false,
            }
        }
        total == ray.dir.scale(self.j as i64) && self.children.iter().all(|c| c.is_balanced(d))
    }
}

/// Direction of ray `r` at `p` in the chart at `p`, looking through the
/// glued partner when `p` is on a cut.
pub fn direction_at(d: &ScatteringDiagram, r: usize, p: &RatPoint) -> Option<IntVec2> {
    let mut reps = vec![(p.clone(), GluingMatrix::IDENTITY)];
    reps.extend(d.base.partner(p));
    reps.iter().find_map(|(q, chart)| d.rays[r].segments.iter().find(|s| s.contains(q)).map(|s| chart.apply(s.dir)))
}

/// All disc trees ending on term `key` of ray `ray`. Their weights add up to
/// `Omega~` of the term.
pub fn tropical_discs(d: &ScatteringDiagram, ray: usize, key: TermKey) -> Vec<DiscTree> {
    let mut memo = BTreeMap::new();
    expand(d, ray, key, &mut memo)
}

fn expand(
    d: &ScatteringDiagram,
    ray: usize,
    key: TermKey,
    memo: &mut BTreeMap<(usize, TermKey), Vec<DiscTree>>,
) -> Vec<DiscTree> {
    if let Some(t) = memo.get(&(ray, key)) {
        return t.clone();
    }
    let r = &d.rays[ray];
    let leaf = |weight: Rat| DiscTree { ray, j: key.0, a: key.1, weight, children: Vec::new() };
    let out = match &r.provenance {
        Provenance::Initial { .. } => match r.omega.get(&key) {
            Some(w) if !w.is_zero() => vec![leaf(w.clone())],
            _ => Vec::new(),
        },
        Provenance::Scattered { .. } => {
            let mut out = Vec::new();
            if let Some(term) = r.provenance.term(key) {
                for mono in &term.monomials {
                    // Each factor x^e expands into multisets of e subtrees.
                    let mut partial: Vec<(Rat, Vec<DiscTree>)> = vec![(mono.coeff.clone(), Vec::new())];
                    for f in &mono.factors {
                        let subs = expand(d, f.ray, (f.j, f.a), memo);
                        let choices = multisets(&subs, f.exp);
                        let mut next = Vec::new();
                        for (w, kids) in &partial {
                            for (cw, ckids) in &choices {
                                let mut all = kids.clone();
                                all.extend(ckids.iter().cloned());
                                next.push((w * cw, all));
                            }
                        }
                        partial = next;
                    }
                    for (weight, children) in partial {
                        if !weight.is_zero() {
                            out.push(DiscTree { ray, j: key.0, a: key.1, weight, children });
                        }
                    }
                }
            }
            out
        }
    };
    memo.insert((ray, key), out.clone());
    out
}

/// Multisets of size `e` drawn from `trees`, each with the multinomial
/// coefficient times the product of its weights.
fn multisets(trees: &[DiscTree], e: u32) -> Vec<(Rat, Vec<DiscTree>)> {
    let mut out = Vec::new();
    let mut counts = vec![0u32; trees.len()];
    fill(trees, e, 0, &mut counts, &mut out);
    out
}

fn fill(trees: &[DiscTree], left: u32, i: usize, counts: &mut Vec<u32>, out: &mut Vec<(Rat, Vec<DiscTree>)>) {
    if i == trees.len() {
        if left == 0 {
            let mut w = Rat::one();
            let mut coef = factorial(counts.iter().sum());
            let mut kids = Vec::new();
            for (t, &c) in trees.iter().zip(counts.iter()) {
                coef /= factorial(c);
                for _ in 0..c {
                    w *= &t.weight;
                    kids.push(t.clone());
                }
            }
            out.push((w * coef, kids));
        }
        return;
    }
    for c in 0..=left {
        counts[i] = c;
        fill(trees, left - c, i + 1, counts, out);
    }
    counts[i] = 0;
}

fn factorial(n: u32) -> Rat {
    (1..=n as i64).fold(Rat::one(), |acc, k| acc * int(k))
}

/// `Omega~trop(d gamma; u)` for `d >= 1`: the invariants of the product of
/// the walls through `u` whose direction is parallel to `gamma`.
pub fn omega_trop(d: &ScatteringDiagram, u: &RatPoint, gamma: ClassExponent) -> Result<BTreeMap<u32, Rat>> {
    let (dir, _) = gamma.m.primitive();
    let mut product: Option<WallFunction<Rat>> = None;
    for ray in &d.rays {
        for seg in ray.segments.iter().filter(|s| s.dir == dir && s.contains(u)) {
            let w = ray.wall_on(seg, d.order);
            product = Some(match product {
                None => w,
                Some(p) => WallFunction::new(dir, p.series().mul(w.series()))?,
            });
        }
    }
    let f = product.ok_or_else(|| Error::NoRayThroughPoint(Box::new(u.clone())))?;
    Ok(extract_omega_tilde(&f, gamma))
}
