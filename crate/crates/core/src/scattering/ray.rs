//! Rays of a scattering diagram.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::affine::{IntVec2, RatPoint, Segment};
use crate::poly::{Monomial, Poly};
use crate::scalar::{int, serde_rat, Rat};
use crate::series::WallFunction;

/// Key of one log-term of a wall: multiplicity `j` of the primitive
/// direction and grade `a`.
pub type TermKey = (u32, u32);

/// A wall function known in closed form, `1 + c t^grade z^dir`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seed {
    #[serde(with = "serde_rat")]
    pub coeff: Rat,
    pub grade: u32,
}

impl Seed {
    /// `Omega~` of the `j`-fold term: `(-1)^(j-1) c^j / j^2`.
    pub fn omega(&self, j: u32) -> Rat {
        let mut c = Rat::from_integer(1.into());
        for _ in 0..j {
            c *= &self.coeff;
        }
        let sign = if j % 2 == 1 { 1 } else { -1 };
        c * int(sign) / int((j * j) as i64)
    }
}

/// Where an initial ray comes from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InitialSource {
    /// One of the two rays along the invariant line of a singularity.
    Singularity { index: usize, sign: i8 },
    /// A ray of a hand-built configuration.
    Seeded { index: usize },
}

/// A factor `x^exp` of a provenance monomial, where `x` is `Omega~` of term
/// `(j, a)` of ray `ray`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ParentFactor {
    pub ray: usize,
    pub j: u32,
    pub a: u32,
    pub exp: u32,
}

/// One monomial of the polynomial expressing a term through its parents.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenanceMonomial {
    #[serde(with = "serde_rat")]
    pub coeff: Rat,
    pub factors: Vec<ParentFactor>,
}

/// How a term of a scattered ray is built from terms of the rays meeting at
/// its origin.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermProvenance {
    pub j: u32,
    pub a: u32,
    pub monomials: Vec<ProvenanceMonomial>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Provenance {
    Initial { source: InitialSource },
    Scattered { point: RatPoint, terms: Vec<TermProvenance> },
}

impl Provenance {
    /// Distinct parent rays with the total number of factors drawn from each.
    pub fn parents(&self) -> BTreeMap<usize, u32> {
        let mut out = BTreeMap::new();
        if let Provenance::Scattered { terms, .. } = self {
            for t in terms {
                for m in &t.monomials {
                    for f in &m.factors {
                        *out.entry(f.ray).or_insert(0) += f.exp;
                    }
                }
            }
        }
        out
    }

    pub fn term(&self, key: TermKey) -> Option<&TermProvenance> {
        match self {
            Provenance::Scattered { terms, .. } => terms.iter().find(|t| (t.j, t.a) == key),
            Provenance::Initial { .. } => None,
        }
    }
}

/// A ray `origin + s dir` with its wall function, stored as the
/// log-invariants `Omega~(j, a)` so that it can be transported along cuts by
/// changing the direction alone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ray {
    pub id: usize,
    pub origin: RatPoint,
    pub dir: IntVec2,
    pub segments: Vec<Segment>,
    pub omega: BTreeMap<TermKey, Rat>,
    pub seed: Option<Seed>,
    pub provenance: Provenance,
}

impl Ray {
    /// Smallest grade of a nonzero term.
    pub fn min_grade(&self) -> Option<u32> {
        self.omega.keys().map(|&(_, a)| a).min()
    }

    /// Fills in the closed-form terms of a seeded ray up to grade `order`.
    pub fn extend_seed(&mut self, order: u32) {
        if let Some(seed) = &self.seed {
            let mut j = 1;
            while j * seed.grade <= order {
                let w = seed.omega(j);
                if !w.is_zero() {
                    self.omega.insert((j, j * seed.grade), w);
                }
                j += 1;
            }
        }
    }

    /// Wall function on a segment, truncated at `order`.
    pub fn wall_on(&self, seg: &Segment, order: u32) -> WallFunction<Rat> {
        WallFunction::from_omega(
            seg.dir,
            self.omega.iter().filter(|((_, a), _)| *a <= order).map(|(k, v)| (*k, v.clone())),
            order,
        )
    }

    /// Wall function at the origin chart.
    pub fn wall(&self, order: u32) -> WallFunction<Rat> {
        self.wall_on(&self.segments[0], order)
    }

    /// The segment containing `p`, with its parameter.
    pub fn locate(&self, p: &RatPoint) -> Option<(usize, Rat)> {
        self.segments.iter().enumerate().find_map(|(i, s)| s.locate(p).map(|t| (i, t)))
    }
}

/// Converts a stored provenance term into a polynomial using `var` to name
/// each parent factor.
pub(crate) fn provenance_poly(term: &TermProvenance, var: &dyn Fn(usize, u32, u32) -> Poly) -> Poly {
    let mut out = Poly::zero();
    for m in &term.monomials {
        let mut acc = Poly::constant(m.coeff.clone());
        for f in &m.factors {
            let x = var(f.ray, f.j, f.a);
            for _ in 0..f.exp {
                acc = acc.times(&x);
            }
        }
        out.add_assign(&acc);
    }
    out
}

/// Converts a polynomial whose variables index `table` into stored form.
pub(crate) fn poly_to_provenance(j: u32, a: u32, p: &Poly, table: &[(usize, u32, u32)]) -> TermProvenance {
    let monomials = p
        .terms()
        .map(|(m, c): (&Monomial, &Rat)| {
            let mut factors: Vec<ParentFactor> =
                m.0.iter()
                    .map(|&(v, e)| {
                        let (ray, j, a) = table[v as usize];
                        ParentFactor { ray, j, a, exp: e }
                    })
                    .collect();
            factors.sort();
            ProvenanceMonomial { coeff: c.clone(), factors }
        })
        .collect();
    TermProvenance { j, a, monomials }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn seed_omegas_are_multiple_cover_weights() {
        let s = Seed { coeff: int(1), grade: 1 };
        assert_eq!(s.omega(1), int(1));
        assert_eq!(s.omega(2), rat(-1, 4));
        assert_eq!(s.omega(3), rat(1, 9));
    }
}
