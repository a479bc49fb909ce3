//! Sparse multivariate polynomials over the rationals.
//!
//! Used as a symbolic coefficient ring: each variable stands for one
//! log-coefficient of a wall, so scattering a symbolic diagram records how
//! every new term is assembled from its parents.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::scalar::Rat;

/// A monomial as sorted `(variable, exponent)` pairs with positive exponents.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(pub Vec<(u32, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: u32) -> Self {
        Monomial(vec![(v, 1)])
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }
}

/// A polynomial `sum c_k x^{e_k}` with nonzero coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rat>,
}

impl Poly {
    pub fn constant(c: Rat) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Monomial::one(), c);
        }
        p
    }

    pub fn var(v: u32) -> Self {
        Poly::term(Monomial::var(v), Rat::one())
    }

    pub fn term(m: Monomial, c: Rat) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn accumulate(&mut self, m: Monomial, c: Rat) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                if !c.is_zero() {
                    e.insert(c);
                }
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_assign(&mut self, other: &Poly) {
        for (m, c) in &other.terms {
            self.accumulate(m.clone(), c.clone());
        }
    }

    pub fn plus(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn scale(&self, r: &Rat) -> Poly {
        if r.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * r)).collect() }
    }

    pub fn times(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.accumulate(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    /// Evaluates with `values[v]` substituted for variable `v`.
    pub fn eval(&self, values: &dyn Fn(u32) -> Rat) -> Rat {
        let mut total = Rat::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for &(var, e) in &m.0 {
                let x = values(var);
                for _ in 0..e {
                    v *= &x;
                }
            }
            total += v;
        }
        total
    }

    /// Replaces each variable for which `sub` returns a polynomial.
    pub fn substitute(&self, sub: &dyn Fn(u32) -> Option<Poly>) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut acc = Poly::constant(c.clone());
            for &(var, e) in &m.0 {
                let factor = sub(var).unwrap_or_else(|| Poly::var(var));
                for _ in 0..e {
                    acc = acc.times(&factor);
                }
            }
            out.add_assign(&acc);
        }
        out
    }
}

impl std::ops::Add for Poly {
    type Output = Poly;
    fn add(self, o: Poly) -> Poly {
        self.plus(&o)
    }
}

impl std::ops::Mul for Poly {
    type Output = Poly;
    fn mul(self, o: Poly) -> Poly {
        self.times(&o)
    }
}

impl Zero for Poly {
    fn zero() -> Self {
        Poly::default()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for Poly {
    fn one() -> Self {
        Poly::constant(Rat::one())
    }
}
