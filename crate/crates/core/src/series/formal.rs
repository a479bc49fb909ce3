//! Truncated formal series in `z^m t^a`.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::affine::IntVec2;
use crate::error::{Error, Result};
use crate::scalar::{fmt_rat, parse_rat, Rat, Scalar};

/// The exponent of a monomial `z^m t^a`: a lattice class together with its
/// grade (the power of the formal variable `t`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClassExponent {
    pub a: u32,
    pub m: IntVec2,
}

impl std::ops::Add for ClassExponent {
    type Output = ClassExponent;

    fn add(self, o: ClassExponent) -> ClassExponent {
        ClassExponent::new(self.m + o.m, self.a + o.a)
    }
}

impl ClassExponent {
    pub const ZERO: ClassExponent = ClassExponent { a: 0, m: IntVec2::ZERO };

    pub fn new(m: IntVec2, a: u32) -> Self {
        ClassExponent { a, m }
    }

    pub fn scale(self, k: u32) -> ClassExponent {
        ClassExponent::new(self.m.scale(k as i64), self.a * k)
    }
}

/// A series `sum c_e z^m t^a` truncated modulo `t^(order+1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FormalSeries<S> {
    terms: BTreeMap<ClassExponent, S>,
    order: u32,
}

impl<S: Scalar> FormalSeries<S> {
    pub fn zero(order: u32) -> Self {
        FormalSeries { terms: BTreeMap::new(), order }
    }

    pub fn one(order: u32) -> Self {
        Self::monomial(ClassExponent::ZERO, S::one(), order)
    }

    pub fn monomial(e: ClassExponent, c: S, order: u32) -> Self {
        let mut s = Self::zero(order);
        s.add_term(e, c);
        s
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (ClassExponent, S)>, order: u32) -> Self {
        let mut s = Self::zero(order);
        for (e, c) in terms {
            s.add_term(e, c);
        }
        s
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ClassExponent, &S)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &ClassExponent) -> Option<&S> {
        self.terms.get(e)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `c z^e`, dropping it if its grade exceeds the truncation order.
    pub fn add_term(&mut self, e: ClassExponent, c: S) {
        if e.a > self.order || c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                o.get_mut().add_assign_ref(&c);
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.truncate(self.order.min(o.order));
        for (e, c) in &o.terms {
            out.add_term(*e, c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        FormalSeries { terms: self.terms.iter().map(|(e, c)| (*e, c.neg_ref())).collect(), order: self.order }
    }

    pub fn scale(&self, k: &S) -> Self {
        Self::from_terms(self.terms.iter().map(|(e, c)| (*e, c.mul_ref(k))), self.order)
    }

    pub fn scale_rat(&self, r: &Rat) -> Self {
        Self::from_terms(self.terms.iter().map(|(e, c)| (*e, c.scale_rat(r))), self.order)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let order = self.order.min(o.order);
        let mut out = Self::zero(order);
        for (e1, c1) in &self.terms {
            if e1.a > order {
                break;
            }
            for (e2, c2) in &o.terms {
                if e1.a + e2.a > order {
                    break;
                }
                out.add_term(*e1 + *e2, c1.mul_ref(c2));
            }
        }
        out
    }

    /// Multiplies by the monomial `c z^e`.
    pub fn shift(&self, e: ClassExponent, c: &S) -> Self {
        Self::from_terms(self.terms.iter().map(|(k, v)| (*k + e, v.mul_ref(c))), self.order)
    }

    pub fn truncate(&self, order: u32) -> Self {
        FormalSeries {
            terms: self.terms.iter().filter(|(e, _)| e.a <= order).map(|(e, c)| (*e, c.clone())).collect(),
            order: order.min(self.order),
        }
    }

    /// The terms of grade exactly `a`.
    pub fn grade_part(&self, a: u32) -> Self {
        Self::from_terms(self.terms.iter().filter(|(e, _)| e.a == a).map(|(e, c)| (*e, c.clone())), self.order)
    }

    /// Lowest grade among the terms, if any.
    pub fn min_grade(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.a).min()
    }

    /// Applies a linear map to every class.
    pub fn map_classes(&self, f: impl Fn(IntVec2) -> IntVec2) -> Self {
        Self::from_terms(self.terms.iter().map(|(e, c)| (ClassExponent::new(f(e.m), e.a), c.clone())), self.order)
    }

    /// True when every term has positive grade.
    pub fn is_topologically_nilpotent(&self) -> bool {
        self.terms.keys().all(|e| e.a >= 1)
    }

    /// `self - 1` when `self` has constant term one and nilpotent remainder.
    fn unit_remainder(&self) -> Result<Self> {
        let mut u = self.clone();
        match u.terms.remove(&ClassExponent::ZERO) {
            Some(c) if c.is_one() => {}
            _ => return Err(Error::BadConstantTerm),
        }
        if !u.is_topologically_nilpotent() {
            return Err(Error::BadConstantTerm);
        }
        Ok(u)
    }

    pub fn log(&self) -> Result<Self> {
        let u = self.unit_remainder()?;
        let mut out = Self::zero(self.order);
        let mut power = u.clone();
        let mut k: i64 = 1;
        while !power.is_empty() {
            let coeff = Rat::new(((-1i64).pow((k - 1) as u32)).into(), k.into());
            out = out.add(&power.scale_rat(&coeff));
            power = power.mul(&u);
            k += 1;
        }
        Ok(out)
    }

    pub fn exp(&self) -> Result<Self> {
        if !self.is_topologically_nilpotent() {
            return Err(Error::BadConstantTerm);
        }
        let mut out = Self::one(self.order);
        let mut term = Self::one(self.order);
        let mut k: i64 = 1;
        loop {
            term = term.mul(self).scale_rat(&Rat::new(1.into(), k.into()));
            if term.is_empty() {
                break;
            }
            out = out.add(&term);
            k += 1;
        }
        Ok(out)
    }

    /// Multiplicative inverse by the geometric series in `self - 1`.
    pub fn inverse(&self) -> Result<Self> {
        let u = self.unit_remainder()?;
        let minus_u = u.neg();
        let mut out = Self::one(self.order);
        let mut power = Self::one(self.order);
        loop {
            power = power.mul(&minus_u);
            if power.is_empty() {
                break;
            }
            out = out.add(&power);
        }
        Ok(out)
    }

    pub fn pow(&self, n: i64) -> Result<Self> {
        let base = if n < 0 { self.inverse()? } else { self.clone() };
        let mut k = n.unsigned_abs();
        let mut acc = Self::one(self.order);
        let mut sq = base;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&sq);
            }
            k >>= 1;
            if k > 0 {
                sq = sq.mul(&sq);
            }
        }
        Ok(acc)
    }

    /// Converts the coefficients into another scalar ring.
    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T) -> FormalSeries<T> {
        FormalSeries::from_terms(self.terms.iter().map(|(e, c)| (*e, f(c))), self.order)
    }
}

/// One serialized term of a rational series.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesTerm {
    pub m: IntVec2,
    pub a: u32,
    pub coeff: String,
}

impl FormalSeries<Rat> {
    pub fn to_term_list(&self) -> Vec<SeriesTerm> {
        self.terms.iter().map(|(e, c)| SeriesTerm { m: e.m, a: e.a, coeff: fmt_rat(c) }).collect()
    }

    pub fn from_term_list(list: &[SeriesTerm], order: u32) -> Result<Self> {
        let mut s = Self::zero(order);
        for t in list {
            let c = parse_rat(&t.coeff).ok_or_else(|| Error::Malformed(format!("bad coefficient {:?}", t.coeff)))?;
            s.add_term(ClassExponent::new(t.m, t.a), c);
        }
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_term_list()).expect("series serializes")
    }

    pub fn from_json(s: &str, order: u32) -> Result<Self> {
        let list: Vec<SeriesTerm> = serde_json::from_str(s).map_err(|e| Error::Malformed(e.to_string()))?;
        Self::from_term_list(&list, order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn e(x: i64, y: i64, a: u32) -> ClassExponent {
        ClassExponent::new(IntVec2::new(x, y), a)
    }

    fn one_plus(x: i64, y: i64, a: u32, order: u32) -> FormalSeries<Rat> {
        FormalSeries::from_terms([(ClassExponent::ZERO, int(1)), (e(x, y, a), int(1))], order)
    }

    #[test]
    fn log_of_one_plus_u() {
        let f = one_plus(1, 0, 1, 4);
        let l = f.log().unwrap();
        assert_eq!(l.coeff(&e(1, 0, 1)), Some(&int(1)));
        assert_eq!(l.coeff(&e(2, 0, 2)), Some(&rat(-1, 2)));
        assert_eq!(l.coeff(&e(3, 0, 3)), Some(&rat(1, 3)));
        assert_eq!(l.coeff(&e(4, 0, 4)), Some(&rat(-1, 4)));
        assert_eq!(l.len(), 4);
    }

    #[test]
    fn exp_log_round_trip() {
        let f = FormalSeries::from_terms(
            [(ClassExponent::ZERO, int(1)), (e(1, 2, 1), rat(3, 2)), (e(0, 1, 2), int(-5))],
            5,
        );
        assert_eq!(f.log().unwrap().exp().unwrap(), f);
    }

    #[test]
    fn negative_power_is_inverse() {
        let f = one_plus(1, 1, 1, 6);
        let prod = f.pow(3).unwrap().mul(&f.pow(-3).unwrap());
        assert_eq!(prod, FormalSeries::one(6));
    }

    #[test]
    fn rejects_bad_constant() {
        let f = FormalSeries::from_terms([(ClassExponent::ZERO, int(2))], 3);
        assert_eq!(f.log(), Err(Error::BadConstantTerm));
        let g = FormalSeries::from_terms([(ClassExponent::ZERO, int(1)), (e(1, 0, 0), int(1))], 3);
        assert_eq!(g.log(), Err(Error::BadConstantTerm));
    }

    #[test]
    fn json_round_trip() {
        let f = one_plus(2, -1, 2, 6).pow(3).unwrap();
        let s = f.to_json();
        assert_eq!(FormalSeries::from_json(&s, 6).unwrap(), f);
    }

    #[test]
    fn float_instantiation_agrees() {
        let f = one_plus(1, 0, 1, 5);
        let g = f.map_scalars(<f64 as Scalar>::from_rat);
        let lf = g.log().unwrap();
        let exact = f.log().unwrap();
        for (k, v) in exact.terms() {
            let approx = lf.coeff(k).copied().unwrap();
            assert!((approx - <f64 as Scalar>::from_rat(v)).abs() < 1e-12);
        }
    }
}
