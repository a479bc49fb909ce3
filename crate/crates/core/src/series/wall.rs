//! Wall functions and the automorphisms they induce.

use std::collections::{BTreeMap, HashMap};

use crate::affine::{GluingMatrix, IntVec2};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::formal::{ClassExponent, FormalSeries};

/// A function `f = 1 + sum c z^(j d) t^a` attached to a wall with primitive
/// direction `d`.
#[derive(Clone, Debug, PartialEq)]
pub struct WallFunction<S> {
    dir: IntVec2,
    series: FormalSeries<S>,
}

impl<S: Scalar> WallFunction<S> {
    pub fn new(dir: IntVec2, series: FormalSeries<S>) -> Result<Self> {
        if !dir.is_primitive() {
            return Err(Error::NotAWallFunction(format!("direction {dir} is not primitive")));
        }
        match series.coeff(&ClassExponent::ZERO) {
            Some(c) if c.is_one() => {}
            _ => return Err(Error::BadConstantTerm),
        }
        for (e, _) in series.terms() {
            if *e == ClassExponent::ZERO {
                continue;
            }
            let (prim, j) = e.m.primitive();
            if e.a == 0 || j == 0 || prim != dir {
                return Err(Error::NotAWallFunction(format!(
                    "term z^{} t^{} is not a positive multiple of {dir} with positive grade",
                    e.m, e.a
                )));
            }
        }
        Ok(WallFunction { dir, series })
    }

    /// `exp(sum_(j,a) j w_(j,a) z^(j d) t^a)` for the given log-coefficients `w`.
    pub fn from_omega(dir: IntVec2, omega: impl IntoIterator<Item = ((u32, u32), S)>, order: u32) -> Self {
        let log = FormalSeries::from_terms(
            omega
                .into_iter()
                .map(|((j, a), w)| (ClassExponent::new(dir.scale(j as i64), a), w.mul_ref(&S::from_int(j as i64)))),
            order,
        );
        WallFunction { dir, series: log.exp().expect("positive grades") }
    }

    pub fn dir(&self) -> IntVec2 {
        self.dir
    }

    pub fn series(&self) -> &FormalSeries<S> {
        &self.series
    }

    pub fn order(&self) -> u32 {
        self.series.order()
    }

    /// Coefficients of `log f`, keyed by multiplicity and grade.
    pub fn log_terms(&self) -> BTreeMap<(u32, u32), S> {
        let log = self.series.log().expect("validated wall function");
        log.terms().map(|(e, c)| (((e.m.index()) as u32, e.a), c.clone())).collect()
    }

    /// The same wall expressed in the chart reached by the linear map `m`.
    pub fn transported(&self, m: &GluingMatrix) -> Self {
        WallFunction { dir: m.apply(self.dir), series: self.series.map_classes(|v| m.apply(v)) }
    }

    pub fn truncate(&self, order: u32) -> Self {
        WallFunction { dir: self.dir, series: self.series.truncate(order) }
    }
}

/// The automorphism `z^m -> z^m f^(sign <m, d>)` for a wall crossed with the
/// given orientation sign.
#[derive(Clone, Debug)]
pub struct WallCrossing<S> {
    pub wall: WallFunction<S>,
    pub sign: i64,
}

impl<S: Scalar> WallCrossing<S> {
    pub fn new(wall: WallFunction<S>, sign: i64) -> Self {
        WallCrossing { wall, sign }
    }

    pub fn inverse(&self) -> Self {
        WallCrossing { wall: self.wall.clone(), sign: -self.sign }
    }

    pub fn apply(&self, g: &FormalSeries<S>) -> FormalSeries<S> {
        let order = g.order().min(self.wall.order());
        let mut powers: HashMap<i64, FormalSeries<S>> = HashMap::new();
        let mut out = FormalSeries::zero(order);
        for (e, c) in g.terms() {
            let n = self.sign * e.m.pairing(self.wall.dir);
            let p = powers
                .entry(n)
                .or_insert_with(|| self.wall.series.pow(n).expect("validated wall function").truncate(order));
            for (k, v) in p.truncate(order.saturating_sub(e.a)).terms() {
                out.add_term(*e + *k, c.mul_ref(v));
            }
        }
        out
    }
}

/// Applies `K_1 o K_2 o ... o K_s`, i.e. the last crossing first.
pub fn compose_apply<S: Scalar>(crossings: &[WallCrossing<S>], g: &FormalSeries<S>) -> FormalSeries<S> {
    crossings.iter().rev().fold(g.clone(), |acc, k| k.apply(&acc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat, Rat};

    fn e(x: i64, y: i64, a: u32) -> ClassExponent {
        ClassExponent::new(IntVec2::new(x, y), a)
    }

    fn simple_wall(x: i64, y: i64, order: u32) -> WallFunction<Rat> {
        let s = FormalSeries::from_terms([(ClassExponent::ZERO, int(1)), (e(x, y, 1), int(1))], order);
        WallFunction::new(IntVec2::new(x, y), s).unwrap()
    }

    #[test]
    fn rejects_off_direction_terms() {
        let s = FormalSeries::from_terms([(ClassExponent::ZERO, int(1)), (e(1, 1, 1), int(1))], 3);
        assert!(matches!(WallFunction::new(IntVec2::new(1, 0), s), Err(Error::NotAWallFunction(_))));
    }

    #[test]
    fn crossing_and_inverse_cancel() {
        let k = WallCrossing::new(simple_wall(1, 0, 5), 1);
        let g = FormalSeries::from_terms([(e(0, 1, 0), int(1)), (e(1, 2, 1), rat(2, 3))], 5);
        assert_eq!(k.inverse().apply(&k.apply(&g)), g);
    }

    #[test]
    fn single_crossing_on_generator() {
        // K(z^(0,1)) = z^(0,1) (1 + t z^(1,0))^(<(0,1),(1,0)>) = z^(0,1) (1 + t x)^(-1).
        let k = WallCrossing::new(simple_wall(1, 0, 3), 1);
        let g = FormalSeries::monomial(e(0, 1, 0), int(1), 3);
        let out = k.apply(&g);
        assert_eq!(out.coeff(&e(1, 1, 1)), Some(&int(-1)));
        assert_eq!(out.coeff(&e(2, 1, 2)), Some(&int(1)));
    }

    #[test]
    fn omega_constructor_matches_log() {
        let w = WallFunction::from_omega(IntVec2::new(1, 0), [((1, 1), int(3)), ((2, 2), rat(21, 4))], 4);
        let logs = w.log_terms();
        assert_eq!(logs[&(1, 1)], int(3));
        assert_eq!(logs[&(2, 2)], rat(21, 2));
    }
}
