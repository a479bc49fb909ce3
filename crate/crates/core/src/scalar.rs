//! Coefficient rings for formal series.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::poly::Poly;

/// Exact rational numbers.
pub type Rat = BigRational;

/// Coefficient ring of a formal series. Every scalar contains the rationals.
pub trait Scalar: Clone + PartialEq + Debug + Send + Sync + Zero + One + 'static {
    fn from_rat(r: &Rat) -> Self;
    fn add_ref(&self, other: &Self) -> Self;
    fn sub_ref(&self, other: &Self) -> Self;
    fn mul_ref(&self, other: &Self) -> Self;
    fn neg_ref(&self) -> Self;

    fn from_int(n: i64) -> Self {
        Self::from_rat(&Rat::from_integer(BigInt::from(n)))
    }

    fn add_assign_ref(&mut self, other: &Self) {
        *self = self.add_ref(other);
    }

    fn scale_rat(&self, r: &Rat) -> Self {
        self.mul_ref(&Self::from_rat(r))
    }
}

impl Scalar for Rat {
    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self += other;
    }
    fn scale_rat(&self, r: &Rat) -> Self {
        self * r
    }
}

impl Scalar for f64 {
    fn from_rat(r: &Rat) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn neg_ref(&self) -> Self {
        -self
    }
}

impl Scalar for Poly {
    fn from_rat(r: &Rat) -> Self {
        Poly::constant(r.clone())
    }
    fn add_ref(&self, other: &Self) -> Self {
        self.plus(other)
    }
    fn sub_ref(&self, other: &Self) -> Self {
        self.plus(&other.neg())
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self.times(other)
    }
    fn neg_ref(&self) -> Self {
        self.neg()
    }
    fn add_assign_ref(&mut self, other: &Self) {
        self.add_assign(other);
    }
    fn scale_rat(&self, r: &Rat) -> Self {
        self.scale(r)
    }
}

/// Builds the rational `n / d`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Builds the integer `n` as a rational.
pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Renders a rational as `p` or `p/q`.
pub fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p`, `p/q` or a terminating decimal such as `-0.25`.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rat::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.starts_with('-');
        let whole_abs = whole.trim_start_matches(['-', '+']);
        if !frac.chars().all(|c| c.is_ascii_digit()) || frac.is_empty() && whole_abs.is_empty() {
            return None;
        }
        let digits = format!("{}{}", if whole_abs.is_empty() { "0" } else { whole_abs }, frac);
        let n: BigInt = digits.parse().ok()?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let r = Rat::new(n, d);
        return Some(if negative { -r } else { r });
    }
    let n: BigInt = s.parse().ok()?;
    Some(Rat::from_integer(n))
}

/// True when `r` is an integer.
pub fn is_integral(r: &Rat) -> bool {
    r.denom().is_one()
}

/// Sign of a rational as -1, 0 or 1.
pub fn sign(r: &Rat) -> i32 {
    if r.is_positive() {
        1
    } else if r.is_negative() {
        -1
    } else {
        0
    }
}

/// Serde adapters writing rationals as fraction strings.
pub mod serde_rat {
    use super::{fmt_rat, parse_rat, Rat};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rat(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        parse_rat(&s).ok_or_else(|| D::Error::custom(format!("invalid rational {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rat("3/4"), Some(rat(3, 4)));
        assert_eq!(parse_rat("-2"), Some(int(-2)));
        assert_eq!(parse_rat("0.01"), Some(rat(1, 100)));
        assert_eq!(parse_rat("-.5"), Some(rat(-1, 2)));
        assert_eq!(parse_rat("1/0"), None);
        assert_eq!(parse_rat("x"), None);
    }

    #[test]
    fn format_round_trip() {
        for r in [rat(-9, 2), int(7), rat(21, 4), int(0)] {
            assert_eq!(parse_rat(&fmt_rat(&r)), Some(r));
        }
    }
}
