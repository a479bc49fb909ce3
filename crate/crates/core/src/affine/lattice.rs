//! Integral vectors, SL(2,Z) gluing matrices and rational points.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::scalar::{int, Rat};

/// A vector of the integral lattice `Z^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct IntVec2 {
    pub x: i64,
    pub y: i64,
}

impl From<[i64; 2]> for IntVec2 {
    fn from(a: [i64; 2]) -> Self {
        IntVec2::new(a[0], a[1])
    }
}

impl From<IntVec2> for [i64; 2] {
    fn from(v: IntVec2) -> Self {
        [v.x, v.y]
    }
}

impl IntVec2 {
    pub const ZERO: IntVec2 = IntVec2 { x: 0, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        IntVec2 { x, y }
    }

    pub fn is_zero(self) -> bool {
        self.x == 0 && self.y == 0
    }

    /// The symplectic pairing `a.x b.y - a.y b.x`.
    pub fn pairing(self, other: IntVec2) -> i64 {
        self.x * other.y - self.y * other.x
    }

    pub fn dot(self, other: IntVec2) -> i64 {
        self.x * other.x + self.y * other.y
    }

    /// Lattice length, i.e. the gcd of the coordinates.
    pub fn index(self) -> i64 {
        self.x.gcd(&self.y)
    }

    /// The primitive vector in the same direction together with the index.
    pub fn primitive(self) -> (IntVec2, i64) {
        let g = self.index();
        if g == 0 {
            return (self, 0);
        }
        (IntVec2::new(self.x / g, self.y / g), g)
    }

    pub fn is_primitive(self) -> bool {
        self.index() == 1
    }

    pub fn scale(self, k: i64) -> IntVec2 {
        IntVec2::new(self.x * k, self.y * k)
    }

    pub fn to_rat(self) -> RatVec {
        RatVec::new(int(self.x), int(self.y))
    }

    /// True when `self` is a positive multiple of `other`.
    pub fn positively_parallel(self, other: IntVec2) -> bool {
        self.pairing(other) == 0 && self.dot(other) > 0
    }

    /// Rotation by a quarter turn counterclockwise.
    pub fn rot90(self) -> IntVec2 {
        IntVec2::new(-self.y, self.x)
    }
}

impl Add for IntVec2 {
    type Output = IntVec2;
    fn add(self, o: IntVec2) -> IntVec2 {
        IntVec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for IntVec2 {
    type Output = IntVec2;
    fn sub(self, o: IntVec2) -> IntVec2 {
        IntVec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for IntVec2 {
    type Output = IntVec2;
    fn neg(self) -> IntVec2 {
        IntVec2::new(-self.x, -self.y)
    }
}

impl fmt::Display for IntVec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// An integer 2x2 matrix `[[a, b], [c, d]]` acting on column vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[[i64; 2]; 2]", into = "[[i64; 2]; 2]")]
pub struct GluingMatrix {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl From<[[i64; 2]; 2]> for GluingMatrix {
    fn from(m: [[i64; 2]; 2]) -> Self {
        GluingMatrix::new(m[0][0], m[0][1], m[1][0], m[1][1])
    }
}

impl From<GluingMatrix> for [[i64; 2]; 2] {
    fn from(m: GluingMatrix) -> Self {
        [[m.a, m.b], [m.c, m.d]]
    }
}

impl GluingMatrix {
    pub const IDENTITY: GluingMatrix = GluingMatrix { a: 1, b: 0, c: 0, d: 1 };

    pub const fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        GluingMatrix { a, b, c, d }
    }

    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> i64 {
        self.a + self.d
    }

    /// Inverse of a determinant-one matrix.
    pub fn inverse(&self) -> GluingMatrix {
        debug_assert_eq!(self.det(), 1);
        GluingMatrix::new(self.d, -self.b, -self.c, self.a)
    }

    pub fn apply(&self, v: IntVec2) -> IntVec2 {
        IntVec2::new(self.a * v.x + self.b * v.y, self.c * v.x + self.d * v.y)
    }

    pub fn apply_rat(&self, v: &RatVec) -> RatVec {
        RatVec::new(&v.x * int(self.a) + &v.y * int(self.b), &v.x * int(self.c) + &v.y * int(self.d))
    }

    /// Action on covectors written as row vectors: `w -> w M^{-1}`.
    pub fn apply_covector(&self, w: IntVec2) -> IntVec2 {
        let inv = self.inverse();
        IntVec2::new(w.x * inv.a + w.y * inv.c, w.x * inv.b + w.y * inv.d)
    }

    pub fn is_identity(&self) -> bool {
        *self == GluingMatrix::IDENTITY
    }
}

impl Mul for GluingMatrix {
    type Output = GluingMatrix;
    fn mul(self, o: GluingMatrix) -> GluingMatrix {
        GluingMatrix::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

/// A vector with rational coordinates.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RatVec {
    pub x: Rat,
    pub y: Rat,
}

impl RatVec {
    pub fn new(x: Rat, y: Rat) -> Self {
        RatVec { x, y }
    }

    pub fn cross(&self, o: &RatVec) -> Rat {
        &self.x * &o.y - &self.y * &o.x
    }

    pub fn dot(&self, o: &RatVec) -> Rat {
        &self.x * &o.x + &self.y * &o.y
    }

    pub fn scale(&self, t: &Rat) -> RatVec {
        RatVec::new(&self.x * t, &self.y * t)
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn neg(&self) -> RatVec {
        RatVec::new(-&self.x, -&self.y)
    }

    /// Half-plane index used for exact angular sorting: 0 for angles in
    /// `[0, pi)`, 1 for `[pi, 2 pi)`.
    fn half(&self) -> u8 {
        if self.y.is_positive() || (self.y.is_zero() && self.x.is_positive()) {
            0
        } else {
            1
        }
    }

    /// Compares counterclockwise angles measured from the positive x-axis.
    pub fn angle_cmp(&self, o: &RatVec) -> std::cmp::Ordering {
        self.half().cmp(&o.half()).then_with(|| Rat::zero().cmp(&self.cross(o)))
    }
}

/// A point with rational coordinates.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RatPoint {
    pub x: Rat,
    pub y: Rat,
}

impl RatPoint {
    pub fn new(x: Rat, y: Rat) -> Self {
        RatPoint { x, y }
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        RatPoint::new(int(x), int(y))
    }

    pub fn origin() -> Self {
        RatPoint::from_ints(0, 0)
    }

    pub fn sub(&self, o: &RatPoint) -> RatVec {
        RatVec::new(&self.x - &o.x, &self.y - &o.y)
    }

    pub fn offset(&self, v: &RatVec) -> RatPoint {
        RatPoint::new(&self.x + &v.x, &self.y + &v.y)
    }

    /// `self + t v`.
    pub fn along(&self, v: &RatVec, t: &Rat) -> RatPoint {
        RatPoint::new(&self.x + &v.x * t, &self.y + &v.y * t)
    }

    /// Maximum norm, used for the bounding box.
    pub fn max_norm(&self) -> Rat {
        let (ax, ay) = (self.x.abs(), self.y.abs());
        if ax > ay {
            ax
        } else {
            ay
        }
    }
}

impl fmt::Display for RatPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", crate::scalar::fmt_rat(&self.x), crate::scalar::fmt_rat(&self.y))
    }
}

fn pair_to_strings(x: &Rat, y: &Rat) -> [String; 2] {
    [crate::scalar::fmt_rat(x), crate::scalar::fmt_rat(y)]
}

fn strings_to_pair<E: serde::de::Error>(p: [String; 2]) -> Result<(Rat, Rat), E> {
    let parse = |s: &str| crate::scalar::parse_rat(s).ok_or_else(|| E::custom(format!("invalid rational {s:?}")));
    Ok((parse(&p[0])?, parse(&p[1])?))
}

impl Serialize for RatPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        pair_to_strings(&self.x, &self.y).serialize(s)
    }
}

impl<'de> Deserialize<'de> for RatPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (x, y) = strings_to_pair(<[String; 2]>::deserialize(d)?)?;
        Ok(RatPoint::new(x, y))
    }
}

impl Serialize for RatVec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        pair_to_strings(&self.x, &self.y).serialize(s)
    }
}

impl<'de> Deserialize<'de> for RatVec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (x, y) = strings_to_pair(<[String; 2]>::deserialize(d)?)?;
        Ok(RatVec::new(x, y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_is_antisymmetric() {
        let a = IntVec2::new(1, -1);
        let b = IntVec2::new(2, 1);
        assert_eq!(a.pairing(b), 3);
        assert_eq!(b.pairing(a), -3);
    }

    #[test]
    fn inverse_round_trips() {
        let m = GluingMatrix::new(-1, 4, -1, 3);
        assert!((m * m.inverse()).is_identity());
        assert_eq!(m.inverse(), GluingMatrix::new(3, -4, 1, -1));
    }

    #[test]
    fn primitive_and_index() {
        assert_eq!(IntVec2::new(6, -4).primitive(), (IntVec2::new(3, -2), 2));
        assert_eq!(IntVec2::new(0, -5).primitive(), (IntVec2::new(0, -1), 5));
    }

    #[test]
    fn angular_order() {
        let dirs: Vec<RatVec> = [(1, 0), (1, 1), (0, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)]
            .iter()
            .map(|&(x, y)| IntVec2::new(x, y).to_rat())
            .collect();
        for w in dirs.windows(2) {
            assert_eq!(w[0].angle_cmp(&w[1]), std::cmp::Ordering::Less);
        }
    }
}
