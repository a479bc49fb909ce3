//! Log-BPS invariants of wall functions and their Möbius inversion.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Serialize;

use crate::scalar::{int, is_integral, Rat};

use super::formal::ClassExponent;
use super::wall::WallFunction;

/// `Omega~(d gamma)` for `d >= 1`, read off from `log f = sum_d d Omega~(d gamma) z^(d gamma)`.
pub fn extract_omega_tilde(f: &WallFunction<Rat>, gamma: ClassExponent) -> BTreeMap<u32, Rat> {
    let logs = f.log_terms();
    let (prim, j0) = gamma.m.primitive();
    assert_eq!(prim, f.dir(), "class must be parallel to the wall");
    let mut out = BTreeMap::new();
    let mut d = 1u32;
    while gamma.a * d <= f.order() {
        let key = (j0 as u32 * d, gamma.a * d);
        if let Some(c) = logs.get(&key) {
            out.insert(d, c / int(d as i64));
        }
        d += 1;
    }
    out
}

/// `Omega~(d gamma)` summed over all grades, for `gamma = j0 * dir`.
pub fn omega_by_multiple(f: &WallFunction<Rat>, j0: u32) -> BTreeMap<u32, Rat> {
    let mut out: BTreeMap<u32, Rat> = BTreeMap::new();
    for ((j, _), c) in f.log_terms() {
        if j % j0 == 0 {
            let d = j / j0;
            *out.entry(d).or_insert_with(Rat::zero) += c / int(j as i64);
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// The Möbius function.
pub fn mobius(n: u32) -> i64 {
    let mut n = n;
    let mut result = 1;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

/// An inverted invariant together with its integrality.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BpsValue {
    #[serde(with = "crate::scalar::serde_rat")]
    pub value: Rat,
    pub integral: bool,
}

/// `Omega(d gamma) = - sum_(k | d) c^(d/k) mu(k) Omega~((d/k) gamma) / k^2`.
pub fn mobius_invert(omega_tilde: &BTreeMap<u32, Rat>, c: i64) -> BTreeMap<u32, BpsValue> {
    let max_d = omega_tilde.keys().copied().max().unwrap_or(0);
    let mut out = BTreeMap::new();
    for d in 1..=max_d {
        let mut total = Rat::zero();
        for k in (1..=d).filter(|k| d % k == 0) {
            let mu = mobius(k);
            if mu == 0 {
                continue;
            }
            if let Some(w) = omega_tilde.get(&(d / k)) {
                let sign = c.pow(d / k);
                total += w * int(sign * mu) / int((k * k) as i64);
            }
        }
        let value = -total;
        let integral = is_integral(&value);
        out.insert(d, BpsValue { value, integral });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::IntVec2;
    use crate::scalar::rat;
    use crate::series::FormalSeries;

    #[test]
    fn mobius_values() {
        let expected = [1, -1, -1, 0, -1, 1, -1, 0, 0, 1, -1, 0];
        for (i, &m) in expected.iter().enumerate() {
            assert_eq!(mobius(i as u32 + 1), m);
        }
    }

    #[test]
    fn simple_wall_multiple_covers() {
        let dir = IntVec2::new(1, 0);
        let s = FormalSeries::from_terms([(ClassExponent::ZERO, int(1)), (ClassExponent::new(dir, 1), int(1))], 6);
        let f = WallFunction::new(dir, s).unwrap();
        let om = extract_omega_tilde(&f, ClassExponent::new(dir, 1));
        for d in 1..=6u32 {
            let sign = if d % 2 == 1 { 1 } else { -1 };
            assert_eq!(om[&d], rat(sign, (d * d) as i64));
        }
        let inv = mobius_invert(&om, -1);
        assert_eq!(inv[&1].value, int(1));
        for d in 2..=6 {
            assert_eq!(inv[&d].value, int(0));
            assert!(inv[&d].integral);
        }
    }
}
