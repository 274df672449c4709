//! Coefficient rings for exponents: `Z_d` for qudits, the reals for CV.

use std::fmt;

use crate::{Error, Result};

/// Tolerance under which a real coefficient counts as zero.
pub const REAL_ZERO_TOL: f64 = 1e-12;

/// Arithmetic on exponent coefficients.
///
/// The same exponent-vector bookkeeping serves both qudit chains (exact
/// integers mod `d`) and continuous-variable chains (unreduced reals).
pub trait Ring: Copy + fmt::Debug + PartialEq {
    type Elem: Copy + PartialEq + fmt::Debug + fmt::Display;

    fn zero(&self) -> Self::Elem;
    fn from_i64(&self, v: i64) -> Self::Elem;
    fn add(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn mul(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn neg(&self, a: Self::Elem) -> Self::Elem;
    fn is_zero(&self, a: Self::Elem) -> bool;

    fn sub(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem {
        self.add(a, self.neg(b))
    }

    fn dot(&self, a: &[Self::Elem], b: &[Self::Elem]) -> Self::Elem {
        a.iter()
            .zip(b)
            .fold(self.zero(), |acc, (&x, &y)| self.add(acc, self.mul(x, y)))
    }

    fn sum(&self, a: &[Self::Elem]) -> Self::Elem {
        a.iter().fold(self.zero(), |acc, &x| self.add(acc, x))
    }

    fn equal(&self, a: Self::Elem, b: Self::Elem) -> bool {
        self.is_zero(self.sub(a, b))
    }
}

/// Integers modulo `d`, elements stored as canonical residues `0..d`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct Zmod(u32);

impl Zmod {
    pub fn new(d: u32) -> Result<Self> {
        if d < 2 {
            return Err(Error::UnsupportedDimension(format!("d = {d}, need d >= 2")));
        }
        Ok(Self(d))
    }

    pub fn modulus(&self) -> u32 {
        self.0
    }

    pub fn reduce(&self, v: i64) -> u32 {
        v.rem_euclid(self.0 as i64) as u32
    }

    pub fn reduce_i128(&self, v: i128) -> u32 {
        v.rem_euclid(self.0 as i128) as u32
    }

    /// Multiplicative inverse, if `a` is a unit.
    pub fn inv(&self, a: u32) -> Option<u32> {
        let (g, x, _) = ext_gcd(a as i64, self.0 as i64);
        (g == 1).then(|| self.reduce(x))
    }

    pub fn is_prime(&self) -> bool {
        let d = self.0;
        (2..d).take_while(|p| p * p <= d).all(|p| !d.is_multiple_of(p))
    }
}

impl Ring for Zmod {
    type Elem = u32;

    fn zero(&self) -> u32 {
        0
    }
    fn from_i64(&self, v: i64) -> u32 {
        self.reduce(v)
    }
    fn add(&self, a: u32, b: u32) -> u32 {
        ((a as u64 + b as u64) % self.0 as u64) as u32
    }
    fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.0 as u64) as u32
    }
    fn neg(&self, a: u32) -> u32 {
        (self.0 - a % self.0) % self.0
    }
    fn is_zero(&self, a: u32) -> bool {
        a.is_multiple_of(self.0)
    }
}

/// Real coefficients (CV chains, `zeta = e^i`).
#[derive(Copy, Clone, Debug, PartialEq, Default)]
pub struct Reals;

impl Ring for Reals {
    type Elem = f64;

    fn zero(&self) -> f64 {
        0.0
    }
    fn from_i64(&self, v: i64) -> f64 {
        v as f64
    }
    fn add(&self, a: f64, b: f64) -> f64 {
        a + b
    }
    fn mul(&self, a: f64, b: f64) -> f64 {
        a * b
    }
    fn neg(&self, a: f64) -> f64 {
        -a
    }
    fn is_zero(&self, a: f64) -> bool {
        a.abs() < REAL_ZERO_TOL
    }
}

/// Extended Euclid: returns `(g, x, y)` with `a x + b y = g = gcd(a, b)`.
pub fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zmod_arithmetic() {
        let r = Zmod::new(6).unwrap();
        assert_eq!(r.add(4, 5), 3);
        assert_eq!(r.neg(0), 0);
        assert_eq!(r.neg(2), 4);
        assert_eq!(r.from_i64(-7), 5);
        assert_eq!(r.inv(5), Some(5));
        assert_eq!(r.inv(3), None);
        assert!(!r.is_prime());
        assert!(Zmod::new(7).unwrap().is_prime());
        assert!(Zmod::new(1).is_err());
    }

    #[test]
    fn ext_gcd_identity() {
        for a in -20i64..20 {
            for b in 1i64..15 {
                let (g, x, y) = ext_gcd(a, b);
                assert_eq!(a * x + b * y, g);
                assert_eq!(g as u64, gcd(a.unsigned_abs(), b as u64));
            }
        }
    }
}
