//! Exact base fields: the rationals with arbitrary-precision arithmetic, and
//! prime fields `F_p` for a machine-word prime `p`.
//!
//! Every scalar carries enough information to perform arithmetic on its own;
//! mixing scalars from different fields is a caller error and panics, while
//! the public container types ([`crate::matrix::Matrix`] and friends) validate
//! field agreement up front and return proper errors.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::Error;

/// Which exact field the computation runs over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FieldSpec {
    /// The field of rational numbers.
    Rationals,
    /// The prime field with `p` elements.
    Prime(u64),
}

impl FieldSpec {
    /// Validates the spec: the characteristic of a prime field must be prime
    /// and fit in a machine word.
    pub fn validate(self) -> Result<Self, Error> {
        match self {
            FieldSpec::Rationals => Ok(self),
            FieldSpec::Prime(p) => {
                if is_prime_u64(p) {
                    Ok(self)
                } else {
                    Err(Error::NotPrime(p))
                }
            }
        }
    }

    pub fn zero(self) -> Scalar {
        match self {
            FieldSpec::Rationals => Scalar::Rat(BigRational::zero()),
            FieldSpec::Prime(p) => Scalar::Fp { val: 0, p },
        }
    }

    pub fn one(self) -> Scalar {
        match self {
            FieldSpec::Rationals => Scalar::Rat(BigRational::one()),
            FieldSpec::Prime(p) => Scalar::Fp { val: 1 % p, p },
        }
    }

    /// The integer `n` mapped into the field.
    pub fn from_i64(self, n: i64) -> Scalar {
        match self {
            FieldSpec::Rationals => Scalar::Rat(BigRational::from(BigInt::from(n))),
            FieldSpec::Prime(p) => {
                let v = (n as i128).rem_euclid(p as i128) as u64;
                Scalar::Fp { val: v, p }
            }
        }
    }

    /// `num/den` mapped into the field; `den` must be invertible.
    pub fn from_fraction(self, num: i64, den: i64) -> Result<Scalar, Error> {
        if den == 0 {
            return Err(Error::DivisionByZero);
        }
        let n = self.from_i64(num);
        let d = self.from_i64(den);
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(n.mul(&d.inv()?))
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Rationals => write!(f, "q"),
            FieldSpec::Prime(p) => write!(f, "fp:{p}"),
        }
    }
}

/// An element of one of the supported fields.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scalar {
    Rat(BigRational),
    Fp { val: u64, p: u64 },
}

impl Scalar {
    pub fn field(&self) -> FieldSpec {
        match self {
            Scalar::Rat(_) => FieldSpec::Rationals,
            Scalar::Fp { p, .. } => FieldSpec::Prime(*p),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_zero(),
            Scalar::Fp { val, .. } => *val == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_one(),
            Scalar::Fp { val, p } => *val == 1 % *p,
        }
    }

    pub fn add(&self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a + b),
            (Scalar::Fp { val: a, p }, Scalar::Fp { val: b, p: q }) => {
                assert_eq!(p, q, "mixed prime fields");
                Scalar::Fp {
                    val: ((*a as u128 + *b as u128) % *p as u128) as u64,
                    p: *p,
                }
            }
            _ => panic!("mixed fields in scalar arithmetic"),
        }
    }

    pub fn sub(&self, rhs: &Scalar) -> Scalar {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Rat(a) => Scalar::Rat(-a),
            Scalar::Fp { val, p } => Scalar::Fp {
                val: if *val == 0 { 0 } else { p - val },
                p: *p,
            },
        }
    }

    pub fn mul(&self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a * b),
            (Scalar::Fp { val: a, p }, Scalar::Fp { val: b, p: q }) => {
                assert_eq!(p, q, "mixed prime fields");
                Scalar::Fp {
                    val: ((*a as u128 * *b as u128) % *p as u128) as u64,
                    p: *p,
                }
            }
            _ => panic!("mixed fields in scalar arithmetic"),
        }
    }

    /// Multiplicative inverse; errors on zero.
    pub fn inv(&self) -> Result<Scalar, Error> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(match self {
            Scalar::Rat(a) => Scalar::Rat(a.recip()),
            Scalar::Fp { val, p } => Scalar::Fp {
                val: pow_mod(*val, *p - 2, *p),
                p: *p,
            },
        })
    }

    pub fn div(&self, rhs: &Scalar) -> Result<Scalar, Error> {
        Ok(self.mul(&rhs.inv()?))
    }

    /// `(-1)^k` in the scalar's field.
    pub fn sign(field: FieldSpec, k: i64) -> Scalar {
        if k.rem_euclid(2) == 0 {
            field.one()
        } else {
            field.one().neg()
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rat(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Fp { val, .. } => write!(f, "{val}"),
        }
    }
}

fn pow_mod(base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc: u128 = 1;
    let mut b = base as u128 % p as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % p as u128;
        }
        b = b * b % p as u128;
        exp >>= 1;
    }
    acc as u64
}

/// Deterministic Miller-Rabin for u64 inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    // This witness set decides primality for all u64.
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a % n, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = ((x as u128 * x as u128) % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_arithmetic() {
        let f = FieldSpec::Prime(5).validate().unwrap();
        let a = f.from_i64(3);
        let b = f.from_i64(4);
        assert_eq!(a.add(&b), f.from_i64(2));
        assert_eq!(a.mul(&b), f.from_i64(2));
        assert_eq!(a.inv().unwrap(), f.from_i64(2));
        assert_eq!(f.from_i64(-1), f.from_i64(4));
    }

    #[test]
    fn rational_arithmetic() {
        let f = FieldSpec::Rationals;
        let half = f.from_fraction(1, 2).unwrap();
        assert_eq!(half.add(&half), f.one());
        assert_eq!(half.inv().unwrap(), f.from_i64(2));
        assert!(f.from_i64(0).inv().is_err());
    }

    #[test]
    fn primality() {
        assert!(is_prime_u64(2));
        assert!(is_prime_u64(32003));
        assert!(!is_prime_u64(32001));
        assert!(is_prime_u64(2_147_483_647));
        assert!(!is_prime_u64(1));
        assert!(FieldSpec::Prime(6).validate().is_err());
    }

    #[test]
    fn signs() {
        let f = FieldSpec::Prime(7);
        assert_eq!(Scalar::sign(f, 2), f.one());
        assert_eq!(Scalar::sign(f, -3), f.from_i64(-1));
    }
}
