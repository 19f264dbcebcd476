//! Coefficient fields: double precision reals and prime fields Z_p.

use std::fmt::Debug;

/// Arithmetic context for polynomial coefficients.
///
/// The context is a value (not just a type) so that a prime field can carry
/// its modulus at runtime. Real arithmetic uses the zero-sized [`Reals`].
pub trait Field: Copy + Debug + PartialEq + Send + Sync + 'static {
    type Elem: Copy + Debug + PartialEq + Send + Sync + 'static;

    /// True when arithmetic is exact (no rounding).
    const EXACT: bool;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_i64(&self, v: i64) -> Self::Elem;
    fn add(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn sub(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn mul(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn neg(&self, a: Self::Elem) -> Self::Elem;
    /// Multiplicative inverse, `None` for zero.
    fn inv(&self, a: Self::Elem) -> Option<Self::Elem>;
    fn is_zero(&self, a: Self::Elem) -> bool;
    /// Size of an element, used for tolerances. For Z_p this is 0 or 1.
    fn magnitude(&self, a: Self::Elem) -> f64;
}

/// The real numbers in IEEE double precision.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Reals;

impl Field for Reals {
    type Elem = f64;
    const EXACT: bool = false;

    #[inline]
    fn zero(&self) -> f64 {
        0.0
    }
    #[inline]
    fn one(&self) -> f64 {
        1.0
    }
    #[inline]
    fn from_i64(&self, v: i64) -> f64 {
        v as f64
    }
    #[inline]
    fn add(&self, a: f64, b: f64) -> f64 {
        a + b
    }
    #[inline]
    fn sub(&self, a: f64, b: f64) -> f64 {
        a - b
    }
    #[inline]
    fn mul(&self, a: f64, b: f64) -> f64 {
        a * b
    }
    #[inline]
    fn neg(&self, a: f64) -> f64 {
        -a
    }
    #[inline]
    fn inv(&self, a: f64) -> Option<f64> {
        if a == 0.0 {
            None
        } else {
            Some(1.0 / a)
        }
    }
    #[inline]
    fn is_zero(&self, a: f64) -> bool {
        a == 0.0
    }
    #[inline]
    fn magnitude(&self, a: f64) -> f64 {
        a.abs()
    }
}

/// Smallest modulus accepted by [`PrimeField::new`].
pub const MIN_PRIME: u64 = 1000;

/// Default modulus for finite field experiments.
pub const DEFAULT_PRIME: u64 = 30011;

/// The prime field Z_p with `p < 2^32`. Elements are canonical residues in `0..p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FieldError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} is too small (minimum {MIN_PRIME})")]
    TooSmall(u64),
    #[error("modulus {0} does not fit in 32 bits")]
    TooLarge(u64),
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if p >= (1u64 << 32) {
            return Err(FieldError::TooLarge(p));
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if p < MIN_PRIME {
            return Err(FieldError::TooSmall(p));
        }
        Ok(Self { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// Reduce an arbitrary integer into `0..p`.
    pub fn reduce(&self, v: i64) -> u64 {
        v.rem_euclid(self.p as i64) as u64
    }

    pub fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut r = 1u64;
        a %= self.p;
        while e > 0 {
            if e & 1 == 1 {
                r = r * a % self.p;
            }
            a = a * a % self.p;
            e >>= 1;
        }
        r
    }

    /// Map a residue to the symmetric range `(-p/2, p/2]`.
    pub fn to_signed(&self, a: u64) -> i64 {
        if a > self.p / 2 {
            a as i64 - self.p as i64
        } else {
            a as i64
        }
    }

    /// Square root by Tonelli-Shanks. `None` when `a` is a non-residue.
    pub fn sqrt(&self, a: u64) -> Option<u64> {
        let p = self.p;
        let a = a % p;
        if a == 0 {
            return Some(0);
        }
        if self.pow(a, (p - 1) / 2) != 1 {
            return None;
        }
        if p % 4 == 3 {
            return Some(self.pow(a, (p + 1) / 4));
        }
        let mut q = p - 1;
        let mut s = 0u32;
        while q % 2 == 0 {
            q /= 2;
            s += 1;
        }
        let mut z = 2u64;
        while self.pow(z, (p - 1) / 2) != p - 1 {
            z += 1;
        }
        let mut m = s;
        let mut c = self.pow(z, q);
        let mut t = self.pow(a, q);
        let mut r = self.pow(a, (q + 1) / 2);
        while t != 1 {
            let mut i = 0u32;
            let mut tt = t;
            while tt != 1 {
                tt = tt * tt % p;
                i += 1;
            }
            let b = self.pow(c, 1u64 << (m - i - 1));
            m = i;
            c = b * b % p;
            t = t * c % p;
            r = r * b % p;
        }
        Some(r)
    }
}

impl Field for PrimeField {
    type Elem = u64;
    const EXACT: bool = true;

    #[inline]
    fn zero(&self) -> u64 {
        0
    }
    #[inline]
    fn one(&self) -> u64 {
        1
    }
    #[inline]
    fn from_i64(&self, v: i64) -> u64 {
        self.reduce(v)
    }
    #[inline]
    fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }
    #[inline]
    fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }
    #[inline]
    fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.p
    }
    #[inline]
    fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }
    fn inv(&self, a: u64) -> Option<u64> {
        if a % self.p == 0 {
            None
        } else {
            Some(self.pow(a, self.p - 2))
        }
    }
    #[inline]
    fn is_zero(&self, a: u64) -> bool {
        a == 0
    }
    #[inline]
    fn magnitude(&self, a: u64) -> f64 {
        if a == 0 {
            0.0
        } else {
            1.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_and_composite() {
        assert_eq!(PrimeField::new(7), Err(FieldError::TooSmall(7)));
        assert_eq!(PrimeField::new(30012), Err(FieldError::NotPrime(30012)));
        assert!(PrimeField::new(DEFAULT_PRIME).is_ok());
    }

    #[test]
    fn sqrt_roundtrip() {
        // 30011 = 3 mod 4, 40009 = 1 mod 8 exercises the full Tonelli-Shanks path
        for p in [30011u64, 40009, 65537] {
            let f = PrimeField::new(p).unwrap();
            for a in 1..500u64 {
                match f.sqrt(a) {
                    Some(r) => assert_eq!(r * r % p, a),
                    None => assert_eq!(f.pow(a, (p - 1) / 2), p - 1),
                }
            }
        }
    }

    #[test]
    fn inverse() {
        let f = PrimeField::new(30011).unwrap();
        for a in 1..200 {
            assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
        assert_eq!(f.inv(0), None);
    }
}
