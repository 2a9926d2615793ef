//! Coefficient fields: exact rationals and complex floats.
//!
//! Every computation in this crate runs in exactly one scalar mode. Exact
//! mode (`Rat`) is used for recursions and symbolic expansions where ring
//! identities must hold bit-exactly; float mode (`C64`) is used for
//! root-finding, analytic continuation and quadrature. Conversions between
//! the two are explicit (`approx_c64`).

use num::{BigInt, BigRational, Complex, One, ToPrimitive, Zero};
use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

pub type Rat = BigRational;
pub type C64 = Complex<f64>;

/// Absolute tolerance policy for float-mode assertions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tol {
    pub abs: f64,
}

impl Default for Tol {
    fn default() -> Self {
        Tol { abs: 1e-9 }
    }
}

impl Tol {
    pub fn new(abs: f64) -> Self {
        Tol { abs }
    }
}

/// The scalar operations every coefficient type must provide.
///
/// `EXACT` distinguishes bit-exact arithmetic from floating arithmetic;
/// callers use it to decide between exact-zero tests and tolerance tests.
pub trait Field:
    Clone
    + PartialEq
    + Debug
    + Display
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    const EXACT: bool;

    fn from_i64(n: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Embed an exact rational (lossless in exact mode).
    fn from_rat(r: &Rat) -> Self;
    /// Embed a complex double. Panics in exact mode; only float-mode
    /// computations consume numeric seeds.
    fn from_c64(z: C64) -> Self;
    /// Multiplicative inverse. Panics on zero.
    fn inv(&self) -> Self;
    /// Squared magnitude as f64 (used for pivoting and tolerance checks).
    fn abs2(&self) -> f64;
    /// Numeric image, for reports and cross-mode comparisons.
    fn approx_c64(&self) -> C64;

    fn is_small(&self, tol: Tol) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.abs2() <= tol.abs * tol.abs
        }
    }
}

impl Field for Rat {
    const EXACT: bool = true;

    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }

    fn from_c64(_z: C64) -> Self {
        panic!("cannot embed a float into exact arithmetic")
    }

    fn inv(&self) -> Self {
        assert!(!self.is_zero(), "division by zero rational");
        self.recip()
    }

    fn abs2(&self) -> f64 {
        let v = self.to_f64().unwrap_or(f64::INFINITY);
        v * v
    }

    fn approx_c64(&self) -> C64 {
        C64::new(self.to_f64().unwrap_or(f64::NAN), 0.0)
    }
}

impl Field for C64 {
    const EXACT: bool = false;

    fn from_i64(n: i64) -> Self {
        C64::new(n as f64, 0.0)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        C64::new(num as f64 / den as f64, 0.0)
    }

    fn from_rat(r: &Rat) -> Self {
        C64::new(r.to_f64().unwrap_or(f64::NAN), 0.0)
    }

    fn from_c64(z: C64) -> Self {
        z
    }

    fn inv(&self) -> Self {
        assert!(self.norm_sqr() > 0.0, "division by zero complex");
        1.0 / self
    }

    fn abs2(&self) -> f64 {
        self.norm_sqr()
    }

    fn approx_c64(&self) -> C64 {
        *self
    }
}

/// Exact rational shorthand.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::from_ratio(num, den)
}

/// Integer shorthand for any scalar type.
pub fn int<S: Field>(n: i64) -> S {
    S::from_i64(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_mode_is_exact() {
        let a = rat(1, 3);
        let b = rat(1, 6);
        assert_eq!(a.clone() + b.clone() + b, rat(2, 3));
        assert!((a.clone() * a.inv() - Rat::one()).is_zero());
    }

    #[test]
    fn float_tolerance() {
        let x = C64::new(1e-12, 0.0);
        assert!(x.is_small(Tol::default()));
        assert!(!C64::new(1e-6, 0.0).is_small(Tol::default()));
    }
}
