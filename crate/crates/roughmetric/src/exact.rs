//! Exact rational helpers shared by the field constructions.
//!
//! All set membership, measure, and certification arithmetic runs on
//! `BigRational` so that interval endpoints, dyadic grid points and squared
//! distances compare exactly. Floating point enters only through explicit
//! `to_f64` mirrors.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// `n` as a rational.
pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `p / q` as a rational. `q` must be nonzero.
pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// `1 / 2^k` as a rational.
pub fn dyadic(k: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << k)
}

/// Exact conversion of a finite `f64` into a rational.
pub fn from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x)
        .ok_or_else(|| Error::Parameter(format!("non-finite value {x} has no exact rational form")))
}

/// Nearest `f64` to a rational.
pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"p/q"` or a plain integer string into a rational.
pub fn parse(text: &str) -> Result<BigRational> {
    let bad = |t: &str| Error::Parameter(format!("cannot parse rational from {t:?}"));
    let mut parts = text.splitn(2, '/');
    let p: BigInt = parts
        .next()
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| bad(text))?;
    match parts.next() {
        None => Ok(BigRational::from_integer(p)),
        Some(q) => {
            let q: BigInt = q.trim().parse().map_err(|_| bad(text))?;
            if q.is_zero() {
                return Err(bad(text));
            }
            Ok(BigRational::new(p, q))
        }
    }
}

/// Formats a rational as `"p/q"` (or `"p"` when the denominator is one).
pub fn format(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Squared Euclidean distance between two rational points.
pub fn dist_sq(a: &[BigRational], b: &[BigRational]) -> BigRational {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = BigRational::zero();
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += &d * &d;
    }
    acc
}

/// Odd part of the reduced denominator of `r`, together with the full
/// reduced denominator. The odd part exceeding one is what makes the
/// dyadic-grid distance bound of [`crate::fields::hierarchy`] applicable.
pub fn denominator_odd_part(r: &BigRational) -> (BigInt, BigInt) {
    let mut odd = r.denom().clone();
    let two = BigInt::from(2);
    while (&odd % &two).is_zero() {
        odd /= &two;
    }
    (odd, r.denom().clone())
}

/// `true` when `r` is a dyadic rational (denominator a power of two).
pub fn is_dyadic(r: &BigRational) -> bool {
    denominator_odd_part(r).0.is_one()
}

/// Absolute value.
pub fn abs(r: &BigRational) -> BigRational {
    r.abs()
}
