//! Exact rational checks for small instances.
//!
//! Everything here runs in `BigRational` arithmetic and is meant for
//! instances with a handful of variables: vertex and integer-point
//! enumeration, brute-force cut validation, optimization over a split
//! closure, and a rational model of distance-1 activation used to check the
//! floating-point engine.

pub mod regression;
pub mod cone;
pub mod linalg;
pub mod lp;
pub mod polyhedron;
pub mod prlp;
pub mod random;
pub mod suites;
pub mod validate;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational scalar.
pub type Q = BigRational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("{what} needs {size} cases, above the limit of {limit}")]
    TooLarge { what: &'static str, size: u128, limit: u128 },
    #[error("variable {0} is unbounded, integer points cannot be enumerated")]
    UnboundedVariable(usize),
    #[error("hypotheses not met: {0}")]
    NotApplicable(String),
    #[error("instance error: {0}")]
    Instance(String),
}

pub fn q(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

pub fn qf(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

/// Exact value of a finite float.
pub fn from_f64(x: f64) -> Q {
    Q::from_f64(x).unwrap_or_else(Q::zero)
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Nearest fraction with denominator at most `max_den`, when it lies within
/// `tol` of `x`; otherwise the exact value of `x`.
pub fn snap(x: f64, max_den: i64, tol: f64) -> Q {
    if !x.is_finite() {
        return Q::zero();
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut r = x.abs();
    for _ in 0..64 {
        let a = r.floor();
        if a > 1e15 {
            break;
        }
        let ai = a as i128;
        let (h2, k2) = (ai * h1 + h0, ai * k1 + k0);
        if k2 > max_den as i128 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let approx = h1 as f64 / k1 as f64;
        if (approx - x.abs()).abs() <= tol {
            let v = Q::new(BigInt::from(h1), BigInt::from(k1));
            return if x < 0.0 { -v } else { v };
        }
        let frac = r - a;
        if frac < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    from_f64(x)
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

/// Scales a nonzero vector so its largest absolute entry is one.
pub fn normalize_max(v: &[Q]) -> Vec<Q> {
    let m = v.iter().map(|x| x.abs()).max().unwrap_or_else(Q::zero);
    if m.is_zero() {
        return v.to_vec();
    }
    v.iter().map(|x| x / &m).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snap_recovers_small_fractions() {
        assert_eq!(snap(0.75, 1_000_000, 1e-9), qf(3, 4));
        assert_eq!(snap(-1.8, 1_000_000, 1e-9), qf(-9, 5));
        assert_eq!(snap(1.0 / 28.0, 1_000_000, 1e-12), qf(1, 28));
        assert_eq!(snap(0.0, 1_000_000, 1e-9), q(0));
    }

    #[test]
    fn snap_keeps_irrational_values_exact() {
        let x = std::f64::consts::PI;
        assert_eq!(snap(x, 100, 1e-12), from_f64(x));
    }
}
