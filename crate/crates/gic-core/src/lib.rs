//! Generalized intersection cuts from partial hyperplane activation.
//!
//! The pipeline reads a MILP ([`instance`]), solves its LP relaxation with an
//! in-repo dense simplex ([`lp`], [`simplex`]), builds point-ray collections
//! for simple splits ([`split`]), refines them by activating hyperplanes
//! ([`pha`]), solves the point-ray LP for cuts ([`prlp`]) and measures the
//! percent of integrality gap they close ([`eval`]).

pub mod eval;
pub mod instance;
pub mod lp;
pub mod pha;
pub mod prlp;
pub mod simplex;
pub mod split;
pub mod trace;

/// Zero tolerance used by every floating-point decision.
pub const ZERO_TOL: f64 = 1e-7;

/// Minimum distance from an integer for a variable to count as fractional.
pub const FRAC_TOL: f64 = 1e-3;
