//! Brute-force cut validity against the integer hull.

use gic_core::split::Cut;
use num_traits::Signed;

use crate::lp::LpOutcome;
use crate::polyhedron::RationalPolyhedron;
use crate::{dot, from_f64, to_f64, OracleError, Q};

/// Most violators kept as witnesses.
const MAX_WITNESSES: usize = 8;

/// Result of checking `aᵀx ≥ rhs` against every feasible integer point.
#[derive(Clone, Debug, PartialEq)]
pub struct CutVerdict {
    /// Integer points (or integer assignments for mixed problems) checked.
    pub checked: usize,
    /// `min aᵀx − rhs` over the integer hull; `None` when it is empty.
    pub min_slack: Option<Q>,
    /// Points violating the cut, worst first.
    pub violators: Vec<Vec<Q>>,
    /// Set when some integer assignment leaves the cut unbounded below.
    pub unbounded: bool,
}

impl CutVerdict {
    /// Exact validity.
    pub fn is_valid(&self) -> bool {
        !self.unbounded && self.min_slack.as_ref().map_or(true, |s| !s.is_negative())
    }

    /// Validity up to `tol · max(1, |rhs|)`, for cuts with float coefficients.
    pub fn is_valid_within(&self, tol: f64, rhs: f64) -> bool {
        !self.unbounded
            && self
                .min_slack
                .as_ref()
                .map_or(true, |s| to_f64(s) >= -tol * rhs.abs().max(1.0))
    }
}

/// Checks `aᵀx ≥ rhs` on every feasible integer point of `poly`. Continuous
/// variables are minimized out exactly for each integer assignment.
pub fn validate_cut(poly: &RationalPolyhedron, a: &[Q], rhs: &Q) -> Result<CutVerdict, OracleError> {
    let mut verdict = CutVerdict {
        checked: 0,
        min_slack: None,
        violators: Vec::new(),
        unbounded: false,
    };
    let mut bad: Vec<(Q, Vec<Q>)> = Vec::new();
    let mut note = |x: Vec<Q>, slack: Q, v: &mut CutVerdict| {
        v.checked += 1;
        if slack.is_negative() {
            bad.push((slack.clone(), x));
        }
        if v.min_slack.as_ref().map_or(true, |m| slack < *m) {
            v.min_slack = Some(slack);
        }
    };
    if poly.integer.iter().all(|&i| i) {
        for x in poly.integer_points()? {
            let s = dot(a, x) - rhs;
            note(x.clone(), s, &mut verdict);
        }
    } else {
        for asg in poly.integer_assignments()? {
            match poly.fixed(&asg).minimize(a) {
                LpOutcome::Infeasible => {}
                LpOutcome::Unbounded => {
                    verdict.checked += 1;
                    verdict.unbounded = true;
                }
                LpOutcome::Optimal { x, value } => note(x, value - rhs, &mut verdict),
            }
        }
    }
    bad.sort_by(|p, q| p.0.cmp(&q.0));
    verdict.violators = bad.into_iter().take(MAX_WITNESSES).map(|(_, x)| x).collect();
    Ok(verdict)
}

/// [`validate_cut`] for a float inequality, taken at its exact binary value.
pub fn validate_float_cut(poly: &RationalPolyhedron, a: &[f64], rhs: f64) -> Result<CutVerdict, OracleError> {
    let qa: Vec<Q> = a.iter().map(|&v| from_f64(v)).collect();
    validate_cut(poly, &qa, &from_f64(rhs))
}

/// Validates a generated cut in standard-form space.
pub fn validate_generated(poly: &RationalPolyhedron, cut: &Cut) -> Result<CutVerdict, OracleError> {
    validate_float_cut(poly, &cut.structural, cut.structural_rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{q, qf};

    fn triangle(integer: Vec<bool>) -> RationalPolyhedron {
        // x, y >= 0, 2x + 2y <= 3
        RationalPolyhedron::new(
            2,
            vec![vec![q(1), q(0)], vec![q(0), q(1)], vec![q(-2), q(-2)]],
            vec![q(0), q(0), q(-3)],
            integer,
        )
    }

    #[test]
    fn trivial_inequality_is_valid() {
        let v = validate_cut(&triangle(vec![true, true]), &[q(0), q(0)], &q(-1)).unwrap();
        assert!(v.is_valid());
        assert_eq!(v.checked, 3);
    }

    #[test]
    fn objective_bound_below_optimum_is_invalid() {
        // -x - y >= -1/2 is false at (1, 0)
        let v = validate_cut(&triangle(vec![true, true]), &[q(-1), q(-1)], &qf(-1, 2)).unwrap();
        assert!(!v.is_valid());
        assert_eq!(v.violators.len(), 2);
        assert_eq!(v.min_slack, Some(qf(-1, 2)));
    }

    #[test]
    fn mixed_problem_minimizes_continuous_part() {
        // x integer, y continuous: -x - y >= -3/2 is the hull facet
        let p = triangle(vec![true, false]);
        assert!(validate_cut(&p, &[q(-1), q(-1)], &qf(-3, 2)).unwrap().is_valid());
        // -y >= -1/2 is violated at x = 0, y = 3/2
        let v = validate_cut(&p, &[q(0), q(-1)], &qf(-1, 2)).unwrap();
        assert_eq!(v.violators[0], vec![q(0), qf(3, 2)]);
    }

    #[test]
    fn float_tolerance() {
        let p = triangle(vec![true, true]);
        let v = validate_float_cut(&p, &[1.0, 1.0], 1e-12).unwrap();
        assert!(!v.is_valid());
        assert!(v.is_valid_within(1e-9, 1e-12));
    }
}
