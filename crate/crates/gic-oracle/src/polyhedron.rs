//! Rational polyhedra `{x : Ax ≥ b}` with brute-force vertex, ray and
//! integer-point enumeration.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use gic_core::instance::StandardForm;
use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::linalg::{null_space, solve};
use crate::lp::{Cmp, LpOutcome, RationalLp};
use crate::{dot, normalize_max, OracleError, Q};

/// Largest dimension accepted by vertex enumeration.
pub const MAX_VERTEX_DIM: usize = 10;
/// Largest number of row subsets vertex enumeration will try.
pub const MAX_BASES: u128 = 250_000;
/// Largest number of integer assignments enumerated.
pub const MAX_INTEGER_POINTS: u128 = 1_000_000;

#[derive(Debug)]
pub struct RationalPolyhedron {
    pub n: usize,
    pub a: Vec<Vec<Q>>,
    pub b: Vec<Q>,
    pub integer: Vec<bool>,
    vertices: OnceLock<Vec<Vec<Q>>>,
    integer_points: OnceLock<Vec<Vec<Q>>>,
}

impl Clone for RationalPolyhedron {
    fn clone(&self) -> Self {
        RationalPolyhedron::new(self.n, self.a.clone(), self.b.clone(), self.integer.clone())
    }
}

/// Vertices and extreme rays of `conv(Q \ int S)` for a split `S`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SplitHull {
    /// Vertices of the two sides, with whether they lie on a split facet.
    pub points: Vec<(Vec<Q>, bool)>,
    pub rays: Vec<Vec<Q>>,
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn floor(x: &Q) -> BigInt {
    x.floor().to_integer()
}

fn ceil(x: &Q) -> BigInt {
    x.ceil().to_integer()
}

impl RationalPolyhedron {
    pub fn new(n: usize, a: Vec<Vec<Q>>, b: Vec<Q>, integer: Vec<bool>) -> Self {
        assert_eq!(a.len(), b.len());
        assert_eq!(integer.len(), n);
        RationalPolyhedron {
            n,
            a,
            b,
            integer,
            vertices: OnceLock::new(),
            integer_points: OnceLock::new(),
        }
    }

    /// `Ax ≥ b, x ≥ 0` from the rational copy of a standard form.
    pub fn from_standard_form(sf: &StandardForm) -> Self {
        let n = sf.num_cols();
        let mut a: Vec<Vec<Q>> = sf
            .exact
            .a
            .iter()
            .map(|row| {
                let mut d = vec![Q::zero(); n];
                for (j, v) in row {
                    d[*j] = v.clone();
                }
                d
            })
            .collect();
        let mut b = sf.exact.b.clone();
        for j in 0..n {
            let mut e = vec![Q::zero(); n];
            e[j] = Q::one();
            a.push(e);
            b.push(Q::zero());
        }
        RationalPolyhedron::new(n, a, b, sf.integer.clone())
    }

    /// Copy with the extra row `aᵀx ≥ b`.
    pub fn with_row(&self, a: Vec<Q>, b: Q) -> Self {
        let mut rows = self.a.clone();
        let mut rhs = self.b.clone();
        rows.push(a);
        rhs.push(b);
        RationalPolyhedron::new(self.n, rows, rhs, self.integer.clone())
    }

    pub fn contains(&self, x: &[Q]) -> bool {
        self.a.iter().zip(&self.b).all(|(a, b)| dot(a, x) >= *b)
    }

    pub fn is_recession_direction(&self, d: &[Q]) -> bool {
        self.a.iter().all(|a| !dot(a, d).is_negative())
    }

    pub fn lp(&self, c: Vec<Q>) -> RationalLp {
        let mut lp = RationalLp::new(c).all_free();
        for (a, b) in self.a.iter().zip(&self.b) {
            lp.row(a.clone(), Cmp::Ge, b.clone());
        }
        lp
    }

    pub fn minimize(&self, c: &[Q]) -> LpOutcome {
        self.lp(c.to_vec()).minimize()
    }

    fn check_bases(&self, k: usize) -> Result<(), OracleError> {
        if self.n > MAX_VERTEX_DIM {
            return Err(OracleError::TooLarge {
                what: "vertex enumeration dimension",
                size: self.n as u128,
                limit: MAX_VERTEX_DIM as u128,
            });
        }
        let size = binomial(self.a.len(), k);
        if size > MAX_BASES {
            return Err(OracleError::TooLarge {
                what: "vertex enumeration",
                size,
                limit: MAX_BASES,
            });
        }
        Ok(())
    }

    /// Every basic feasible solution, deduplicated and sorted.
    pub fn vertices(&self) -> Result<&[Vec<Q>], OracleError> {
        if let Some(v) = self.vertices.get() {
            return Ok(v);
        }
        self.check_bases(self.n)?;
        let mut found = BTreeSet::new();
        for idx in (0..self.a.len()).combinations(self.n) {
            let m: Vec<Vec<Q>> = idx.iter().map(|&i| self.a[i].clone()).collect();
            let r: Vec<Q> = idx.iter().map(|&i| self.b[i].clone()).collect();
            if let Some(x) = solve(&m, &r) {
                if self.contains(&x) {
                    found.insert(x);
                }
            }
        }
        Ok(self.vertices.get_or_init(|| found.into_iter().collect()))
    }

    /// Extreme rays of the recession cone, each scaled to unit max-norm.
    /// Assumes the polyhedron is pointed.
    pub fn extreme_rays(&self) -> Result<Vec<Vec<Q>>, OracleError> {
        if self.n == 0 {
            return Ok(Vec::new());
        }
        self.check_bases(self.n - 1)?;
        let mut found = BTreeSet::new();
        for idx in (0..self.a.len()).combinations(self.n - 1) {
            let m: Vec<Vec<Q>> = idx.iter().map(|&i| self.a[i].clone()).collect();
            let ns = null_space(&m, self.n);
            if ns.len() != 1 {
                continue;
            }
            for sign in [Q::one(), -Q::one()] {
                let d: Vec<Q> = ns[0].iter().map(|v| v * &sign).collect();
                if self.is_recession_direction(&d) {
                    found.insert(normalize_max(&d));
                }
            }
        }
        Ok(found.into_iter().collect())
    }

    /// Integer range of each integer variable, from exact LP bounds.
    /// `None` inside the result means the polyhedron is empty.
    pub fn integer_ranges(&self) -> Result<Option<Vec<(BigInt, BigInt)>>, OracleError> {
        let mut out = Vec::new();
        for j in (0..self.n).filter(|&j| self.integer[j]) {
            let mut e = vec![Q::zero(); self.n];
            e[j] = Q::one();
            let lo = match self.minimize(&e) {
                LpOutcome::Optimal { value, .. } => ceil(&value),
                LpOutcome::Infeasible => return Ok(None),
                LpOutcome::Unbounded => return Err(OracleError::UnboundedVariable(j)),
            };
            let neg: Vec<Q> = e.iter().map(|v| -v).collect();
            let hi = match self.minimize(&neg) {
                LpOutcome::Optimal { value, .. } => floor(&-value),
                LpOutcome::Infeasible => return Ok(None),
                LpOutcome::Unbounded => return Err(OracleError::UnboundedVariable(j)),
            };
            out.push((lo, hi));
        }
        Ok(Some(out))
    }

    /// Every assignment of the integer variables inside their LP ranges, as
    /// `(variable, value)` lists.
    pub fn integer_assignments(&self) -> Result<Vec<Vec<(usize, Q)>>, OracleError> {
        let Some(ranges) = self.integer_ranges()? else {
            return Ok(Vec::new());
        };
        let vars: Vec<usize> = (0..self.n).filter(|&j| self.integer[j]).collect();
        let mut size: u128 = 1;
        for (lo, hi) in &ranges {
            if hi < lo {
                return Ok(Vec::new());
            }
            let w: u128 = (hi - lo + BigInt::one()).try_into().unwrap_or(u128::MAX);
            size = size.saturating_mul(w);
        }
        if size > MAX_INTEGER_POINTS {
            return Err(OracleError::TooLarge {
                what: "integer enumeration",
                size,
                limit: MAX_INTEGER_POINTS,
            });
        }
        let mut out = Vec::with_capacity(size as usize);
        let mut cur: Vec<BigInt> = ranges.iter().map(|(lo, _)| lo.clone()).collect();
        loop {
            out.push(
                vars.iter()
                    .zip(&cur)
                    .map(|(&j, v)| (j, Q::from_integer(v.clone())))
                    .collect(),
            );
            let mut k = 0;
            loop {
                if k == cur.len() {
                    return Ok(out);
                }
                if cur[k] < ranges[k].1 {
                    cur[k] += 1;
                    break;
                }
                cur[k] = ranges[k].0.clone();
                k += 1;
            }
        }
    }

    /// Feasible integer points of a pure integer polyhedron.
    pub fn integer_points(&self) -> Result<&[Vec<Q>], OracleError> {
        if let Some(v) = self.integer_points.get() {
            return Ok(v);
        }
        if self.integer.iter().any(|i| !i) {
            return Err(OracleError::NotApplicable(
                "integer point listing needs every variable integer".into(),
            ));
        }
        let pts: Vec<Vec<Q>> = self
            .integer_assignments()?
            .into_iter()
            .map(|asg| asg.into_iter().map(|(_, v)| v).collect::<Vec<Q>>())
            .filter(|x| self.contains(x))
            .collect();
        Ok(self.integer_points.get_or_init(|| pts))
    }

    /// Restriction with the given variables fixed.
    pub fn fixed(&self, values: &[(usize, Q)]) -> Self {
        let mut out = self.clone();
        for (j, v) in values {
            let mut e = vec![Q::zero(); self.n];
            e[*j] = Q::one();
            out.a.push(e.clone());
            out.b.push(v.clone());
            out.a.push(e.iter().map(|x| -x).collect());
            out.b.push(-v.clone());
        }
        out
    }

    /// `conv(self \ int S)` for `S = {x : lo < coefᵀx < hi}`, described by the
    /// vertices and extreme rays of its two sides.
    pub fn split_hull(&self, coef: &[Q], lo: &Q, hi: &Q) -> Result<SplitHull, OracleError> {
        let neg: Vec<Q> = coef.iter().map(|v| -v).collect();
        let low = self.with_row(neg, -lo.clone());
        let high = self.with_row(coef.to_vec(), hi.clone());
        let mut pts = BTreeSet::new();
        let mut rays = BTreeSet::new();
        for side in [&low, &high] {
            for v in side.vertices()? {
                let s = dot(coef, v);
                pts.insert((v.clone(), s == *lo || s == *hi));
            }
            rays.extend(side.extreme_rays()?);
        }
        Ok(SplitHull {
            points: pts.into_iter().collect(),
            rays: rays.into_iter().collect(),
        })
    }

    /// Exact minimum of `cᵀx` over `conv(self \ int S)` for the split on
    /// variable `k` between `lo` and `hi`.
    pub fn sk_closure_opt(&self, k: usize, lo: &Q, hi: &Q, c: &[Q]) -> LpOutcome {
        let mut e = vec![Q::zero(); self.n];
        e[k] = Q::one();
        let neg: Vec<Q> = e.iter().map(|v| -v).collect();
        let sides = [
            self.with_row(neg, -lo.clone()).minimize(c),
            self.with_row(e, hi.clone()).minimize(c),
        ];
        let mut best: Option<(Vec<Q>, Q)> = None;
        for s in sides {
            match s {
                LpOutcome::Unbounded => return LpOutcome::Unbounded,
                LpOutcome::Infeasible => {}
                LpOutcome::Optimal { x, value } => {
                    if best.as_ref().map_or(true, |(_, v)| value < *v) {
                        best = Some((x, value));
                    }
                }
            }
        }
        match best {
            Some((x, value)) => LpOutcome::Optimal { x, value },
            None => LpOutcome::Infeasible,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{q, qf};

    fn unit_square() -> RationalPolyhedron {
        RationalPolyhedron::new(
            2,
            vec![
                vec![q(1), q(0)],
                vec![q(0), q(1)],
                vec![q(-1), q(0)],
                vec![q(0), q(-1)],
            ],
            vec![q(0), q(0), q(-1), q(-1)],
            vec![true, true],
        )
    }

    #[test]
    fn unit_square_has_four_vertices() {
        let p = unit_square();
        assert_eq!(p.vertices().unwrap().len(), 4);
        assert!(p.extreme_rays().unwrap().is_empty());
        assert_eq!(p.integer_points().unwrap().len(), 4);
    }

    #[test]
    fn empty_polyhedron_has_no_vertices() {
        let p = unit_square().with_row(vec![q(1), q(1)], q(3));
        assert!(p.vertices().unwrap().is_empty());
        assert!(p.integer_points().unwrap().is_empty());
    }

    #[test]
    fn orthant_rays() {
        let p = RationalPolyhedron::new(
            2,
            vec![vec![q(1), q(0)], vec![q(0), q(1)]],
            vec![q(0), q(0)],
            vec![false, false],
        );
        assert_eq!(p.extreme_rays().unwrap(), vec![vec![q(0), q(1)], vec![q(1), q(0)]]);
    }

    #[test]
    fn split_closure_of_triangle() {
        // x, y >= 0, 2x + 2y <= 3; split on x between 0 and 1
        let p = RationalPolyhedron::new(
            2,
            vec![vec![q(1), q(0)], vec![q(0), q(1)], vec![q(-2), q(-2)]],
            vec![q(0), q(0), q(-3)],
            vec![true, true],
        );
        let hull = p.split_hull(&[q(1), q(0)], &q(0), &q(1)).unwrap();
        let pts: Vec<Vec<Q>> = hull.points.iter().map(|(p, _)| p.clone()).collect();
        assert!(pts.contains(&vec![q(0), qf(3, 2)]));
        assert!(pts.contains(&vec![q(1), qf(1, 2)]));
        assert!(pts.contains(&vec![qf(3, 2), q(0)]));
        // min -x - 2y over the closure: (0, 3/2) gives -3
        let v = p.sk_closure_opt(0, &q(0), &q(1), &[q(-1), q(-2)]);
        assert_eq!(v.value(), Some(&q(-3)));
    }

    #[test]
    fn guard_refuses_large_dimension() {
        let n = MAX_VERTEX_DIM + 1;
        let a: Vec<Vec<Q>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { q(1) } else { q(0) }).collect())
            .collect();
        let p = RationalPolyhedron::new(n, a, vec![q(0); n], vec![false; n]);
        assert!(matches!(p.vertices(), Err(OracleError::TooLarge { .. })));
    }
}
