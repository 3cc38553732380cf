//! Exact properness checks for point-ray collections of real instances.

use gic_core::instance::StandardForm;
use gic_core::split::{densify, PointRayCollection};
use num_traits::{One, Zero};

use crate::cone::{prlp_below, prlp_min};
use crate::lp::LpOutcome;
use crate::polyhedron::RationalPolyhedron;
use crate::{dot, snap, OracleError, Q};

/// Nonbasic coordinates of standard-form points: coordinate `j` is the value
/// of extended variable `nonbasic[j]` (a column or a row's surplus).
#[derive(Clone, Debug)]
pub struct NonbasicMap {
    pub nonbasic: Vec<usize>,
    rows: Vec<(Vec<Q>, Q)>,
}

impl NonbasicMap {
    pub fn new(sf: &StandardForm, nonbasic: &[usize]) -> Self {
        let n = sf.num_cols();
        let rows = nonbasic
            .iter()
            .map(|&v| {
                let mut a = vec![Q::zero(); n];
                if v < n {
                    a[v] = Q::one();
                    (a, Q::zero())
                } else {
                    for (j, c) in &sf.exact.a[v - n] {
                        a[*j] = c.clone();
                    }
                    (a, sf.exact.b[v - n].clone())
                }
            })
            .collect();
        NonbasicMap {
            nonbasic: nonbasic.to_vec(),
            rows,
        }
    }

    pub fn point(&self, x: &[Q]) -> Vec<Q> {
        self.rows.iter().map(|(a, b)| dot(a, x) - b).collect()
    }

    pub fn direction(&self, d: &[Q]) -> Vec<Q> {
        self.rows.iter().map(|(a, _)| dot(a, d)).collect()
    }

    /// `αᵀy ≥ 1` rewritten as `aᵀx ≥ rhs` over standard-form columns.
    pub fn to_structural(&self, alpha: &[Q]) -> (Vec<Q>, Q) {
        let n = self.rows.first().map_or(0, |r| r.0.len());
        let mut a = vec![Q::zero(); n];
        let mut rhs = Q::one();
        for (al, (row, b)) in alpha.iter().zip(&self.rows) {
            for (k, v) in row.iter().enumerate() {
                a[k] += al * v;
            }
            rhs += al * b;
        }
        (a, rhs)
    }
}

/// Rational copy of a float collection, each coordinate snapped to the
/// nearest fraction with denominator at most `10⁶` when within `1e-9`.
pub fn exact_collection(coll: &PointRayCollection) -> (Vec<Vec<Q>>, Vec<Vec<Q>>) {
    let conv = |v: Vec<f64>| v.into_iter().map(|x| snap(x, 1_000_000, 1e-9)).collect::<Vec<Q>>();
    let pts = coll.points.iter().map(|p| conv(densify(&p.coords, coll.dim))).collect();
    let rays = coll.rays.iter().map(|r| conv(densify(&r.direction, coll.dim))).collect();
    (pts, rays)
}

/// A point (or direction) of `conv(P \ int S)` cut by a feasible solution of
/// the point-ray LP.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    /// Standard-form point, or direction when `is_ray`.
    pub x: Vec<Q>,
    pub is_ray: bool,
    /// A cutting solution.
    pub alpha: Vec<Q>,
    /// Minimum of `αᵀy(x)` over the point-ray LP; `None` when unbounded.
    pub value: Option<Q>,
}

/// A solution of the point-ray LP with `αᵀy < level`, if one exists. When
/// the LP is unbounded along `y`, the solution returned has `αᵀy ≤ level − 1`.
pub fn cut_at(points: &[Vec<Q>], rays: &[Vec<Q>], y: &[Q], level: Q) -> Option<Witness> {
    let (alpha, value) = match prlp_min(points, rays, y) {
        LpOutcome::Optimal { x, value } if value < level => (x, Some(value)),
        LpOutcome::Unbounded => (prlp_below(points, rays, y, level - Q::one())?, None),
        _ => return None,
    };
    Some(Witness {
        x: Vec::new(),
        is_ray: false,
        alpha,
        value,
    })
}

/// Looks for a vertex or extreme ray of `conv(P \ int S)`, with `S` the split
/// on column `k` between `lo` and `hi`, that some inequality `αᵀy ≥ 1` feasible
/// for the collection cuts. `None` certifies that every such inequality is
/// valid for the split closure, hence for the integer hull.
pub fn find_cut_closure_point(
    poly: &RationalPolyhedron,
    map: &NonbasicMap,
    k: usize,
    lo: &Q,
    hi: &Q,
    points: &[Vec<Q>],
    rays: &[Vec<Q>],
) -> Result<Option<Witness>, OracleError> {
    let mut e = vec![Q::zero(); poly.n];
    e[k] = Q::one();
    let hull = poly.split_hull(&e, lo, hi)?;
    for (x, _) in &hull.points {
        let y = map.point(x);
        if let Some(w) = cut_at(points, rays, &y, Q::one()) {
            return Ok(Some(Witness {
                x: x.clone(),
                is_ray: false,
                ..w
            }));
        }
    }
    for d in &hull.rays {
        let y = map.direction(d);
        if let Some(w) = cut_at(points, rays, &y, Q::zero()) {
            return Ok(Some(Witness {
                x: d.clone(),
                is_ray: true,
                ..w
            }));
        }
    }
    Ok(None)
}
