//! Exact model of a simple cone in nonbasic space, a split on one linear
//! coordinate, and a single distance-1 activation.
//!
//! The cone is `{y ≥ 0}` with apex at the origin. The split coordinate is
//! `σ(y) = f + πᵀy` with `lo < f < hi`, and the objective is `cᵀy` with
//! `c ≥ 0`. The model can be exported as a [`gic_core`] cone so that the
//! floating-point engine and the exact model run on the same data.

use gic_core::simplex::{Cone, NbHyperplane};
use gic_core::split::{Facet, SplitSet};
use num_traits::{One, Signed, Zero};

use crate::lp::{Cmp, LpOutcome, RationalLp};
use crate::polyhedron::{RationalPolyhedron, SplitHull};
use crate::{dot, to_f64, OracleError, Q};

#[derive(Clone, Debug, PartialEq)]
pub struct ExactCone {
    pub cost: Vec<Q>,
    pub split_rate: Vec<Q>,
    pub split_value: Q,
    pub lo: Q,
    pub hi: Q,
}

/// Halfspace `gᵀy ≥ rhs` with `rhs ≤ 0`, so the apex satisfies it.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactHyperplane {
    pub g: Vec<Q>,
    pub rhs: Q,
}

impl ExactHyperplane {
    pub fn eval(&self, y: &[Q]) -> Q {
        dot(&self.g, y)
    }

    /// Step along ray `j` to the hyperplane, if the ray moves toward it.
    pub fn distance(&self, j: usize) -> Option<Q> {
        self.g[j].is_negative().then(|| &self.rhs / &self.g[j])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactPoint {
    pub coords: Vec<Q>,
    pub origin_ray: usize,
    pub facet: Facet,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactRay {
    pub base: Vec<Q>,
    pub direction: Vec<Q>,
    pub origin_ray: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExactCollection {
    pub points: Vec<ExactPoint>,
    pub rays: Vec<ExactRay>,
}

/// Collection after one activation, with the indices of the new elements.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactActivation {
    pub collection: ExactCollection,
    pub cut: Vec<usize>,
    pub new_points: Vec<usize>,
    pub new_rays: Vec<usize>,
}

/// Outcome of the two-sided strict dominance test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Dominance {
    Possible,
    Impossible,
    NotApplicable(String),
}

fn unit(n: usize, j: usize) -> Vec<Q> {
    let mut e = vec![Q::zero(); n];
    e[j] = Q::one();
    e
}

impl ExactCone {
    pub fn dim(&self) -> usize {
        self.cost.len()
    }

    pub fn split_coord(&self, y: &[Q]) -> Q {
        &self.split_value + dot(&self.split_rate, y)
    }

    /// First facet reached from split coordinate `x` moving at `rate`.
    fn hit(&self, x: &Q, rate: &Q) -> Option<(Q, Facet)> {
        if rate.is_positive() {
            Some(((&self.hi - x) / rate, Facet::Upper))
        } else if rate.is_negative() {
            Some(((&self.lo - x) / rate, Facet::Lower))
        } else {
            None
        }
    }

    pub fn boundary_distance(&self, j: usize) -> Option<(Q, Facet)> {
        self.hit(&self.split_value, &self.split_rate[j])
    }

    pub fn initial(&self) -> ExactCollection {
        let n = self.dim();
        let mut c = ExactCollection::default();
        for j in 0..n {
            match self.boundary_distance(j) {
                Some((d, facet)) => {
                    let mut coords = vec![Q::zero(); n];
                    coords[j] = d;
                    c.points.push(ExactPoint {
                        coords,
                        origin_ray: j,
                        facet,
                    });
                }
                None => c.rays.push(ExactRay {
                    base: vec![Q::zero(); n],
                    direction: unit(n, j),
                    origin_ray: j,
                }),
            }
        }
        c
    }

    /// Coefficients of the standard intersection cut `αᵀy ≥ 1`.
    pub fn sic(&self) -> Vec<Q> {
        (0..self.dim())
            .map(|j| match self.boundary_distance(j) {
                Some((d, _)) => Q::one() / d,
                None => Q::zero(),
            })
            .collect()
    }

    /// Rays `h` reaches strictly before the split boundary.
    pub fn cut_rays(&self, h: &ExactHyperplane) -> Vec<usize> {
        (0..self.dim())
            .filter(|&j| match (h.distance(j), self.boundary_distance(j)) {
                (Some(t), Some((d, _))) => t < d,
                (Some(_), None) => true,
                _ => false,
            })
            .collect()
    }

    /// Activates `h` on the initial collection, on every ray it cuts.
    pub fn activate(&self, h: &ExactHyperplane) -> ExactActivation {
        let n = self.dim();
        let cut = self.cut_rays(h);
        let init = self.initial();
        let mut coll = ExactCollection {
            points: init
                .points
                .into_iter()
                .filter(|p| !cut.contains(&p.origin_ray))
                .collect(),
            rays: init
                .rays
                .into_iter()
                .filter(|r| !cut.contains(&r.origin_ray))
                .collect(),
        };
        let (p0, r0) = (coll.points.len(), coll.rays.len());
        for &r in &cut {
            let t = &h.rhs / &h.g[r];
            let mut v = vec![Q::zero(); n];
            v[r] = t.clone();
            let sv = self.split_coord(&v);
            for r2 in (0..n).filter(|j| !cut.contains(j)) {
                let w = -&h.g[r2] / &h.g[r];
                let rate = &self.split_rate[r] * &w + &self.split_rate[r2];
                let end = w.is_negative().then(|| &t / -&w);
                match self.hit(&sv, &rate) {
                    Some((s, facet)) if end.as_ref().map_or(true, |e| s <= *e) => {
                        let mut y = v.clone();
                        y[r] = &t + &s * &w;
                        y[r2] = s;
                        coll.points.push(ExactPoint {
                            coords: y,
                            origin_ray: r,
                            facet,
                        });
                    }
                    None if end.is_none() => {
                        let mut d = unit(n, r2);
                        d[r] = w;
                        coll.rays.push(ExactRay {
                            base: v.clone(),
                            direction: d,
                            origin_ray: r,
                        });
                    }
                    _ => {}
                }
            }
        }
        ExactActivation {
            new_points: (p0..coll.points.len()).collect(),
            new_rays: (r0..coll.rays.len()).collect(),
            collection: coll,
            cut,
        }
    }

    /// `{y ≥ 0} ∩ ⋂ H⁺` as a rational polyhedron.
    pub fn polyhedron(&self, hs: &[ExactHyperplane]) -> RationalPolyhedron {
        let n = self.dim();
        let mut a: Vec<Vec<Q>> = (0..n).map(|j| unit(n, j)).collect();
        let mut b = vec![Q::zero(); n];
        for h in hs {
            a.push(h.g.clone());
            b.push(h.rhs.clone());
        }
        RationalPolyhedron::new(n, a, b, vec![false; n])
    }

    /// Exact point-ray description of `conv(C \ int S)` where `C` is the
    /// cone with every hyperplane of `hs` fully activated.
    pub fn full_activation(&self, hs: &[ExactHyperplane]) -> Result<SplitHull, OracleError> {
        let lo = &self.lo - &self.split_value;
        let hi = &self.hi - &self.split_value;
        self.polyhedron(hs).split_hull(&self.split_rate, &lo, &hi)
    }

    /// Monotonicity check: when `h` cuts the ray giving the cheapest initial
    /// point before the boundary, no new point from that ray is cheaper.
    pub fn monotonicity_check(&self, h: &ExactHyperplane) -> bool {
        let init = self.initial();
        let Some(best) = init
            .points
            .iter()
            .min_by(|a, b| dot(&self.cost, &a.coords).cmp(&dot(&self.cost, &b.coords)))
        else {
            return true;
        };
        let z_lo = dot(&self.cost, &best.coords);
        let act = self.activate(h);
        if !act.cut.contains(&best.origin_ray) {
            return true;
        }
        act.new_points
            .iter()
            .map(|&i| &act.collection.points[i])
            .filter(|p| p.origin_ray == best.origin_ray)
            .all(|p| dot(&self.cost, &p.coords) >= z_lo)
    }

    /// Condition for a cut strictly dominating the SIC after activating `h`:
    /// on some side, every initial point is on or beyond `h` and at least one
    /// is strictly beyond.
    pub fn strict_dominance_check(&self, h: &ExactHyperplane) -> Dominance {
        let init = self.initial();
        if !init.rays.is_empty() {
            return Dominance::NotApplicable("some ray misses the split boundary".into());
        }
        let sides = [Facet::Lower, Facet::Upper];
        if sides
            .iter()
            .any(|f| !init.points.iter().any(|p| p.facet == *f))
        {
            return Dominance::NotApplicable("a split facet has no initial point".into());
        }
        let act = self.activate(h);
        if act.collection.points.is_empty() && act.collection.rays.is_empty() {
            return Dominance::NotApplicable("the hyperplane leaves nothing outside the split".into());
        }
        for f in sides {
            let vals: Vec<Q> = init
                .points
                .iter()
                .filter(|p| p.facet == f)
                .map(|p| h.eval(&p.coords))
                .collect();
            if vals.iter().all(|v| *v <= h.rhs) && vals.iter().any(|v| *v < h.rhs) {
                return Dominance::Possible;
            }
        }
        Dominance::Impossible
    }

    /// Brute force for the dominance test: enumerates the basic feasible
    /// solutions of the point-ray LP after activating `h` and reports whether
    /// one strictly dominates the SIC on `{y ≥ 0} ∩ H⁺`.
    pub fn has_strictly_dominating_vertex(&self, h: &ExactHyperplane) -> Result<bool, OracleError> {
        let n = self.dim();
        let act = self.activate(h);
        let rows: Vec<(Vec<Q>, Q)> = act
            .collection
            .points
            .iter()
            .map(|p| (p.coords.clone(), Q::one()))
            .chain(act.collection.rays.iter().map(|r| (r.direction.clone(), Q::zero())))
            .collect();
        let region = RationalPolyhedron::new(
            n,
            rows.iter().map(|r| r.0.clone()).collect(),
            rows.iter().map(|r| r.1.clone()).collect(),
            vec![false; n],
        );
        let p = self.polyhedron(std::slice::from_ref(h));
        let sic = self.sic();
        for alpha in region.vertices()? {
            if *alpha == sic {
                continue;
            }
            let dominates = matches!(
                p.with_row(alpha.clone(), Q::one()).minimize(&sic),
                LpOutcome::Optimal { ref value, .. } if *value >= Q::one()
            );
            let strict = match p.with_row(sic.clone(), Q::one()).minimize(alpha) {
                LpOutcome::Optimal { value, .. } => value < Q::one(),
                LpOutcome::Unbounded => true,
                LpOutcome::Infeasible => false,
            };
            if dominates && strict {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Float copy for the engine: columns are `y` followed by the split
    /// coordinate, rows are the hyperplanes.
    pub fn to_float(&self, hs: &[ExactHyperplane]) -> (Cone, SplitSet, Vec<NbHyperplane>) {
        let n = self.dim();
        let f = |v: &Q| to_f64(v);
        let mut tableau: Vec<Vec<f64>> = (0..n)
            .map(|j| (0..n).map(|k| if j == k { 1.0 } else { 0.0 }).collect())
            .collect();
        tableau.push(self.split_rate.iter().map(f).collect());
        let mut apex_values = vec![0.0; n];
        apex_values.push(f(&self.split_value));
        let mut nb = Vec::new();
        for (i, h) in hs.iter().enumerate() {
            tableau.push(h.g.iter().map(f).collect());
            apex_values.push(-f(&h.rhs));
            nb.push(NbHyperplane {
                id: n + 1 + i,
                g: h.g.iter().map(f).collect(),
                rhs: f(&h.rhs),
            });
        }
        let mut apex = vec![0.0; n];
        apex.push(f(&self.split_value));
        let cone = Cone {
            num_cols: n + 1,
            num_rows: hs.len(),
            apex,
            apex_values,
            nonbasic: (0..n).collect(),
            tableau,
        };
        let split = SplitSet {
            var: n,
            value: f(&self.split_value),
            lo: f(&self.lo),
            hi: f(&self.hi),
        };
        (cone, split, nb)
    }
}

/// Exact point-ray LP `min wᵀα` over `αᵀp ≥ 1`, `αᵀr ≥ 0`.
pub fn prlp_min(points: &[Vec<Q>], rays: &[Vec<Q>], w: &[Q]) -> LpOutcome {
    let mut lp = RationalLp::new(w.to_vec()).all_free();
    for p in points {
        lp.row(p.clone(), Cmp::Ge, Q::one());
    }
    for r in rays {
        lp.row(r.clone(), Cmp::Ge, Q::zero());
    }
    lp.minimize()
}

/// Some `α` feasible for the point-ray LP with `wᵀα ≤ level`.
pub fn prlp_below(points: &[Vec<Q>], rays: &[Vec<Q>], w: &[Q], level: Q) -> Option<Vec<Q>> {
    let mut lp = RationalLp::new(vec![Q::zero(); w.len()]).all_free();
    for p in points {
        lp.row(p.clone(), Cmp::Ge, Q::one());
    }
    for r in rays {
        lp.row(r.clone(), Cmp::Ge, Q::zero());
    }
    lp.row(w.to_vec(), Cmp::Le, level);
    match lp.minimize() {
        LpOutcome::Optimal { x, .. } => Some(x),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{q, qf};

    /// Three rays, split coordinate `1/2 + y0 − y1 + y2` between 0 and 1.
    fn cone3() -> ExactCone {
        ExactCone {
            cost: vec![q(1), q(2), q(3)],
            split_rate: vec![q(1), q(-1), q(1)],
            split_value: qf(1, 2),
            lo: q(0),
            hi: q(1),
        }
    }

    #[test]
    fn initial_points_and_sic() {
        let c = cone3();
        let init = c.initial();
        assert_eq!(init.points.len(), 3);
        assert_eq!(c.sic(), vec![q(2), q(2), q(2)]);
    }

    #[test]
    fn activation_replaces_cut_point() {
        let c = cone3();
        // y0 ≤ 1/4
        let h = ExactHyperplane {
            g: vec![q(-1), q(0), q(0)],
            rhs: qf(-1, 4),
        };
        let act = c.activate(&h);
        assert_eq!(act.cut, vec![0]);
        assert_eq!(act.new_points.len(), 2);
        let sic = c.sic();
        for &i in &act.new_points {
            let p = &act.collection.points[i];
            assert_eq!(p.coords[0], qf(1, 4));
            assert!(c.split_coord(&p.coords) == q(0) || c.split_coord(&p.coords) == q(1));
            assert!(dot(&sic, &p.coords) >= Q::one());
        }
    }

    #[test]
    fn hyperplane_beyond_boundary_changes_nothing() {
        let c = cone3();
        let h = ExactHyperplane {
            g: vec![q(-1), q(-1), q(-1)],
            rhs: q(-5),
        };
        let act = c.activate(&h);
        assert!(act.cut.is_empty());
        assert_eq!(act.collection, c.initial());
        assert!(c.monotonicity_check(&h));
        assert_eq!(c.strict_dominance_check(&h), Dominance::Impossible);
    }

    #[test]
    fn hyperplane_through_a_whole_facet_is_not_dominating() {
        let c = cone3();
        // lower facet point is y1 = 1/2; pass the hyperplane through it
        let h = ExactHyperplane {
            g: vec![q(0), q(-2), q(0)],
            rhs: q(-1),
        };
        assert_eq!(c.strict_dominance_check(&h), Dominance::Impossible);
        assert!(!c.has_strictly_dominating_vertex(&h).unwrap());
    }

    #[test]
    fn full_activation_without_hyperplanes_is_initial() {
        let c = cone3();
        let hull = c.full_activation(&[]).unwrap();
        // the two sides are unbounded, so vertices are the boundary points
        let boundary: Vec<&Vec<Q>> = hull.points.iter().filter(|p| p.1).map(|p| &p.0).collect();
        for p in c.initial().points {
            assert!(boundary.contains(&&p.coords));
        }
        assert!(hull.points.iter().all(|p| p.1));
    }

    #[test]
    fn prlp_min_of_sic_point() {
        let c = cone3();
        let pts: Vec<Vec<Q>> = c.initial().points.into_iter().map(|p| p.coords).collect();
        let v = prlp_min(&pts, &[], &[q(1), q(1), q(1)]);
        assert_eq!(v.value(), Some(&q(6)));
    }
}
