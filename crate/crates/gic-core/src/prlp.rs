//! The point-ray LP: `min wᵀα` subject to `αᵀp ≥ 1` for every point and
//! `αᵀr ≥ 0` for every ray, `α` free.
//!
//! The LP is solved through its dual `max Σλ_p` subject to
//! `Σλ_p p + Σμ_r r = w`, `λ, μ ≥ 0`, which has one row per nonbasic
//! coordinate and one sparse column per point or ray. The cut is read off the
//! dual multipliers. Dual infeasibility is exactly `w ∉ cone(P ∪ R)`, the
//! condition for the point-ray LP to be unbounded.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::StandardForm;
use crate::lp::{self, LpProblem, LpStatus, SimplexOptions};
use crate::simplex::Cone;
use crate::split::{densify, Cut, CutFamily, PointRayCollection, Provenance, SparseVec, SplitSet};
use crate::ZERO_TOL;

/// Cut-generation limits.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PrlpOptions {
    pub obj_time: Duration,
    pub max_dynamism: f64,
    /// Skip objectives predicted to be unbounded.
    pub prefilter: bool,
    /// Cap on point objectives per split and family.
    pub obj_points: usize,
}

impl Default for PrlpOptions {
    fn default() -> Self {
        PrlpOptions {
            obj_time: Duration::from_secs(5),
            max_dynamism: 1e6,
            prefilter: true,
            obj_points: 1000,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PrlpError {
    #[error("point-ray collection is empty")]
    Empty,
}

/// Why an objective produced no cut.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PrlpFailure {
    #[error("unbounded")]
    Unbounded,
    #[error("infeasible")]
    Infeasible,
    #[error("time limit")]
    Timeout,
    #[error("solver stopped: {0:?}")]
    Solver(LpStatus),
    #[error("dynamism {0:e} above limit")]
    Dynamism(f64),
    #[error("recheck violation {0:e}")]
    Recheck(f64),
}

/// Rows of the point-ray LP.
#[derive(Clone, Debug)]
pub struct PrlpModel {
    pub dim: usize,
    pub points: Vec<SparseVec>,
    pub rays: Vec<SparseVec>,
    dual: LpProblem,
}

impl PrlpModel {
    pub fn new(dim: usize, points: Vec<SparseVec>, rays: Vec<SparseVec>) -> Result<Self, PrlpError> {
        if points.is_empty() && rays.is_empty() {
            return Err(PrlpError::Empty);
        }
        let mut cols = Vec::with_capacity(points.len() + rays.len());
        let mut cost = Vec::with_capacity(points.len() + rays.len());
        for p in &points {
            cols.push(p.iter().copied().filter(|(_, v)| *v != 0.0).collect());
            cost.push(-1.0);
        }
        for r in &rays {
            cols.push(r.iter().copied().filter(|(_, v)| *v != 0.0).collect());
            cost.push(0.0);
        }
        let dual = LpProblem {
            num_rows: dim,
            cols,
            rhs: vec![0.0; dim],
            equality: vec![true; dim],
            cost,
        };
        Ok(PrlpModel { dim, points, rays, dual })
    }

    pub fn num_rows(&self) -> usize {
        self.points.len() + self.rays.len()
    }

    /// Largest violation of the model rows by `alpha` (0 when feasible).
    pub fn max_violation(&self, alpha: &[f64]) -> f64 {
        let dot = |v: &SparseVec| v.iter().map(|&(j, x)| alpha[j] * x).sum::<f64>();
        let p = self.points.iter().map(|p| 1.0 - dot(p)).fold(0.0, f64::max);
        let r = self.rays.iter().map(|r| -dot(r)).fold(0.0, f64::max);
        p.max(r)
    }

    fn with_rhs(&self, w: &[f64]) -> LpProblem {
        let mut d = self.dual.clone();
        d.rhs = w.to_vec();
        d
    }
}

/// Model over the current collection.
pub fn build_prlp(coll: &PointRayCollection) -> Result<PrlpModel, PrlpError> {
    PrlpModel::new(
        coll.dim,
        coll.points.iter().map(|p| p.coords.clone()).collect(),
        coll.rays.iter().map(|r| r.direction.clone()).collect(),
    )
}

/// Boundedness of the point-ray LP for objective `v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundedness {
    Bounded,
    Unbounded,
}

/// Predicts boundedness by testing `v ∈ cone(P ∪ R)`.
pub fn check_boundedness(v: &[f64], model: &PrlpModel) -> Boundedness {
    let d = model.with_rhs(v);
    let r = lp::solve(
        &d,
        &SimplexOptions {
            phase_one_only: true,
            ..Default::default()
        },
    );
    if r.status == LpStatus::Optimal {
        Boundedness::Bounded
    } else {
        Boundedness::Unbounded
    }
}

/// Optimal `α` for objective `w`, after the dynamism and recheck gates.
pub fn solve_for_cut(model: &PrlpModel, w: &[f64], opts: &PrlpOptions) -> Result<Vec<f64>, PrlpFailure> {
    let d = model.with_rhs(w);
    let r = lp::solve(
        &d,
        &SimplexOptions {
            deadline: Some(Instant::now() + opts.obj_time),
            ..Default::default()
        },
    );
    match r.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(PrlpFailure::Unbounded),
        LpStatus::Unbounded => return Err(PrlpFailure::Infeasible),
        LpStatus::TimeLimit => return Err(PrlpFailure::Timeout),
        s => return Err(PrlpFailure::Solver(s)),
    }
    let mut alpha: Vec<f64> = r.duals.iter().map(|p| -p).collect();
    let big = alpha.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    for a in alpha.iter_mut() {
        if a.abs() <= 1e-11 * big.max(1.0) {
            *a = 0.0;
        }
    }
    let viol = model.max_violation(&alpha);
    if viol > ZERO_TOL {
        return Err(PrlpFailure::Recheck(viol));
    }
    let dy = crate::split::dynamism(&alpha);
    if dy > opts.max_dynamism {
        return Err(PrlpFailure::Dynamism(dy));
    }
    Ok(alpha)
}

/// Solves the point-ray LP directly (free `α` split into two nonnegative
/// parts). Used to cross-check the dual route and boundedness predictions.
pub fn solve_primal(model: &PrlpModel, w: &[f64]) -> (LpStatus, Option<Vec<f64>>) {
    let n = model.dim;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for p in &model.points {
        let d = densify(p, n);
        rows.push(d.iter().copied().chain(d.iter().map(|v| -v)).collect::<Vec<f64>>());
        rhs.push(1.0);
    }
    for r in &model.rays {
        let d = densify(r, n);
        rows.push(d.iter().copied().chain(d.iter().map(|v| -v)).collect::<Vec<f64>>());
        rhs.push(0.0);
    }
    let cost: Vec<f64> = w.iter().copied().chain(w.iter().map(|v| -v)).collect();
    let p = LpProblem::from_dense_rows(&rows, &rhs, &vec![false; rows.len()], &cost);
    let r = lp::solve(&p, &SimplexOptions::default());
    let alpha = (r.status == LpStatus::Optimal).then(|| (0..n).map(|j| r.x[j] - r.x[n + j]).collect());
    (r.status, alpha)
}

/// State needed to build objective vectors for one split.
pub struct ObjectiveContext<'a> {
    pub coll: &'a PointRayCollection,
    /// Reduced cost of each cone ray, i.e. `cᵀr^j`.
    pub ray_costs: &'a [f64],
    /// Points from other splits routed to this one.
    pub routed: &'a [SparseVec],
    pub cap: usize,
}

/// Objective vectors of one family, deduplicated.
pub fn gen_objectives(family: CutFamily, ctx: &ObjectiveContext) -> Vec<Vec<f64>> {
    let n = ctx.coll.dim;
    let cost = |p: &SparseVec| p.iter().map(|&(j, v)| ctx.ray_costs[j] * v).sum::<f64>();
    let raw: Vec<SparseVec> = match family {
        CutFamily::Sic => Vec::new(),
        CutFamily::Rays => (0..n)
            .map(|j| {
                let d = ctx.coll.boundary_dist[j];
                vec![(j, if d.is_finite() { d } else { 1.0 })]
            })
            .collect(),
        CutFamily::Vertices => ctx
            .coll
            .activations
            .iter()
            .map(|a| vec![(a.ray, a.distance)])
            .collect(),
        CutFamily::Tight => {
            let mut pts: Vec<SparseVec> = ctx.coll.points.iter().map(|p| p.coords.clone()).collect();
            sort_by_cost(&mut pts, &cost);
            stride_sample(pts, ctx.cap)
        }
        CutFamily::OtherSplits => {
            let mut pts = ctx.routed.to_vec();
            sort_by_cost(&mut pts, &cost);
            stride_sample(pts, ctx.cap)
        }
    };
    let mut out: Vec<Vec<f64>> = Vec::new();
    for p in raw {
        let d = densify(&p, n);
        if !out.iter().any(|q| q.iter().zip(&d).all(|(a, b)| (a - b).abs() <= ZERO_TOL)) {
            out.push(d);
        }
    }
    out
}

fn sort_by_cost(pts: &mut [SparseVec], cost: &dyn Fn(&SparseVec) -> f64) {
    let mut keyed: Vec<(f64, usize)> = pts.iter().enumerate().map(|(i, p)| (cost(p), i)).collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let copy: Vec<SparseVec> = pts.to_vec();
    for (slot, (_, i)) in pts.iter_mut().zip(keyed) {
        *slot = copy[i].clone();
    }
}

/// Keeps every `⌈len/cap⌉`-th element starting with the first.
pub fn stride_sample<T>(v: Vec<T>, cap: usize) -> Vec<T> {
    if v.len() <= cap || cap == 0 {
        return if cap == 0 { Vec::new() } else { v };
    }
    let stride = v.len().div_ceil(cap);
    v.into_iter().step_by(stride).take(cap).collect()
}

/// For each collection, points from other collections whose last
/// containing split (in `splits` order, strictly inside) is this one.
pub fn route_other_split_points(cone: &Cone, colls: &[&PointRayCollection]) -> Vec<Vec<SparseVec>> {
    let splits: Vec<&SplitSet> = colls.iter().map(|c| &c.split).collect();
    let mut routed = vec![Vec::new(); colls.len()];
    for (src, coll) in colls.iter().enumerate() {
        for p in &coll.points {
            let last = (0..splits.len())
                .rev()
                .find(|&k| k != src && splits[k].strictly_inside(cone, &p.coords));
            if let Some(k) = last {
                routed[k].push(p.coords.clone());
            }
        }
    }
    routed
}

/// Counters over all solves.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct PrlpStats {
    pub objectives: usize,
    pub solves: usize,
    pub cuts: usize,
    pub duplicates: usize,
    pub unbounded: usize,
    pub infeasible: usize,
    pub timeouts: usize,
    pub rejected_dynamism: usize,
    pub rejected_recheck: usize,
    pub prefiltered: usize,
    /// Solves whose status disagreed with the boundedness prediction.
    pub prediction_mismatches: usize,
    pub predictions_checked: usize,
}

impl PrlpStats {
    pub fn absorb(&mut self, o: &PrlpStats) {
        self.objectives += o.objectives;
        self.solves += o.solves;
        self.cuts += o.cuts;
        self.duplicates += o.duplicates;
        self.unbounded += o.unbounded;
        self.infeasible += o.infeasible;
        self.timeouts += o.timeouts;
        self.rejected_dynamism += o.rejected_dynamism;
        self.rejected_recheck += o.rejected_recheck;
        self.prefiltered += o.prefiltered;
        self.prediction_mismatches += o.prediction_mismatches;
        self.predictions_checked += o.predictions_checked;
    }
}

/// Normalized key used to drop repeated cuts.
pub fn cut_key(alpha: &[f64]) -> Vec<i64> {
    let big = alpha.iter().fold(0.0f64, |a, b| a.max(b.abs())).max(1e-300);
    alpha.iter().map(|a| (a / big * 1e6).round() as i64).collect()
}

/// Runs every objective of `families` (in the given order) on the collection
/// and returns the distinct cuts that pass the gates.
#[allow(clippy::too_many_arguments)]
pub fn generate_cuts(
    cone: &Cone,
    sf: &StandardForm,
    ctx: &ObjectiveContext,
    families: &[CutFamily],
    opts: &PrlpOptions,
    provenance: &Provenance,
    max_cuts: usize,
    deadline: Option<Instant>,
) -> (Vec<Cut>, PrlpStats) {
    let mut stats = PrlpStats::default();
    let mut cuts = Vec::new();
    let Ok(model) = build_prlp(ctx.coll) else {
        return (cuts, stats);
    };
    let mut seen: HashMap<Vec<i64>, ()> = HashMap::new();
    for &family in families {
        for w in gen_objectives(family, ctx) {
            if cuts.len() >= max_cuts || deadline.is_some_and(|d| Instant::now() >= d) {
                return (cuts, stats);
            }
            stats.objectives += 1;
            let predicted = if opts.prefilter {
                let b = check_boundedness(&w, &model);
                if b == Boundedness::Unbounded {
                    stats.prefiltered += 1;
                    continue;
                }
                Some(b)
            } else {
                None
            };
            stats.solves += 1;
            let res = solve_for_cut(&model, &w, opts);
            if let Some(b) = predicted {
                stats.predictions_checked += 1;
                let solved_bounded = !matches!(res, Err(PrlpFailure::Unbounded));
                if solved_bounded != (b == Boundedness::Bounded) {
                    stats.prediction_mismatches += 1;
                }
            }
            match res {
                Ok(alpha) => {
                    let key = cut_key(&alpha);
                    if seen.insert(key, ()).is_some() {
                        stats.duplicates += 1;
                        continue;
                    }
                    let mut prov = provenance.clone();
                    prov.family = family;
                    cuts.push(Cut::from_alpha(alpha, cone, sf, prov));
                    stats.cuts += 1;
                }
                Err(PrlpFailure::Unbounded) => stats.unbounded += 1,
                Err(PrlpFailure::Infeasible) => stats.infeasible += 1,
                Err(PrlpFailure::Timeout) => stats.timeouts += 1,
                Err(PrlpFailure::Dynamism(_)) => stats.rejected_dynamism += 1,
                Err(PrlpFailure::Recheck(_)) => stats.rejected_recheck += 1,
                Err(PrlpFailure::Solver(_)) => stats.infeasible += 1,
            }
        }
    }
    (cuts, stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(points: &[&[(usize, f64)]], rays: &[&[(usize, f64)]], n: usize) -> PrlpModel {
        PrlpModel::new(
            n,
            points.iter().map(|p| p.to_vec()).collect(),
            rays.iter().map(|r| r.to_vec()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn initial_points_recover_reciprocals() {
        let m = model(&[&[(0, 2.0)], &[(1, 4.0)]], &[], 2);
        let a = solve_for_cut(&m, &[2.0, 0.0], &PrlpOptions::default());
        // w = first point: minimize 2 α₀, bounded below by α₀ ≥ 1/2; α₁ direction
        // has zero cost but α₁ ≥ 1/4 keeps the row feasible.
        let a = a.unwrap();
        assert!((a[0] - 0.5).abs() < 1e-9);
        assert!(a[1] >= 0.25 - 1e-9);
        let a = solve_for_cut(&m, &[2.0, 4.0], &PrlpOptions::default()).unwrap();
        assert!((a[0] - 0.5).abs() < 1e-9 && (a[1] - 0.25).abs() < 1e-9);
    }

    #[test]
    fn negated_point_is_unbounded() {
        let m = model(&[&[(0, 1.0)], &[(1, 1.0)]], &[], 2);
        assert_eq!(check_boundedness(&[-1.0, 0.0], &m), Boundedness::Unbounded);
        assert_eq!(check_boundedness(&[1.0, 0.0], &m), Boundedness::Bounded);
        assert_eq!(
            solve_for_cut(&m, &[-1.0, 0.0], &PrlpOptions::default()),
            Err(PrlpFailure::Unbounded)
        );
        assert_eq!(solve_primal(&m, &[-1.0, 0.0]).0, LpStatus::Unbounded);
        assert_eq!(solve_primal(&m, &[1.0, 0.0]).0, LpStatus::Optimal);
    }

    #[test]
    fn zero_objective_is_feasible() {
        let m = model(&[&[(0, 1.0)], &[(0, 1.0), (1, 2.0)]], &[&[(1, 1.0)]], 2);
        let a = solve_for_cut(&m, &[0.0, 0.0], &PrlpOptions::default()).unwrap();
        assert!(m.max_violation(&a) <= 1e-9);
    }

    #[test]
    fn dynamism_gate() {
        let m = model(&[&[(0, 1.0)], &[(1, 1e7)]], &[], 2);
        let r = solve_for_cut(&m, &[1.0, 1e7], &PrlpOptions::default());
        assert!(matches!(r, Err(PrlpFailure::Dynamism(_))));
    }

    #[test]
    fn stride_sampling() {
        let v: Vec<usize> = (0..10).collect();
        assert_eq!(stride_sample(v.clone(), 4), vec![0, 3, 6, 9]);
        assert_eq!(stride_sample(v.clone(), 20), v);
        assert!(stride_sample(v, 0).is_empty());
    }

    #[test]
    fn empty_collection_is_an_error() {
        assert_eq!(PrlpModel::new(2, vec![], vec![]).unwrap_err(), PrlpError::Empty);
    }
}
