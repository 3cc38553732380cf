//! Regression for the tilting rule on a three-variable polytope.
//!
//! `P` has its LP optimum at `x̄ = (1/4, 1/4, 1/2)` with cone rays `r¹`, `r²`,
//! `r³` heading to `(1,0,0)`, `(0,1,0)` and `(0,0,0)`; the split is
//! `0 ≤ x₁ ≤ 1`. Row `R3` is activated on `r¹` only (a tilt along `r²`).
//! Activating `R4` on `r²` only then ignores that `r¹` was already cut, and
//! the resulting collection admits an inequality cutting a point of
//! `conv(P \ int S)`. The engine must refuse that second step, and activating
//! `R4` on both `r¹` and `r²` must keep every cut valid.

use std::collections::BTreeSet;

use gic_core::instance::{parse_mps_str, to_standard_form, StandardForm};
use gic_core::pha::{pha1_activate, plan_activation, ActivationOptions, PhaError};
use gic_core::simplex::{corner_cone, solve_lp, Cone};
use gic_core::split::{initial_collection, PointRayCollection, SplitSet};

use crate::prlp::{cut_at, exact_collection, find_cut_closure_point, NonbasicMap, Witness};
use crate::validate::{validate_cut, CutVerdict};
use crate::polyhedron::RationalPolyhedron;
use crate::{from_f64, qf, snap, OracleError, Q};

pub const FIXTURE: &str = include_str!("../fixtures/regression.mps");

#[derive(Clone, Debug)]
pub struct RegressionReport {
    /// LP optimum in original coordinates.
    pub apex: Vec<Q>,
    /// Points and ray directions of the broken collection, original coordinates.
    pub broken_points: Vec<Vec<Q>>,
    pub broken_rays: Vec<Vec<Q>>,
    /// Closure point cut under the broken sequence, original coordinates.
    pub witness: Option<Vec<Q>>,
    /// Verdict for the cutting inequality on the integer hull.
    pub broken_cut: Option<CutVerdict>,
    /// Whether the broken collection admits a cut of `(0, 0, −9/5)`, a point of
    /// `P` on the facet `x₁ = 0`.
    pub reference_point_cut: bool,
    pub enforced: Result<(), PhaError>,
    /// Closure point cut by the compliant collection, if any.
    pub compliant_witness: Option<Witness>,
    /// Vertex-objective cuts of the compliant collection and how many failed.
    pub compliant_cuts: usize,
    pub compliant_invalid: usize,
}

impl RegressionReport {
    pub fn broken_leg(&self) -> bool {
        self.witness.is_some() && self.reference_point_cut && self.broken_cut.as_ref().is_some_and(|v| !v.is_valid())
    }

    pub fn enforced_leg(&self) -> bool {
        matches!(self.enforced, Err(PhaError::TiltRule { .. }))
    }

    pub fn compliant_leg(&self) -> bool {
        self.compliant_witness.is_none() && self.compliant_cuts > 0 && self.compliant_invalid == 0
    }

    pub fn passed(&self) -> bool {
        self.broken_leg() && self.enforced_leg() && self.compliant_leg()
    }
}

fn original(sf: &StandardForm, x: &[Q], direction: bool) -> Vec<Q> {
    x.iter()
        .zip(&sf.col_map)
        .map(|(v, cm)| {
            let v = if cm.flipped { -v.clone() } else { v.clone() };
            if direction {
                v
            } else {
                &cm.shift + v
            }
        })
        .collect()
}

fn snapped(v: Vec<f64>) -> Vec<Q> {
    v.into_iter().map(|x| snap(x, 1_000_000, 1e-9)).collect()
}

/// Ray of the cone whose structural direction has the sign pattern `signs`.
fn find_ray(cone: &Cone, signs: [i8; 3]) -> Option<usize> {
    (0..cone.dim()).find(|&j| {
        let r = cone.ray(j);
        r.iter().zip(signs).all(|(v, s)| (*v > 1e-9) == (s > 0) && (*v < -1e-9) == (s < 0))
    })
}

pub struct Setup {
    pub sf: StandardForm,
    pub cone: Cone,
    pub split: SplitSet,
    /// Ray indices of `r¹`, `r²`, `r³`.
    pub rays: [usize; 3],
    /// Hyperplane ids of `R3` and `R4`.
    pub h4: usize,
    pub h5: usize,
}

pub fn setup() -> Result<Setup, OracleError> {
    let inst = parse_mps_str("regression", FIXTURE).map_err(|e| OracleError::Instance(e.to_string()))?;
    let sf = to_standard_form(&inst).map_err(|e| OracleError::Instance(e.to_string()))?;
    let sol = solve_lp(&sf, &sf.c).map_err(|e| OracleError::Instance(e.to_string()))?;
    let cone = corner_cone(&sol).map_err(|e| OracleError::Instance(e.to_string()))?;
    let split = SplitSet::new(0, sol.x[0]).ok_or_else(|| OracleError::Instance("x1 is integral".into()))?;
    let ray = |s| find_ray(&cone, s).ok_or_else(|| OracleError::Instance("unexpected cone".into()));
    let rays = [ray([1, -1, -1])?, ray([-1, 1, -1])?, ray([-1, -1, -1])?];
    let row = |name: &str| {
        sf.row_names
            .iter()
            .position(|r| r == name)
            .map(|i| sf.num_cols() + i)
            .ok_or_else(|| OracleError::Instance(format!("row {name} missing")))
    };
    let (h4, h5) = (row("R3")?, row("R4")?);
    Ok(Setup {
        sf,
        cone,
        split,
        rays,
        h4,
        h5,
    })
}

fn activate(s: &Setup, coll: &mut PointRayCollection, h: usize, r_a: &[usize], enforce: bool) -> Result<(), PhaError> {
    let nb = s.cone.project(&s.sf.hyperplane(h));
    let set: BTreeSet<usize> = r_a.iter().copied().collect();
    pha1_activate(&s.cone, coll, &nb, &set, ActivationOptions { enforce_tilt_rule: enforce }).map(|_| ())
}

/// Runs the broken, enforced and compliant legs.
pub fn tilt_regression() -> Result<RegressionReport, OracleError> {
    let s = setup()?;
    let [r1, r2, _] = s.rays;
    let poly = RationalPolyhedron::from_standard_form(&s.sf);
    let map = NonbasicMap::new(&s.sf, &s.cone.nonbasic);
    let (k, lo, hi) = (s.split.var, from_f64(s.split.lo), from_f64(s.split.hi));
    let fail = |e: PhaError| OracleError::Instance(e.to_string());

    let mut first = initial_collection(&s.cone, &s.split);
    activate(&s, &mut first, s.h4, &[r1], true).map_err(fail)?;

    let mut broken = first.clone();
    activate(&s, &mut broken, s.h5, &[r2], false).map_err(fail)?;
    let broken_points = broken
        .points
        .iter()
        .map(|p| original(&s.sf, &snapped(s.cone.to_structural(&p.coords)), false))
        .collect();
    let broken_rays = broken
        .rays
        .iter()
        .map(|r| {
            let d = snapped(s.cone.direction_to_structural(&r.direction));
            original(&s.sf, &crate::normalize_max(&d), true)
        })
        .collect();
    let (bp, br) = exact_collection(&broken);
    let found = find_cut_closure_point(&poly, &map, k, &lo, &hi, &bp, &br)?;
    let (witness, broken_cut) = match &found {
        Some(w) if !w.is_ray => {
            let (a, rhs) = map.to_structural(&w.alpha);
            (Some(original(&s.sf, &w.x, false)), Some(validate_cut(&poly, &a, &rhs)?))
        }
        _ => (None, None),
    };

    let reference: Vec<Q> = [qf(0, 1), qf(0, 1), qf(-9, 5)]
        .iter()
        .zip(&s.sf.col_map)
        .map(|(v, cm)| if cm.flipped { &cm.shift - v } else { v - &cm.shift })
        .collect();
    let reference_point_cut = poly.contains(&reference) && cut_at(&bp, &br, &map.point(&reference), crate::q(1)).is_some();

    let nb5 = s.cone.project(&s.sf.hyperplane(s.h5));
    let enforced = plan_activation(&s.cone, &first, &nb5, &[r2].into_iter().collect(), ActivationOptions::default()).map(|_| ());

    let mut compliant = first.clone();
    activate(&s, &mut compliant, s.h5, &[r1, r2], true).map_err(fail)?;
    let (cp, cr) = exact_collection(&compliant);
    let compliant_witness = find_cut_closure_point(&poly, &map, k, &lo, &hi, &cp, &cr)?;
    let mut e = vec![crate::q(0); poly.n];
    e[k] = crate::q(1);
    let hull = poly.split_hull(&e, &lo, &hi)?;
    let mut compliant_cuts = 0;
    let mut compliant_invalid = 0;
    for (x, _) in &hull.points {
        if let crate::lp::LpOutcome::Optimal { x: alpha, .. } = crate::cone::prlp_min(&cp, &cr, &map.point(x)) {
            compliant_cuts += 1;
            let (a, rhs) = map.to_structural(&alpha);
            if !validate_cut(&poly, &a, &rhs)?.is_valid() {
                compliant_invalid += 1;
            }
        }
    }

    let apex = original(&s.sf, &snapped(s.cone.apex.clone()), false);
    Ok(RegressionReport {
        apex,
        broken_points,
        broken_rays,
        witness,
        broken_cut,
        reference_point_cut,
        enforced,
        compliant_witness,
        compliant_cuts,
        compliant_invalid,
    })
}
