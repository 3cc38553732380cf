//! Randomized and end-to-end verification suites shared by tests and the CLI.

use std::collections::BTreeSet;

use gic_core::eval::ExperimentConfig;
use gic_core::pha::{pha1_activate, rays_cut_by, run_generators, ActivationOptions, Criterion};
use gic_core::simplex::{corner_cone, solve_lp, Cone};
use gic_core::split::{initial_collection, sic_from_initial, PointRayCollection};
use gic_core::trace::Trace;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cone::{Dominance, ExactHyperplane};
use crate::lp::LpOutcome;
use crate::polyhedron::RationalPolyhedron;
use crate::random::{exact_cone, exact_hyperplane, hyperplane_on, subset, tiny_milp};
use crate::validate::validate_generated;
use crate::{dot, from_f64, qf, to_f64, OracleError, Q};

/// Relative slack allowed when checking float cuts exactly.
pub const CUT_TOL: f64 = 1e-7;

#[derive(Clone, Debug, Default, Serialize)]
pub struct ValiditySummary {
    pub instances: usize,
    pub configs: usize,
    pub cuts: usize,
    pub invalid: usize,
    /// Largest violation relative to `max(1, |rhs|)`.
    pub worst: f64,
    pub failures: Vec<String>,
}

/// Configurations covering every criterion, tilting on and off, and
/// `kh ∈ 0..=4`, with all objective families.
pub fn validity_configs() -> Vec<ExperimentConfig> {
    let mut out = Vec::new();
    for criterion in [Criterion::H1, Criterion::H2, Criterion::H3] {
        for tilting in [false, true] {
            for kh in 0..=4 {
                if kh == 0 && !tilting {
                    continue;
                }
                out.push(ExperimentConfig {
                    criterion,
                    tilting,
                    kh,
                    obj_points: 200,
                    obj_time: std::time::Duration::from_secs(1),
                    ..Default::default()
                });
            }
        }
    }
    out
}

/// Runs every configuration on one instance and validates every SIC and GIC
/// against the enumerated integer hull.
pub fn validate_instance(
    sf: &gic_core::instance::StandardForm,
    configs: &[ExperimentConfig],
    summary: &mut ValiditySummary,
) -> Result<(), OracleError> {
    let sol = solve_lp(sf, &sf.c).map_err(|e| OracleError::Instance(e.to_string()))?;
    let cone = corner_cone(&sol).map_err(|e| OracleError::Instance(e.to_string()))?;
    let poly = RationalPolyhedron::from_standard_form(sf);
    summary.instances += 1;
    for cfg in configs {
        let Ok(gen) = run_generators(sf, &sol, &cone, &cfg.pha_config(), &Trace::new()) else {
            continue;
        };
        summary.configs += 1;
        for cut in gen.sics.iter().chain(&gen.cuts) {
            summary.cuts += 1;
            let v = validate_generated(&poly, cut)?;
            if let Some(s) = &v.min_slack {
                let rel = -to_f64(s) / cut.structural_rhs.abs().max(1.0);
                summary.worst = summary.worst.max(rel);
            }
            if !v.is_valid_within(CUT_TOL, cut.structural_rhs) {
                summary.invalid += 1;
                if summary.failures.len() < 10 {
                    summary.failures.push(format!("{} {} {:?}", sf.name, cfg.label(), cut.provenance));
                }
            }
        }
    }
    Ok(())
}

/// [`validate_instance`] over `count` random tiny programs.
pub fn validity_suite(seed: u64, count: usize) -> Result<ValiditySummary, OracleError> {
    let mut summary = ValiditySummary::default();
    let configs = validity_configs();
    let mut s = seed;
    while summary.instances < count && s < seed + 1000 {
        let n = 3 + (s % 4) as usize;
        if let Some(sf) = tiny_milp(s, n, 2 + (s % 3) as usize, 2) {
            validate_instance(&sf, &configs, &mut summary)?;
        }
        s += 1;
    }
    Ok(summary)
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct TrialSummary {
    pub trials: usize,
    /// Trials where the property was not vacuous.
    pub checked: usize,
    pub failures: usize,
}

/// Randomized exact trials: activating a hyperplane that cuts the ray of the
/// cheapest initial point never yields a cheaper point from that ray.
pub fn monotonicity_trials(seed: u64, trials: usize) -> TrialSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = TrialSummary::default();
    while out.trials < trials {
        let n = rng.gen_range(2..=5);
        let cone = exact_cone(&mut rng, n, 0.15);
        let init = cone.initial();
        let Some(best) = init
            .points
            .iter()
            .min_by(|a, b| dot(&cone.cost, &a.coords).cmp(&dot(&cone.cost, &b.coords)))
        else {
            continue;
        };
        let r = best.origin_ray;
        let k = rng.gen_range(1..=n);
        let mut targets = subset(&mut rng, n, k);
        if !targets.contains(&r) {
            targets.push(r);
        }
        let mut h = hyperplane_on(&mut rng, n, &targets);
        // place the hyperplane strictly before the boundary on r
        let frac = qf(rng.gen_range(1..=9), 10);
        h.rhs = &h.g[r] * &best.coords[r] * frac;
        out.trials += 1;
        if cone.cut_rays(&h).contains(&r) {
            out.checked += 1;
        }
        if !cone.monotonicity_check(&h) {
            out.failures += 1;
        }
    }
    out
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ParallelSummary {
    pub trials: usize,
    pub points: usize,
    pub rays: usize,
    /// Exact-model elements off the SIC.
    pub exact_failures: usize,
    /// Engine elements with residual at least `1e-7`.
    pub float_failures: usize,
    pub max_residual: f64,
}

fn float_sic_residuals(coll: &PointRayCollection, origin: &BTreeSet<usize>, sic: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for p in coll.points.iter().filter(|p| origin.contains(&p.origin_ray) && p.coords.len() > 1) {
        let v: f64 = p.coords.iter().map(|&(j, x)| sic[j] * x).sum();
        out.push((v - 1.0).abs());
    }
    for r in coll.rays.iter().filter(|r| origin.contains(&r.origin_ray) && !r.base.is_empty()) {
        let v: f64 = r.direction.iter().map(|&(j, x)| sic[j] * x).sum();
        out.push(v.abs());
    }
    out
}

/// Activation on rays that miss the split boundary: new points lie on the
/// SIC and new rays are parallel to it, in the exact model and the engine.
pub fn parallel_ray_trials(seed: u64, trials: usize) -> ParallelSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = ParallelSummary::default();
    while out.trials < trials {
        let n = rng.gen_range(3..=6);
        let cone = exact_cone(&mut rng, n, 0.4);
        let parallel: Vec<usize> = (0..n).filter(|&j| cone.split_rate[j].is_zero()).collect();
        if parallel.is_empty() || parallel.len() == n {
            continue;
        }
        let k = rng.gen_range(1..=parallel.len());
        let mut targets = subset(&mut rng, parallel.len(), k);
        targets.iter_mut().for_each(|t| *t = parallel[*t]);
        let h = hyperplane_on(&mut rng, n, &targets);
        out.trials += 1;

        let sic = cone.sic();
        let act = cone.activate(&h);
        for &i in &act.new_points {
            let p = &act.collection.points[i];
            if parallel.contains(&p.origin_ray) {
                out.points += 1;
                if dot(&sic, &p.coords) != Q::one() {
                    out.exact_failures += 1;
                }
            }
        }
        for &i in &act.new_rays {
            let r = &act.collection.rays[i];
            if parallel.contains(&r.origin_ray) {
                out.rays += 1;
                if !dot(&sic, &r.direction).is_zero() {
                    out.exact_failures += 1;
                }
            }
        }

        let (fcone, split, nbs) = cone.to_float(std::slice::from_ref(&h));
        let mut coll = initial_collection(&fcone, &split);
        let Some(alpha) = sic_from_initial(&coll) else { continue };
        let r_a: BTreeSet<usize> = rays_cut_by(&nbs[0], &coll)
            .into_iter()
            .filter(|j| parallel.contains(j))
            .collect();
        if pha1_activate(&fcone, &mut coll, &nbs[0], &r_a, ActivationOptions::default()).is_err() {
            out.float_failures += 1;
            continue;
        }
        for res in float_sic_residuals(&coll, &r_a, &alpha) {
            out.max_residual = out.max_residual.max(res);
            if res >= 1e-7 {
                out.float_failures += 1;
            }
        }
    }
    out
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct DominanceSummary {
    pub trials: usize,
    pub possible: usize,
    pub agreements: usize,
    pub disagreements: usize,
}

/// Compares the two-sided dominance test with brute-force enumeration of
/// the point-ray LP's basic solutions on random three-dimensional cones.
pub fn dominance_trials(seed: u64, trials: usize) -> Result<DominanceSummary, OracleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = DominanceSummary::default();
    let mut attempts = 0;
    while out.trials < trials && attempts < trials * 50 {
        attempts += 1;
        let cone = exact_cone(&mut rng, 3, 0.0);
        let h = exact_hyperplane(&mut rng, 3);
        let verdict = cone.strict_dominance_check(&h);
        if matches!(verdict, Dominance::NotApplicable(_)) {
            continue;
        }
        out.trials += 1;
        let possible = verdict == Dominance::Possible;
        out.possible += usize::from(possible);
        if cone.has_strictly_dominating_vertex(&h)? == possible {
            out.agreements += 1;
        } else {
            out.disagreements += 1;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct GrowthRow {
    pub kh: usize,
    /// Mean number of points under full activation.
    pub full: f64,
    /// Mean number of points under distance-1 activation.
    pub partial: f64,
}

/// Point counts of full versus distance-1 activation on the same hyperplane
/// sequences, each hyperplane cutting about half of the rays.
pub fn growth_demo(seed: u64, n: usize, max_kh: usize, trials: usize) -> Result<Vec<GrowthRow>, OracleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<GrowthRow> = (0..=max_kh)
        .map(|kh| GrowthRow {
            kh,
            ..Default::default()
        })
        .collect();
    for _ in 0..trials {
        let mut cone = exact_cone(&mut rng, n, 0.0);
        cone.split_value = qf(1, 2);
        let hs: Vec<ExactHyperplane> = (0..max_kh)
            .map(|_| {
                let t = subset(&mut rng, n, n / 2);
                hyperplane_on(&mut rng, n, &t)
            })
            .collect();
        let (fcone, split, nbs) = cone.to_float(&hs);
        let mut coll = initial_collection(&fcone, &split);
        for kh in 0..=max_kh {
            if kh > 0 {
                let r_a: BTreeSet<usize> = rays_cut_by(&nbs[kh - 1], &coll).into_iter().collect();
                pha1_activate(&fcone, &mut coll, &nbs[kh - 1], &r_a, ActivationOptions::default())
                    .map_err(|e| OracleError::Instance(e.to_string()))?;
            }
            let full = cone.full_activation(&hs[..kh])?;
            rows[kh].full += full.points.len() as f64 / trials as f64;
            rows[kh].partial += coll.points.len() as f64 / trials as f64;
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ClosureSummary {
    pub splits: usize,
    /// Splits with at least one final point.
    pub with_final: usize,
    pub sandwich_failures: usize,
    /// Splits where full activation of every row gave the exact optimum.
    pub full_matches: usize,
    pub full_failures: usize,
}

/// Bounds from the collections of one run against the exact optimum over
/// each split closure, and the exact optimum recovered from full activation.
pub fn closure_checks(
    sf: &gic_core::instance::StandardForm,
    collections: &[PointRayCollection],
    cone: &Cone,
    summary: &mut ClosureSummary,
) -> Result<(), OracleError> {
    let poly = RationalPolyhedron::from_standard_form(sf);
    let c = &sf.exact.c;
    let obj = |y: &[(usize, f64)]| -> f64 {
        let x = cone.to_structural(y);
        sf.c.iter().zip(&x).map(|(a, b)| a * b).sum()
    };
    for coll in collections {
        let k = coll.split.var;
        let (lo, hi) = (from_f64(coll.split.lo), from_f64(coll.split.hi));
        let LpOutcome::Optimal { value, .. } = poly.sk_closure_opt(k, &lo, &hi, c) else {
            continue;
        };
        summary.splits += 1;
        let opt = to_f64(&value);
        let z_lo = coll.points.iter().map(|p| obj(&p.coords)).fold(f64::INFINITY, f64::min);
        let z_hi = coll
            .points
            .iter()
            .filter(|p| p.is_final)
            .map(|p| obj(&p.coords))
            .fold(f64::INFINITY, f64::min);
        if z_hi.is_finite() {
            summary.with_final += 1;
            let tol = 1e-6 * opt.abs().max(1.0);
            if !(z_lo <= opt + tol && opt <= z_hi + tol) {
                summary.sandwich_failures += 1;
            }
        }
        let mut e = vec![Q::zero(); poly.n];
        e[k] = Q::one();
        let hull = poly.split_hull(&e, &lo, &hi)?;
        let best = hull
            .points
            .iter()
            .filter(|(_, on_bd)| *on_bd)
            .map(|(x, _)| dot(c, x))
            .min();
        if best.as_ref() == Some(&value) {
            summary.full_matches += 1;
        } else {
            summary.full_failures += 1;
        }
    }
    Ok(())
}

/// [`closure_checks`] over random tiny programs with a few configurations.
pub fn closure_suite(seed: u64, count: usize) -> Result<ClosureSummary, OracleError> {
    let mut summary = ClosureSummary::default();
    let mut done = 0;
    let mut s = seed;
    while done < count && s < seed + 1000 {
        if let Some(sf) = tiny_milp(s, 3 + (s % 3) as usize, 3, 2) {
            let sol = solve_lp(&sf, &sf.c).map_err(|e| OracleError::Instance(e.to_string()))?;
            let cone = corner_cone(&sol).map_err(|e| OracleError::Instance(e.to_string()))?;
            for kh in [1, 3] {
                let cfg = ExperimentConfig {
                    kh,
                    obj_points: 50,
                    ..Default::default()
                };
                if let Ok(gen) = run_generators(&sf, &sol, &cone, &cfg.pha_config(), &Trace::new()) {
                    closure_checks(&sf, &gen.collections, &cone, &mut summary)?;
                }
            }
            done += 1;
        }
        s += 1;
    }
    Ok(summary)
}
