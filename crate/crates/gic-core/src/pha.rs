//! Partial hyperplane activation and the two cut-generation pipelines.
//!
//! Activating `H` on a collection cuts the cone rays in `R(H) ∩ R_A`. Each
//! cut ray `r` gets the vertex `v = d·e_r` on `H`, and from `v` one edge per
//! other ray `r'` runs inside `H` on the 2-face spanned by `r` and `r'`. The
//! edge either reaches `bd S` (a new point), leaves the face first (skipped)
//! or never reaches `bd S` (a new ray).

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::StandardForm;
use crate::prlp::{self, ObjectiveContext, PrlpOptions, PrlpStats};
use crate::simplex::{BasicSolution, Cone, NbHyperplane};
use crate::split::{
    fractional_indices, initial_collection, point_depth, sic_cut, sic_from_initial, ActivationRecord, CollPoint,
    CollRay, Cut, CutFamily, Generator, Origin, PointRayCollection, Provenance, Source, SparseVec, SplitSet,
};
use crate::trace::{Trace, TraceEvent};
use crate::ZERO_TOL;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhaError {
    #[error("hyperplane {id} is violated at the apex (rhs {rhs:e})")]
    InvalidHyperplane { id: usize, rhs: f64 },
    #[error("hyperplane {hyperplane} cuts previously cut rays {rays:?} outside the allowed set")]
    TiltRule { hyperplane: usize, rays: Vec<usize> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivationOptions {
    pub enforce_tilt_rule: bool,
}

impl Default for ActivationOptions {
    fn default() -> Self {
        ActivationOptions { enforce_tilt_rule: true }
    }
}

/// Rays `j` that `H` reaches strictly before `bd S`.
pub fn rays_cut_by(h: &NbHyperplane, coll: &PointRayCollection) -> Vec<usize> {
    (0..coll.dim)
        .filter(|&j| {
            let d = h.distance(j);
            let b = coll.boundary_dist[j];
            d.is_finite() && (b.is_infinite() || d < b - ZERO_TOL * b.max(1.0))
        })
        .collect()
}

/// Changes an activation would make, computed without touching the collection.
#[derive(Clone, Debug, PartialEq)]
pub struct ActivationPlan {
    pub hyperplane: usize,
    /// Rays cut by this activation, ascending.
    pub cut: Vec<usize>,
    /// Vertex distance along each cut ray.
    pub vertices: Vec<(usize, f64)>,
    pub remove_points: Vec<usize>,
    pub remove_rays: Vec<usize>,
    pub new_points: Vec<CollPoint>,
    pub new_rays: Vec<CollRay>,
}

/// Counts of what an applied activation changed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivationSummary {
    pub points_added: usize,
    pub points_removed: usize,
    pub rays_added: usize,
    pub rays_removed: usize,
}

fn single_outside(v: &[(usize, f64)], r_a: &BTreeSet<usize>) -> bool {
    let mut nz = v.iter().filter(|(_, x)| x.abs() > ZERO_TOL);
    matches!((nz.next(), nz.next()), (Some(&(j, _)), None) if !r_a.contains(&j))
}

fn violates_point(h: &NbHyperplane, p: &[(usize, f64)]) -> bool {
    h.eval(p) < h.rhs - ZERO_TOL
}

/// Plans the activation of `h` restricted to the rays in `r_a`.
pub fn plan_activation(
    cone: &Cone,
    coll: &PointRayCollection,
    h: &NbHyperplane,
    r_a: &BTreeSet<usize>,
    opts: ActivationOptions,
) -> Result<ActivationPlan, PhaError> {
    if h.rhs > ZERO_TOL {
        return Err(PhaError::InvalidHyperplane { id: h.id, rhs: h.rhs });
    }
    let reach = rays_cut_by(h, coll);
    if opts.enforce_tilt_rule {
        let bad: Vec<usize> = reach
            .iter()
            .copied()
            .filter(|j| coll.cut_rays.contains(j) && !r_a.contains(j))
            .collect();
        if !bad.is_empty() {
            return Err(PhaError::TiltRule { hyperplane: h.id, rays: bad });
        }
    }
    let cut: Vec<usize> = reach.into_iter().filter(|j| r_a.contains(j)).collect();
    let mut plan = ActivationPlan {
        hyperplane: h.id,
        cut: cut.clone(),
        vertices: Vec::new(),
        remove_points: Vec::new(),
        remove_rays: Vec::new(),
        new_points: Vec::new(),
        new_rays: Vec::new(),
    };
    if cut.is_empty() {
        return Ok(plan);
    }
    let cut_set: BTreeSet<usize> = cut.iter().copied().collect();
    for (i, p) in coll.points.iter().enumerate() {
        if cut_set.contains(&p.origin_ray) && !single_outside(&p.coords, r_a) && violates_point(h, &p.coords) {
            plan.remove_points.push(i);
        }
    }
    for (i, r) in coll.rays.iter().enumerate() {
        if !cut_set.contains(&r.origin_ray) {
            continue;
        }
        if r.base.is_empty() && single_outside(&r.direction, r_a) {
            continue;
        }
        if violates_point(h, &r.base) || h.eval(&r.direction) < -ZERO_TOL {
            plan.remove_rays.push(i);
        }
    }
    let split = &coll.split;
    let sigma = &cone.tableau[split.var];
    let n = coll.dim;
    for (offset, &r) in cut.iter().enumerate() {
        let d = h.distance(r);
        plan.vertices.push((r, d));
        let origin = Origin::Activation(coll.activations.len() + offset);
        let g_r = h.g[r];
        let x0 = split.value + sigma[r] * d;
        for rp in 0..n {
            if rp == r {
                continue;
            }
            let w_r = -h.g[rp] / g_r;
            let s_h = if w_r < -ZERO_TOL { d / -w_r } else { f64::INFINITY };
            let slope = sigma[r] * w_r + sigma[rp];
            let (s_s, facet) = split.line_hit(x0, slope);
            if s_h.is_finite() && (s_s.is_infinite() || s_h < s_s - ZERO_TOL * s_s.max(1.0)) {
                continue;
            }
            let source = Source::Activated(h.id);
            match facet {
                Some(facet) => {
                    let mut coords = Vec::with_capacity(2);
                    let yr = d + s_s * w_r;
                    let (a, b) = ((r, yr), (rp, s_s));
                    let (a, b) = if r < rp { (a, b) } else { (b, a) };
                    for (j, v) in [a, b] {
                        if v.abs() > ZERO_TOL {
                            coords.push((j, v));
                        }
                    }
                    let is_final = cone.point_in_p(&coords);
                    plan.new_points.push(CollPoint {
                        coords,
                        origin_ray: r,
                        origin,
                        source,
                        facet,
                        is_final,
                    });
                }
                None => {
                    let base = vec![(r, d)];
                    let mut direction = Vec::with_capacity(2);
                    let (a, b) = ((r, w_r), (rp, 1.0));
                    let (a, b) = if r < rp { (a, b) } else { (b, a) };
                    for (j, v) in [a, b] {
                        if v.abs() > ZERO_TOL {
                            direction.push((j, v));
                        }
                    }
                    let is_final = cone.point_in_p(&base) && cone.direction_in_recession(&direction);
                    plan.new_rays.push(CollRay {
                        base,
                        direction,
                        origin_ray: r,
                        origin,
                        source,
                        is_final,
                    });
                }
            }
        }
    }
    Ok(plan)
}

/// Applies a plan produced by [`plan_activation`] on the same collection.
pub fn apply_plan(coll: &mut PointRayCollection, plan: ActivationPlan) -> ActivationSummary {
    let step = coll.steps + 1;
    let drop_p: BTreeSet<usize> = plan.remove_points.iter().copied().collect();
    let drop_r: BTreeSet<usize> = plan.remove_rays.iter().copied().collect();
    let points_removed = coll.retain_points(|i, _| !drop_p.contains(&i));
    let before = coll.rays.len();
    let mut i = 0;
    coll.rays.retain(|_| {
        let k = !drop_r.contains(&i);
        i += 1;
        k
    });
    let rays_removed = before - coll.rays.len();
    let mut summary = ActivationSummary {
        points_removed,
        rays_removed,
        ..Default::default()
    };
    for p in plan.new_points {
        if coll.push_point(p) {
            summary.points_added += 1;
        }
    }
    for r in plan.new_rays {
        if coll.push_ray(r) {
            summary.rays_added += 1;
        }
    }
    for (r, d) in plan.vertices {
        coll.cut_rays.insert(r);
        coll.activations.push(ActivationRecord {
            hyperplane: plan.hyperplane,
            ray: r,
            distance: d,
            step,
        });
    }
    coll.steps = step;
    summary
}

/// Activates `h` on the rays of `r_a` it reaches before `bd S`.
pub fn pha1_activate(
    cone: &Cone,
    coll: &mut PointRayCollection,
    h: &NbHyperplane,
    r_a: &BTreeSet<usize>,
    opts: ActivationOptions,
) -> Result<ActivationSummary, PhaError> {
    let plan = plan_activation(cone, coll, h, r_a, opts)?;
    Ok(apply_plan(coll, plan))
}

/// Hyperplane selection criterion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Criterion {
    /// Nearest intersection with a target ray.
    H1,
    /// Largest average SIC depth of the new points.
    H2,
    /// Most new final points.
    H3,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::H1 => "h1",
            Criterion::H2 => "h2",
            Criterion::H3 => "h3",
        })
    }
}

impl FromStr for Criterion {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "h1" => Ok(Criterion::H1),
            "h2" => Ok(Criterion::H2),
            "h3" => Ok(Criterion::H3),
            other => Err(format!("unknown criterion '{other}'")),
        }
    }
}

/// Basic extended variables whose hyperplane reaches some ray in `targets`
/// before `bd S`, with the nearest such distance.
pub fn candidate_hyperplanes(
    cone: &Cone,
    coll: &PointRayCollection,
    targets: &BTreeSet<usize>,
    exclude: &BTreeSet<usize>,
) -> Vec<(usize, f64)> {
    let total = cone.apex_values.len();
    let mut out = Vec::new();
    for v in 0..total {
        if cone.is_defining(v) || exclude.contains(&v) {
            continue;
        }
        let h = cone.var_hyperplane(v);
        if h.rhs > ZERO_TOL {
            continue;
        }
        let best = rays_cut_by(&h, coll)
            .into_iter()
            .filter(|j| targets.contains(j))
            .map(|j| h.distance(j))
            .fold(f64::INFINITY, f64::min);
        if best.is_finite() {
            out.push((v, best));
        }
    }
    out
}

/// Picks a hyperplane among `candidates` (pairs of id and nearest distance).
/// H2 and H3 dry-run the activation on the `pool` nearest candidates.
#[allow(clippy::too_many_arguments)]
pub fn score_hyperplane(
    criterion: Criterion,
    candidates: &[(usize, f64)],
    cone: &Cone,
    coll: &PointRayCollection,
    r_a: &BTreeSet<usize>,
    sic_alpha: Option<&[f64]>,
    pool: usize,
    opts: ActivationOptions,
) -> Option<usize> {
    let mut ranked: Vec<(usize, f64)> = candidates.to_vec();
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    if criterion == Criterion::H1 || ranked.len() == 1 {
        return ranked.first().map(|c| c.0);
    }
    ranked.truncate(pool.max(1));
    let mut best: Option<(f64, usize)> = None;
    for &(v, _) in &ranked {
        let h = cone.var_hyperplane(v);
        let Ok(plan) = plan_activation(cone, coll, &h, r_a, opts) else {
            continue;
        };
        let score = match criterion {
            Criterion::H2 => {
                if plan.new_points.is_empty() {
                    0.0
                } else {
                    let alpha = sic_alpha.unwrap_or(&[]);
                    let total: f64 = plan
                        .new_points
                        .iter()
                        .map(|p| if alpha.is_empty() { 0.0 } else { point_depth(&p.coords, alpha) })
                        .sum();
                    total / plan.new_points.len() as f64
                }
            }
            _ => plan.new_points.iter().filter(|p| p.is_final).count() as f64,
        };
        let better = match best {
            None => true,
            Some((s, id)) => score > s + 1e-12 || ((score - s).abs() <= 1e-12 && v < id),
        };
        if better {
            best = Some((score, v));
        }
    }
    best.map(|b| b.1)
}

/// One cut-ray / uncut-ray pair on a hyperplane tight at the apex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TiltPair {
    pub cut: usize,
    pub uncut: usize,
    /// `r = λ·e_cut + (1−λ)·e_uncut` lies on the hyperplane.
    pub lambda: f64,
}

/// Tilting data for a hyperplane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TiltSpec {
    pub hyperplane: usize,
    /// Rays the hyperplane reaches before `bd S`.
    pub rays: Vec<usize>,
    /// Empty unless the hyperplane is tight at the apex.
    pub pairs: Vec<TiltPair>,
}

impl TiltSpec {
    /// Allowed shifts of each multiplier.
    pub fn allowed_deltas(pair: &TiltPair) -> [f64; 2] {
        [0.0, -pair.lambda]
    }

    /// Direction `(λ+δ)·e_cut + (1−λ−δ)·e_uncut`.
    pub fn tilted_direction(pair: &TiltPair, delta: f64) -> SparseVec {
        let a = pair.lambda + delta;
        let mut v = Vec::new();
        for (j, x) in [(pair.cut, a), (pair.uncut, 1.0 - a)] {
            if x.abs() > ZERO_TOL {
                v.push((j, x));
            }
        }
        v.sort_by_key(|e| e.0);
        v
    }
}

/// Extreme rays of `C̄ ∩ H` for a hyperplane through the apex.
pub fn degenerate_tilt_support(h: &NbHyperplane, coll: &PointRayCollection) -> TiltSpec {
    let rays = rays_cut_by(h, coll);
    let mut pairs = Vec::new();
    if h.rhs.abs() <= ZERO_TOL {
        for &j in &rays {
            for k in 0..coll.dim {
                let gk = h.g[k];
                if gk >= -ZERO_TOL && k != j {
                    let gj = h.g[j];
                    pairs.push(TiltPair {
                        cut: j,
                        uncut: k,
                        lambda: gk.max(0.0) / (gk.max(0.0) - gj),
                    });
                }
            }
        }
    }
    TiltSpec {
        hyperplane: h.id,
        rays,
        pairs,
    }
}

/// Settings for one generator run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhaConfig {
    pub criterion: Criterion,
    pub families: Vec<CutFamily>,
    pub tilting: bool,
    pub kh: usize,
    /// Leave rays whose initial point is already final out of the cut set.
    pub exclude_final_rays: bool,
    pub max_cuts: usize,
    pub prlp: PrlpOptions,
    /// Candidates dry-run by H2 and H3.
    pub score_pool: usize,
    pub time_limit: Option<Duration>,
    pub activation: ActivationOptions,
}

impl Default for PhaConfig {
    fn default() -> Self {
        PhaConfig {
            criterion: Criterion::H1,
            families: vec![CutFamily::OtherSplits, CutFamily::Tight, CutFamily::Rays, CutFamily::Vertices],
            tilting: false,
            kh: 1,
            exclude_final_rays: true,
            max_cuts: 1000,
            prlp: PrlpOptions::default(),
            score_pool: 32,
            time_limit: None,
            activation: ActivationOptions::default(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("no activation mechanism: kh = 0 with tilting off")]
    NoActivation,
    #[error("kh must be at most 4, got {0}")]
    TooManyHyperplanes(usize),
    #[error("no objective families selected")]
    NoObjectives,
}

impl PhaConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.kh == 0 && !self.tilting {
            return Err(ConfigError::NoActivation);
        }
        if self.kh > 4 {
            return Err(ConfigError::TooManyHyperplanes(self.kh));
        }
        if self.families.iter().all(|f| *f == CutFamily::Sic) {
            return Err(ConfigError::NoObjectives);
        }
        Ok(())
    }
}

/// Per-split size counters after generation.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SplitStats {
    pub split_var: usize,
    /// Rays the non-tilted activations may cut.
    pub k_r: usize,
    /// Rays targeted by tilting.
    pub tilt_rays: usize,
    pub pha_activations: usize,
    pub tilt_activations: usize,
    pub points: usize,
    pub rays: usize,
    pub final_points: usize,
    pub parallel: usize,
    pub cut_rays: usize,
    /// Largest `|P|` seen after a non-tilted activation.
    pub peak_points: usize,
}

#[derive(Clone, Debug, Default)]
pub struct GenerationResult {
    pub sics: Vec<Cut>,
    pub cuts: Vec<Cut>,
    pub splits: Vec<SplitStats>,
    pub prlp: PrlpStats,
    pub collections: Vec<PointRayCollection>,
    pub timed_out: bool,
}

struct SplitState {
    coll: PointRayCollection,
    sic_alpha: Option<Vec<f64>>,
    r_a: BTreeSet<usize>,
    activated: BTreeSet<usize>,
    stats: SplitStats,
}

impl SplitState {
    fn refresh(&mut self) {
        self.stats.points = self.coll.points.len();
        self.stats.rays = self.coll.rays.len();
        self.stats.final_points = self.coll.points.iter().filter(|p| p.is_final).count();
        self.stats.cut_rays = self.coll.cut_rays.len();
    }
}

fn generator_name(g: Generator) -> &'static str {
    match g {
        Generator::Sic => "sic",
        Generator::Pha => "pha",
        Generator::Tilting => "tilting",
    }
}

fn record(
    trace: &Trace,
    sf: &StandardForm,
    coll: &PointRayCollection,
    gen: Generator,
    criterion: Criterion,
    hyperplane: usize,
    cut: &[usize],
    s: &ActivationSummary,
) {
    trace.record(TraceEvent {
        split_var: coll.split.var,
        generator: generator_name(gen).to_string(),
        step: coll.steps,
        criterion: criterion.to_string(),
        hyperplane,
        hyperplane_name: sf.hyperplane_name(hyperplane),
        rays_cut: cut.to_vec(),
        points_added: s.points_added,
        points_removed: s.points_removed,
        rays_added: s.rays_added,
        rays_removed: s.rays_removed,
    });
}

fn activate_chosen(
    cone: &Cone,
    sf: &StandardForm,
    st: &mut SplitState,
    v: usize,
    r_a: &BTreeSet<usize>,
    gen: Generator,
    cfg: &PhaConfig,
    trace: &Trace,
) -> bool {
    let h = cone.var_hyperplane(v);
    match plan_activation(cone, &st.coll, &h, r_a, cfg.activation) {
        Ok(plan) => {
            let cut = plan.cut.clone();
            let s = apply_plan(&mut st.coll, plan);
            st.activated.insert(v);
            record(trace, sf, &st.coll, gen, cfg.criterion, v, &cut, &s);
            true
        }
        Err(e) => {
            log::warn!("split {}: activation of {} rejected: {e}", st.coll.split.var, v);
            false
        }
    }
}

/// Reduced cost `cᵀr^j` of every cone ray, ordered by ray.
fn ray_costs(cone: &Cone, sf: &StandardForm) -> Vec<f64> {
    (0..cone.dim())
        .map(|j| (0..cone.num_cols).map(|k| sf.c[k] * cone.tableau[k][j]).sum())
        .collect()
}

fn cut_round(
    cone: &Cone,
    sf: &StandardForm,
    states: &[SplitState],
    costs: &[f64],
    cfg: &PhaConfig,
    gen: Generator,
    deadline: Option<Instant>,
    out: &mut GenerationResult,
    keys: &mut BTreeSet<Vec<i64>>,
) {
    let remaining = cfg.max_cuts.saturating_sub(out.cuts.len());
    if remaining == 0 {
        return;
    }
    let colls: Vec<&PointRayCollection> = states.iter().map(|s| &s.coll).collect();
    let routed = if cfg.families.contains(&CutFamily::OtherSplits) {
        prlp::route_other_split_points(cone, &colls)
    } else {
        vec![Vec::new(); colls.len()]
    };
    let per_split: Vec<(Vec<Cut>, PrlpStats)> = states
        .par_iter()
        .zip(routed.par_iter())
        .map(|(st, routed)| {
            let ctx = ObjectiveContext {
                coll: &st.coll,
                ray_costs: costs,
                routed,
                cap: cfg.prlp.obj_points,
            };
            let prov = Provenance {
                split_var: st.coll.split.var,
                family: CutFamily::Rays,
                step: st.coll.steps,
                generator: gen,
            };
            prlp::generate_cuts(cone, sf, &ctx, &cfg.families, &cfg.prlp, &prov, remaining, deadline)
        })
        .collect();
    for (cuts, stats) in per_split {
        out.prlp.absorb(&stats);
        for c in cuts {
            if out.cuts.len() >= cfg.max_cuts {
                break;
            }
            if keys.insert(prlp::cut_key(&c.alpha)) {
                out.cuts.push(c);
            }
        }
    }
}

/// Runs targeted tilting (when enabled) followed by `kh` rounds of
/// non-tilted activation on every fractional split, generating cuts along
/// the way. SICs for the same splits are returned separately.
pub fn run_generators(
    sf: &StandardForm,
    sol: &BasicSolution,
    cone: &Cone,
    cfg: &PhaConfig,
    trace: &Trace,
) -> Result<GenerationResult, ConfigError> {
    cfg.validate()?;
    let start = Instant::now();
    let deadline = cfg.time_limit.map(|t| start + t);
    let costs = ray_costs(cone, sf);
    let mut out = GenerationResult::default();
    let mut keys = BTreeSet::new();
    let mut states: Vec<SplitState> = fractional_indices(sol, sf)
        .into_iter()
        .filter_map(|k| SplitSet::new(k, sol.x[k]))
        .map(|split| {
            let coll = initial_collection(cone, &split);
            let r_a: BTreeSet<usize> = (0..coll.dim)
                .filter(|&j| coll.boundary_dist[j].is_finite())
                .filter(|&j| {
                    !cfg.exclude_final_rays
                        || !coll.points.iter().any(|p| p.origin_ray == j && p.is_final)
                })
                .collect();
            let stats = SplitStats {
                split_var: split.var,
                k_r: r_a.len(),
                parallel: coll.parallel_rays.len(),
                ..Default::default()
            };
            SplitState {
                sic_alpha: sic_from_initial(&coll),
                coll,
                r_a,
                activated: BTreeSet::new(),
                stats,
            }
        })
        .collect();
    for st in &states {
        if let Some(c) = sic_cut(cone, sf, &st.coll) {
            out.sics.push(c);
        }
    }
    let expired = |d: Option<Instant>| d.is_some_and(|d| Instant::now() >= d);

    if cfg.tilting {
        let mut order: Vec<usize> = (0..cone.dim()).collect();
        order.sort_by(|&a, &b| costs[b].total_cmp(&costs[a]).then(a.cmp(&b)));
        let order: Vec<usize> = order
            .into_iter()
            .filter(|&j| states.iter().any(|s| s.coll.boundary_dist[j].is_finite()))
            .collect();
        let total = order.len();
        let mut r_prime: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); states.len()];
        for (idx, &r) in order.iter().enumerate() {
            if expired(deadline) {
                out.timed_out = true;
                break;
            }
            let j = idx + 1;
            states.par_iter_mut().zip(r_prime.par_iter_mut()).for_each(|(st, rp)| {
                if !st.coll.boundary_dist[r].is_finite() {
                    return;
                }
                rp.insert(r);
                st.stats.tilt_rays = rp.len();
                let target: BTreeSet<usize> = [r].into_iter().collect();
                let cands = candidate_hyperplanes(cone, &st.coll, &target, &BTreeSet::new());
                let choice = score_hyperplane(
                    cfg.criterion,
                    &cands,
                    cone,
                    &st.coll,
                    rp,
                    st.sic_alpha.as_deref(),
                    cfg.score_pool,
                    cfg.activation,
                );
                if let Some(v) = choice {
                    if activate_chosen(cone, sf, st, v, rp, Generator::Tilting, cfg, trace) {
                        st.stats.tilt_activations += 1;
                    }
                }
            });
            if j.is_power_of_two() || j == total {
                cut_round(cone, sf, &states, &costs, cfg, Generator::Tilting, deadline, &mut out, &mut keys);
            }
        }
    }

    for _ in 0..cfg.kh {
        if expired(deadline) {
            out.timed_out = true;
            break;
        }
        states.par_iter_mut().for_each(|st| {
            let r_a = st.r_a.clone();
            let cands = candidate_hyperplanes(cone, &st.coll, &r_a, &st.activated);
            let choice = score_hyperplane(
                cfg.criterion,
                &cands,
                cone,
                &st.coll,
                &r_a,
                st.sic_alpha.as_deref(),
                cfg.score_pool,
                cfg.activation,
            );
            if let Some(v) = choice {
                if activate_chosen(cone, sf, st, v, &r_a, Generator::Pha, cfg, trace) {
                    st.stats.pha_activations += 1;
                }
            }
            st.stats.peak_points = st.stats.peak_points.max(st.coll.points.len());
        });
        cut_round(cone, sf, &states, &costs, cfg, Generator::Pha, deadline, &mut out, &mut keys);
    }

    for st in &mut states {
        st.refresh();
    }
    out.splits = states.iter().map(|s| s.stats.clone()).collect();
    out.collections = states.into_iter().map(|s| s.coll).collect();
    if expired(deadline) {
        out.timed_out = true;
    }
    Ok(out)
}

/// `|P| ≤ k_r²·k_h + n` for non-tilted activation.
pub fn pha_point_bound(k_r: usize, k_h: usize, n: usize) -> usize {
    k_r * k_r * k_h + n
}

/// `n + (n−1)·k_h(k_h+1)/2` for targeted tilting, at most `2·n·k_h²`.
pub fn tilting_size_bound(n: usize, k_h: usize) -> usize {
    n + n.saturating_sub(1) * k_h * (k_h + 1) / 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplex::{corner_cone, solve_lp};
    use num_rational::BigRational;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    // min -x1 - x2 s.t. 2x1 + 2x2 <= 3, x1 - x2 <= 1/2 (negated to >=)
    fn triangle() -> StandardForm {
        let half = BigRational::new(1.into(), 2.into());
        StandardForm::from_rational_rows(
            "tri",
            vec![vec![q(-2), q(-2)], vec![q(-1), q(1)]],
            vec![q(-3), -half],
            vec![q(-1), q(-2)],
            vec![true, true],
        )
    }

    #[test]
    fn activation_with_no_reach_changes_nothing() {
        let sf = triangle();
        let sol = solve_lp(&sf, &sf.c).unwrap();
        let cone = corner_cone(&sol).unwrap();
        let k = fractional_indices(&sol, &sf)[0];
        let mut coll = initial_collection(&cone, &SplitSet::new(k, sol.x[k]).unwrap());
        let before = coll.points.clone();
        let h = NbHyperplane {
            id: 77,
            g: vec![1.0; cone.dim()],
            rhs: -1.0,
        };
        let all: BTreeSet<usize> = (0..cone.dim()).collect();
        let s = pha1_activate(&cone, &mut coll, &h, &all, ActivationOptions::default()).unwrap();
        assert_eq!(s, ActivationSummary::default());
        assert_eq!(coll.points, before);
    }

    #[test]
    fn invalid_hyperplane_rejected() {
        let sf = triangle();
        let sol = solve_lp(&sf, &sf.c).unwrap();
        let cone = corner_cone(&sol).unwrap();
        let k = fractional_indices(&sol, &sf)[0];
        let coll = initial_collection(&cone, &SplitSet::new(k, sol.x[k]).unwrap());
        let h = NbHyperplane {
            id: 5,
            g: vec![1.0; cone.dim()],
            rhs: 0.5,
        };
        let err = plan_activation(&cone, &coll, &h, &BTreeSet::new(), ActivationOptions::default());
        assert!(matches!(err, Err(PhaError::InvalidHyperplane { id: 5, .. })));
    }

    #[test]
    fn tilt_pair_combination_lies_on_hyperplane() {
        let h = NbHyperplane {
            id: 0,
            g: vec![-2.0, 3.0],
            rhs: 0.0,
        };
        let coll = initial_for_tests();
        let spec = degenerate_tilt_support(&h, &coll);
        assert_eq!(spec.rays, vec![0]);
        assert_eq!(spec.pairs.len(), 1);
        let p = &spec.pairs[0];
        assert!((p.lambda - 0.6).abs() < 1e-12);
        let dir = TiltSpec::tilted_direction(p, 0.0);
        assert!(h.eval(&dir).abs() < 1e-12);
        assert_eq!(TiltSpec::tilted_direction(p, -p.lambda), vec![(1, 1.0)]);
    }

    fn initial_for_tests() -> PointRayCollection {
        serde_json::from_str(
            r#"{"split":{"var":0,"value":0.5,"lo":0.0,"hi":1.0},"dim":2,"points":[],"rays":[],
                "cut_rays":[],"activations":[],"boundary_dist":[1.0,1.0],"parallel_rays":[],"steps":0}"#,
        )
        .unwrap()
    }

    #[test]
    fn config_without_activation_is_rejected() {
        let cfg = PhaConfig {
            kh: 0,
            tilting: false,
            ..Default::default()
        };
        assert_eq!(cfg.validate(), Err(ConfigError::NoActivation));
    }

    #[test]
    fn bounds() {
        assert_eq!(pha_point_bound(3, 2, 5), 23);
        assert_eq!(tilting_size_bound(5, 3), 5 + 4 * 6);
        for n in 1..30 {
            for k in 1..6 {
                assert!(tilting_size_bound(n, k) <= 2 * n * k * k);
            }
        }
    }
}
