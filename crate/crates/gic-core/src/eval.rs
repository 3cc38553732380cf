//! Gap-closed evaluation, cut selection, two-round runs and parameter sweeps.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::instance::{KnownOptima, StandardForm};
use crate::pha::{self, ConfigError, Criterion, GenerationResult, PhaConfig};
use crate::prlp::PrlpOptions;
use crate::simplex::{corner_cone, solve_lp, BasicSolution, Cone, SolveError};
use crate::split::{Cut, CutFamily, Generator};
use crate::trace::Trace;

/// `100·(opt_cuts − opt_lp)/(opt_ip − opt_lp)`, or `None` without a gap.
pub fn gap_closed(opt_lp: f64, opt_cuts: f64, opt_ip: f64) -> Option<f64> {
    let denom = opt_ip - opt_lp;
    if denom <= 1e-9 * opt_lp.abs().max(1.0) {
        return None;
    }
    Some(100.0 * (opt_cuts - opt_lp) / denom)
}

/// LP optimum (with objective offset) after appending the cuts as rows.
pub fn lp_with_cuts(sf: &StandardForm, cuts: &[&Cut]) -> Result<(f64, Vec<f64>), SolveError> {
    let rows: Vec<(Vec<f64>, f64)> = cuts.iter().map(|c| (c.structural.clone(), c.structural_rhs)).collect();
    let aug = sf.with_rows(&rows);
    let sol = solve_lp(&aug, &aug.c)?;
    Ok((aug.objective_value(&sol.x), sol.x))
}

/// Whether `aᵀx ≥ b` holds with equality at `x`.
pub fn is_active(cut: &Cut, x: &[f64]) -> bool {
    cut.violation(x).abs() <= 1e-7 * cut.structural_rhs.abs().max(1.0)
}

/// Number of cuts tight at `x`.
pub fn active_cuts(cuts: &[&Cut], x: &[f64]) -> usize {
    cuts.iter().filter(|c| is_active(c, x)).count()
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Greedy selection maximizing efficacy plus the smallest orthogonality
/// (`1 − |cos|`) to the cuts already chosen. Parallel duplicates are skipped.
pub fn select_cuts(cuts: &[Cut], limit: usize) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    let mut ortho = vec![1.0f64; cuts.len()];
    let mut open: Vec<bool> = vec![true; cuts.len()];
    while chosen.len() < limit {
        let mut best: Option<(f64, usize)> = None;
        for (i, c) in cuts.iter().enumerate() {
            if !open[i] || ortho[i] <= 1e-9 {
                continue;
            }
            let score = c.efficacy + ortho[i];
            if best.map_or(true, |(s, _)| score > s + 1e-12) {
                best = Some((score, i));
            }
        }
        let Some((_, i)) = best else { break };
        open[i] = false;
        chosen.push(i);
        for (k, c) in cuts.iter().enumerate() {
            if open[k] {
                let o = 1.0 - cosine(&c.structural, &cuts[i].structural).abs();
                ortho[k] = ortho[k].min(o);
            }
        }
    }
    chosen
}

/// One cell of the parameter grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub criterion: Criterion,
    pub families: Vec<CutFamily>,
    pub tilting: bool,
    pub kh: usize,
    pub rounds: usize,
    pub max_cuts: usize,
    pub obj_points: usize,
    pub obj_time: Duration,
    pub time_limit: Duration,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            criterion: Criterion::H1,
            families: vec![CutFamily::OtherSplits, CutFamily::Tight, CutFamily::Rays, CutFamily::Vertices],
            tilting: false,
            kh: 1,
            rounds: 1,
            max_cuts: 1000,
            obj_points: 1000,
            obj_time: Duration::from_secs(5),
            time_limit: Duration::from_secs(3600),
        }
    }
}

/// Family letters in execution order.
pub fn families_label(f: &[CutFamily]) -> String {
    f.iter().map(|x| x.letter()).collect()
}

/// Parses letters such as `"tr"` or `"S,T"` into families in execution order.
pub fn parse_families(s: &str) -> Result<Vec<CutFamily>, String> {
    let mut out = Vec::new();
    for ch in s.chars().filter(|c| !matches!(c, ',' | ' ')) {
        let f = match ch.to_ascii_uppercase() {
            'R' => CutFamily::Rays,
            'V' => CutFamily::Vertices,
            'T' => CutFamily::Tight,
            'S' => CutFamily::OtherSplits,
            other => return Err(format!("unknown objective family '{other}'")),
        };
        if !out.contains(&f) {
            out.push(f);
        }
    }
    out.sort_by_key(|f| ORDER.iter().position(|o| o == f));
    Ok(out)
}

const ORDER: [CutFamily; 4] = [CutFamily::OtherSplits, CutFamily::Tight, CutFamily::Rays, CutFamily::Vertices];

impl ExperimentConfig {
    pub fn label(&self) -> String {
        format!(
            "{}-{}-t{}-k{}-r{}",
            self.criterion,
            families_label(&self.families),
            u8::from(self.tilting),
            self.kh,
            self.rounds
        )
    }

    pub fn pha_config(&self) -> PhaConfig {
        PhaConfig {
            criterion: self.criterion,
            families: self.families.clone(),
            tilting: self.tilting,
            kh: self.kh,
            max_cuts: self.max_cuts,
            prlp: PrlpOptions {
                obj_time: self.obj_time,
                obj_points: self.obj_points,
                ..Default::default()
            },
            time_limit: Some(self.time_limit),
            ..Default::default()
        }
    }
}

/// Every combination of criterion, nonempty family subset, tilting and `kh`.
pub fn table2_grid(base: &ExperimentConfig) -> Vec<ExperimentConfig> {
    let mut out = Vec::new();
    for criterion in [Criterion::H1, Criterion::H2, Criterion::H3] {
        for mask in 1..16u32 {
            let families: Vec<CutFamily> = ORDER
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, f)| *f)
                .collect();
            for tilting in [false, true] {
                for kh in 0..=4 {
                    out.push(ExperimentConfig {
                        criterion,
                        families: families.clone(),
                        tilting,
                        kh,
                        ..base.clone()
                    });
                }
            }
        }
    }
    out
}

/// One row of `results.csv`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub instance: String,
    pub config: String,
    pub criterion: String,
    pub families: String,
    pub tilting: bool,
    pub kh: usize,
    pub rounds: usize,
    pub status: String,
    pub rows: usize,
    pub cols: usize,
    pub opt_lp: f64,
    pub opt_ip: Option<f64>,
    pub gap_sic: Option<f64>,
    pub gap_gic_plus_sic: Option<f64>,
    pub gap_sic_round2: Option<f64>,
    pub gap_gic_round2: Option<f64>,
    pub sics: usize,
    pub active_sics: usize,
    pub gics: usize,
    pub active_gics: usize,
    pub points: usize,
    pub rays: usize,
    pub pct_final: f64,
    pub pct_parallel: f64,
    pub basis_hash: String,
    pub time_secs: f64,
}

/// LP data shared by every configuration of one instance.
pub struct Prepared {
    pub sf: StandardForm,
    pub sol: BasicSolution,
    pub cone: Cone,
    pub opt_lp: f64,
    pub opt_ip: Option<f64>,
}

impl Prepared {
    pub fn new(sf: StandardForm, optima: &KnownOptima) -> Result<Self, SolveError> {
        let sol = solve_lp(&sf, &sf.c)?;
        let cone = corner_cone(&sol)?;
        let opt_lp = sf.objective_value(&sol.x);
        let opt_ip = optima.get(&sf.name).map(|e| e.1);
        Ok(Prepared {
            sf,
            sol,
            cone,
            opt_lp,
            opt_ip,
        })
    }

    fn gap(&self, cuts: &[&Cut]) -> (Option<f64>, Option<Vec<f64>>) {
        match lp_with_cuts(&self.sf, cuts) {
            Ok((z, x)) => (self.opt_ip.and_then(|ip| gap_closed(self.opt_lp, z, ip)), Some(x)),
            Err(e) => {
                log::warn!("{}: LP with cuts failed: {e}", self.sf.name);
                (None, None)
            }
        }
    }
}

/// Runs one configuration and evaluates the cuts.
pub fn evaluate(prep: &Prepared, cfg: &ExperimentConfig, trace: &Trace) -> (EvalResult, Option<GenerationResult>) {
    let start = Instant::now();
    let mut res = EvalResult {
        instance: prep.sf.name.clone(),
        config: cfg.label(),
        criterion: cfg.criterion.to_string(),
        families: families_label(&cfg.families),
        tilting: cfg.tilting,
        kh: cfg.kh,
        rounds: cfg.rounds,
        rows: prep.sf.num_rows(),
        cols: prep.sf.num_cols(),
        opt_lp: prep.opt_lp,
        opt_ip: prep.opt_ip,
        basis_hash: format!("{:016x}", prep.sol.basis_hash()),
        ..Default::default()
    };
    let gen = match pha::run_generators(&prep.sf, &prep.sol, &prep.cone, &cfg.pha_config(), trace) {
        Ok(g) => g,
        Err(e) => {
            res.status = config_status(&e).to_string();
            return (res, None);
        }
    };
    let sics: Vec<&Cut> = gen.sics.iter().collect();
    let (gap_sic, _) = prep.gap(&sics);
    let all: Vec<&Cut> = gen.sics.iter().chain(&gen.cuts).collect();
    let (gap_all, x_all) = prep.gap(&all);
    res.gap_sic = gap_sic;
    res.gap_gic_plus_sic = gap_all;
    res.sics = gen.sics.len();
    res.gics = gen.cuts.len();
    if let Some(x) = &x_all {
        res.active_sics = active_cuts(&sics, x);
        res.active_gics = active_cuts(&gen.cuts.iter().collect::<Vec<_>>(), x);
    }
    let points: usize = gen.collections.iter().map(|c| c.points.len()).sum();
    let finals: usize = gen.collections.iter().map(|c| c.points.iter().filter(|p| p.is_final).count()).sum();
    let rays: usize = gen.collections.iter().map(|c| c.rays.len()).sum();
    let parallel: usize = gen.collections.iter().map(|c| c.parallel_rays.len()).sum();
    let dims: usize = gen.collections.iter().map(|c| c.dim).sum();
    res.points = points;
    res.rays = rays;
    res.pct_final = if points > 0 { 100.0 * finals as f64 / points as f64 } else { 0.0 };
    res.pct_parallel = if dims > 0 { 100.0 * parallel as f64 / dims as f64 } else { 0.0 };
    res.status = if gen.timed_out { "time_limit" } else { "ok" }.to_string();
    if cfg.rounds >= 2 {
        let r2 = run_round2(prep, &gen, cfg);
        res.gap_sic_round2 = r2.gap_sic;
        res.gap_gic_round2 = r2.gap_gic;
    }
    res.time_secs = start.elapsed().as_secs_f64();
    (res, Some(gen))
}

fn config_status(e: &ConfigError) -> &'static str {
    match e {
        ConfigError::NoActivation => "invalid:no_activation",
        ConfigError::TooManyHyperplanes(_) => "invalid:kh",
        ConfigError::NoObjectives => "invalid:objectives",
    }
}

/// Gaps after a second round, measured against the original LP bound.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Round2 {
    /// Two rounds of SICs.
    pub gap_sic: Option<f64>,
    /// Round-1 SICs and GICs, then SICs and GICs from the new optimum.
    pub gap_gic: Option<f64>,
    /// The round-1 optimum was already integral.
    pub vacuous: bool,
}

/// Appends round-1 cuts to `P` and generates again from the new optimum.
pub fn run_round2(prep: &Prepared, round1: &GenerationResult, cfg: &ExperimentConfig) -> Round2 {
    let mut out = Round2::default();
    let Some(ip) = prep.opt_ip else { return out };
    let gap_of = |sf: &StandardForm, cuts: &[&Cut]| {
        lp_with_cuts(sf, cuts)
            .ok()
            .and_then(|(z, _)| gap_closed(prep.opt_lp, z, ip))
    };
    let rows = |cuts: &[&Cut]| -> Vec<(Vec<f64>, f64)> {
        cuts.iter().map(|c| (c.structural.clone(), c.structural_rhs)).collect()
    };
    let trace = Trace::new();
    let mut pcfg = cfg.pha_config();
    for (with_gics, slot) in [(false, 0), (true, 1)] {
        let first: Vec<&Cut> = if with_gics {
            round1.sics.iter().chain(&round1.cuts).collect()
        } else {
            round1.sics.iter().collect()
        };
        let sf2 = prep.sf.with_rows(&rows(&first));
        let Ok(sol2) = solve_lp(&sf2, &sf2.c) else { continue };
        let gap1 = gap_closed(prep.opt_lp, sf2.objective_value(&sol2.x), ip);
        let Ok(cone2) = corner_cone(&sol2) else {
            set(&mut out, slot, gap1);
            continue;
        };
        if crate::split::fractional_indices(&sol2, &sf2).is_empty() {
            out.vacuous = true;
            set(&mut out, slot, gap1);
            continue;
        }
        pcfg.max_cuts = cfg.max_cuts;
        let gen2 = if with_gics {
            pha::run_generators(&sf2, &sol2, &cone2, &pcfg, &trace).ok()
        } else {
            None
        };
        let sics2: Vec<Cut> = match &gen2 {
            Some(g) => g.sics.clone(),
            None => sic_only(&sf2, &sol2, &cone2),
        };
        let mut second: Vec<&Cut> = sics2.iter().collect();
        if let Some(g) = &gen2 {
            second.extend(g.cuts.iter());
        }
        let gap2 = gap_of(&sf2, &second).or(gap1);
        set(&mut out, slot, gap2);
    }
    out
}

fn set(out: &mut Round2, slot: usize, v: Option<f64>) {
    if slot == 0 {
        out.gap_sic = v;
    } else {
        out.gap_gic = v;
    }
}

/// SICs from every fractional split at `sol`.
pub fn sic_only(sf: &StandardForm, sol: &BasicSolution, cone: &Cone) -> Vec<Cut> {
    crate::split::fractional_indices(sol, sf)
        .into_iter()
        .filter_map(|k| crate::split::SplitSet::new(k, sol.x[k]))
        .filter_map(|s| crate::split::sic_cut(cone, sf, &crate::split::initial_collection(cone, &s)))
        .collect()
}

/// One row of `points_vs_rays.csv`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PointsVsRays {
    pub instance: String,
    pub config: String,
    pub split_var: usize,
    pub tilting: bool,
    pub kh: usize,
    pub n: usize,
    pub k_r: usize,
    pub tilt_rays: usize,
    pub cut_rays: usize,
    pub pha_activations: usize,
    pub tilt_activations: usize,
    pub point_count: usize,
    pub ray_count: usize,
    pub peak_points: usize,
}

/// Per-split size rows for one generator run.
pub fn points_vs_rays(instance: &str, cfg: &ExperimentConfig, n: usize, gen: &GenerationResult) -> Vec<PointsVsRays> {
    gen.splits
        .iter()
        .map(|s| PointsVsRays {
            instance: instance.to_string(),
            config: cfg.label(),
            split_var: s.split_var,
            tilting: cfg.tilting,
            kh: cfg.kh,
            n,
            k_r: s.k_r,
            tilt_rays: s.tilt_rays,
            cut_rays: s.cut_rays,
            pha_activations: s.pha_activations,
            tilt_activations: s.tilt_activations,
            point_count: s.points,
            ray_count: s.rays,
            peak_points: s.peak_points,
        })
        .collect()
}

/// Output of a sweep.
#[derive(Clone, Debug, Default)]
pub struct SweepOutput {
    pub results: Vec<EvalResult>,
    pub points: Vec<PointsVsRays>,
    /// Instances that could not be prepared, with the reason.
    pub skipped: Vec<(String, String)>,
}

/// Evaluates every configuration on every instance. Cells run in parallel
/// on the current rayon pool; output order follows the inputs.
pub fn sweep(instances: Vec<StandardForm>, grid: &[ExperimentConfig], optima: &KnownOptima) -> SweepOutput {
    let mut out = SweepOutput::default();
    for sf in instances {
        let name = sf.name.clone();
        let prep = match Prepared::new(sf, optima) {
            Ok(p) => p,
            Err(e) => {
                log::warn!("{name}: skipped: {e}");
                out.skipped.push((name, e.to_string()));
                continue;
            }
        };
        let n = prep.sf.num_cols();
        let cells: Vec<(EvalResult, Vec<PointsVsRays>)> = grid
            .par_iter()
            .map(|cfg| {
                let trace = Trace::new();
                let (r, gen) = evaluate(&prep, cfg, &trace);
                let pts = gen.map(|g| points_vs_rays(&name, cfg, n, &g)).unwrap_or_default();
                log::info!("{name} {}: sic {:?} gic {:?}", cfg.label(), r.gap_sic, r.gap_gic_plus_sic);
                (r, pts)
            })
            .collect();
        for (r, p) in cells {
            out.results.push(r);
            out.points.extend(p);
        }
    }
    out
}

pub fn write_csv<T: Serialize, W: Write>(rows: &[T], w: W) -> Result<(), csv::Error> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_results<R: Read>(r: R) -> Result<Vec<EvalResult>, csv::Error> {
    csv::Reader::from_reader(r).deserialize().collect()
}

pub fn read_points<R: Read>(r: R) -> Result<Vec<PointsVsRays>, csv::Error> {
    csv::Reader::from_reader(r).deserialize().collect()
}

/// Least-squares fit `y ≈ a·x² + b·x + c` with its coefficient of
/// determination. `None` with fewer than three distinct `x` values.
pub fn quadratic_fit(xs: &[f64], ys: &[f64]) -> Option<([f64; 3], f64)> {
    let mut distinct: Vec<f64> = xs.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return None;
    }
    let mut m = [[0.0f64; 4]; 3];
    for (&x, &y) in xs.iter().zip(ys) {
        let f = [x * x, x, 1.0];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += f[i] * f[j];
            }
            m[i][3] += f[i] * y;
        }
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        for r in 0..3 {
            if r != col {
                let f = m[r][col] / m[col][col];
                for k in col..4 {
                    m[r][k] -= f * m[col][k];
                }
            }
        }
    }
    let coef = [m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]];
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| (y - (coef[0] * x * x + coef[1] * x + coef[2])).powi(2))
        .sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Some((coef, r2))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.2}")).unwrap_or_else(|| "-".into())
}

fn best_by<'a>(rows: &[&'a EvalResult], key: impl Fn(&EvalResult) -> Option<f64>) -> Option<&'a EvalResult> {
    rows.iter()
        .copied()
        .filter(|r| key(r).is_some())
        .max_by(|a, b| key(a).unwrap().total_cmp(&key(b).unwrap()).then(b.config.cmp(&a.config)))
}

/// Markdown tables: best gap per instance and generator setting, best gap
/// with cut counts, two-round gaps and the points-versus-rays fit.
pub fn render_report(results: &[EvalResult], points: &[PointsVsRays]) -> String {
    let mut s = String::new();
    let mut names: Vec<&str> = results.iter().map(|r| r.instance.as_str()).collect();
    names.dedup();
    let mut seen = std::collections::BTreeSet::new();
    names.retain(|n| seen.insert(*n));

    let groups: Vec<(String, Box<dyn Fn(&EvalResult) -> bool>)> = {
        let mut g: Vec<(String, Box<dyn Fn(&EvalResult) -> bool>)> = Vec::new();
        for c in ["h1", "h2", "h3"] {
            let c2 = c.to_string();
            g.push((format!("T {c}"), Box::new(move |r: &EvalResult| r.tilting && r.kh == 0 && r.criterion == c2)));
        }
        for k in 0..=4usize {
            g.push((format!("T+{k}"), Box::new(move |r: &EvalResult| r.tilting && r.kh == k)));
        }
        for k in 1..=4usize {
            g.push((format!("+{k}"), Box::new(move |r: &EvalResult| !r.tilting && r.kh == k)));
        }
        g
    };

    let _ = writeln!(s, "## Best percent gap closed by generator setting\n");
    let _ = write!(s, "| instance | SIC |");
    for (label, _) in &groups {
        let _ = write!(s, " {label} |");
    }
    let _ = writeln!(s);
    let _ = write!(s, "|---|---|");
    for _ in &groups {
        let _ = write!(s, "---|");
    }
    let _ = writeln!(s);
    for name in &names {
        let rows: Vec<&EvalResult> = results.iter().filter(|r| r.instance == *name).collect();
        let sic = rows.iter().find_map(|r| r.gap_sic);
        let _ = write!(s, "| {name} | {} |", fmt_opt(sic));
        for (_, pred) in &groups {
            let sub: Vec<&EvalResult> = rows.iter().copied().filter(|r| pred(r)).collect();
            let _ = write!(s, " {} |", fmt_opt(best_by(&sub, |r| r.gap_gic_plus_sic).and_then(|r| r.gap_gic_plus_sic)));
        }
        let _ = writeln!(s);
    }

    let _ = writeln!(s, "\n## Best gap closed and number of cuts\n");
    let _ = writeln!(
        s,
        "| instance | rows | cols | SIC | GIC+SIC | SICs | active SICs | GICs | active GICs | config |"
    );
    let _ = writeln!(s, "|---|---|---|---|---|---|---|---|---|---|");
    for name in &names {
        let rows: Vec<&EvalResult> = results.iter().filter(|r| r.instance == *name).collect();
        if let Some(b) = best_by(&rows, |r| r.gap_gic_plus_sic) {
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |",
                name,
                b.rows,
                b.cols,
                fmt_opt(b.gap_sic),
                fmt_opt(b.gap_gic_plus_sic),
                b.sics,
                b.active_sics,
                b.gics,
                b.active_gics,
                b.config
            );
        } else {
            let _ = writeln!(s, "| {name} | - | - | - | - | - | - | - | - | - |");
        }
    }

    let two: Vec<&EvalResult> = results.iter().filter(|r| r.rounds >= 2).collect();
    if !two.is_empty() {
        let _ = writeln!(s, "\n## Gap closed over two rounds\n");
        let _ = writeln!(s, "| instance | SIC | SIC2 | GIC | GIC2 |");
        let _ = writeln!(s, "|---|---|---|---|---|");
        for name in &names {
            let rows: Vec<&EvalResult> = two.iter().copied().filter(|r| r.instance == *name).collect();
            if let Some(b) = best_by(&rows, |r| r.gap_gic_round2) {
                let _ = writeln!(
                    s,
                    "| {} | {} | {} | {} | {} |",
                    name,
                    fmt_opt(b.gap_sic),
                    fmt_opt(b.gap_sic_round2),
                    fmt_opt(b.gap_gic_plus_sic),
                    fmt_opt(b.gap_gic_round2)
                );
            }
        }
    }

    if !points.is_empty() {
        let xs: Vec<f64> = points.iter().map(|p| p.k_r as f64).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.point_count as f64).collect();
        let _ = writeln!(s, "\n## Points versus rays\n");
        match quadratic_fit(&xs, &ys) {
            Some((c, r2)) => {
                let _ = writeln!(
                    s,
                    "{} samples; fit points = {:.4}·k_r² + {:.4}·k_r + {:.4}, R² = {:.4}",
                    points.len(),
                    c[0],
                    c[1],
                    c[2],
                    r2
                );
            }
            None => {
                let _ = writeln!(s, "{} samples; too few distinct k_r values for a fit", points.len());
            }
        }
    }
    s
}

/// Provenance counts of a cut list, keyed by generator and family letter.
pub fn provenance_counts(cuts: &[Cut]) -> Vec<(String, usize)> {
    let mut m = std::collections::BTreeMap::new();
    for c in cuts {
        let g = match c.provenance.generator {
            Generator::Sic => "sic",
            Generator::Pha => "pha",
            Generator::Tilting => "tilting",
        };
        *m.entry(format!("{g}:{}", c.provenance.family.letter())).or_insert(0) += 1;
    }
    m.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_formula() {
        assert_eq!(gap_closed(10.0, 10.0, 20.0), Some(0.0));
        assert_eq!(gap_closed(10.0, 20.0, 20.0), Some(100.0));
        assert_eq!(gap_closed(10.0, 12.5, 20.0), Some(25.0));
        assert_eq!(gap_closed(10.0, 10.0, 10.0), None);
    }

    #[test]
    fn grid_cardinality() {
        let g = table2_grid(&ExperimentConfig::default());
        assert_eq!(g.len(), 3 * 15 * 2 * 5);
        let labels: std::collections::BTreeSet<String> = g.iter().map(|c| c.label()).collect();
        assert_eq!(labels.len(), g.len());
    }

    #[test]
    fn families_parse_in_execution_order() {
        let f = parse_families("v,r,t").unwrap();
        assert_eq!(families_label(&f), "TRV");
        assert!(parse_families("x").is_err());
    }

    #[test]
    fn exact_quadratic_is_fit_perfectly() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x * x - x + 3.0).collect();
        let (c, r2) = quadratic_fit(&xs, &ys).unwrap();
        assert!((c[0] - 2.0).abs() < 1e-9 && (c[1] + 1.0).abs() < 1e-9 && (c[2] - 3.0).abs() < 1e-9);
        assert!((r2 - 1.0).abs() < 1e-12);
        assert!(quadratic_fit(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]).is_none());
    }

    #[test]
    fn empty_report_has_headers_only() {
        let r = render_report(&[], &[]);
        assert!(r.contains("| instance | SIC |"));
        assert!(!r.contains("Points versus rays"));
    }
}
