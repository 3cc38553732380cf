//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Each criterion has hard checks, which fail the run, and reported checks,
//! which only turn the line into FAIL. Reported checks are those that depend
//! on data outside the repository (instances not shipped) or on empirical
//! trends the implementation does not control.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use gic_core::eval::{
    evaluate, lp_with_cuts, points_vs_rays, quadratic_fit, render_report, sic_only, table2_grid, EvalResult,
    ExperimentConfig, PointsVsRays, Prepared,
};
use gic_core::instance::{load_known_optima, parse_mps, parse_mps_str, to_standard_form, KnownOptima, StandardForm};
use gic_core::pha::{pha_point_bound, tilting_size_bound};
use gic_core::prlp::PrlpStats;
use gic_core::split::Cut;
use gic_core::trace::Trace;
use gic_oracle::regression::{tilt_regression, FIXTURE};
use gic_oracle::suites::{
    closure_suite, monotonicity_trials, parallel_ray_trials, validate_instance, validity_configs, validity_suite,
    ValiditySummary, CUT_TOL,
};

const SEED: u64 = 2024;

struct Line {
    id: usize,
    hard_ok: bool,
    soft_ok: bool,
    text: String,
    elapsed: Duration,
}

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// `$GIC_INSTANCE_DIR` first, then the shipped instances.
fn find_instance(name: &str) -> Option<PathBuf> {
    let mut dirs = Vec::new();
    if let Ok(d) = std::env::var("GIC_INSTANCE_DIR") {
        dirs.push(PathBuf::from(d));
    }
    dirs.push(root().join("data/instances"));
    dirs.into_iter()
        .map(|d| d.join(format!("{name}.mps")))
        .find(|p| p.exists())
}

fn load(name: &str) -> Option<StandardForm> {
    let p = find_instance(name)?;
    Some(to_standard_form(&parse_mps(&p).ok()?).ok()?)
}

/// Results of the desk grid on the desk instances.
#[derive(Default)]
struct Desk {
    results: Vec<EvalResult>,
    points: Vec<PointsVsRays>,
    prlp: PrlpStats,
    missing: Vec<&'static str>,
}

const DESK: [&str; 5] = ["p0033", "stein15_nosym", "bm23", "sample2", "flugpl"];

fn desk_grid() -> Vec<ExperimentConfig> {
    let base = ExperimentConfig {
        obj_points: 200,
        obj_time: Duration::from_secs(1),
        time_limit: Duration::from_secs(120),
        ..Default::default()
    };
    table2_grid(&base)
        .into_iter()
        .filter(|c| c.families.len() == 4)
        .filter(|c| c.tilting || c.kh > 0)
        .collect()
}

fn run_desk(optima: &KnownOptima) -> Desk {
    let mut desk = Desk::default();
    let grid = desk_grid();
    for name in DESK {
        let Some(sf) = load(name) else {
            desk.missing.push(name);
            continue;
        };
        let n = sf.num_cols();
        let prep = Prepared::new(sf, optima).expect("desk instance LP");
        for cfg in &grid {
            let (r, gen) = evaluate(&prep, cfg, &Trace::new());
            if let Some(g) = gen {
                desk.points.extend(points_vs_rays(&r.instance, cfg, n, &g));
                desk.prlp.absorb(&g.prlp);
            }
            desk.results.push(r);
        }
    }
    desk
}

fn best(desk: &Desk, instance: &str) -> Option<(f64, f64, String)> {
    let rows: Vec<&EvalResult> = desk
        .results
        .iter()
        .filter(|r| r.instance.eq_ignore_ascii_case(instance))
        .collect();
    let sic = rows.iter().filter_map(|r| r.gap_sic).fold(f64::NEG_INFINITY, f64::max);
    let top = rows
        .iter()
        .filter(|r| r.gap_gic_plus_sic.is_some())
        .max_by(|a, b| a.gap_gic_plus_sic.unwrap().total_cmp(&b.gap_gic_plus_sic.unwrap()))?;
    Some((sic, top.gap_gic_plus_sic?, top.config.clone()))
}

fn validity() -> (bool, bool, String) {
    let mut s = ValiditySummary::default();
    let fixture = to_standard_form(&parse_mps_str("regression", FIXTURE).unwrap()).unwrap();
    let fixture_ok = validate_instance(&fixture, &validity_configs(), &mut s).is_ok();
    let fixture_cuts = s.cuts;
    let tiny = validity_suite(SEED, 3);
    let ok = match &tiny {
        Ok(t) => fixture_ok && s.invalid == 0 && t.invalid == 0 && t.instances >= 3 && fixture_cuts > 0,
        Err(_) => false,
    };
    let text = match tiny {
        Ok(t) => format!(
            "fixture {} cuts, {} invalid; {} tiny MILPs, {} cuts, {} invalid; worst slack {:.1e} (tol {CUT_TOL:e})",
            fixture_cuts,
            s.invalid,
            t.instances,
            t.cuts,
            t.invalid,
            s.worst.max(t.worst)
        ),
        Err(e) => format!("oracle error: {e}"),
    };
    (ok, ok, text)
}

fn sic_baseline(optima: &KnownOptima) -> (bool, bool, String) {
    let targets = [("p0033", 1.83), ("bm23", 5.92), ("stein15_nosym", 50.00)];
    let mut hard = true;
    let mut soft = true;
    let mut parts = Vec::new();
    for (name, reference) in targets {
        let Some(sf) = load(name) else {
            soft = false;
            parts.push(format!("{name} missing"));
            continue;
        };
        let prep = Prepared::new(sf, optima).expect("LP");
        let sics = sic_only(&prep.sf, &prep.sol, &prep.cone);
        let refs: Vec<&Cut> = sics.iter().collect();
        let (z, _) = lp_with_cuts(&prep.sf, &refs).expect("LP with SICs");
        let gap = prep
            .opt_ip
            .and_then(|ip| gic_core::eval::gap_closed(prep.opt_lp, z, ip))
            .unwrap_or(f64::NAN);
        let within = (gap - reference).abs() <= 1.0;
        hard &= within;
        parts.push(format!("{name} {gap:.2} (reference {reference:.2})"));
    }
    (hard, soft && hard, parts.join(", "))
}

fn improvement(desk: &Desk) -> (bool, bool, String) {
    let targets = [("stein15_nosym", 58.33), ("p0033", 5.19), ("sample2", 13.14)];
    let mut hard = true;
    let mut soft = true;
    let mut parts = Vec::new();
    for (name, reference) in targets {
        match best(desk, name) {
            Some((sic, gic, cfg)) => {
                let up = gic > sic + 1e-6;
                hard &= up;
                parts.push(format!("{name} sic {sic:.2} best {gic:.2} [{cfg}] ({:+.2} vs reference)", gic - reference));
            }
            None => {
                soft = false;
                parts.push(format!("{name} missing"));
            }
        }
    }
    (hard, soft && hard, parts.join(", "))
}

fn monotone(desk: &Desk) -> (bool, bool, String) {
    let cells: Vec<f64> = desk
        .results
        .iter()
        .filter_map(|r| Some(r.gap_gic_plus_sic? - r.gap_sic?))
        .collect();
    let worst = cells.iter().copied().fold(f64::INFINITY, f64::min);
    let ok = !cells.is_empty() && worst >= -1e-6;
    (ok, ok, format!("{} cells, min(gic+sic - sic) {worst:.2e}", cells.len()))
}

fn growth(desk: &Desk) -> (bool, bool, String) {
    let mut violations = 0;
    let mut worst_c: f64 = 0.0;
    for p in &desk.points {
        let tilt = if p.tilting { tilting_size_bound(p.n, p.tilt_activations) } else { 0 };
        let pha = if p.tilting {
            p.k_r * p.k_r * p.pha_activations
        } else {
            pha_point_bound(p.k_r, p.pha_activations, p.n)
        };
        if p.point_count > tilt + pha || (!p.tilting && p.peak_points > pha) {
            violations += 1;
        }
        if p.tilting && p.kh == 0 && p.tilt_activations > 0 {
            let c = p.point_count as f64 / (p.n * p.tilt_activations * p.tilt_activations) as f64;
            worst_c = worst_c.max(c);
        }
    }
    let xs: Vec<f64> = desk.points.iter().map(|p| p.k_r as f64).collect();
    let ys: Vec<f64> = desk.points.iter().map(|p| p.point_count as f64).collect();
    let fit = quadratic_fit(&xs, &ys);
    let hard = violations == 0 && worst_c <= 2.0 && !desk.points.is_empty();
    let trend = fit.is_some_and(|(c, r2)| c[0] > 0.0 && r2 > 0.8);
    let fit_text = match fit {
        Some((c, r2)) => format!("fit {:.3}·k_r² {:+.3}·k_r {:+.3}, R² {r2:.3}", c[0], c[1], c[2]),
        None => "no fit".into(),
    };
    (
        hard,
        hard && trend,
        format!(
            "{} split runs, {violations} bound violations, max tilting c {worst_c:.3}; {fit_text}",
            desk.points.len()
        ),
    )
}

fn parallel() -> (bool, bool, String) {
    let s = parallel_ray_trials(SEED, 200);
    let ok = s.exact_failures == 0 && s.float_failures == 0 && s.points > 0;
    (
        ok,
        ok,
        format!(
            "{} trials, {} points, {} rays, max residual {:.1e}",
            s.trials, s.points, s.rays, s.max_residual
        ),
    )
}

fn closure() -> (bool, bool, String) {
    match closure_suite(SEED, 4) {
        Ok(s) => {
            let ok = s.splits > 0 && s.sandwich_failures == 0 && s.full_failures == 0;
            (
                ok,
                ok,
                format!(
                    "{} splits, {} with final points, {} sandwich failures, {} exact matches, {} mismatches",
                    s.splits, s.with_final, s.sandwich_failures, s.full_matches, s.full_failures
                ),
            )
        }
        Err(e) => (false, false, format!("oracle error: {e}")),
    }
}

fn boundedness(desk: &Desk) -> (bool, bool, String) {
    let s = &desk.prlp;
    let ok = s.predictions_checked > 0 && s.prediction_mismatches == 0;
    (
        ok,
        ok,
        format!(
            "{} predictions checked, {} mismatches, {} prefiltered as unbounded",
            s.predictions_checked, s.prediction_mismatches, s.prefiltered
        ),
    )
}

fn monotonicity() -> (bool, bool, String) {
    let s = monotonicity_trials(SEED, 1000);
    let ok = s.trials == 1000 && s.failures == 0;
    (ok, ok, format!("{} trials, {} checked, {} counterexamples", s.trials, s.checked, s.failures))
}

fn report(desk: &Desk) -> (bool, bool, String) {
    let md = render_report(&desk.results, &desk.points);
    let ok = !desk.results.is_empty() && md.contains("| instance |");
    println!("{md}");
    (
        ok,
        ok,
        format!(
            "full-scale tables not attempted; best-effort desk report above ({} cells)",
            desk.results.len()
        ),
    )
}

fn timed(id: usize, f: impl FnOnce() -> (bool, bool, String)) -> Line {
    let t = Instant::now();
    let (hard_ok, soft_ok, text) = f();
    Line {
        id,
        hard_ok,
        soft_ok,
        text,
        elapsed: t.elapsed(),
    }
}

fn main() {
    let optima = load_known_optima(&root().join("data/optima.csv")).expect("optima table");
    let t = Instant::now();
    let desk = run_desk(&optima);
    let desk_time = t.elapsed();

    let mut lines = vec![
        timed(1, validity),
        timed(2, || {
            let r = tilt_regression();
            match r {
                Ok(r) => (
                    r.passed(),
                    r.passed(),
                    format!(
                        "broken sequence cuts a closure point: {}; enforced rule rejects it: {}; compliant cuts valid: {}",
                        r.broken_leg(),
                        r.enforced_leg(),
                        r.compliant_leg()
                    ),
                ),
                Err(e) => (false, false, format!("oracle error: {e}")),
            }
        }),
        timed(3, || sic_baseline(&optima)),
    ];
    let mut desk_lines = vec![
        timed(4, || improvement(&desk)),
        timed(5, || monotone(&desk)),
        timed(6, || growth(&desk)),
    ];
    for l in &mut desk_lines {
        l.elapsed += desk_time;
    }
    lines.extend(desk_lines);
    lines.push(timed(7, parallel));
    lines.push(timed(8, closure));
    let mut b = timed(9, || boundedness(&desk));
    b.elapsed += desk_time;
    lines.push(b);
    lines.push(timed(10, monotonicity));
    lines.push(timed(11, || report(&desk)));

    if !desk.missing.is_empty() {
        println!("instances not found: {}", desk.missing.join(", "));
    }
    for l in &lines {
        println!(
            "{} criterion {:>2}: {} [{:.1}s]",
            if l.soft_ok { "PASS" } else { "FAIL" },
            l.id,
            l.text,
            l.elapsed.as_secs_f64()
        );
    }
    let broken: Vec<usize> = lines.iter().filter(|l| !l.hard_ok).map(|l| l.id).collect();
    if !broken.is_empty() {
        eprintln!("hard checks failed for criteria {broken:?}");
        std::process::exit(1);
    }
}
