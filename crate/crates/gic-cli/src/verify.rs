//! `gic verify`: exact suites on the fixture and small random problems.

use gic_oracle::regression::tilt_regression;
use gic_oracle::suites::{
    closure_suite, dominance_trials, growth_demo, monotonicity_trials, parallel_ray_trials, validity_suite,
};

use crate::CliError;

pub const SUITES: [&str; 7] = ["appendix-c", "validity", "monotonicity", "parallel", "dominance", "growth", "closure"];

/// Outcome of one suite.
#[derive(Clone, Debug)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn scaled(base: usize, scale: f64) -> usize {
    ((base as f64 * scale).round() as usize).max(1)
}

pub fn run_suite(name: &'static str, seed: u64, scale: f64) -> SuiteOutcome {
    let (passed, detail) = match name {
        "appendix-c" => match tilt_regression() {
            Ok(r) => (
                r.passed(),
                format!(
                    "broken leg {}, enforced leg {}, compliant leg {} ({} cuts)",
                    verdict(r.broken_leg()),
                    verdict(r.enforced_leg()),
                    verdict(r.compliant_leg()),
                    r.compliant_cuts
                ),
            ),
            Err(e) => (false, e.to_string()),
        },
        "validity" => match validity_suite(seed, 3) {
            Ok(s) => (
                s.invalid == 0 && s.cuts > 0,
                format!("{} instances, {} configs, {} cuts, {} invalid", s.instances, s.configs, s.cuts, s.invalid),
            ),
            Err(e) => (false, e.to_string()),
        },
        "monotonicity" => {
            let s = monotonicity_trials(seed, scaled(1000, scale));
            (s.failures == 0, format!("{} trials, {} checked, {} failures", s.trials, s.checked, s.failures))
        }
        "parallel" => {
            let s = parallel_ray_trials(seed, scaled(200, scale));
            (
                s.exact_failures == 0 && s.float_failures == 0,
                format!(
                    "{} trials, {} points, {} rays, max residual {:.1e}",
                    s.trials, s.points, s.rays, s.max_residual
                ),
            )
        }
        "dominance" => match dominance_trials(seed, scaled(200, scale)) {
            Ok(s) => (
                s.disagreements == 0,
                format!("{} trials, {} possible, {} disagreements", s.trials, s.possible, s.disagreements),
            ),
            Err(e) => (false, e.to_string()),
        },
        "growth" => match growth_demo(seed, 6, 4, scaled(5, scale)) {
            Ok(rows) => {
                let last = rows.last().cloned().unwrap_or_default();
                let text = rows
                    .iter()
                    .map(|r| format!("kh{} {:.1}/{:.1}", r.kh, r.full, r.partial))
                    .collect::<Vec<_>>()
                    .join(", ");
                (last.full > last.partial, format!("full/partial points: {text}"))
            }
            Err(e) => (false, e.to_string()),
        },
        "closure" => match closure_suite(seed, 4) {
            Ok(s) => (
                s.sandwich_failures == 0 && s.full_failures == 0,
                format!(
                    "{} splits, {} sandwich failures, {} exact matches, {} mismatches",
                    s.splits, s.sandwich_failures, s.full_matches, s.full_failures
                ),
            ),
            Err(e) => (false, e.to_string()),
        },
        _ => (false, "unknown suite".into()),
    };
    SuiteOutcome { name, passed, detail }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "failed"
    }
}

pub fn run(suite: &str, seed: u64, scale: f64) -> Result<(), CliError> {
    let names: Vec<&'static str> = if suite == "all" {
        SUITES.to_vec()
    } else {
        match SUITES.iter().find(|s| **s == suite) {
            Some(s) => vec![*s],
            None => {
                return Err(CliError::Config(format!(
                    "unknown suite '{suite}' (all, {})",
                    SUITES.join(", ")
                )))
            }
        }
    };
    if !(scale.is_finite() && scale > 0.0) {
        return Err(CliError::Config(format!("scale must be positive, got {scale}")));
    }
    let mut failed = Vec::new();
    for name in names {
        let o = run_suite(name, seed, scale);
        println!("{} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
        if !o.passed {
            failed.push(o.name);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}
