use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use gic_core::eval::{
    active_cuts, gap_closed, lp_with_cuts, read_points, read_results, render_report, sweep as run_sweep, table2_grid,
    write_csv, ExperimentConfig, Prepared,
};
use gic_core::instance::{load_known_optima, parse_mps, to_standard_form, KnownOptima, StandardForm};
use gic_core::pha::run_generators;
use gic_core::simplex::SolveError;
use gic_core::split::{fractional_indices, Cut};
use gic_core::trace::Trace;
use serde::{Deserialize, Serialize};

use crate::config::{read, GenFlags};
use crate::CliError;

pub fn load_instance(path: &Path) -> Result<StandardForm, CliError> {
    let inst = parse_mps(path).map_err(|e| CliError::Parse(e.to_string()))?;
    to_standard_form(&inst).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn prepare(sf: StandardForm, optima: &KnownOptima) -> Result<Prepared, CliError> {
    let name = sf.name.clone();
    Prepared::new(sf, optima).map_err(|e| match e {
        SolveError::Infeasible | SolveError::Unbounded => CliError::Infeasible(format!("{name}: {e}")),
        other => CliError::Harness(format!("{name}: {other}")),
    })
}

fn load_optima(path: Option<&Path>) -> Result<KnownOptima, CliError> {
    match path {
        Some(p) => load_known_optima(p).map_err(|e| CliError::Parse(e.to_string())),
        None => Ok(KnownOptima::default()),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Harness(format!("{}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Harness(format!("{}: {e}", dir.display())))
}

pub fn solve(path: &Path) -> Result<(), CliError> {
    let sf = load_instance(path)?;
    let prep = prepare(sf, &KnownOptima::default())?;
    let frac = fractional_indices(&prep.sol, &prep.sf);
    println!("instance   {}", prep.sf.name);
    println!("size       {} rows, {} cols", prep.sf.num_rows(), prep.sf.num_cols());
    println!("opt_lp     {:.6}", prep.opt_lp);
    println!("basis      {:016x}", prep.sol.basis_hash());
    println!("iterations {}", prep.sol.iterations);
    println!("fractional {}", frac.len());
    let x = prep.sf.to_original(&prep.sol.x);
    for k in frac {
        println!("  {} = {:.6}", prep.sf.col_names[k], x[k]);
    }
    Ok(())
}

/// A cut in original variables, for reading.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Readable {
    pub coefficients: Vec<(String, f64)>,
    pub rhs: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CutRecord {
    pub cut: Cut,
    pub original: Readable,
}

/// Contents of cuts.json.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CutsFile {
    pub instance: String,
    pub config: String,
    pub seed: u64,
    pub opt_lp: f64,
    pub sics: Vec<CutRecord>,
    pub gics: Vec<CutRecord>,
}

fn record(sf: &StandardForm, cut: &Cut) -> CutRecord {
    let (coef, rhs) = sf.inequality_to_original(&cut.structural, cut.structural_rhs);
    CutRecord {
        cut: cut.clone(),
        original: Readable {
            coefficients: coef
                .into_iter()
                .enumerate()
                .filter(|(_, v)| *v != 0.0)
                .map(|(j, v)| (sf.col_names[j].clone(), v))
                .collect(),
            rhs,
        },
    }
}

pub fn gics(path: &Path, mut flags: GenFlags, out: &Path, optima: Option<&Path>) -> Result<(), CliError> {
    flags.merge_file()?;
    let (cfg, seed) = flags.resolve()?;
    let optima = load_optima(optima)?;
    let prep = prepare(load_instance(path)?, &optima)?;
    let trace = Trace::new();
    let gen = run_generators(&prep.sf, &prep.sol, &prep.cone, &cfg.pha_config(), &trace)
        .map_err(|e| CliError::Config(e.to_string()))?;
    log::info!("{}: {} SICs, {} GICs, {:?}", prep.sf.name, gen.sics.len(), gen.cuts.len(), gen.prlp);

    let file = CutsFile {
        instance: prep.sf.name.clone(),
        config: cfg.label(),
        seed,
        opt_lp: prep.opt_lp,
        sics: gen.sics.iter().map(|c| record(&prep.sf, c)).collect(),
        gics: gen.cuts.iter().map(|c| record(&prep.sf, c)).collect(),
    };
    create_dir(out)?;
    let json = serde_json::to_vec_pretty(&file).map_err(|e| CliError::Harness(e.to_string()))?;
    write_file(&out.join("cuts.json"), &json)?;
    let mut buf = Vec::new();
    trace.write_jsonl(&mut buf).map_err(|e| CliError::Harness(e.to_string()))?;
    write_file(&out.join("trace.jsonl"), &buf)?;

    println!("instance {}  config {}", file.instance, file.config);
    println!("sics {}  gics {}  timed_out {}", file.sics.len(), file.gics.len(), gen.timed_out);
    if prep.opt_ip.is_some() {
        let sics: Vec<&Cut> = gen.sics.iter().collect();
        let all: Vec<&Cut> = gen.sics.iter().chain(&gen.cuts).collect();
        print_gaps(&prep, &sics, &all)?;
    }
    Ok(())
}

fn print_gaps(prep: &Prepared, sics: &[&Cut], all: &[&Cut]) -> Result<(), CliError> {
    let ip = prep.opt_ip;
    let solve = |cuts: &[&Cut]| lp_with_cuts(&prep.sf, cuts).map_err(|e| CliError::Harness(format!("LP with cuts: {e}")));
    let (z_sic, _) = solve(sics)?;
    let (z_all, x_all) = solve(all)?;
    let gap = |z: f64| ip.and_then(|ip| gap_closed(prep.opt_lp, z, ip));
    let fmt = |g: Option<f64>| g.map_or_else(|| "n/a".to_string(), |g| format!("{g:.2}"));
    println!("opt_lp {:.6}  opt_ip {}", prep.opt_lp, ip.map_or("n/a".into(), |v| format!("{v}")));
    println!("sic      bound {z_sic:.6}  gap {}", fmt(gap(z_sic)));
    println!("gic+sic  bound {z_all:.6}  gap {}", fmt(gap(z_all)));
    let gics: Vec<&Cut> = all[sics.len()..].to_vec();
    println!(
        "active   sics {}  gics {}",
        active_cuts(sics, &x_all),
        active_cuts(&gics, &x_all)
    );
    Ok(())
}

pub fn evaluate(path: &Path, cuts: &Path, optima: &Path) -> Result<(), CliError> {
    let optima = load_optima(Some(optima))?;
    let prep = prepare(load_instance(path)?, &optima)?;
    let file: CutsFile = serde_json::from_str(&read(cuts)?)
        .map_err(|e| CliError::Parse(format!("{}: {e}", cuts.display())))?;
    let n = prep.sf.num_cols();
    if let Some(bad) = file.sics.iter().chain(&file.gics).find(|r| r.cut.structural.len() != n) {
        return Err(CliError::Parse(format!(
            "{}: cut has {} coefficients, instance has {n} columns",
            cuts.display(),
            bad.cut.structural.len()
        )));
    }
    if prep.opt_ip.is_none() {
        log::warn!("{}: no known optimum, gap closed is not available", prep.sf.name);
    }
    let sics: Vec<&Cut> = file.sics.iter().map(|r| &r.cut).collect();
    let all: Vec<&Cut> = file.sics.iter().chain(&file.gics).map(|r| &r.cut).collect();
    println!("instance {}  config {}", file.instance, file.config);
    print_gaps(&prep, &sics, &all)
}

/// Instance paths from a list file; relative entries resolve against the
/// list's directory.
pub fn read_instance_list(list: &Path) -> Result<Vec<PathBuf>, CliError> {
    let text = read(list)?;
    let base = list.parent().unwrap_or(Path::new("."));
    Ok(text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| {
            let p = PathBuf::from(l);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        })
        .collect())
}

pub fn grid(name: &str, base: &ExperimentConfig) -> Result<Vec<ExperimentConfig>, CliError> {
    match name {
        "table2" => Ok(table2_grid(base)),
        "desk" => Ok(table2_grid(base)
            .into_iter()
            .filter(|c| c.families.len() == base.families.len())
            .map(|c| ExperimentConfig {
                families: base.families.clone(),
                ..c
            })
            .collect()),
        "single" => Ok(vec![base.clone()]),
        other => Err(CliError::Config(format!("unknown grid '{other}' (table2, desk or single)"))),
    }
}

pub fn sweep(
    grid_name: &str,
    list: &Path,
    optima: Option<&Path>,
    out: &Path,
    mut flags: GenFlags,
) -> Result<(), CliError> {
    flags.merge_file()?;
    // the grid itself varies these, so only validate the limits
    let base = if grid_name != "single" {
        let mut f = flags.clone();
        f.kh = None;
        f.tilt = None;
        f.sc = None;
        if grid_name == "table2" {
            f.obj = None;
        }
        f.resolve()?.0
    } else {
        flags.resolve()?.0
    };
    let grid = grid(grid_name, &base)?;
    let optima = load_optima(optima)?;
    let mut instances = Vec::new();
    for p in read_instance_list(list)? {
        match load_instance(&p) {
            Ok(sf) => instances.push(sf),
            Err(e) => log::warn!("skipping {e}"),
        }
    }
    let result = run_sweep(instances, &grid, &optima);
    for (name, why) in &result.skipped {
        eprintln!("skipped {name}: {why}");
    }
    create_dir(out)?;
    let mut buf = Vec::new();
    write_csv(&result.results, &mut buf).map_err(|e| CliError::Harness(e.to_string()))?;
    write_file(&out.join("results.csv"), &buf)?;
    let mut buf = Vec::new();
    write_csv(&result.points, &mut buf).map_err(|e| CliError::Harness(e.to_string()))?;
    write_file(&out.join("points_vs_rays.csv"), &buf)?;
    println!(
        "{} cells over {} configs, written to {}",
        result.results.len(),
        grid.len(),
        out.join("results.csv").display()
    );
    Ok(())
}

pub fn report(results: &Path, points: Option<&Path>, out: Option<&Path>) -> Result<(), CliError> {
    let text = read(results)?;
    let rows = read_results(text.as_bytes()).map_err(|e| CliError::Parse(format!("{}: {e}", results.display())))?;
    let pts = match points {
        Some(p) => read_points(read(p)?.as_bytes()).map_err(|e| CliError::Parse(format!("{}: {e}", p.display())))?,
        None => Vec::new(),
    };
    let md = render_report(&rows, &pts);
    match out {
        Some(p) => write_file(p, md.as_bytes()),
        None => std::io::stdout()
            .write_all(md.as_bytes())
            .map_err(|e| CliError::Harness(e.to_string())),
    }
}
