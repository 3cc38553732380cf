use std::path::PathBuf;

use gic_core::eval::{evaluate, ExperimentConfig, Prepared};
use gic_core::instance::{load_known_optima, parse_mps, to_standard_form, StandardForm};
use gic_core::pha::Criterion;
use gic_core::simplex::{corner_cone, solve_lp};
use gic_core::split::{fractional_indices, initial_collection, sic_from_initial, SplitSet};
use gic_core::trace::Trace;

fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

fn load(name: &str) -> StandardForm {
    let inst = parse_mps(&data(&format!("instances/{name}.mps"))).unwrap();
    to_standard_form(&inst).unwrap()
}

#[test]
fn p0033_lp_value() {
    let sf = load("p0033");
    let sol = solve_lp(&sf, &sf.c).unwrap();
    let z = sf.objective_value(&sol.x);
    assert!((z - 2520.571739).abs() < 1e-4, "LP value {z}");
}

#[test]
fn sic_matches_gomory_form_on_every_split() {
    let sf = load("p0033");
    let sol = solve_lp(&sf, &sf.c).unwrap();
    let cone = corner_cone(&sol).unwrap();
    for k in fractional_indices(&sol, &sf) {
        let s = SplitSet::new(k, sol.x[k]).unwrap();
        let coll = initial_collection(&cone, &s);
        let alpha = sic_from_initial(&coll).unwrap();
        // every initial point is tight
        for p in &coll.points {
            let v: f64 = p.coords.iter().map(|&(j, x)| alpha[j] * x).sum();
            assert!((v - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn stein15_sic_and_gic_gap() {
    let optima = load_known_optima(&data("optima.csv")).unwrap();
    let prep = Prepared::new(load("stein15_nosym"), &optima).unwrap();
    let cfg = ExperimentConfig {
        criterion: Criterion::H1,
        kh: 2,
        ..Default::default()
    };
    let (r, gen) = evaluate(&prep, &cfg, &Trace::new());
    let gen = gen.unwrap();
    let sic = r.gap_sic.unwrap();
    let gic = r.gap_gic_plus_sic.unwrap();
    println!("stein15_nosym: sic {sic:.2} gic+sic {gic:.2} gics {} stats {:?}", r.gics, gen.prlp);
    assert!((sic - 50.0).abs() <= 1.0);
    assert!(gic >= sic - 1e-6);
}

#[test]
fn stein15_cuts_keep_every_integer_point() {
    let optima = load_known_optima(&data("optima.csv")).unwrap();
    let prep = Prepared::new(load("stein15_nosym"), &optima).unwrap();
    let feas: Vec<Vec<f64>> = (0u32..1 << 15)
        .map(|mask| (0..15).map(|j| ((mask >> j) & 1) as f64).collect::<Vec<f64>>())
        .filter(|x| prep.sf.a.iter().zip(&prep.sf.b).all(|(a, b)| a.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() >= b - 1e-9))
        .collect();
    assert!(!feas.is_empty());
    let mut bad = 0;
    let mut total = 0;
    for crit in [Criterion::H1, Criterion::H2, Criterion::H3] {
        for tilting in [false, true] {
            for kh in [0, 2, 4] {
                let cfg = ExperimentConfig { criterion: crit, tilting, kh, obj_points: 200, ..Default::default() };
                let (_, gen) = evaluate(&prep, &cfg, &Trace::new());
                let Some(gen) = gen else { continue };
                for c in gen.cuts.iter().chain(&gen.sics) {
                    total += 1;
                    let worst = feas.iter().map(|x| c.violation(x)).fold(f64::NEG_INFINITY, f64::max);
                    if worst > 1e-6 {
                        bad += 1;
                        println!("{} invalid cut {:?} viol {worst}", cfg.label(), c.provenance);
                    }
                }
            }
        }
    }
    assert!(total > 0);
    assert_eq!(bad, 0, "{bad} invalid of {total}");
}
