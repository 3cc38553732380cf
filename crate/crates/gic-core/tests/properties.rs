use gic_core::instance::{parse_rational, StandardForm};
use gic_core::simplex::{corner_cone, solve_lp};
use gic_core::split::{fractional_indices, initial_collection, sic_from_initial, SplitSet};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn r(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// `Ax ≥ b` with `0 ≤ x ≤ 3`, feasible at `anchor`.
fn boxed_lp(rows: &[Vec<i64>], slack: &[i64], anchor: &[i64], c: &[i64]) -> StandardForm {
    let n = c.len();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (row, s) in rows.iter().zip(slack) {
        let act: i64 = row.iter().zip(anchor).map(|(x, y)| x * y).sum();
        a.push(row.iter().map(|&v| r(v)).collect());
        b.push(BigRational::new(BigInt::from(2 * act - s), BigInt::from(2)));
    }
    for j in 0..n {
        let mut row = vec![r(0); n];
        row[j] = r(-1);
        a.push(row);
        b.push(r(-3));
    }
    StandardForm::from_rational_rows("prop", a, b, c.iter().map(|&v| r(v)).collect(), vec![true; n])
}

fn lp_input() -> impl Strategy<Value = (Vec<Vec<i64>>, Vec<i64>, Vec<i64>, Vec<i64>)> {
    (2usize..5, 1usize..5).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(prop::collection::vec(-4i64..=4, n), m),
            prop::collection::vec(0i64..=5, m),
            prop::collection::vec(0i64..=3, n),
            prop::collection::vec(-9i64..=9, n),
        )
    })
}

fn feasible(sf: &StandardForm, x: &[f64]) -> bool {
    x.iter().all(|v| *v >= -1e-9)
        && sf.a.iter().zip(&sf.b).all(|(row, b)| {
            row.iter().zip(x).map(|(v, y)| v * y).sum::<f64>() >= b - 1e-9
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn decimal_literals_parse_exactly(num in -100_000i64..100_000, places in 0u32..6) {
        let den = 10i64.pow(places);
        let text = if places == 0 {
            num.to_string()
        } else {
            let sign = if num < 0 { "-" } else { "" };
            format!("{sign}{}.{:0width$}", num.abs() / den, num.abs() % den, width = places as usize)
        };
        prop_assert_eq!(parse_rational(&text), Some(BigRational::new(BigInt::from(num), BigInt::from(den))));
    }

    #[test]
    fn lp_optimum_is_feasible_and_beats_grid_points((rows, slack, anchor, c) in lp_input()) {
        let sf = boxed_lp(&rows, &slack, &anchor, &c);
        let sol = solve_lp(&sf, &sf.c).unwrap();
        prop_assert!(feasible(&sf, &sol.x));
        prop_assert!(sol.reduced_costs.iter().all(|d| *d >= -1e-9));
        let n = c.len();
        for code in 0..4usize.pow(n as u32) {
            let x: Vec<f64> = (0..n).map(|j| ((code / 4usize.pow(j as u32)) % 4) as f64).collect();
            if feasible(&sf, &x) {
                prop_assert!(sf.objective_value(&sol.x) <= sf.objective_value(&x) + 1e-9);
            }
        }
    }

    #[test]
    fn initial_points_sit_on_the_split_and_the_sic((rows, slack, anchor, c) in lp_input()) {
        let sf = boxed_lp(&rows, &slack, &anchor, &c);
        let sol = solve_lp(&sf, &sf.c).unwrap();
        let Ok(cone) = corner_cone(&sol) else { return Ok(()) };
        for k in fractional_indices(&sol, &sf) {
            let s = SplitSet::new(k, sol.x[k]).unwrap();
            let coll = initial_collection(&cone, &s);
            let alpha = sic_from_initial(&coll).unwrap();
            for p in &coll.points {
                prop_assert!(s.on_boundary(&cone, &p.coords));
                let v: f64 = p.coords.iter().map(|&(j, x)| alpha[j] * x).sum();
                prop_assert!((v - 1.0).abs() < 1e-9);
            }
            for ray in &coll.rays {
                let v: f64 = ray.direction.iter().map(|&(j, x)| alpha[j] * x).sum();
                prop_assert!(v.abs() < 1e-9);
                prop_assert!(cone.var_rate(k, &ray.direction).abs() < 1e-9);
            }
        }
    }
}
