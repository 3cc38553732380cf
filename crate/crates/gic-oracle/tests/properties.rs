use std::collections::BTreeSet;

use gic_core::pha::{pha1_activate, rays_cut_by, ActivationOptions};
use gic_core::split::{densify, initial_collection};
use gic_oracle::lp::LpOutcome;
use gic_oracle::polyhedron::RationalPolyhedron;
use gic_oracle::random::{exact_cone, exact_hyperplane};
use gic_oracle::{q, to_f64, Q};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn close(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-7 * (1.0 + y.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn float_activation_matches_exact(seed in any::<u64>(), n in 3usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cone = exact_cone(&mut rng, n, 0.2);
        let h = exact_hyperplane(&mut rng, n);
        let exact = cone.activate(&h).collection;

        let (fcone, split, nbs) = cone.to_float(std::slice::from_ref(&h));
        let mut coll = initial_collection(&fcone, &split);
        let r_a: BTreeSet<usize> = rays_cut_by(&nbs[0], &coll).into_iter().collect();
        let opts = ActivationOptions { enforce_tilt_rule: false };
        prop_assert!(pha1_activate(&fcone, &mut coll, &nbs[0], &r_a, opts).is_ok());

        let fpts: Vec<Vec<f64>> = coll.points.iter().map(|p| densify(&p.coords, n)).collect();
        let distinct: BTreeSet<&Vec<Q>> = exact.points.iter().map(|p| &p.coords).collect();
        let epts: Vec<Vec<f64>> = distinct.into_iter().map(|c| c.iter().map(to_f64).collect()).collect();
        for e in &epts {
            prop_assert!(fpts.iter().any(|f| close(f, e)), "missing point {:?}", e);
        }
        for f in &fpts {
            prop_assert!(epts.iter().any(|e| close(f, e)), "extra point {:?}", f);
        }
        prop_assert_eq!(coll.rays.len(), exact.rays.len());
    }

    #[test]
    fn lp_optimum_is_attained_at_a_vertex(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::Rng;
        let n = rng.gen_range(2..=3);
        let m = rng.gen_range(2..=5);
        let mut a: Vec<Vec<Q>> = (0..n).map(|j| (0..n).map(|k| q(i64::from(j == k))).collect()).collect();
        let mut b = vec![q(0); n];
        for _ in 0..m {
            a.push((0..n).map(|_| q(rng.gen_range(-3..=3))).collect());
            b.push(q(rng.gen_range(-6..=2)));
        }
        let c: Vec<Q> = (0..n).map(|_| q(rng.gen_range(0..=4))).collect();
        let poly = RationalPolyhedron::new(n, a, b, vec![false; n]);
        let verts = poly.vertices().unwrap();
        match poly.minimize(&c) {
            LpOutcome::Optimal { value, x } => {
                prop_assert!(poly.contains(&x));
                let best = verts.iter().map(|v| gic_oracle::dot(&c, v)).min().unwrap();
                prop_assert_eq!(best, value);
            }
            LpOutcome::Infeasible => prop_assert!(verts.is_empty()),
            LpOutcome::Unbounded => prop_assert!(false, "costs are nonnegative on the orthant"),
        }
    }
}
