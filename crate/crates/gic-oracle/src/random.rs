//! Seeded generators for tiny test problems.

use gic_core::instance::StandardForm;
use gic_core::simplex::{corner_cone, solve_lp};
use gic_core::split::fractional_indices;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cone::{ExactCone, ExactHyperplane};
use crate::{q, qf, Q};

/// Bounded pure-integer program `min cᵀx, Ax ≥ b, 0 ≤ x ≤ u` with a
/// fractional, nondegenerate LP optimum and at least one feasible integer
/// point. Returns `None` if no such draw is found in a few hundred tries.
pub fn tiny_milp(seed: u64, n: usize, m: usize, ub: i64) -> Option<StandardForm> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..500 {
        let anchor: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=ub)).collect();
        let mut a = Vec::new();
        let mut b = Vec::new();
        for _ in 0..m {
            let row: Vec<i64> = (0..n).map(|_| rng.gen_range(-4..=4)).collect();
            let act: i64 = row.iter().zip(&anchor).map(|(x, y)| x * y).sum();
            a.push(row.into_iter().map(q).collect::<Vec<Q>>());
            b.push(qf(2 * act - rng.gen_range(1..=5), 2));
        }
        for j in 0..n {
            let mut row = vec![q(0); n];
            row[j] = q(-1);
            a.push(row);
            b.push(q(-ub));
        }
        let c: Vec<Q> = (0..n)
            .map(|_| {
                let v = rng.gen_range(1..=9);
                q(if rng.gen_bool(0.5) { v } else { -v })
            })
            .collect();
        let sf = StandardForm::from_rational_rows(&format!("tiny{seed}"), a, b, c, vec![true; n]);
        let Ok(sol) = solve_lp(&sf, &sf.c) else { continue };
        if fractional_indices(&sol, &sf).is_empty() || corner_cone(&sol).is_err() {
            continue;
        }
        return Some(sf);
    }
    None
}

/// Exact cone of dimension `n` with a split between 0 and 1. Rays miss the
/// split boundary with probability `parallel`.
pub fn exact_cone(rng: &mut impl Rng, n: usize, parallel: f64) -> ExactCone {
    let split_rate = (0..n)
        .map(|_| {
            if rng.gen_bool(parallel) {
                q(0)
            } else {
                let v = rng.gen_range(1..=6);
                qf(if rng.gen_bool(0.5) { v } else { -v }, rng.gen_range(1..=4))
            }
        })
        .collect();
    ExactCone {
        cost: (0..n).map(|_| qf(rng.gen_range(0..=8), rng.gen_range(1..=3))).collect(),
        split_rate,
        split_value: qf(rng.gen_range(1..=9), 10),
        lo: q(0),
        hi: q(1),
    }
}

/// Hyperplane valid at the apex that reaches at least one ray.
pub fn exact_hyperplane(rng: &mut impl Rng, n: usize) -> ExactHyperplane {
    let mut g: Vec<Q> = (0..n).map(|_| q(rng.gen_range(-5..=3))).collect();
    if g.iter().all(|v| *v >= q(0)) {
        let j = rng.gen_range(0..n);
        g[j] = q(-rng.gen_range(1..=5));
    }
    ExactHyperplane {
        g,
        rhs: qf(-rng.gen_range(1..=12), rng.gen_range(1..=8)),
    }
}

/// Hyperplane reaching exactly the rays in `targets`, each at a random step.
pub fn hyperplane_on(rng: &mut impl Rng, n: usize, targets: &[usize]) -> ExactHyperplane {
    let g = (0..n)
        .map(|j| {
            if targets.contains(&j) {
                q(-rng.gen_range(1..=6))
            } else {
                q(rng.gen_range(0..=3))
            }
        })
        .collect();
    ExactHyperplane {
        g,
        rhs: qf(-rng.gen_range(1..=12), rng.gen_range(1..=8)),
    }
}

/// Random subset of `0..n` with about `k` elements, never empty.
pub fn subset(rng: &mut impl Rng, n: usize, k: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(rng);
    v.truncate(k.clamp(1, n));
    v.sort_unstable();
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_milp_is_reproducible_and_fractional() {
        let a = tiny_milp(3, 4, 3, 2).unwrap();
        let b = tiny_milp(3, 4, 3, 2).unwrap();
        assert_eq!(a.a, b.a);
        assert_eq!(a.b, b.b);
        let sol = solve_lp(&a, &a.c).unwrap();
        assert!(!fractional_indices(&sol, &a).is_empty());
    }

    #[test]
    fn hyperplane_on_targets_reaches_them() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = hyperplane_on(&mut rng, 5, &[1, 3]);
        assert!(h.distance(1).is_some() && h.distance(3).is_some());
        assert!(h.distance(0).is_none());
    }
}
