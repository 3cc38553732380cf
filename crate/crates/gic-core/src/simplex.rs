//! LP relaxation, optimal basis and the nonbasic cone at the optimum.
//!
//! The cone `C̄` has apex `x̄` and one ray per nonbasic extended variable:
//! moving along ray `j` raises nonbasic variable `j` by one unit and adjusts
//! the basic variables through the tableau. In nonbasic coordinates the apex
//! is the origin and ray `j` is the unit vector `e_j`.

use std::hash::Hasher;

use thiserror::Error;

use crate::instance::{Hyperplane, StandardForm};
use crate::lp::{self, LpProblem, LpResult, LpStatus, SimplexOptions};
use crate::ZERO_TOL;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("LP is infeasible")]
    Infeasible,
    #[error("LP is unbounded")]
    Unbounded,
    #[error("simplex stopped early: {0:?}")]
    Stopped(LpStatus),
    #[error("basis is numerically singular (smallest pivot {0:e})")]
    DegenerateBasis(f64),
}

/// Optimal basic feasible solution of `min objᵀx` over the standard form.
#[derive(Clone, Debug)]
pub struct BasicSolution {
    /// Structural values `x̄`.
    pub x: Vec<f64>,
    /// Values of all extended variables (structural then row surplus).
    pub values: Vec<f64>,
    /// Basic extended variable of each row.
    pub basis: Vec<usize>,
    /// Nonbasic extended variables, ascending. There are exactly `n`.
    pub nonbasic: Vec<usize>,
    /// `objᵀx̄` (without the standard-form offset).
    pub objective: f64,
    /// Reduced cost of each nonbasic variable, aligned with `nonbasic`.
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
    lp: LpProblem,
    result: LpResult,
}

impl BasicSolution {
    /// Stable hash of the basis, for reports.
    pub fn basis_hash(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        for &v in &self.basis {
            h.write_usize(v);
        }
        h.finish()
    }
}

/// Solves the LP relaxation with objective `obj`.
pub fn solve_lp(sf: &StandardForm, obj: &[f64]) -> Result<BasicSolution, SolveError> {
    solve_lp_with(sf, obj, &SimplexOptions::default())
}

pub fn solve_lp_with(
    sf: &StandardForm,
    obj: &[f64],
    opts: &SimplexOptions,
) -> Result<BasicSolution, SolveError> {
    let mut p = sf.lp_problem();
    p.cost = obj.to_vec();
    let r = lp::solve(&p, opts);
    match r.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(SolveError::Infeasible),
        LpStatus::Unbounded => return Err(SolveError::Unbounded),
        LpStatus::Singular => return Err(SolveError::DegenerateBasis(r.min_factor_pivot)),
        s => return Err(SolveError::Stopped(s)),
    }
    if r.basis.iter().any(|&v| v == usize::MAX) {
        return Err(SolveError::DegenerateBasis(0.0));
    }
    let n = sf.num_cols();
    let m = sf.num_rows();
    let mut values = r.x.clone();
    values.extend_from_slice(&r.surplus);
    let mut is_basic = vec![false; n + m];
    for &v in &r.basis {
        is_basic[v] = true;
    }
    let nonbasic: Vec<usize> = (0..n + m).filter(|&v| !is_basic[v]).collect();
    let reduced_costs = nonbasic.iter().map(|&v| r.reduced_costs[v]).collect();
    Ok(BasicSolution {
        x: r.x.clone(),
        values,
        basis: r.basis.clone(),
        nonbasic,
        objective: r.objective,
        reduced_costs,
        iterations: r.iterations,
        lp: p,
        result: r,
    })
}

/// Reduced costs of the nonbasic variables (aligned with `sol.nonbasic`).
pub fn reduced_costs(sol: &BasicSolution) -> Vec<f64> {
    sol.reduced_costs.clone()
}

/// A hyperplane written in nonbasic coordinates: `gᵀy ≥ rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct NbHyperplane {
    pub id: usize,
    pub g: Vec<f64>,
    /// `b − aᵀx̄`, nonpositive when the halfspace contains the apex.
    pub rhs: f64,
}

impl NbHyperplane {
    /// Step along ray `j` at which the hyperplane is reached, or `+∞` when the
    /// ray runs parallel to it or away from it.
    pub fn distance(&self, j: usize) -> f64 {
        let gj = self.g[j];
        if gj < -ZERO_TOL {
            (self.rhs / gj).max(0.0)
        } else {
            f64::INFINITY
        }
    }

    /// Signed step to the hyperplane along the full line through ray `j`.
    pub fn signed_distance(&self, j: usize) -> f64 {
        let gj = self.g[j];
        if gj.abs() > ZERO_TOL {
            self.rhs / gj
        } else {
            f64::INFINITY
        }
    }

    pub fn eval(&self, y: &[(usize, f64)]) -> f64 {
        y.iter().map(|&(j, v)| self.g[j] * v).sum()
    }
}

/// The simple cone at the LP optimum.
#[derive(Clone, Debug)]
pub struct Cone {
    pub num_cols: usize,
    pub num_rows: usize,
    pub apex: Vec<f64>,
    /// All extended variable values at the apex.
    pub apex_values: Vec<f64>,
    /// Extended variable defining each ray; ray `j` raises `nonbasic[j]`.
    pub nonbasic: Vec<usize>,
    /// `tableau[v][j]`: rate of change of extended variable `v` along ray `j`.
    pub tableau: Vec<Vec<f64>>,
}

/// Builds `C̄` from an optimal basis.
pub fn corner_cone(sol: &BasicSolution) -> Result<Cone, SolveError> {
    if sol.result.min_factor_pivot < 1e-10 {
        return Err(SolveError::DegenerateBasis(sol.result.min_factor_pivot));
    }
    let n = sol.lp.num_cols();
    let m = sol.lp.num_rows;
    let mut tableau = vec![vec![0.0; n]; n + m];
    for (j, &v) in sol.nonbasic.iter().enumerate() {
        let u = sol.result.ftran(&sol.lp, v);
        for (i, &b) in sol.basis.iter().enumerate() {
            if u[i] != 0.0 {
                tableau[b][j] = -u[i];
            }
        }
        tableau[v][j] = 1.0;
    }
    Ok(Cone {
        num_cols: n,
        num_rows: m,
        apex: sol.x.clone(),
        apex_values: sol.values.clone(),
        nonbasic: sol.nonbasic.clone(),
        tableau,
    })
}

impl Cone {
    /// Dimension of the nonbasic space (number of rays).
    pub fn dim(&self) -> usize {
        self.nonbasic.len()
    }

    /// Structural direction of ray `j`.
    pub fn ray(&self, j: usize) -> Vec<f64> {
        (0..self.num_cols).map(|k| self.tableau[k][j]).collect()
    }

    /// Whether extended variable `v` defines a facet of the cone.
    pub fn is_defining(&self, v: usize) -> bool {
        self.nonbasic.binary_search(&v).is_ok()
    }

    /// Hyperplane of extended variable `v` (`var_v ≥ 0`) in nonbasic coordinates.
    pub fn var_hyperplane(&self, v: usize) -> NbHyperplane {
        NbHyperplane {
            id: v,
            g: self.tableau[v].clone(),
            rhs: -self.apex_values[v],
        }
    }

    /// Any structural hyperplane `aᵀx ≥ b` in nonbasic coordinates.
    pub fn project(&self, h: &Hyperplane) -> NbHyperplane {
        let g = (0..self.dim())
            .map(|j| (0..self.num_cols).map(|k| h.a[k] * self.tableau[k][j]).sum())
            .collect();
        let ax: f64 = h.a.iter().zip(&self.apex).map(|(a, x)| a * x).sum();
        NbHyperplane { id: h.id, g, rhs: h.b - ax }
    }

    /// Structural point `x̄ + Σ y_j r^j`.
    pub fn to_structural(&self, y: &[(usize, f64)]) -> Vec<f64> {
        (0..self.num_cols)
            .map(|k| self.apex[k] + y.iter().map(|&(j, v)| self.tableau[k][j] * v).sum::<f64>())
            .collect()
    }

    /// Structural direction `Σ d_j r^j`.
    pub fn direction_to_structural(&self, d: &[(usize, f64)]) -> Vec<f64> {
        (0..self.num_cols)
            .map(|k| d.iter().map(|&(j, v)| self.tableau[k][j] * v).sum())
            .collect()
    }

    /// Value of extended variable `v` at nonbasic point `y`.
    pub fn var_value(&self, v: usize, y: &[(usize, f64)]) -> f64 {
        self.apex_values[v] + y.iter().map(|&(j, t)| self.tableau[v][j] * t).sum::<f64>()
    }

    /// Rate of change of extended variable `v` along nonbasic direction `d`.
    pub fn var_rate(&self, v: usize, d: &[(usize, f64)]) -> f64 {
        d.iter().map(|&(j, t)| self.tableau[v][j] * t).sum()
    }

    /// Whether the nonbasic point satisfies every hyperplane of `P`.
    pub fn point_in_p(&self, y: &[(usize, f64)]) -> bool {
        (0..self.apex_values.len()).all(|v| self.var_value(v, y) >= -ZERO_TOL)
    }

    /// Whether direction `d` is a recession direction of `P`.
    pub fn direction_in_recession(&self, d: &[(usize, f64)]) -> bool {
        (0..self.apex_values.len()).all(|v| self.var_rate(v, d) >= -ZERO_TOL)
    }
}

/// Distance along ray `j` to a structural hyperplane, `+∞` if never reached.
pub fn ray_hyperplane_distance(cone: &Cone, j: usize, h: &Hyperplane) -> f64 {
    let r = cone.ray(j);
    let ar: f64 = h.a.iter().zip(&r).map(|(a, r)| a * r).sum();
    let ax: f64 = h.a.iter().zip(&cone.apex).map(|(a, x)| a * x).sum();
    if ar < -ZERO_TOL {
        ((h.b - ax) / ar).max(0.0)
    } else {
        f64::INFINITY
    }
}

/// Signed distance along the line through ray `j`: negative when the
/// hyperplane lies behind the apex, `+∞` when parallel.
pub fn signed_two_sided_distance(cone: &Cone, j: usize, h: &Hyperplane) -> f64 {
    let r = cone.ray(j);
    let ar: f64 = h.a.iter().zip(&r).map(|(a, r)| a * r).sum();
    let ax: f64 = h.a.iter().zip(&cone.apex).map(|(a, x)| a * x).sum();
    if ar.abs() > ZERO_TOL {
        (h.b - ax) / ar
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn covering() -> StandardForm {
        // x1 + x2 >= 1
        StandardForm::from_rational_rows("cover", vec![vec![q(1), q(1)]], vec![q(1)], vec![q(1), q(2)], vec![true, true])
    }

    #[test]
    fn two_variable_cone() {
        let sf = covering();
        let sol = solve_lp(&sf, &sf.c).unwrap();
        assert_eq!(sol.x, vec![1.0, 0.0]);
        assert_eq!(sol.nonbasic.len(), 2);
        let cone = corner_cone(&sol).unwrap();
        // nonbasic: x2 (id 1) and the row surplus (id 2)
        assert_eq!(cone.nonbasic, vec![1, 2]);
        assert_eq!(cone.ray(0), vec![-1.0, 1.0]);
        assert_eq!(cone.ray(1), vec![1.0, 0.0]);
        // hand tableau: reduced costs c2 - c1 = 1 and c1 = 1
        assert_eq!(reduced_costs(&sol), vec![1.0, 1.0]);
    }

    #[test]
    fn distances() {
        let sf = covering();
        let sol = solve_lp(&sf, &sf.c).unwrap();
        let cone = corner_cone(&sol).unwrap();
        // x1 >= 0 is hit along ray 0 after one unit
        let h = sf.hyperplane(0);
        assert_eq!(ray_hyperplane_distance(&cone, 0, &h), 1.0);
        assert_eq!(ray_hyperplane_distance(&cone, 1, &h), f64::INFINITY);
        // x1 <= 3 written as -x1 >= -3: ray 1 reaches it at t = 2, ray 0 at t = -2
        let cap = Hyperplane { id: 99, a: vec![-1.0, 0.0], b: -3.0 };
        assert_eq!(signed_two_sided_distance(&cone, 1, &cap), 2.0);
        assert_eq!(signed_two_sided_distance(&cone, 0, &cap), -2.0);
        assert_eq!(ray_hyperplane_distance(&cone, 0, &cap), f64::INFINITY);
        let nb = cone.project(&cap);
        assert_eq!(nb.distance(1), 2.0);
        assert_eq!(nb.signed_distance(0), -2.0);
    }

    #[test]
    fn zero_objective_gives_feasible_basis() {
        let sf = covering();
        let sol = solve_lp(&sf, &[0.0, 0.0]).unwrap();
        assert_eq!(sol.objective, 0.0);
        assert!(sol.x[0] + sol.x[1] >= 1.0 - 1e-9);
        assert!(reduced_costs(&sol).iter().all(|&d| d.abs() < 1e-12));
    }
}
