//! Dense revised simplex.
//!
//! Solves `min cᵀx` over rows `aᵢᵀx ≥ bᵢ` (or `= bᵢ`) and `x ≥ 0`. Each row
//! carries a surplus variable `sᵢ = aᵢᵀx − bᵢ`, so the extended variable space
//! has `n + m` entries: structural columns first, surplus columns after. The
//! basis inverse is kept as a dense matrix, updated by rank-one eta steps and
//! refactorized periodically. Pricing is Dantzig's rule with lowest-index
//! ties; after a run of degenerate pivots the solver switches to Bland's rule
//! until progress resumes.

use std::time::Instant;

const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 100;
const DEGENERATE_RUN: usize = 50;

/// A linear program in column-sparse form.
#[derive(Clone, Debug, Default)]
pub struct LpProblem {
    pub num_rows: usize,
    /// Sparse structural columns as `(row, value)` pairs.
    pub cols: Vec<Vec<(usize, f64)>>,
    pub rhs: Vec<f64>,
    /// `true` marks an equality row; its surplus is fixed at zero.
    pub equality: Vec<bool>,
    pub cost: Vec<f64>,
}

impl LpProblem {
    /// Builds a problem from dense rows, dropping exact zeros.
    pub fn from_dense_rows(rows: &[Vec<f64>], rhs: &[f64], equality: &[bool], cost: &[f64]) -> Self {
        let n = cost.len();
        let mut cols = vec![Vec::new(); n];
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "row {i} has the wrong width");
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    cols[j].push((i, v));
                }
            }
        }
        LpProblem {
            num_rows: rows.len(),
            cols,
            rhs: rhs.to_vec(),
            equality: equality.to_vec(),
            cost: cost.to_vec(),
        }
    }

    pub fn num_cols(&self) -> usize {
        self.cols.len()
    }

    /// Number of extended variables (structural plus surplus).
    pub fn num_ext(&self) -> usize {
        self.cols.len() + self.num_rows
    }

    /// Sparse column of extended variable `v` (surplus columns are `−eᵢ`).
    pub fn ext_column(&self, v: usize) -> Vec<(usize, f64)> {
        let n = self.cols.len();
        if v < n {
            self.cols[v].clone()
        } else {
            vec![(v - n, -1.0)]
        }
    }
}

/// Termination status of a solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    TimeLimit,
    /// The basis matrix became numerically singular and could not be repaired.
    Singular,
}

/// Solver limits.
#[derive(Clone, Debug, Default)]
pub struct SimplexOptions {
    pub max_iterations: Option<usize>,
    pub deadline: Option<Instant>,
    /// Stop after establishing feasibility (status `Optimal` then means feasible).
    pub phase_one_only: bool,
}

/// Outcome of a solve, including the final basis factor.
#[derive(Clone, Debug)]
pub struct LpResult {
    pub status: LpStatus,
    /// Structural values.
    pub x: Vec<f64>,
    /// Surplus values `Ax − b`.
    pub surplus: Vec<f64>,
    pub objective: f64,
    /// Extended variable basic in each row. Artificial variables that could
    /// not be pivoted out of redundant rows are reported as `usize::MAX`.
    pub basis: Vec<usize>,
    /// Row duals `π` with `πᵀB = c_B`.
    pub duals: Vec<f64>,
    /// Reduced cost of every extended variable.
    pub reduced_costs: Vec<f64>,
    /// Structural part of an unbounded direction, when `status == Unbounded`.
    pub ray: Option<Vec<f64>>,
    pub iterations: usize,
    /// Dense row-major inverse of the final basis matrix.
    pub binv: Vec<f64>,
    /// Smallest pivot met while factorizing the final basis.
    pub min_factor_pivot: f64,
}

impl LpResult {
    /// `B⁻¹ a_v` for extended variable `v`.
    pub fn ftran(&self, p: &LpProblem, v: usize) -> Vec<f64> {
        let m = p.num_rows;
        let col = p.ext_column(v);
        let mut u = vec![0.0; m];
        for (i, ui) in u.iter_mut().enumerate() {
            let row = &self.binv[i * m..(i + 1) * m];
            *ui = col.iter().map(|&(k, a)| row[k] * a).sum();
        }
        u
    }
}

/// Solves `p`. When the all-surplus basis is dual feasible (nonnegative
/// costs, no equality rows) the dual simplex runs from it; otherwise, or if
/// the dual run stalls, the two-phase primal simplex starts from a
/// slack/artificial basis.
pub fn solve(p: &LpProblem, opts: &SimplexOptions) -> LpResult {
    let dual_ok = !opts.phase_one_only
        && p.equality.iter().all(|e| !e)
        && p.cost.iter().all(|&c| c >= 0.0);
    if dual_ok {
        let mut e = Engine::new_surplus(p, opts);
        if let Some(r) = e.run_dual() {
            return r;
        }
    }
    let mut e = Engine::new(p, opts);
    e.run()
}

struct Engine<'a> {
    p: &'a LpProblem,
    opts: &'a SimplexOptions,
    n: usize,
    m: usize,
    art_sign: Vec<f64>,
    basis: Vec<usize>,
    basic_row: Vec<Option<usize>>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    cost: Vec<f64>,
    allowed: Vec<bool>,
    since_refactor: usize,
    iterations: usize,
    bland: bool,
    degenerate: usize,
    min_pivot: f64,
}

enum Step {
    Optimal,
    Unbounded(usize, Vec<f64>),
    Limit(LpStatus),
}

impl<'a> Engine<'a> {
    fn new(p: &'a LpProblem, opts: &'a SimplexOptions) -> Self {
        let n = p.num_cols();
        let m = p.num_rows;
        let total = n + 2 * m;
        let mut e = Engine {
            p,
            opts,
            n,
            m,
            art_sign: vec![1.0; m],
            basis: vec![0; m],
            basic_row: vec![None; total],
            binv: vec![0.0; m * m],
            xb: vec![0.0; m],
            cost: vec![0.0; total],
            allowed: vec![false; total],
            since_refactor: 0,
            iterations: 0,
            bland: false,
            degenerate: 0,
            min_pivot: f64::INFINITY,
        };
        for j in 0..n {
            e.allowed[j] = true;
        }
        for i in 0..m {
            e.allowed[n + i] = !p.equality[i];
            let b = p.rhs[i];
            if p.equality[i] || b > 0.0 {
                let s = if b >= 0.0 { 1.0 } else { -1.0 };
                e.art_sign[i] = s;
                e.set_basic(i, n + m + i);
                e.binv[i * m + i] = s;
                e.xb[i] = b.abs();
            } else {
                e.set_basic(i, n + i);
                e.binv[i * m + i] = -1.0;
                e.xb[i] = -b;
            }
        }
        e
    }

    /// Every surplus basic: `B = −I`, dual feasible when `c ≥ 0`.
    fn new_surplus(p: &'a LpProblem, opts: &'a SimplexOptions) -> Self {
        let mut e = Engine::new(p, opts);
        let (n, m) = (e.n, e.m);
        e.basic_row.iter_mut().for_each(|r| *r = None);
        e.binv.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..m {
            e.allowed[n + m + i] = false;
            e.set_basic(i, n + i);
            e.binv[i * m + i] = -1.0;
            e.xb[i] = -p.rhs[i];
        }
        for j in 0..n {
            e.cost[j] = p.cost[j];
        }
        e
    }

    /// Dual simplex: most negative basic value leaves (lowest variable on
    /// ties), minimum dual ratio enters (lowest variable on ties). Returns
    /// `None` when the run stalls so the caller can fall back to the primal.
    fn run_dual(&mut self) -> Option<LpResult> {
        let (n, m) = (self.n, self.m);
        let max_iter = self.opts.max_iterations.unwrap_or(20 * (n + m) + 1000);
        loop {
            if self.iterations >= max_iter {
                return None;
            }
            if self.iterations % 32 == 0 {
                if let Some(d) = self.opts.deadline {
                    if Instant::now() >= d {
                        return Some(self.finish(LpStatus::TimeLimit, None));
                    }
                }
            }
            if self.since_refactor >= REFACTOR_EVERY && !self.refactor() {
                return None;
            }
            let mut leave: Option<usize> = None;
            for i in 0..m {
                if self.xb[i] >= -FEAS_TOL {
                    continue;
                }
                leave = match leave {
                    None => Some(i),
                    Some(r) => {
                        let (a, b) = (self.xb[i], self.xb[r]);
                        if a < b - 1e-12 || (a <= b + 1e-12 && self.basis[i] < self.basis[r]) {
                            Some(i)
                        } else {
                            Some(r)
                        }
                    }
                };
            }
            let Some(r) = leave else {
                if !self.refactor() {
                    return None;
                }
                if self.xb.iter().any(|&v| v < -FEAS_TOL) {
                    continue;
                }
                return Some(self.finish(LpStatus::Optimal, None));
            };
            let row: Vec<f64> = self.binv[r * m..(r + 1) * m].to_vec();
            let pi = self.duals();
            let mut enter: Option<(usize, f64)> = None;
            for v in 0..n + m {
                if !self.allowed[v] || self.basic_row[v].is_some() {
                    continue;
                }
                let a = self.col_dot(v, &row);
                if a >= -PIVOT_TOL {
                    continue;
                }
                let d = (self.cost[v] - self.col_dot(v, &pi)).max(0.0);
                let ratio = d / -a;
                match enter {
                    Some((_, best)) if ratio >= best - 1e-12 * (1.0 + best) => {}
                    _ => enter = Some((v, ratio)),
                }
            }
            let Some((q, _)) = enter else {
                return Some(self.finish(LpStatus::Infeasible, None));
            };
            let u = self.ftran(q);
            if u[r].abs() < PIVOT_TOL {
                return None;
            }
            self.pivot(r, q, &u);
        }
    }

    fn set_basic(&mut self, row: usize, v: usize) {
        self.basis[row] = v;
        self.basic_row[v] = Some(row);
    }

    fn is_artificial(&self, v: usize) -> bool {
        v >= self.n + self.m
    }

    fn column(&self, v: usize) -> Vec<(usize, f64)> {
        let (n, m) = (self.n, self.m);
        if v < n {
            self.p.cols[v].clone()
        } else if v < n + m {
            vec![(v - n, -1.0)]
        } else {
            vec![(v - n - m, self.art_sign[v - n - m])]
        }
    }

    fn col_dot(&self, v: usize, y: &[f64]) -> f64 {
        let (n, m) = (self.n, self.m);
        if v < n {
            self.p.cols[v].iter().map(|&(i, a)| a * y[i]).sum()
        } else if v < n + m {
            -y[v - n]
        } else {
            self.art_sign[v - n - m] * y[v - n - m]
        }
    }

    fn ftran(&self, v: usize) -> Vec<f64> {
        let m = self.m;
        let col = self.column(v);
        (0..m)
            .map(|i| {
                let row = &self.binv[i * m..(i + 1) * m];
                col.iter().map(|&(k, a)| row[k] * a).sum()
            })
            .collect()
    }

    fn duals(&self) -> Vec<f64> {
        let m = self.m;
        let mut pi = vec![0.0; m];
        for i in 0..m {
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.binv[i * m..(i + 1) * m];
                for (k, pk) in pi.iter_mut().enumerate() {
                    *pk += cb * row[k];
                }
            }
        }
        pi
    }

    /// Rebuilds `B⁻¹` by Gauss-Jordan elimination with partial pivoting.
    fn refactor(&mut self) -> bool {
        let m = self.m;
        let w = 2 * m;
        let mut a = vec![0.0; m * w];
        for (c, &v) in self.basis.iter().enumerate() {
            for (r, val) in self.column(v) {
                a[r * w + c] = val;
            }
        }
        for i in 0..m {
            a[i * w + m + i] = 1.0;
        }
        let mut min_pivot = f64::INFINITY;
        for c in 0..m {
            let mut best = c;
            for r in c + 1..m {
                if a[r * w + c].abs() > a[best * w + c].abs() {
                    best = r;
                }
            }
            let piv = a[best * w + c];
            min_pivot = min_pivot.min(piv.abs());
            if piv.abs() < 1e-11 {
                self.min_pivot = min_pivot;
                return false;
            }
            if best != c {
                for k in 0..w {
                    a.swap(c * w + k, best * w + k);
                }
            }
            let inv = 1.0 / piv;
            for k in 0..w {
                a[c * w + k] *= inv;
            }
            let pivot_row: Vec<f64> = a[c * w..(c + 1) * w].to_vec();
            for r in 0..m {
                if r != c {
                    let f = a[r * w + c];
                    if f != 0.0 {
                        for k in c..w {
                            a[r * w + k] -= f * pivot_row[k];
                        }
                    }
                }
            }
        }
        for i in 0..m {
            self.binv[i * m..(i + 1) * m].copy_from_slice(&a[i * w + m..(i + 1) * w]);
        }
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            self.xb[i] = row.iter().zip(&self.p.rhs).map(|(a, b)| a * b).sum();
        }
        self.min_pivot = min_pivot;
        self.since_refactor = 0;
        true
    }

    fn pivot(&mut self, r: usize, q: usize, u: &[f64]) {
        let m = self.m;
        let theta = self.xb[r] / u[r];
        for i in 0..m {
            if i != r {
                self.xb[i] -= theta * u[i];
            }
        }
        self.xb[r] = theta;
        let inv = 1.0 / u[r];
        for k in 0..m {
            self.binv[r * m + k] *= inv;
        }
        let pivot_row: Vec<f64> = self.binv[r * m..(r + 1) * m].to_vec();
        for i in 0..m {
            if i != r && u[i] != 0.0 {
                let f = u[i];
                let row = &mut self.binv[i * m..(i + 1) * m];
                for k in 0..m {
                    row[k] -= f * pivot_row[k];
                }
            }
        }
        let old = self.basis[r];
        self.basic_row[old] = None;
        self.set_basic(r, q);
        if self.is_artificial(old) {
            self.allowed[old] = false;
        }
        self.since_refactor += 1;
        self.iterations += 1;
    }

    fn iterate(&mut self) -> Step {
        let total = self.n + 2 * self.m;
        let max_iter = self
            .opts
            .max_iterations
            .unwrap_or(50 * (self.n + self.m) + 10_000);
        loop {
            if self.iterations >= max_iter {
                return Step::Limit(LpStatus::IterationLimit);
            }
            if self.iterations % 32 == 0 {
                if let Some(d) = self.opts.deadline {
                    if Instant::now() >= d {
                        return Step::Limit(LpStatus::TimeLimit);
                    }
                }
            }
            if self.since_refactor >= REFACTOR_EVERY && !self.refactor() {
                return Step::Limit(LpStatus::Singular);
            }
            let pi = self.duals();
            let mut entering = None;
            let mut best = -OPT_TOL;
            for v in 0..total {
                if !self.allowed[v] || self.basic_row[v].is_some() {
                    continue;
                }
                let d = self.cost[v] - self.col_dot(v, &pi);
                if self.bland {
                    if d < -OPT_TOL {
                        entering = Some(v);
                        break;
                    }
                } else if d < best {
                    best = d;
                    entering = Some(v);
                }
            }
            let Some(q) = entering else {
                return Step::Optimal;
            };
            let u = self.ftran(q);
            let leaving = if self.bland {
                self.ratio_bland(&u)
            } else {
                self.ratio_harris(&u)
            };
            let Some(r) = leaving else {
                return Step::Unbounded(q, u);
            };
            let step = self.xb[r].max(0.0) / u[r];
            if self.xb[r] < 0.0 {
                self.xb[r] = 0.0;
            }
            self.pivot(r, q, &u);
            if step <= 1e-12 {
                self.degenerate += 1;
                if self.degenerate >= DEGENERATE_RUN {
                    self.bland = true;
                }
            } else {
                self.degenerate = 0;
                self.bland = false;
            }
        }
    }

    fn ratio_harris(&self, u: &[f64]) -> Option<usize> {
        let mut bound = f64::INFINITY;
        for (i, &ui) in u.iter().enumerate() {
            if ui > PIVOT_TOL {
                bound = bound.min((self.xb[i].max(0.0) + FEAS_TOL) / ui);
            }
        }
        if !bound.is_finite() {
            return None;
        }
        let mut pick: Option<usize> = None;
        for (i, &ui) in u.iter().enumerate() {
            if ui > PIVOT_TOL && self.xb[i].max(0.0) / ui <= bound {
                match pick {
                    Some(j) if u[j] >= ui => {}
                    _ => pick = Some(i),
                }
            }
        }
        pick
    }

    fn ratio_bland(&self, u: &[f64]) -> Option<usize> {
        let mut best = f64::INFINITY;
        for (i, &ui) in u.iter().enumerate() {
            if ui > PIVOT_TOL {
                best = best.min(self.xb[i].max(0.0) / ui);
            }
        }
        if !best.is_finite() {
            return None;
        }
        let tol = 1e-12 * (1.0 + best.abs());
        let mut pick: Option<usize> = None;
        for (i, &ui) in u.iter().enumerate() {
            if ui > PIVOT_TOL && self.xb[i].max(0.0) / ui <= best + tol {
                match pick {
                    Some(j) if self.basis[j] <= self.basis[i] => {}
                    _ => pick = Some(i),
                }
            }
        }
        pick
    }

    fn drive_out_artificials(&mut self) {
        let m = self.m;
        let ext = self.n + self.m;
        for r in 0..m {
            if !self.is_artificial(self.basis[r]) {
                continue;
            }
            let row: Vec<f64> = self.binv[r * m..(r + 1) * m].to_vec();
            let mut pick: Option<(usize, f64)> = None;
            for v in 0..ext {
                if !self.allowed[v] || self.basic_row[v].is_some() {
                    continue;
                }
                let val = self.col_dot(v, &row);
                if val.abs() > 1e-7 && pick.map_or(true, |(_, b)| val.abs() > b.abs()) {
                    pick = Some((v, val));
                }
            }
            if let Some((v, _)) = pick {
                let u = self.ftran(v);
                self.pivot(r, v, &u);
            }
        }
    }

    fn finish(&mut self, status: LpStatus, ray: Option<Vec<f64>>) -> LpResult {
        let (n, m) = (self.n, self.m);
        if status == LpStatus::Optimal && self.since_refactor > 0 && !self.refactor() {
            return self.finish(LpStatus::Singular, None);
        }
        let mut x = vec![0.0; n];
        let mut surplus = vec![0.0; m];
        for (i, &v) in self.basis.iter().enumerate() {
            let val = self.xb[i];
            if v < n {
                x[v] = val;
            } else if v < n + m {
                surplus[v - n] = val;
            }
        }
        let pi = self.duals();
        let reduced_costs = (0..n + m)
            .map(|v| self.cost[v] - self.col_dot(v, &pi))
            .collect();
        let objective = (0..n).map(|j| self.p.cost[j] * x[j]).sum();
        let basis = self
            .basis
            .iter()
            .map(|&v| if v >= n + m { usize::MAX } else { v })
            .collect();
        LpResult {
            status,
            x,
            surplus,
            objective,
            basis,
            duals: pi,
            reduced_costs,
            ray,
            iterations: self.iterations,
            binv: std::mem::take(&mut self.binv),
            min_factor_pivot: self.min_pivot,
        }
    }

    fn run(&mut self) -> LpResult {
        let (n, m) = (self.n, self.m);
        let has_artificial = self.basis.iter().any(|&v| self.is_artificial(v));
        if has_artificial {
            for i in 0..m {
                self.cost[n + m + i] = 1.0;
            }
            match self.iterate() {
                Step::Optimal => {}
                Step::Unbounded(..) => return self.finish(LpStatus::Singular, None),
                Step::Limit(s) => return self.finish(s, None),
            }
            if !self.refactor() {
                return self.finish(LpStatus::Singular, None);
            }
            let infeas: f64 = (0..m)
                .filter(|&i| self.is_artificial(self.basis[i]))
                .map(|i| self.xb[i].max(0.0))
                .sum();
            let scale = self.p.rhs.iter().fold(1.0f64, |a, b| a.max(b.abs()));
            if infeas > 1e-7 * scale {
                return self.finish(LpStatus::Infeasible, None);
            }
            self.drive_out_artificials();
            if !self.refactor() {
                return self.finish(LpStatus::Singular, None);
            }
        }
        for v in 0..n + 2 * m {
            self.cost[v] = if v < n { self.p.cost[v] } else { 0.0 };
            if self.is_artificial(v) {
                self.allowed[v] = false;
            }
        }
        if self.opts.phase_one_only {
            return self.finish(LpStatus::Optimal, None);
        }
        self.bland = false;
        self.degenerate = 0;
        match self.iterate() {
            Step::Optimal => self.finish(LpStatus::Optimal, None),
            Step::Unbounded(q, u) => {
                let mut ray = vec![0.0; n];
                if q < n {
                    ray[q] = 1.0;
                }
                for (i, &v) in self.basis.iter().enumerate() {
                    if v < n {
                        ray[v] = -u[i];
                    }
                }
                self.finish(LpStatus::Unbounded, Some(ray))
            }
            Step::Limit(s) => self.finish(s, None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(rows: &[Vec<f64>], rhs: &[f64], cost: &[f64]) -> LpProblem {
        LpProblem::from_dense_rows(rows, rhs, &vec![false; rows.len()], cost)
    }

    #[test]
    fn small_covering_lp() {
        // min x + 2y, x + y >= 1, x, y >= 0
        let p = dense(&[vec![1.0, 1.0]], &[1.0], &[1.0, 2.0]);
        let r = solve(&p, &SimplexOptions::default());
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.objective - 1.0).abs() < 1e-12);
        assert!((r.x[0] - 1.0).abs() < 1e-12);
        // reduced cost of y is 1, of the surplus is 1
        assert!((r.reduced_costs[1] - 1.0).abs() < 1e-12);
        assert!((r.reduced_costs[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let p = dense(&[vec![1.0], vec![-1.0]], &[2.0, -1.0], &[1.0]);
        assert_eq!(solve(&p, &SimplexOptions::default()).status, LpStatus::Infeasible);
        let p = dense(&[vec![1.0, -1.0]], &[0.0], &[-1.0, 0.0]);
        let r = solve(&p, &SimplexOptions::default());
        assert_eq!(r.status, LpStatus::Unbounded);
        let ray = r.ray.unwrap();
        assert!(ray[0] > 0.0 && ray[0] - ray[1] >= -1e-12);
    }

    #[test]
    fn equality_rows_and_zero_objective() {
        // x + y = 3, x - y >= 1
        let p = LpProblem::from_dense_rows(
            &[vec![1.0, 1.0], vec![1.0, -1.0]],
            &[3.0, 1.0],
            &[true, false],
            &[0.0, 0.0],
        );
        let r = solve(&p, &SimplexOptions::default());
        assert_eq!(r.status, LpStatus::Optimal);
        assert_eq!(r.objective, 0.0);
        assert!((r.x[0] + r.x[1] - 3.0).abs() < 1e-9);
        assert!(r.x[0] - r.x[1] >= 1.0 - 1e-9);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Beale's cycling example rewritten as >= rows
        let rows = vec![
            vec![-0.25, 8.0, 1.0, -9.0],
            vec![-0.5, 12.0, 0.5, -3.0],
            vec![0.0, 0.0, -1.0, 0.0],
        ];
        let p = dense(&rows, &[0.0, 0.0, -1.0], &[-0.75, 20.0, -0.5, 6.0]);
        let r = solve(&p, &SimplexOptions::default());
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.objective + 1.25).abs() < 1e-9);
    }
}
