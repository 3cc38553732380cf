//! Two-phase tableau simplex over the rationals with Bland's rule.

use num_traits::{One, Signed, Zero};

use crate::Q;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Ge,
    Le,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<Q>, value: Q },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn value(&self) -> Option<&Q> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }
}

/// `min cᵀx` subject to linear rows; variables are nonnegative unless
/// marked free.
#[derive(Clone, Debug)]
pub struct RationalLp {
    pub n: usize,
    pub c: Vec<Q>,
    pub free: Vec<bool>,
    pub rows: Vec<(Vec<Q>, Cmp, Q)>,
}

impl RationalLp {
    pub fn new(c: Vec<Q>) -> Self {
        let n = c.len();
        RationalLp {
            n,
            c,
            free: vec![false; n],
            rows: Vec::new(),
        }
    }

    pub fn all_free(mut self) -> Self {
        self.free = vec![true; self.n];
        self
    }

    pub fn row(&mut self, a: Vec<Q>, cmp: Cmp, b: Q) -> &mut Self {
        debug_assert_eq!(a.len(), self.n);
        self.rows.push((a, cmp, b));
        self
    }

    pub fn minimize(&self) -> LpOutcome {
        // column layout: original (split when free), slacks, artificials
        let mut col_of = Vec::with_capacity(self.n);
        let mut ncols = 0;
        for &f in &self.free {
            col_of.push(ncols);
            ncols += if f { 2 } else { 1 };
        }
        let n_struct = ncols;
        let n_slack = self.rows.iter().filter(|r| r.1 != Cmp::Eq).count();
        let m = self.rows.len();
        let total = n_struct + n_slack + m;
        let mut t = vec![vec![Q::zero(); total + 1]; m];
        let mut basis = Vec::with_capacity(m);
        let mut s = n_struct;
        for (i, (a, cmp, b)) in self.rows.iter().enumerate() {
            for (j, v) in a.iter().enumerate() {
                t[i][col_of[j]] = v.clone();
                if self.free[j] {
                    t[i][col_of[j] + 1] = -v.clone();
                }
            }
            match cmp {
                Cmp::Ge => {
                    t[i][s] = -Q::one();
                    s += 1;
                }
                Cmp::Le => {
                    t[i][s] = Q::one();
                    s += 1;
                }
                Cmp::Eq => {}
            }
            t[i][total] = b.clone();
            if b.is_negative() {
                for v in t[i].iter_mut() {
                    *v = -v.clone();
                }
            }
            let art = n_struct + n_slack + i;
            t[i][art] = Q::one();
            basis.push(art);
        }
        let art_start = n_struct + n_slack;

        let mut phase1 = vec![Q::zero(); total];
        for c in phase1.iter_mut().skip(art_start) {
            *c = Q::one();
        }
        let allowed_all = vec![true; total];
        if run(&mut t, &mut basis, &phase1, &allowed_all).is_err() {
            return LpOutcome::Infeasible;
        }
        let infeas: Q = basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| b >= art_start)
            .fold(Q::zero(), |acc, (i, _)| acc + &t[i][total]);
        if infeas.is_positive() {
            return LpOutcome::Infeasible;
        }
        // drive zero-level artificials out, dropping redundant rows
        let mut i = 0;
        while i < t.len() {
            if basis[i] >= art_start {
                if let Some(j) = (0..art_start).find(|&j| !t[i][j].is_zero()) {
                    pivot(&mut t, &mut basis, i, j);
                    i += 1;
                } else {
                    t.remove(i);
                    basis.remove(i);
                }
            } else {
                i += 1;
            }
        }

        let mut phase2 = vec![Q::zero(); total];
        for j in 0..self.n {
            phase2[col_of[j]] = self.c[j].clone();
            if self.free[j] {
                phase2[col_of[j] + 1] = -self.c[j].clone();
            }
        }
        let allowed: Vec<bool> = (0..total).map(|j| j < art_start).collect();
        if run(&mut t, &mut basis, &phase2, &allowed).is_err() {
            return LpOutcome::Unbounded;
        }
        let mut col_val = vec![Q::zero(); total];
        for (i, &b) in basis.iter().enumerate() {
            col_val[b] = t[i][total].clone();
        }
        let x: Vec<Q> = (0..self.n)
            .map(|j| {
                let v = col_val[col_of[j]].clone();
                if self.free[j] {
                    v - &col_val[col_of[j] + 1]
                } else {
                    v
                }
            })
            .collect();
        let value = crate::dot(&self.c, &x);
        LpOutcome::Optimal { x, value }
    }
}

fn pivot(t: &mut [Vec<Q>], basis: &mut [usize], r: usize, c: usize) {
    let inv = Q::one() / &t[r][c];
    for v in t[r].iter_mut() {
        *v *= &inv;
    }
    for i in 0..t.len() {
        if i != r && !t[i][c].is_zero() {
            let f = t[i][c].clone();
            for j in 0..t[i].len() {
                if !t[r][j].is_zero() {
                    let d = &f * &t[r][j];
                    t[i][j] -= d;
                }
            }
        }
    }
    basis[r] = c;
}

struct Unbounded;

fn run(t: &mut [Vec<Q>], basis: &mut [usize], cost: &[Q], allowed: &[bool]) -> Result<(), Unbounded> {
    let total = cost.len();
    loop {
        let mut entering = None;
        for j in 0..total {
            if !allowed[j] || basis.contains(&j) {
                continue;
            }
            let mut d = cost[j].clone();
            for (i, &b) in basis.iter().enumerate() {
                if !t[i][j].is_zero() && !cost[b].is_zero() {
                    d -= &cost[b] * &t[i][j];
                }
            }
            if d.is_negative() {
                entering = Some(j);
                break;
            }
        }
        let Some(j) = entering else { return Ok(()) };
        let mut best: Option<(usize, Q)> = None;
        for i in 0..t.len() {
            if t[i][j].is_positive() {
                let ratio = &t[i][total] / &t[i][j];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && basis[i] < basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
        }
        let Some((r, _)) = best else { return Err(Unbounded) };
        pivot(t, basis, r, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{q, qf};

    #[test]
    fn small_minimum() {
        // min -x - y, x + 2y <= 4, 3x + y <= 6
        let mut lp = RationalLp::new(vec![q(-1), q(-1)]);
        lp.row(vec![q(1), q(2)], Cmp::Le, q(4)).row(vec![q(3), q(1)], Cmp::Le, q(6));
        match lp.minimize() {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(x, vec![qf(8, 5), qf(6, 5)]);
                assert_eq!(value, qf(-14, 5));
            }
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = RationalLp::new(vec![q(1)]);
        lp.row(vec![q(1)], Cmp::Ge, q(2)).row(vec![q(1)], Cmp::Le, q(1));
        assert_eq!(lp.minimize(), LpOutcome::Infeasible);
        let mut lp = RationalLp::new(vec![q(-1), q(0)]);
        lp.row(vec![q(1), q(-1)], Cmp::Le, q(1));
        assert_eq!(lp.minimize(), LpOutcome::Unbounded);
    }

    #[test]
    fn free_variables_and_equalities() {
        // min x subject to x + y = -3, y <= 1, both free
        let mut lp = RationalLp::new(vec![q(1), q(0)]).all_free();
        lp.row(vec![q(1), q(1)], Cmp::Eq, q(-3)).row(vec![q(0), q(1)], Cmp::Le, q(1));
        assert_eq!(lp.minimize().value(), Some(&q(-4)));
    }

    #[test]
    fn redundant_equality_rows() {
        let mut lp = RationalLp::new(vec![q(1), q(1)]);
        lp.row(vec![q(1), q(1)], Cmp::Eq, q(2)).row(vec![q(2), q(2)], Cmp::Eq, q(4));
        assert_eq!(lp.minimize().value(), Some(&q(2)));
    }
}
