//! Dense two-phase tableau simplex over exact rationals with Bland's rule.

use num::{One, Signed, Zero};

use crate::rational::Q;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Row {
    pub coeffs: Vec<(usize, Q)>,
    pub sense: Sense,
    pub rhs: Q,
}

/// `maximize objective·x` subject to `rows`, `x ≥ 0`.
#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    pub vars: usize,
    pub objective: Vec<Q>,
    pub rows: Vec<Row>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<Q>,
    pub objective: Q,
    /// Structural variables in the final basis.
    pub basic: Vec<usize>,
    pub pivots: usize,
}

#[derive(Clone, Debug)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

struct Tableau {
    t: Vec<Vec<Q>>,
    rhs: Vec<Q>,
    basis: Vec<usize>,
    cols: usize,
    pivots: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize, obj: &mut [Q], obj_val: &mut Q) {
        self.pivots += 1;
        let p = self.t[r][c].clone();
        if !p.is_one() {
            for v in self.t[r].iter_mut() {
                if !v.is_zero() {
                    *v /= &p;
                }
            }
            self.rhs[r] /= &p;
        }
        let prow = self.t[r].clone();
        let prhs = self.rhs[r].clone();
        for i in 0..self.t.len() {
            if i == r || self.t[i][c].is_zero() {
                continue;
            }
            let f = self.t[i][c].clone();
            for (j, pv) in prow.iter().enumerate() {
                if !pv.is_zero() {
                    let d = &f * pv;
                    self.t[i][j] -= d;
                }
            }
            self.rhs[i] -= &f * &prhs;
        }
        if !obj[c].is_zero() {
            let f = obj[c].clone();
            for (j, pv) in prow.iter().enumerate() {
                if !pv.is_zero() {
                    obj[j] -= &f * pv;
                }
            }
            *obj_val += &f * &prhs;
        }
        self.basis[r] = c;
    }

    /// Runs Bland's rule on reduced costs `obj` (maximization) over columns `< allowed`.
    fn optimize(&mut self, obj: &mut [Q], obj_val: &mut Q, allowed: usize) -> bool {
        loop {
            let Some(c) = (0..allowed).find(|&j| obj[j].is_positive()) else {
                return true;
            };
            let mut best: Option<(usize, Q)> = None;
            for i in 0..self.t.len() {
                if self.t[i][c].is_positive() {
                    let ratio = &self.rhs[i] / &self.t[i][c];
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => {
                            ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                        }
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            match best {
                None => return false,
                Some((r, _)) => self.pivot(r, c, obj, obj_val),
            }
        }
    }
}

pub fn solve(lp: &LinearProgram) -> LpOutcome {
    let n = lp.vars;
    let m = lp.rows.len();
    let slack_count = lp.rows.iter().filter(|r| r.sense == Sense::Le).count();
    let mut art_rows = Vec::new();
    // normalized rows: flip sign so rhs >= 0
    let mut flips = vec![false; m];
    for (i, r) in lp.rows.iter().enumerate() {
        flips[i] = r.rhs.is_negative();
        if r.sense == Sense::Eq || flips[i] {
            art_rows.push(i);
        }
    }
    let cols = n + slack_count + art_rows.len();
    let art_start = n + slack_count;
    let mut t = vec![vec![Q::zero(); cols]; m];
    let mut rhs = vec![Q::zero(); m];
    let mut basis = vec![0; m];
    let mut slack = n;
    let mut art = art_start;
    for (i, r) in lp.rows.iter().enumerate() {
        let sign = if flips[i] { -Q::one() } else { Q::one() };
        for (j, a) in &r.coeffs {
            t[i][*j] += a * &sign;
        }
        rhs[i] = &r.rhs * &sign;
        if r.sense == Sense::Le {
            t[i][slack] = sign.clone();
            if !flips[i] {
                basis[i] = slack;
            }
            slack += 1;
        }
        if r.sense == Sense::Eq || flips[i] {
            t[i][art] = Q::one();
            basis[i] = art;
            art += 1;
        }
    }
    let mut tab = Tableau {
        t,
        rhs,
        basis,
        cols,
        pivots: 0,
    };

    if !art_rows.is_empty() {
        let mut obj = vec![Q::zero(); cols];
        let mut val = Q::zero();
        for i in 0..m {
            if tab.basis[i] >= art_start {
                for j in 0..art_start {
                    obj[j] += &tab.t[i][j];
                }
                val -= &tab.rhs[i];
            }
        }
        tab.optimize(&mut obj, &mut val, art_start);
        if val.is_negative() {
            return LpOutcome::Infeasible;
        }
        // drive zero-level artificials out of the basis; drop redundant rows
        let mut i = 0;
        while i < tab.t.len() {
            if tab.basis[i] >= art_start {
                match (0..art_start).find(|&j| !tab.t[i][j].is_zero()) {
                    Some(c) => {
                        let mut dummy = vec![Q::zero(); cols];
                        let mut dv = Q::zero();
                        tab.pivot(i, c, &mut dummy, &mut dv);
                    }
                    None => {
                        tab.t.remove(i);
                        tab.rhs.remove(i);
                        tab.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    let cost = |j: usize| -> Q {
        if j < n {
            lp.objective.get(j).cloned().unwrap_or_else(Q::zero)
        } else {
            Q::zero()
        }
    };
    let mut obj: Vec<Q> = (0..tab.cols).map(cost).collect();
    let mut val = Q::zero();
    for i in 0..tab.t.len() {
        let cb = cost(tab.basis[i]);
        if cb.is_zero() {
            continue;
        }
        for j in 0..tab.cols {
            if !tab.t[i][j].is_zero() {
                obj[j] -= &cb * &tab.t[i][j];
            }
        }
        val += &cb * &tab.rhs[i];
    }
    if !tab.optimize(&mut obj, &mut val, art_start) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Q::zero(); n];
    let mut basic = Vec::new();
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.rhs[i].clone();
            basic.push(b);
        }
    }
    basic.sort_unstable();
    LpOutcome::Optimal(LpSolution {
        x,
        objective: val,
        basic,
        pivots: tab.pivots,
    })
}
