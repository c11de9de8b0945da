//! Exact reference solvers for small instances.

use std::collections::BTreeMap;

use num::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{EdgeId, EdgeSet, Instance, Solution, VertexId};
use crate::lp::{self, LpMode, LpSubproblem};
use crate::matroid::Matroid;
use crate::ptas::relaxed::RelaxedSolution;
use crate::rational::{self, Q};

pub const DEFAULT_CAP: usize = 24;
/// Largest instance the plain subset enumeration accepts.
pub const ENUMERATION_CAP: usize = 20;
/// The LP bound is computed only at nodes with at least this many undecided edges.
const LP_BOUND_MIN_REMAINING: usize = 6;

#[derive(Clone, Debug, Serialize)]
pub struct ExactResult {
    #[serde(with = "rational::as_string")]
    pub opt: Q,
    pub witness: Solution,
}

struct Search<'a> {
    inst: &'a Instance,
    m: &'a Matroid,
    order: Vec<EdgeId>,
    suffix_profit: Vec<Q>,
    best: Q,
    best_set: EdgeSet,
    use_lp: bool,
}

impl Search<'_> {
    fn dfs(&mut self, i: usize, chosen: &mut EdgeSet, value: &Q, loads: &mut BTreeMap<VertexId, Q>) -> Result<()> {
        if *value > self.best {
            self.best = value.clone();
            self.best_set = chosen.clone();
        }
        if i == self.order.len() || value + &self.suffix_profit[i] <= self.best {
            return Ok(());
        }
        if self.use_lp && self.order.len() - i >= LP_BOUND_MIN_REMAINING {
            let bound = value + self.residual_lp(i, chosen, loads)?;
            if bound <= self.best {
                return Ok(());
            }
        }
        let e = self.order[i];
        let edge = self.inst.e(e);
        let fits = edge
            .endpoints
            .iter()
            .all(|ep| &loads[&ep.vertex] + &ep.demand <= *self.inst.capacity(ep.vertex));
        if fits {
            chosen.insert(e);
            if self.m.is_independent(chosen) {
                for ep in &edge.endpoints {
                    *loads.get_mut(&ep.vertex).unwrap() += &ep.demand;
                }
                self.dfs(i + 1, chosen, &(value + &edge.profit), loads)?;
                for ep in &edge.endpoints {
                    *loads.get_mut(&ep.vertex).unwrap() -= &ep.demand;
                }
            }
            chosen.remove(&e);
        }
        self.dfs(i + 1, chosen, value, loads)
    }

    fn residual_lp(&self, i: usize, chosen: &EdgeSet, loads: &BTreeMap<VertexId, Q>) -> Result<Q> {
        let mut m = self.m.clone();
        for &e in chosen {
            m.contract(e)?;
        }
        let rest: EdgeSet = self.order[i..].iter().copied().collect();
        let m = m.restricted(&rest);
        let sub = LpSubproblem {
            active: self.inst.vertex_ids().collect(),
            edges: m.ground().clone(),
            residual: self
                .inst
                .vertices()
                .iter()
                .map(|v| (v.id, &v.capacity - &loads[&v.id]))
                .collect(),
            matroid: m,
            mode: LpMode::Maximize,
        };
        Ok(lp::solve_extreme(self.inst, &sub, &mut Vec::new())?.objective)
    }
}

/// Maximum-profit feasible set by branch and bound with LP bounds.
pub fn exact_dm(inst: &Instance, m: &Matroid, cap: usize) -> Result<ExactResult> {
    search(inst, m, cap, true)
}

/// Same optimum, bounded only by the remaining profit.
pub fn exact_dm_simple(inst: &Instance, m: &Matroid, cap: usize) -> Result<ExactResult> {
    search(inst, m, cap, false)
}

fn search(inst: &Instance, m: &Matroid, cap: usize, use_lp: bool) -> Result<ExactResult> {
    if inst.edges().len() > cap {
        return Err(Error::CapExceeded(format!(
            "exact search over {} edges (cap {cap})",
            inst.edges().len()
        )));
    }
    let order: Vec<EdgeId> = inst.edge_ids().filter(|e| m.ground().contains(e)).collect();
    let mut suffix_profit = vec![Q::zero(); order.len() + 1];
    for i in (0..order.len()).rev() {
        suffix_profit[i] = &suffix_profit[i + 1] + &inst.e(order[i]).profit;
    }
    let mut s = Search {
        inst,
        m,
        order,
        suffix_profit,
        best: Q::zero(),
        best_set: EdgeSet::new(),
        use_lp,
    };
    let mut loads: BTreeMap<VertexId, Q> = inst.vertex_ids().map(|v| (v, Q::zero())).collect();
    s.dfs(0, &mut EdgeSet::new(), &Q::zero(), &mut loads)?;
    Ok(ExactResult {
        opt: s.best,
        witness: Solution::new(s.best_set),
    })
}

/// Plain enumeration of all `2^|E|` subsets.
pub fn enumerate_dm(inst: &Instance, m: &Matroid) -> Result<ExactResult> {
    let ids: Vec<EdgeId> = inst.edge_ids().collect();
    if ids.len() > ENUMERATION_CAP {
        return Err(Error::CapExceeded(format!(
            "enumeration over {} edges (cap {ENUMERATION_CAP})",
            ids.len()
        )));
    }
    let mut best = (Q::zero(), EdgeSet::new());
    for mask in 0u64..(1u64 << ids.len()) {
        let s: EdgeSet = (0..ids.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| ids[i])
            .collect();
        let p = inst.profit(&s);
        if p > best.0 && inst.is_feasible(&s, m) {
            best = (p, s);
        }
    }
    Ok(ExactResult {
        opt: best.0,
        witness: Solution::new(best.1),
    })
}

/// Best relaxed solution by enumerating every edge set and, per vertex, every candidate large
/// set; rounded demands are recomputed from their definition.
pub fn max_relaxed_brute(inst: &Instance, eps: &Q) -> Result<RelaxedSolution> {
    let ids: Vec<EdgeId> = inst.edge_ids().collect();
    if ids.len() > ENUMERATION_CAP {
        return Err(Error::CapExceeded(format!(
            "relaxed enumeration over {} edges (cap {ENUMERATION_CAP})",
            ids.len()
        )));
    }
    let limit = rational::ceil_usize(&(Q::one() / (eps * eps)));
    let m = Q::from_integer(ids.len().into());
    let fits = |v: VertexId, chosen: &[EdgeId], large: &[EdgeId]| -> bool {
        let heavy: Q = large.iter().map(|&e| inst.demand(v, e)).sum();
        if heavy > *inst.capacity(v) {
            return false;
        }
        let bbar = inst.capacity(v) - heavy;
        let grid = eps * &bbar / &m;
        let mut rounded = Q::zero();
        for e in chosen.iter().filter(|e| !large.contains(e)) {
            let d = inst.demand(v, *e);
            if d > eps * &bbar {
                return false;
            }
            if !grid.is_zero() {
                rounded += (d / &grid).floor() * &grid;
            }
        }
        rounded <= bbar
    };
    let mut best: Option<(Q, RelaxedSolution)> = None;
    for mask in 0u64..(1u64 << ids.len()) {
        let s: EdgeSet = (0..ids.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| ids[i])
            .collect();
        let p = inst.profit(&s);
        if best.as_ref().is_some_and(|b| b.0 >= p) {
            continue;
        }
        let mut large = BTreeMap::new();
        let ok = inst.vertex_ids().all(|v| {
            let chosen: Vec<EdgeId> = inst.incident(v).iter().copied().filter(|e| s.contains(e)).collect();
            let n = chosen.len();
            (0u64..(1u64 << n))
                .filter(|sub| sub.count_ones() as usize <= limit)
                .find_map(|sub| {
                    let l: Vec<EdgeId> = (0..n).filter(|i| sub >> i & 1 == 1).map(|i| chosen[i]).collect();
                    fits(v, &chosen, &l).then_some(l)
                })
                .map(|l| {
                    if !l.is_empty() {
                        large.insert(v, l.into_iter().collect());
                    }
                })
                .is_some()
        });
        if ok {
            best = Some((p, RelaxedSolution { edges: s, large, eps: eps.clone() }));
        }
    }
    Ok(best.expect("the empty set is always relaxed-feasible").1)
}

/// Cheapest capacity-feasible base, or `None` when no base fits.
pub fn exact_base(inst: &Instance, m: &Matroid, cap: usize) -> Result<Option<ExactResult>> {
    let ids: Vec<EdgeId> = m.ground().iter().copied().collect();
    if ids.len() > cap {
        return Err(Error::CapExceeded(format!(
            "base enumeration over {} elements (cap {cap})",
            ids.len()
        )));
    }
    let r = m.ground_rank();
    let mut best: Option<(Q, EdgeSet)> = None;
    let mut cur = Vec::new();
    fn rec(
        ids: &[EdgeId],
        start: usize,
        r: usize,
        cur: &mut Vec<EdgeId>,
        inst: &Instance,
        m: &Matroid,
        best: &mut Option<(Q, EdgeSet)>,
    ) {
        if cur.len() == r {
            let s: EdgeSet = cur.iter().copied().collect();
            if inst.capacity_feasible(&s) {
                let c = inst.profit(&s);
                if best.as_ref().is_none_or(|(b, _)| c < *b) {
                    *best = Some((c, s));
                }
            }
            return;
        }
        for i in start..ids.len() {
            if ids.len() - i < r - cur.len() {
                break;
            }
            cur.push(ids[i]);
            if m.is_independent(&cur.iter().copied().collect()) {
                rec(ids, i + 1, r, cur, inst, m, best);
            }
            cur.pop();
        }
    }
    rec(&ids, 0, r, &mut cur, inst, m, &mut best);
    Ok(best.map(|(opt, s)| ExactResult {
        opt,
        witness: Solution::new(s),
    }))
}

#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    #[serde(with = "rational::as_string")]
    pub lp: Q,
    #[serde(with = "rational::as_string")]
    pub opt: Q,
    /// `lp / opt`; absent when `opt` is zero.
    #[serde(serialize_with = "rational::opt_string::serialize")]
    pub gap: Option<Q>,
}

pub fn gap_report(inst: &Instance, m: &Matroid, cap: usize) -> Result<GapReport> {
    let lp = lp::lp_value(inst, m)?;
    let opt = exact_dm(inst, m, cap)?.opt;
    let gap = opt.is_positive().then(|| &lp / &opt);
    Ok(GapReport { lp, opt, gap })
}
