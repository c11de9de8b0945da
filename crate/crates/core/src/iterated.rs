//! Iterated relaxation: fix integral coordinates, drop saturated-enough vertices, repeat.

use std::collections::{BTreeMap, BTreeSet};

use num::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{audit, Error, Result};
use crate::instance::{largest_at, EdgeId, EdgeSet, Instance, Solution, VertexId};
use crate::lp::{solve_extreme, FractionalPoint, LpMode, LpSubproblem};
use crate::matroid::Matroid;
use crate::rational::{self, Q};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Delete {
        edge: EdgeId,
        #[serde(with = "rational::as_string")]
        lp: Q,
    },
    Contract {
        edge: EdgeId,
        #[serde(with = "rational::as_string")]
        lp: Q,
    },
    DropVertex {
        vertex: VertexId,
        #[serde(with = "rational::as_string")]
        score: Q,
        #[serde(with = "rational::as_string")]
        lp: Q,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct RelaxedOutput {
    /// The matroid-independent set `M'`, possibly overloading vertices.
    pub m_prime: Solution,
    /// `L(v)`: the `min{k, deg}` largest-demand edges of `M'` at each vertex.
    pub large: BTreeMap<VertexId, Vec<EdgeId>>,
    #[serde(with = "rational::as_string")]
    pub lp: Q,
    #[serde(with = "rational::as_string")]
    pub profit: Q,
    pub trace: Vec<TraceEvent>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BaseOutput {
    pub base: Solution,
    #[serde(with = "rational::as_string")]
    pub lp: Q,
    #[serde(with = "rational::as_string")]
    pub cost: Q,
    pub trace: Vec<TraceEvent>,
}

struct LoopResult {
    chosen: EdgeSet,
    lp: Q,
    trace: Vec<TraceEvent>,
}

fn run(inst: &Instance, matroid: &Matroid, mode: LpMode) -> Result<LoopResult> {
    if !inst.is_validated() {
        return Err(Error::Precondition(
            "every edge must fit its endpoints on its own; run validate first".into(),
        ));
    }
    let k = Q::from_integer(inst.k().into());
    let mut sub = LpSubproblem::full(inst, matroid, mode);
    let mut cuts: Vec<EdgeSet> = Vec::new();
    let mut chosen = EdgeSet::new();
    let mut trace = Vec::new();
    let mut initial: Option<Q> = None;
    // LP value expected not to get worse than this after the last step
    let mut floor: Option<Q> = None;
    while !sub.edges.is_empty() {
        let x = solve_extreme(inst, &sub, &mut cuts)?;
        audit(x.basic, || "LP returned a non-basic point".into())?;
        let with_chosen = &x.objective + inst.profit(&chosen);
        if let Some(f) = &floor {
            let ok = match mode {
                LpMode::Maximize => with_chosen >= *f,
                LpMode::Base => with_chosen <= *f,
            };
            audit(ok, || {
                format!(
                    "LP accounting broke: {} after a step that guaranteed {}",
                    with_chosen,
                    f
                )
            })?;
        }
        initial.get_or_insert_with(|| x.objective.clone());
        floor = Some(with_chosen);
        step(inst, &mut sub, &x, &k, &mut chosen, &mut trace)?;
    }
    let lp = initial.unwrap_or_else(Q::zero);
    Ok(LoopResult { chosen, lp, trace })
}

fn step(
    inst: &Instance,
    sub: &mut LpSubproblem,
    x: &FractionalPoint,
    k: &Q,
    chosen: &mut EdgeSet,
    trace: &mut Vec<TraceEvent>,
) -> Result<()> {
    let lp = x.objective.clone();
    if let Some(e) = sub.edges.iter().copied().find(|e| x.get(*e).is_zero()) {
        sub.edges.remove(&e);
        sub.matroid.delete(e)?;
        log::debug!("delete edge {e}");
        trace.push(TraceEvent::Delete { edge: e, lp });
        return Ok(());
    }
    if let Some(e) = sub.edges.iter().copied().find(|e| x.get(*e).is_one()) {
        audit(sub.matroid.is_independent(&EdgeSet::from([e])), || {
            format!("edge {e} at value 1 is a loop of the residual matroid")
        })?;
        sub.edges.remove(&e);
        sub.matroid.contract(e)?;
        chosen.insert(e);
        for ep in &inst.e(e).endpoints {
            let r = sub.residual.get_mut(&ep.vertex).expect("vertex present");
            *r -= &ep.demand;
            if sub.active.contains(&ep.vertex) {
                audit(!r.is_negative(), || {
                    format!("residual capacity of active vertex {} went negative", ep.vertex)
                })?;
            }
        }
        log::debug!("contract edge {e}");
        trace.push(TraceEvent::Contract { edge: e, lp });
        return Ok(());
    }
    let mut best: Option<(VertexId, Q)> = None;
    for &v in &sub.active {
        let score = inst
            .incident(v)
            .iter()
            .filter(|e| sub.edges.contains(e))
            .fold(Q::zero(), |a, e| a + Q::one() - x.get(*e));
        if best.as_ref().is_none_or(|(_, s)| score < *s) {
            best = Some((v, score));
        }
    }
    let Some((v, score)) = best else {
        return Err(Error::Audit(
            "fractional extreme point with no capacity constraint left".into(),
        ));
    };
    audit(score <= *k, || {
        format!("dropped vertex {v} has slack score {score} above k = {k}")
    })?;
    sub.active.remove(&v);
    log::debug!("drop vertex {v} (score {score})");
    trace.push(TraceEvent::DropVertex { vertex: v, score, lp });
    Ok(())
}

pub fn large_sets(inst: &Instance, s: &EdgeSet) -> BTreeMap<VertexId, Vec<EdgeId>> {
    inst.vertex_ids()
        .map(|v| (v, largest_at(inst, v, s, inst.k())))
        .collect()
}

/// Checks that removing the `k` largest edges at each vertex leaves a load within capacity.
pub fn check_large_removal(inst: &Instance, s: &EdgeSet, large: &BTreeMap<VertexId, Vec<EdgeId>>) -> Result<()> {
    for v in inst.vertex_ids() {
        let l: BTreeSet<EdgeId> = large[&v].iter().copied().collect();
        let rest = inst
            .incident(v)
            .iter()
            .filter(|e| s.contains(e) && !l.contains(e));
        let load = inst.load(v, rest);
        audit(load <= *inst.capacity(v), || {
            format!("vertex {v}: load {load} outside its largest edges exceeds capacity")
        })?;
    }
    Ok(())
}

/// Runs the matching LP loop; the result is independent, worth at least the LP optimum, and
/// overloads each vertex only through its `k` largest edges.
pub fn iterated_relax(inst: &Instance, matroid: &Matroid) -> Result<RelaxedOutput> {
    let r = run(inst, matroid, LpMode::Maximize)?;
    let profit = inst.profit(&r.chosen);
    audit(profit >= r.lp, || {
        format!("profit {} below LP value {}", profit, r.lp)
    })?;
    audit(matroid.is_independent(&r.chosen), || "M' is not independent".into())?;
    let large = large_sets(inst, &r.chosen);
    check_large_removal(inst, &r.chosen, &large)?;
    Ok(RelaxedOutput {
        m_prime: Solution::new(r.chosen),
        large,
        lp: r.lp,
        profit,
        trace: r.trace,
    })
}

/// Runs the base LP loop; `Err(Infeasible)` when the base LP has no solution.
pub fn iterated_base(inst: &Instance, matroid: &Matroid) -> Result<BaseOutput> {
    let r = run(inst, matroid, LpMode::Base)?;
    let cost = inst.profit(&r.chosen);
    audit(cost <= r.lp, || format!("cost {} above LP value {}", cost, r.lp))?;
    audit(
        matroid.is_independent(&r.chosen) && r.chosen.len() == matroid.ground_rank(),
        || "result is not a base".into(),
    )?;
    let large = large_sets(inst, &r.chosen);
    check_large_removal(inst, &r.chosen, &large)?;
    let k = Q::from_integer(inst.k().into());
    for v in inst.vertex_ids() {
        let at_v: Vec<EdgeId> = inst
            .incident(v)
            .iter()
            .copied()
            .filter(|e| r.chosen.contains(e))
            .collect();
        let max_d = at_v
            .iter()
            .map(|e| inst.demand(v, *e))
            .max()
            .unwrap_or_else(Q::zero);
        let load = inst.load(v, &at_v);
        audit(load <= inst.capacity(v) + &k * max_d, || {
            format!("vertex {v}: base load {load} above b_v + k·max demand")
        })?;
    }
    Ok(BaseOutput {
        base: Solution::new(r.chosen),
        lp: r.lp,
        cost,
        trace: r.trace,
    })
}

/// Base whose cost is at most the LP optimum and whose loads stay within `(1 + k)·b_v`.
pub fn bicriteria_base(inst: &Instance, matroid: &Matroid) -> Result<BaseOutput> {
    let out = iterated_base(inst, matroid)?;
    let factor = Q::from_integer((inst.k() + 1).into());
    for v in inst.vertex_ids() {
        let load = inst.load(v, &out.base.edges);
        audit(load <= &factor * inst.capacity(v), || {
            format!("vertex {v}: base load {load} above (1 + k)·b_v")
        })?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matroid::MatroidSpec;
    use crate::rational::qi;

    #[test]
    fn single_vertex_relaxation_overloads_through_large_edges() {
        let i = Instance::from_json(
            r#"{"vertices":[{"id":0,"capacity":"10"}],
            "edges":[{"id":0,"endpoints":[{"v":0,"demand":"6"}],"profit":"6"},
                     {"id":1,"endpoints":[{"v":0,"demand":"6"}],"profit":"6"}],"k":2}"#,
        )
        .unwrap();
        let out = iterated_relax(&i, &Matroid::free(&i)).unwrap();
        assert_eq!(out.lp, qi(10));
        assert_eq!(out.m_prime.edges, EdgeSet::from([0, 1]));
        assert_eq!(out.profit, qi(12));
    }

    #[test]
    fn partition_matroid_limits_choice() {
        let i = Instance::from_json(
            r#"{"vertices":[{"id":0,"capacity":"10"}],
            "edges":[{"id":0,"endpoints":[{"v":0,"demand":"1"}],"profit":"3"},
                     {"id":1,"endpoints":[{"v":0,"demand":"1"}],"profit":"5"},
                     {"id":2,"endpoints":[{"v":0,"demand":"1"}],"profit":"2"}],"k":2}"#,
        )
        .unwrap();
        let m = Matroid::from_spec(
            &MatroidSpec::Partition {
                classes: vec![vec![0, 1], vec![2]],
                bounds: vec![1, 1],
            },
            &i,
        )
        .unwrap();
        let out = iterated_relax(&i, &m).unwrap();
        assert_eq!(out.m_prime.edges, EdgeSet::from([1, 2]));
    }

    #[test]
    fn base_on_uniform_matroid() {
        let i = Instance::from_json(
            r#"{"vertices":[{"id":0,"capacity":"2"}],
            "edges":[{"id":0,"endpoints":[{"v":0,"demand":"1"}],"profit":"3"},
                     {"id":1,"endpoints":[{"v":0,"demand":"1"}],"profit":"1"},
                     {"id":2,"endpoints":[{"v":0,"demand":"1"}],"profit":"2"}],"k":2}"#,
        )
        .unwrap();
        let m = Matroid::from_spec(&MatroidSpec::Uniform { rank: 2 }, &i).unwrap();
        let out = iterated_base(&i, &m).unwrap();
        assert_eq!(out.base.edges, EdgeSet::from([1, 2]));
        assert_eq!(out.cost, qi(3));
    }

    #[test]
    fn base_lp_infeasible() {
        let i = Instance::from_json(
            r#"{"vertices":[{"id":0,"capacity":"1"}],
            "edges":[{"id":0,"endpoints":[{"v":0,"demand":"1"}],"profit":"1"},
                     {"id":1,"endpoints":[{"v":0,"demand":"1"}],"profit":"1"}],"k":2}"#,
        )
        .unwrap();
        let m = Matroid::free(&i);
        assert!(matches!(iterated_base(&i, &m), Err(Error::Infeasible)));
    }
}
