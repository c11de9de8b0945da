//! The matching and base linear programs, solved by cutting planes over the rank constraints.

pub mod simplex;

use std::collections::{BTreeMap, BTreeSet};

use num::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{EdgeId, EdgeSet, Instance, VertexId};
use crate::matroid::{Matroid, Separation};
use crate::rational::{self, Q};
use simplex::{LinearProgram, LpOutcome, Row, Sense};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LpMode {
    /// Maximize profit inside the capacity and independence constraints.
    Maximize,
    /// Minimize cost over points whose support has full rank.
    Base,
}

/// One residual linear program of the iterated loop.
#[derive(Clone, Debug)]
pub struct LpSubproblem {
    pub active: BTreeSet<VertexId>,
    pub edges: EdgeSet,
    pub matroid: Matroid,
    pub residual: BTreeMap<VertexId, Q>,
    pub mode: LpMode,
}

impl LpSubproblem {
    /// Full problem: all vertices active, all non-loop edges free, original capacities.
    pub fn full(inst: &Instance, matroid: &Matroid, mode: LpMode) -> Self {
        LpSubproblem {
            active: inst.vertex_ids().collect(),
            edges: inst
                .edge_ids()
                .filter(|e| matroid.ground().contains(e))
                .collect(),
            matroid: matroid.clone(),
            residual: inst
                .vertices()
                .iter()
                .map(|v| (v.id, v.capacity.clone()))
                .collect(),
            mode,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Constraint {
    Capacity { vertex: VertexId },
    Rank { set: Vec<EdgeId> },
    BaseRank,
}

#[derive(Clone, Debug, Serialize)]
pub struct FractionalPoint {
    #[serde(serialize_with = "ser_values")]
    pub values: BTreeMap<EdgeId, Q>,
    #[serde(with = "rational::as_string")]
    pub objective: Q,
    /// The point is a basic solution of the final cutting-plane LP.
    pub basic: bool,
    pub tight: Vec<Constraint>,
}

fn ser_values<S: serde::Serializer>(v: &BTreeMap<EdgeId, Q>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut m = s.serialize_map(Some(v.len()))?;
    for (k, x) in v {
        m.serialize_entry(k, &rational::fmt_q(x))?;
    }
    m.end()
}

impl FractionalPoint {
    pub fn get(&self, e: EdgeId) -> Q {
        self.values.get(&e).cloned().unwrap_or_else(Q::zero)
    }
}

/// Solves the subproblem to an extreme optimum, adding violated rank constraints until the
/// separation oracle certifies the point. `cuts` carries rank sets across calls.
pub fn solve_extreme(
    inst: &Instance,
    sub: &LpSubproblem,
    cuts: &mut Vec<EdgeSet>,
) -> Result<FractionalPoint> {
    let vars: Vec<EdgeId> = sub.edges.iter().copied().collect();
    let col: BTreeMap<EdgeId, usize> = vars.iter().enumerate().map(|(i, e)| (*e, i)).collect();
    cuts.retain(|c| c.intersection(&sub.edges).count() >= 2);
    for c in cuts.iter_mut() {
        *c = c.intersection(&sub.edges).copied().collect();
    }
    dedup(cuts);
    loop {
        let mut lp = LinearProgram {
            vars: vars.len(),
            objective: vars
                .iter()
                .map(|e| match sub.mode {
                    LpMode::Maximize => inst.e(*e).profit.clone(),
                    LpMode::Base => -inst.e(*e).profit.clone(),
                })
                .collect(),
            rows: Vec::new(),
        };
        let mut labels = Vec::new();
        for &v in &sub.active {
            let coeffs: Vec<(usize, Q)> = inst
                .incident(v)
                .iter()
                .filter_map(|e| col.get(e).map(|&j| (j, inst.demand(v, *e))))
                .filter(|(_, d)| !d.is_zero())
                .collect();
            if coeffs.is_empty() {
                continue;
            }
            lp.rows.push(Row {
                coeffs,
                sense: Sense::Le,
                rhs: sub.residual[&v].clone(),
            });
            labels.push(Constraint::Capacity { vertex: v });
        }
        for &e in &vars {
            let set = EdgeSet::from([e]);
            lp.rows.push(rank_row(&set, &col, &sub.matroid, Sense::Le));
            labels.push(Constraint::Rank { set: vec![e] });
        }
        for c in cuts.iter() {
            lp.rows.push(rank_row(c, &col, &sub.matroid, Sense::Le));
            labels.push(Constraint::Rank {
                set: c.iter().copied().collect(),
            });
        }
        if sub.mode == LpMode::Base {
            lp.rows.push(rank_row(&sub.edges, &col, &sub.matroid, Sense::Eq));
            labels.push(Constraint::BaseRank);
        }
        let sol = match simplex::solve(&lp) {
            LpOutcome::Optimal(s) => s,
            LpOutcome::Infeasible => return Err(Error::Infeasible),
            LpOutcome::Unbounded => return Err(Error::Unbounded),
        };
        let values: BTreeMap<EdgeId, Q> = vars
            .iter()
            .zip(sol.x.iter())
            .map(|(e, x)| (*e, x.clone()))
            .collect();
        match sub.matroid.separate(&values)? {
            Separation::Violated { set, gap } => {
                log::trace!(
                    "cut {:?} violated by {} after {} pivots",
                    set,
                    rational::fmt_q(&gap),
                    sol.pivots
                );
                if cuts.contains(&set) || set.len() < 2 {
                    return Err(Error::Audit(format!(
                        "separation returned an already enforced set {set:?}"
                    )));
                }
                cuts.push(set);
            }
            Separation::Inside => {
                let tight = lp
                    .rows
                    .iter()
                    .zip(labels)
                    .filter(|(r, _)| {
                        let act = r
                            .coeffs
                            .iter()
                            .fold(Q::zero(), |a, (j, c)| a + c * &sol.x[*j]);
                        act == r.rhs
                    })
                    .map(|(_, l)| l)
                    .collect();
                let objective = match sub.mode {
                    LpMode::Maximize => sol.objective,
                    LpMode::Base => -sol.objective,
                };
                return Ok(FractionalPoint {
                    values,
                    objective,
                    basic: true,
                    tight,
                });
            }
        }
    }
}

fn rank_row(set: &EdgeSet, col: &BTreeMap<EdgeId, usize>, m: &Matroid, sense: Sense) -> Row {
    Row {
        coeffs: set
            .iter()
            .filter_map(|e| col.get(e).map(|&j| (j, rational::one())))
            .collect(),
        sense,
        rhs: Q::from_integer(m.rank(set).into()),
    }
}

fn dedup(cuts: &mut Vec<EdgeSet>) {
    let mut seen = BTreeSet::new();
    cuts.retain(|c| seen.insert(c.clone()));
}

/// Optimum of the matching LP over the whole instance.
pub fn lp_value(inst: &Instance, m: &Matroid) -> Result<Q> {
    let sub = LpSubproblem::full(inst, m, LpMode::Maximize);
    Ok(solve_extreme(inst, &sub, &mut Vec::new())?.objective)
}

/// Optimum of the base LP; `Err(Infeasible)` when no fractional base fits the capacities.
pub fn lp_base_value(inst: &Instance, m: &Matroid) -> Result<Q> {
    let sub = LpSubproblem::full(inst, m, LpMode::Base);
    Ok(solve_extreme(inst, &sub, &mut Vec::new())?.objective)
}
