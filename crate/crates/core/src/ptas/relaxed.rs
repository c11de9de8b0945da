//! Relaxed solutions: an edge set with per-vertex large sets whose small edges only fit after
//! rounding demands down to a grid of the residual capacity. Also the pruning back to a
//! feasible solution.

use std::collections::BTreeMap;

use num::{One, Zero};
use serde::Serialize;

use crate::error::{audit, Error, Result};
use crate::instance::{Edge, EdgeSet, Endpoint, Instance, Vertex, VertexId};
use crate::pruning::small::{run_family, small_params, SmallParams};
use crate::rational::{self, ceil_usize, floor_int, Q};

/// `⌈1/ε²⌉`.
pub fn large_limit(eps: &Q) -> usize {
    ceil_usize(&(Q::one() / (eps * eps)))
}

/// `⌊m/ε⌋`: the residual capacity measured in grid units.
pub fn usage_budget(m: usize, eps: &Q) -> u64 {
    rational::floor_usize(&(Q::from_integer(m.into()) / eps)) as u64
}

/// Grid units of demand `d` at a vertex with residual `bbar`, or `None` when `d > ε·bbar`.
pub fn small_units(d: &Q, bbar: &Q, m: usize, eps: &Q) -> Option<u64> {
    if *d > eps * bbar {
        return None;
    }
    if bbar.is_zero() {
        return Some(0);
    }
    let u = floor_int(&(d * Q::from_integer(m.into()) / (eps * bbar)));
    Some(u.try_into().expect("grid units fit in u64"))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelaxedSolution {
    pub edges: EdgeSet,
    /// `M_v`; vertices without an entry have no large edges.
    pub large: BTreeMap<VertexId, EdgeSet>,
    #[serde(with = "rational::as_string")]
    pub eps: Q,
}

impl RelaxedSolution {
    pub fn large_at(&self, v: VertexId) -> EdgeSet {
        self.large.get(&v).cloned().unwrap_or_default()
    }

    pub fn residual(&self, inst: &Instance, v: VertexId) -> Q {
        inst.capacity(v) - inst.load(v, &self.large_at(v))
    }

    /// Checks every defining condition, computing rounded demands from scratch.
    pub fn audit(&self, inst: &Instance) -> Result<()> {
        let m = inst.edges().len();
        let limit = large_limit(&self.eps);
        for &e in &self.edges {
            audit(inst.edge(e).is_some(), || format!("edge {e} is not in the instance"))?;
        }
        for (&v, mv) in &self.large {
            audit(inst.vertex(v).is_some(), || format!("large set for unknown vertex {v}"))?;
            for &e in mv {
                audit(
                    self.edges.contains(&e) && inst.incident(v).contains(&e),
                    || format!("large edge {e} at {v} is not a chosen incident edge"),
                )?;
            }
            audit(mv.len() <= limit, || format!("vertex {v} has {} large edges, limit {limit}", mv.len()))?;
        }
        for v in inst.vertex_ids() {
            let mv = self.large_at(v);
            let heavy = inst.load(v, &mv);
            audit(heavy <= *inst.capacity(v), || format!("large edges overload vertex {v}"))?;
            let bbar = inst.capacity(v) - heavy;
            let grid = &self.eps * &bbar / Q::from_integer(m.max(1).into());
            let mut rounded = Q::zero();
            for &e in inst.incident(v) {
                if !self.edges.contains(&e) || mv.contains(&e) {
                    continue;
                }
                let d = inst.demand(v, e);
                audit(d <= &self.eps * &bbar, || format!("edge {e} is not small at vertex {v}"))?;
                if !grid.is_zero() {
                    rounded += Q::from_integer(floor_int(&(&d / &grid))) * &grid;
                }
            }
            audit(rounded <= bbar, || format!("rounded small demand exceeds residual capacity at {v}"))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PrunedRelaxed {
    pub solution: EdgeSet,
    pub params: SmallParams,
    /// The relaxed set was already feasible and is returned whole.
    pub intact: bool,
    pub events: u64,
}

/// Instance on the relaxed edges with residual capacities and zero demand on large endpoints.
pub fn residual_instance(inst: &Instance, rs: &RelaxedSolution) -> Result<Instance> {
    let vertices = inst
        .vertices()
        .iter()
        .map(|v| Vertex { id: v.id, capacity: rs.residual(inst, v.id) })
        .collect();
    let edges = inst
        .edges()
        .iter()
        .filter(|e| rs.edges.contains(&e.id))
        .map(|e| Edge {
            id: e.id,
            profit: e.profit.clone(),
            endpoints: e
                .endpoints
                .iter()
                .map(|ep| Endpoint {
                    vertex: ep.vertex,
                    demand: if rs.large_at(ep.vertex).contains(&e.id) { Q::zero() } else { ep.demand.clone() },
                })
                .collect(),
        })
        .collect();
    Instance::new(vertices, edges, inst.k())
}

pub fn prune_relaxed(inst: &Instance, rs: &RelaxedSolution) -> Result<PrunedRelaxed> {
    rs.audit(inst)?;
    let params = small_params(&rs.eps, 1);
    if inst.capacity_feasible(&rs.edges) {
        return Ok(PrunedRelaxed { solution: rs.edges.clone(), params, intact: true, events: 0 });
    }
    let hat = residual_instance(inst, rs)?;
    let slack = Q::one() + &rs.eps;
    for v in hat.vertex_ids() {
        let load = hat.load(v, &rs.edges);
        audit(load <= &slack * hat.capacity(v), || format!("residual load at {v} exceeds (1+ε)·residual capacity"))?;
    }
    let run = run_family(&hat, &rs.edges, &params)?;
    if !inst.capacity_feasible(&run.best) {
        return Err(Error::Audit("pruned relaxed solution violates an original capacity".into()));
    }
    Ok(PrunedRelaxed { solution: run.best, params, intact: false, events: run.events })
}
