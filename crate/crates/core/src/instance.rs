//! Demand matching instances, solutions and the basic feasibility checks.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num::{BigInt, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matroid::Matroid;
use crate::rational::{self, Q};

pub type VertexId = usize;
pub type EdgeId = usize;
pub type EdgeSet = BTreeSet<EdgeId>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: VertexId,
    #[serde(with = "rational::as_string")]
    pub capacity: Q,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Endpoint {
    #[serde(rename = "v")]
    pub vertex: VertexId,
    #[serde(with = "rational::as_string")]
    pub demand: Q,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub id: EdgeId,
    pub endpoints: Vec<Endpoint>,
    #[serde(with = "rational::as_string")]
    pub profit: Q,
}

impl Edge {
    pub fn demand_at(&self, v: VertexId) -> Option<&Q> {
        self.endpoints
            .iter()
            .find(|ep| ep.vertex == v)
            .map(|ep| &ep.demand)
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.endpoints.iter().map(|ep| ep.vertex)
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    k: usize,
}

/// A hypergraph with vertex capacities, per-endpoint demands and edge profits.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "InstanceFile", into = "InstanceFile")]
pub struct Instance {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    k: usize,
    vertex_pos: BTreeMap<VertexId, usize>,
    edge_pos: BTreeMap<EdgeId, usize>,
    incidence: BTreeMap<VertexId, Vec<EdgeId>>,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.edges == other.edges && self.k == other.k
    }
}

impl TryFrom<InstanceFile> for Instance {
    type Error = Error;
    fn try_from(f: InstanceFile) -> Result<Self> {
        Instance::new(f.vertices, f.edges, f.k)
    }
}

impl From<Instance> for InstanceFile {
    fn from(i: Instance) -> Self {
        InstanceFile {
            vertices: i.vertices,
            edges: i.edges,
            k: i.k,
        }
    }
}

impl Instance {
    pub fn new(vertices: Vec<Vertex>, edges: Vec<Edge>, k: usize) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidInstance(m));
        let mut vertex_pos = BTreeMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if v.capacity.is_negative() {
                return bad(format!("vertex {} has negative capacity", v.id));
            }
            if vertex_pos.insert(v.id, i).is_some() {
                return bad(format!("duplicate vertex id {}", v.id));
            }
        }
        let mut edge_pos = BTreeMap::new();
        let mut incidence: BTreeMap<VertexId, Vec<EdgeId>> =
            vertices.iter().map(|v| (v.id, Vec::new())).collect();
        for (i, e) in edges.iter().enumerate() {
            if edge_pos.insert(e.id, i).is_some() {
                return bad(format!("duplicate edge id {}", e.id));
            }
            if e.endpoints.is_empty() || e.endpoints.len() > k {
                return bad(format!(
                    "edge {} has {} endpoints, allowed 1..={k}",
                    e.id,
                    e.endpoints.len()
                ));
            }
            if e.profit.is_negative() {
                return bad(format!("edge {} has negative profit", e.id));
            }
            let mut seen = BTreeSet::new();
            for ep in &e.endpoints {
                if !vertex_pos.contains_key(&ep.vertex) {
                    return bad(format!("edge {} references unknown vertex {}", e.id, ep.vertex));
                }
                if !seen.insert(ep.vertex) {
                    return bad(format!("edge {} repeats vertex {}", e.id, ep.vertex));
                }
                if ep.demand.is_negative() {
                    return bad(format!("edge {} has negative demand", e.id));
                }
                incidence.get_mut(&ep.vertex).unwrap().push(e.id);
            }
        }
        Ok(Instance {
            vertices,
            edges,
            k,
            vertex_pos,
            edge_pos,
            incidence,
        })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges.iter().map(|e| e.id)
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.iter().map(|v| v.id)
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edge_pos.get(&id).map(|&i| &self.edges[i])
    }

    pub fn vertex(&self, id: VertexId) -> Option<&Vertex> {
        self.vertex_pos.get(&id).map(|&i| &self.vertices[i])
    }

    pub(crate) fn e(&self, id: EdgeId) -> &Edge {
        self.edge(id).expect("edge id belongs to instance")
    }

    pub fn capacity(&self, v: VertexId) -> &Q {
        &self.vertex(v).expect("vertex id belongs to instance").capacity
    }

    /// Edge ids incident to `v`, in declaration order.
    pub fn incident(&self, v: VertexId) -> &[EdgeId] {
        self.incidence.get(&v).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn demand(&self, v: VertexId, e: EdgeId) -> Q {
        self.e(e).demand_at(v).cloned().unwrap_or_else(Q::zero)
    }

    pub fn profit<'a>(&self, edges: impl IntoIterator<Item = &'a EdgeId>) -> Q {
        edges
            .into_iter()
            .fold(Q::zero(), |acc, e| acc + &self.e(*e).profit)
    }

    pub fn total_profit(&self) -> Q {
        self.profit(self.edge_pos.keys())
    }

    /// `d_v(S)`: total demand placed on `v` by the edges of `s`.
    pub fn load<'a>(&self, v: VertexId, s: impl IntoIterator<Item = &'a EdgeId>) -> Q {
        s.into_iter().fold(Q::zero(), |acc, e| match self.e(*e).demand_at(v) {
            Some(d) => acc + d,
            None => acc,
        })
    }

    /// Vertices touched by `s`, with their loads.
    pub fn loads(&self, s: &EdgeSet) -> BTreeMap<VertexId, Q> {
        let mut out: BTreeMap<VertexId, Q> = BTreeMap::new();
        for &e in s {
            for ep in &self.e(e).endpoints {
                *out.entry(ep.vertex).or_insert_with(Q::zero) += &ep.demand;
            }
        }
        out
    }

    pub fn capacity_feasible(&self, s: &EdgeSet) -> bool {
        s.iter().all(|e| self.edge_pos.contains_key(e))
            && self
                .loads(s)
                .iter()
                .all(|(v, l)| l <= self.capacity(*v))
    }

    /// Capacity feasibility plus independence in `m`.
    pub fn is_feasible(&self, s: &EdgeSet, m: &Matroid) -> bool {
        self.capacity_feasible(s) && m.is_independent(s)
    }

    /// Drops every edge that is infeasible on its own; returns the new instance and the dropped ids.
    pub fn validate(&self) -> (Instance, Vec<EdgeId>) {
        let (keep, drop): (Vec<&Edge>, Vec<&Edge>) = self.edges.iter().partition(|e| {
            e.endpoints
                .iter()
                .all(|ep| &ep.demand <= self.capacity(ep.vertex))
        });
        let inst = Instance::new(
            self.vertices.clone(),
            keep.into_iter().cloned().collect(),
            self.k,
        )
        .expect("subset of a valid instance is valid");
        (inst, drop.into_iter().map(|e| e.id).collect())
    }

    pub fn is_validated(&self) -> bool {
        self.edges.iter().all(|e| {
            e.endpoints
                .iter()
                .all(|ep| &ep.demand <= self.capacity(ep.vertex))
        })
    }

    /// Sub-instance induced by `keep`: only edges with every endpoint in `keep` survive.
    pub fn induced(&self, keep: &BTreeSet<VertexId>) -> Instance {
        let vertices = self
            .vertices
            .iter()
            .filter(|v| keep.contains(&v.id))
            .cloned()
            .collect();
        let edges = self
            .edges
            .iter()
            .filter(|e| e.vertices().all(|v| keep.contains(&v)))
            .cloned()
            .collect();
        Instance::new(vertices, edges, self.k).expect("induced instance is valid")
    }

    /// Sub-instance restricted to the edges in `keep`, all vertices retained.
    pub fn restrict_edges(&self, keep: &EdgeSet) -> Instance {
        let edges = self
            .edges
            .iter()
            .filter(|e| keep.contains(&e.id))
            .cloned()
            .collect();
        Instance::new(self.vertices.clone(), edges, self.k).expect("restricted instance is valid")
    }

    pub fn with_capacities(&self, caps: &BTreeMap<VertexId, Q>) -> Result<Instance> {
        let vertices = self
            .vertices
            .iter()
            .map(|v| Vertex {
                id: v.id,
                capacity: caps.get(&v.id).cloned().unwrap_or_else(|| v.capacity.clone()),
            })
            .collect();
        Instance::new(vertices, self.edges.clone(), self.k)
    }

    /// Multiplies demands and capacities by the lcm of their denominators.
    pub fn scale_to_integers(&self) -> (Instance, BigInt) {
        let factor = rational::lcm_of_denominators(
            self.vertices
                .iter()
                .map(|v| &v.capacity)
                .chain(self.edges.iter().flat_map(|e| e.endpoints.iter().map(|ep| &ep.demand))),
        );
        let f = Q::from_integer(factor.clone());
        let vertices = self
            .vertices
            .iter()
            .map(|v| Vertex {
                id: v.id,
                capacity: &v.capacity * &f,
            })
            .collect();
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                id: e.id,
                profit: e.profit.clone(),
                endpoints: e
                    .endpoints
                    .iter()
                    .map(|ep| Endpoint {
                        vertex: ep.vertex,
                        demand: &ep.demand * &f,
                    })
                    .collect(),
            })
            .collect();
        (
            Instance::new(vertices, edges, self.k).expect("scaled instance is valid"),
            factor,
        )
    }

    /// Makes demands at each vertex pairwise distinct without changing which sets are feasible.
    ///
    /// The endpoint `j` (0-based) of the `i`-th declared edge (1-based) loses
    /// `(2i + j) / (3|E|²)`; for `k > 2` the step is widened to `k·i + j` over `(k+1)|E|²`.
    /// Requires integral demands and capacities.
    pub fn perturb(&self) -> Result<Instance> {
        let integral = |x: &Q| x.is_integer();
        if !self.vertices.iter().all(|v| integral(&v.capacity))
            || !self
                .edges
                .iter()
                .all(|e| e.endpoints.iter().all(|ep| integral(&ep.demand)))
        {
            return Err(Error::Precondition(
                "perturbation needs integral demands and capacities".into(),
            ));
        }
        let m = self.edges.len() as i64;
        let (step, den) = if self.k <= 2 {
            (2, 3 * m * m)
        } else {
            (self.k as i64, (self.k as i64 + 1) * m * m)
        };
        let edges = self
            .edges
            .iter()
            .enumerate()
            .map(|(i, e)| Edge {
                id: e.id,
                profit: e.profit.clone(),
                endpoints: e
                    .endpoints
                    .iter()
                    .enumerate()
                    .map(|(j, ep)| Endpoint {
                        vertex: ep.vertex,
                        demand: &ep.demand - rational::q(step * (i as i64 + 1) + j as i64, den),
                    })
                    .collect(),
            })
            .collect();
        Instance::new(self.vertices.clone(), edges, self.k)
    }

    /// Adjacency over 2-endpoint edges (parallel edges collapse).
    pub fn adjacency(&self) -> BTreeMap<VertexId, BTreeSet<VertexId>> {
        let mut adj: BTreeMap<VertexId, BTreeSet<VertexId>> =
            self.vertex_ids().map(|v| (v, BTreeSet::new())).collect();
        for e in &self.edges {
            let vs: Vec<_> = e.vertices().collect();
            for a in 0..vs.len() {
                for b in a + 1..vs.len() {
                    adj.get_mut(&vs[a]).unwrap().insert(vs[b]);
                    adj.get_mut(&vs[b]).unwrap().insert(vs[a]);
                }
            }
        }
        adj
    }
}

/// Set of edge ids chosen by an algorithm.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solution {
    pub edges: EdgeSet,
}

impl Solution {
    pub fn new(edges: EdgeSet) -> Self {
        Solution { edges }
    }
}

impl FromIterator<EdgeId> for Solution {
    fn from_iter<I: IntoIterator<Item = EdgeId>>(iter: I) -> Self {
        Solution {
            edges: iter.into_iter().collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub bipartite: bool,
    pub conflict_free: bool,
    pub consistent_order: Option<Vec<EdgeId>>,
    #[serde(with = "rational::as_string")]
    pub epsilon_small: Q,
}

/// Structural properties that decide which pruning strategies apply.
pub fn classify(inst: &Instance) -> Classification {
    Classification {
        bipartite: two_coloring(inst).is_some(),
        conflict_free: is_conflict_free(inst),
        consistent_order: consistent_order(inst),
        epsilon_small: epsilon_small(inst),
    }
}

/// Side (0/1) of each vertex under a proper 2-coloring, or `None` for odd cycles.
pub fn two_coloring(inst: &Instance) -> Option<BTreeMap<VertexId, u8>> {
    let adj = inst.adjacency();
    let mut side: BTreeMap<VertexId, u8> = BTreeMap::new();
    for &s in adj.keys() {
        if side.contains_key(&s) {
            continue;
        }
        side.insert(s, 0);
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &w in &adj[&u] {
                match side.get(&w) {
                    Some(&c) if c == side[&u] => return None,
                    Some(_) => {}
                    None => {
                        side.insert(w, 1 - side[&u]);
                        q.push_back(w);
                    }
                }
            }
        }
    }
    Some(side)
}

pub fn is_conflict_free(inst: &Instance) -> bool {
    let ids: Vec<EdgeId> = inst.edge_ids().collect();
    for (a, &e) in ids.iter().enumerate() {
        for &f in &ids[a + 1..] {
            if !inst.capacity_feasible(&EdgeSet::from([e, f])) {
                return false;
            }
        }
    }
    true
}

/// A global edge order that is nondecreasing in demand at every vertex, if one exists.
///
/// Ties between equal demands impose no constraint; among ready edges the lowest id goes first.
pub fn consistent_order(inst: &Instance) -> Option<Vec<EdgeId>> {
    let mut succ: BTreeMap<EdgeId, BTreeSet<EdgeId>> =
        inst.edge_ids().map(|e| (e, BTreeSet::new())).collect();
    for v in inst.vertex_ids() {
        let inc = inst.incident(v);
        for &a in inc {
            for &b in inc {
                if inst.demand(v, a) < inst.demand(v, b) {
                    succ.get_mut(&a).unwrap().insert(b);
                }
            }
        }
    }
    let mut indeg: BTreeMap<EdgeId, usize> = succ.keys().map(|&e| (e, 0)).collect();
    for s in succ.values() {
        for b in s {
            *indeg.get_mut(b).unwrap() += 1;
        }
    }
    let mut ready: BTreeSet<EdgeId> = indeg
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(&e, _)| e)
        .collect();
    let mut order = Vec::with_capacity(succ.len());
    while let Some(e) = ready.pop_first() {
        order.push(e);
        for b in &succ[&e] {
            let d = indeg.get_mut(b).unwrap();
            *d -= 1;
            if *d == 0 {
                ready.insert(*b);
            }
        }
    }
    (order.len() == succ.len()).then_some(order)
}

/// `max d_{v,e} / b_v` over all endpoints with positive demand (0 when there are none).
pub fn epsilon_small(inst: &Instance) -> Q {
    let mut best = Q::zero();
    for e in inst.edges() {
        for ep in &e.endpoints {
            if ep.demand.is_zero() {
                continue;
            }
            let b = inst.capacity(ep.vertex);
            if b.is_zero() {
                return Q::from_integer(BigInt::from(u32::MAX));
            }
            let r = &ep.demand / b;
            if r > best {
                best = r;
            }
        }
    }
    best
}

/// Top-`k` demand edges of `s` at `v`: demand descending, then id ascending.
pub fn largest_at(inst: &Instance, v: VertexId, s: &EdgeSet, k: usize) -> Vec<EdgeId> {
    let mut inc: Vec<EdgeId> = inst
        .incident(v)
        .iter()
        .copied()
        .filter(|e| s.contains(e))
        .collect();
    inc.sort_by(|a, b| inst.demand(v, *b).cmp(&inst.demand(v, *a)).then(a.cmp(b)));
    inc.truncate(k);
    inc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    pub(crate) fn tiny() -> Instance {
        Instance::from_json(
            r#"{"vertices":[{"id":0,"capacity":"10"},{"id":1,"capacity":"5"}],
                "edges":[{"id":0,"endpoints":[{"v":0,"demand":"6"},{"v":1,"demand":"3"}],"profit":"6"},
                         {"id":1,"endpoints":[{"v":0,"demand":"5"}],"profit":"5"},
                         {"id":2,"endpoints":[{"v":1,"demand":"7"}],"profit":"9"}],"k":2}"#,
        )
        .unwrap()
    }

    #[test]
    fn loads_and_feasibility() {
        let i = tiny();
        assert_eq!(i.load(0, &EdgeSet::from([0, 1])), qi(11));
        assert!(!i.capacity_feasible(&EdgeSet::from([0, 1])));
        assert!(i.capacity_feasible(&EdgeSet::from([0])));
    }

    #[test]
    fn validate_drops_oversized_edges() {
        let (v, dropped) = tiny().validate();
        assert_eq!(dropped, vec![2]);
        assert_eq!(v.edges().len(), 2);
        assert!(v.is_validated());
    }

    #[test]
    fn rejects_malformed_instances() {
        let bad = r#"{"vertices":[{"id":0,"capacity":"1"}],
            "edges":[{"id":0,"endpoints":[{"v":3,"demand":"1"}],"profit":"1"}],"k":2}"#;
        assert!(Instance::from_json(bad).is_err());
        let neg = r#"{"vertices":[{"id":0,"capacity":"-1"}],"edges":[],"k":2}"#;
        assert!(Instance::from_json(neg).is_err());
    }

    #[test]
    fn json_round_trip() {
        let i = tiny();
        assert_eq!(Instance::from_json(&i.to_json()).unwrap(), i);
    }

    #[test]
    fn perturbation_of_two_equal_demands() {
        let i = Instance::from_json(
            r#"{"vertices":[{"id":0,"capacity":"6"}],
                "edges":[{"id":0,"endpoints":[{"v":0,"demand":"3"}],"profit":"1"},
                         {"id":1,"endpoints":[{"v":0,"demand":"3"}],"profit":"1"}],"k":2}"#,
        )
        .unwrap();
        let p = i.perturb().unwrap();
        assert_eq!(p.demand(0, 0), qi(3) - q(2, 12));
        assert_eq!(p.demand(0, 1), qi(3) - q(4, 12));
    }

    #[test]
    fn consistent_order_respects_demands() {
        let i = Instance::from_json(
            r#"{"vertices":[{"id":0,"capacity":"10"},{"id":1,"capacity":"10"}],
                "edges":[{"id":0,"endpoints":[{"v":0,"demand":"3"},{"v":1,"demand":"1"}],"profit":"1"},
                         {"id":1,"endpoints":[{"v":0,"demand":"1"},{"v":1,"demand":"2"}],"profit":"1"}],"k":2}"#,
        )
        .unwrap();
        assert_eq!(consistent_order(&i), None);
        let j = Instance::from_json(
            r#"{"vertices":[{"id":0,"capacity":"10"},{"id":1,"capacity":"10"}],
                "edges":[{"id":0,"endpoints":[{"v":0,"demand":"3"},{"v":1,"demand":"2"}],"profit":"1"},
                         {"id":1,"endpoints":[{"v":0,"demand":"1"},{"v":1,"demand":"2"}],"profit":"1"}],"k":2}"#,
        )
        .unwrap();
        assert_eq!(consistent_order(&j), Some(vec![1, 0]));
    }
}
