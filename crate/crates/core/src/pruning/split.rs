//! Shattering agreeing edges into paths and cycles and splitting those into matchings.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{audit, Result};
use crate::instance::{EdgeId, EdgeSet, Instance, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Node {
    Vertex(VertexId),
    Copy(EdgeId, usize),
}

/// A path or cycle of the shattered graph, edges in traversal order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Component {
    pub edges: Vec<EdgeId>,
    pub cycle: bool,
}

impl Component {
    /// Two alternating matchings for paths and even cycles; odd cycles put their last edge alone.
    pub fn matchings(&self) -> Vec<Vec<EdgeId>> {
        let n = self.edges.len();
        if n == 1 {
            return vec![self.edges.clone()];
        }
        let odd_cycle = self.cycle && n % 2 == 1;
        let span = if odd_cycle { n - 1 } else { n };
        let mut out = vec![
            self.edges[..span].iter().step_by(2).copied().collect::<Vec<_>>(),
            self.edges[1..span].iter().step_by(2).copied().collect(),
        ];
        if odd_cycle {
            out.push(vec![self.edges[n - 1]]);
        }
        out
    }
}

/// Keeps each edge's endpoints listed in `kept`; every other endpoint becomes a private copy.
/// Fails if a kept vertex ends up with more than two edges.
pub fn shatter(
    inst: &Instance,
    edges: &EdgeSet,
    kept: impl Fn(EdgeId, VertexId) -> bool,
) -> Result<Vec<Component>> {
    let mut ends: BTreeMap<EdgeId, [Node; 2]> = BTreeMap::new();
    let mut at: BTreeMap<Node, Vec<EdgeId>> = BTreeMap::new();
    for &e in edges {
        let vs: Vec<VertexId> = inst.e(e).vertices().collect();
        let mut nodes = [Node::Copy(e, 0), Node::Copy(e, 1)];
        for (j, &v) in vs.iter().enumerate().take(2) {
            if kept(e, v) {
                nodes[j] = Node::Vertex(v);
            }
        }
        for n in nodes {
            at.entry(n).or_default().push(e);
        }
        ends.insert(e, nodes);
    }
    for (n, es) in &at {
        audit(es.len() <= 2, || {
            format!("shattered node {n:?} has degree {} above 2", es.len())
        })?;
    }
    let mut done: BTreeSet<EdgeId> = BTreeSet::new();
    let mut out = Vec::new();
    let walk = |start: Node, first: EdgeId, done: &mut BTreeSet<EdgeId>| -> Vec<EdgeId> {
        let mut seq = Vec::new();
        let mut node = start;
        let mut e = first;
        loop {
            seq.push(e);
            done.insert(e);
            let [a, b] = ends[&e];
            node = if a == node { b } else { a };
            match at[&node].iter().find(|&&f| !done.contains(&f)) {
                Some(&f) => e = f,
                None => return seq,
            }
        }
    };
    // paths first, walked from an endpoint of degree one
    for (&n, es) in &at {
        if es.len() == 1 && !done.contains(&es[0]) {
            out.push(Component {
                edges: walk(n, es[0], &mut done),
                cycle: false,
            });
        }
    }
    for &e in edges {
        if !done.contains(&e) {
            let start = ends[&e][0];
            out.push(Component {
                edges: walk(start, e, &mut done),
                cycle: true,
            });
        }
    }
    Ok(out)
}

/// Best matching of each component, by profit with the earliest one on ties.
pub fn best_matchings(inst: &Instance, comps: &[Component]) -> EdgeSet {
    let mut out = EdgeSet::new();
    for c in comps {
        let mut best: Option<(crate::rational::Q, Vec<EdgeId>)> = None;
        for mt in c.matchings() {
            let p = inst.profit(&mt);
            if best.as_ref().is_none_or(|(b, _)| p > *b) {
                best = Some((p, mt));
            }
        }
        out.extend(best.map(|b| b.1).unwrap_or_default());
    }
    out
}
