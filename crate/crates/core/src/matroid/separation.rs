//! Separation over the matroid independence polytope: minimize `r(A) − x(A)`.

use std::collections::{BTreeMap, BTreeSet};

use num::{One, Signed, Zero};

use super::flow::FlowNetwork;
use super::{Kind, Matroid, UnionFind};
use crate::error::{Error, Result};
use crate::instance::{EdgeId, EdgeSet, VertexId};
use crate::rational::Q;

/// Largest support searched exhaustively for oracles without a closed form.
pub const EXHAUSTIVE_CAP: usize = 22;

#[derive(Clone, Debug, PartialEq)]
pub enum Separation {
    Inside,
    Violated { set: EdgeSet, gap: Q },
}

impl Matroid {
    /// A set `A` minimizing `r(A) − x(A)` together with that minimum (always ≤ 0).
    pub fn min_slack(&self, x: &BTreeMap<EdgeId, Q>) -> Result<(EdgeSet, Q)> {
        let support: BTreeMap<EdgeId, Q> = x
            .iter()
            .filter(|(e, v)| self.ground.contains(e) && v.is_positive())
            .map(|(e, v)| (*e, v.clone()))
            .collect();
        let set = match self.kind() {
            Kind::Free => over_one(&support),
            Kind::Uniform(r) => {
                let r = r.saturating_sub(self.contracted.len());
                uniform_best(&support, r)
            }
            Kind::Partition { class_of, bounds } => {
                let mut by_class: BTreeMap<Option<usize>, BTreeMap<EdgeId, Q>> = BTreeMap::new();
                for (e, v) in &support {
                    by_class
                        .entry(class_of.get(e).copied())
                        .or_default()
                        .insert(*e, v.clone());
                }
                let mut set = EdgeSet::new();
                for (c, members) in by_class {
                    match c {
                        None => set.extend(over_one(&members)),
                        Some(c) => {
                            let used = self
                                .contracted
                                .iter()
                                .filter(|e| class_of.get(e) == Some(&c))
                                .count();
                            set.extend(uniform_best(&members, bounds[c].saturating_sub(used)));
                        }
                    }
                }
                set
            }
            Kind::Graphic { ends } => self.graphic_best(ends, &support),
            Kind::Transversal { .. } | Kind::Custom(_) => self.exhaustive_best(&support)?,
        };
        let value = Q::from_integer(self.rank(&set).into()) - sum(x, &set);
        Ok((set, value))
    }

    pub fn separate(&self, x: &BTreeMap<EdgeId, Q>) -> Result<Separation> {
        let (set, value) = self.min_slack(x)?;
        Ok(if value.is_negative() {
            Separation::Violated { set, gap: -value }
        } else {
            Separation::Inside
        })
    }

    fn exhaustive_best(&self, support: &BTreeMap<EdgeId, Q>) -> Result<EdgeSet> {
        if support.len() > EXHAUSTIVE_CAP {
            return Err(Error::SeparationCap {
                support: support.len(),
                cap: EXHAUSTIVE_CAP,
            });
        }
        let items: Vec<(EdgeId, Q)> = support.iter().map(|(e, v)| (*e, v.clone())).collect();
        let mut best = (EdgeSet::new(), Q::zero());
        for mask in 1u64..(1u64 << items.len()) {
            let set: EdgeSet = (0..items.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| items[i].0)
                .collect();
            let x: Q = (0..items.len())
                .filter(|i| mask >> i & 1 == 1)
                .fold(Q::zero(), |a, i| a + &items[i].1);
            let v = Q::from_integer(self.rank(&set).into()) - x;
            if v < best.1 {
                best = (set, v);
            }
        }
        Ok(best.0)
    }

    /// Cycle matroid minor: contract the contracted forest, then minimize over vertex partitions
    /// `Σ (|S| − 1 − x(E(S)))` with the greedy Dilworth-truncation scheme, one min cut per vertex.
    fn graphic_best(
        &self,
        ends: &BTreeMap<EdgeId, (VertexId, VertexId)>,
        support: &BTreeMap<EdgeId, Q>,
    ) -> EdgeSet {
        let mut uf = UnionFind::default();
        for e in &self.contracted {
            let (u, v) = ends[e];
            uf.union(u, v);
        }
        let mut set = EdgeSet::new();
        let mut arcs: Vec<(EdgeId, usize, usize, Q)> = Vec::new();
        let mut verts: BTreeSet<usize> = BTreeSet::new();
        for (e, xv) in support {
            let (u, v) = ends[e];
            let (a, b) = (uf.find(u), uf.find(v));
            if a == b {
                set.insert(*e);
            } else {
                verts.insert(a);
                verts.insert(b);
                arcs.push((*e, a, b, xv.clone()));
            }
        }
        let order: Vec<usize> = verts.into_iter().collect();
        let pos: BTreeMap<usize, usize> = order.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let arcs: Vec<(EdgeId, usize, usize, Q)> = arcs
            .into_iter()
            .map(|(e, a, b, x)| (e, pos[&a], pos[&b], x))
            .collect();
        let n = order.len();
        let mut y = vec![Q::zero(); n];
        let mut parts = UnionFind::default();
        for i in 0..n {
            let inner: Vec<&(EdgeId, usize, usize, Q)> =
                arcs.iter().filter(|a| a.1 <= i && a.2 <= i).collect();
            let big = inner.iter().fold(Q::one(), |s, a| s + &a.3);
            // nodes: 0 source, 1 sink, 2.. vertices 0..=i, then one node per arc
            let mut g = FlowNetwork::new(2 + (i + 1) + inner.len());
            for (j, a) in inner.iter().enumerate() {
                let node = 2 + (i + 1) + j;
                g.add_edge(0, node, a.3.clone());
                g.add_edge(node, 2 + a.1, big.clone());
                g.add_edge(node, 2 + a.2, big.clone());
            }
            for (u, yu) in y.iter().enumerate().take(i) {
                g.add_edge(2 + u, 1, Q::one() - yu);
            }
            let total = inner.iter().fold(Q::zero(), |s, a| s + &a.3);
            let (cut, side) = g.max_flow(0, 1);
            y[i] = cut - total;
            parts.union(i, i);
            for u in 0..i {
                if side[2 + u] {
                    parts.union(i, u);
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..n {
            groups.entry(parts.find(i)).or_default().push(i);
        }
        for members in groups.values() {
            let inside: BTreeSet<usize> = members.iter().copied().collect();
            let es: Vec<&(EdgeId, usize, usize, Q)> = arcs
                .iter()
                .filter(|a| inside.contains(&a.1) && inside.contains(&a.2))
                .collect();
            let x = es.iter().fold(Q::zero(), |s, a| s + &a.3);
            let slack = Q::from_integer((members.len() as i64 - 1).into()) - x;
            if slack.is_negative() {
                set.extend(es.iter().map(|a| a.0));
            }
        }
        set
    }
}

fn sum(x: &BTreeMap<EdgeId, Q>, s: &EdgeSet) -> Q {
    s.iter()
        .filter_map(|e| x.get(e))
        .fold(Q::zero(), |a, v| a + v)
}

fn over_one(x: &BTreeMap<EdgeId, Q>) -> EdgeSet {
    x.iter()
        .filter(|(_, v)| **v > Q::one())
        .map(|(e, _)| *e)
        .collect()
}

/// Best set for `min(|A|, r) − x(A)`: either the over-one elements or the whole support.
fn uniform_best(x: &BTreeMap<EdgeId, Q>, r: usize) -> EdgeSet {
    let a = over_one(x);
    let va: Q = a.iter().fold(Q::zero(), |s, e| s + Q::one() - &x[e]);
    let all: EdgeSet = x.keys().copied().collect();
    let total: Q = x.values().fold(Q::zero(), |s, v| s + v);
    let vall = Q::from_integer(all.len().min(r).into()) - total;
    if vall < va {
        all
    } else {
        a
    }
}
