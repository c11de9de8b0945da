//! Matroid independence oracles with deletion and contraction.

mod flow;
mod separation;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{EdgeId, EdgeSet, Instance, VertexId};

pub use separation::{Separation, EXHAUSTIVE_CAP};

/// JSON description of a matroid over the edge ids of an instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MatroidSpec {
    Free,
    Uniform {
        rank: usize,
    },
    Partition {
        classes: Vec<Vec<EdgeId>>,
        bounds: Vec<usize>,
    },
    /// Cycle matroid; without explicit `endpoints` each edge uses its first two instance endpoints.
    Graphic {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        endpoints: Option<Vec<(EdgeId, VertexId, VertexId)>>,
    },
    /// Each entry `[e, outlets]` lets element `e` be matched to any listed outlet.
    Transversal {
        availability: Vec<(EdgeId, Vec<usize>)>,
    },
}

pub type IndependenceFn = dyn Fn(&EdgeSet) -> bool + Send + Sync;

pub(crate) enum Kind {
    Free,
    Uniform(usize),
    Partition {
        class_of: BTreeMap<EdgeId, usize>,
        bounds: Vec<usize>,
    },
    Graphic {
        ends: BTreeMap<EdgeId, (VertexId, VertexId)>,
    },
    Transversal {
        avail: BTreeMap<EdgeId, Vec<usize>>,
    },
    Custom(Box<IndependenceFn>),
}

/// A matroid minor `M \ D / C` restricted to `ground`.
#[derive(Clone)]
pub struct Matroid {
    kind: Arc<Kind>,
    ground: EdgeSet,
    contracted: EdgeSet,
}

impl fmt::Debug for Matroid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Matroid")
            .field("kind", &self.kind_name())
            .field("ground", &self.ground)
            .field("contracted", &self.contracted)
            .finish()
    }
}

impl Matroid {
    pub fn from_spec(spec: &MatroidSpec, inst: &Instance) -> Result<Matroid> {
        let kind = match spec {
            MatroidSpec::Free => Kind::Free,
            MatroidSpec::Uniform { rank } => Kind::Uniform(*rank),
            MatroidSpec::Partition { classes, bounds } => {
                if classes.len() != bounds.len() {
                    return Err(Error::MalformedMatroid(format!(
                        "{} classes but {} bounds",
                        classes.len(),
                        bounds.len()
                    )));
                }
                let mut class_of = BTreeMap::new();
                for (c, members) in classes.iter().enumerate() {
                    for &e in members {
                        if class_of.insert(e, c).is_some() {
                            return Err(Error::MalformedMatroid(format!(
                                "element {e} appears in two classes"
                            )));
                        }
                    }
                }
                Kind::Partition {
                    class_of,
                    bounds: bounds.clone(),
                }
            }
            MatroidSpec::Graphic { endpoints } => {
                let ends = match endpoints {
                    Some(m) => m.iter().map(|&(e, u, v)| (e, (u, v))).collect(),
                    None => inst
                        .edges()
                        .iter()
                        .map(|e| {
                            let vs: Vec<_> = e.vertices().collect();
                            (e.id, (vs[0], *vs.get(1).unwrap_or(&vs[0])))
                        })
                        .collect(),
                };
                Kind::Graphic { ends }
            }
            MatroidSpec::Transversal { availability } => Kind::Transversal {
                avail: availability.iter().cloned().collect(),
            },
        };
        Ok(Matroid::build(kind, inst.edge_ids().collect()))
    }

    pub fn free(inst: &Instance) -> Matroid {
        Matroid::build(Kind::Free, inst.edge_ids().collect())
    }

    /// Matroid given by an arbitrary independence predicate on `ground`.
    pub fn custom(ground: EdgeSet, f: impl Fn(&EdgeSet) -> bool + Send + Sync + 'static) -> Matroid {
        Matroid::build(Kind::Custom(Box::new(f)), ground)
    }

    fn build(kind: Kind, ground: EdgeSet) -> Matroid {
        let mut m = Matroid {
            kind: Arc::new(kind),
            ground,
            contracted: EdgeSet::new(),
        };
        let loops: Vec<EdgeId> = m
            .ground
            .iter()
            .copied()
            .filter(|&e| !m.base_independent(&EdgeSet::from([e])))
            .collect();
        for e in loops {
            m.ground.remove(&e);
        }
        m
    }

    pub fn kind_name(&self) -> &'static str {
        match *self.kind {
            Kind::Free => "free",
            Kind::Uniform(_) => "uniform",
            Kind::Partition { .. } => "partition",
            Kind::Graphic { .. } => "graphic",
            Kind::Transversal { .. } => "transversal",
            Kind::Custom(_) => "custom",
        }
    }

    pub(crate) fn kind(&self) -> &Kind {
        &self.kind
    }

    pub fn ground(&self) -> &EdgeSet {
        &self.ground
    }

    pub fn contracted(&self) -> &EdgeSet {
        &self.contracted
    }

    /// Independence in the underlying matroid, ignoring deletions and contractions.
    fn base_independent(&self, s: &EdgeSet) -> bool {
        match &*self.kind {
            Kind::Free => true,
            Kind::Uniform(r) => s.len() <= *r,
            Kind::Partition { class_of, bounds } => {
                let mut count = vec![0usize; bounds.len()];
                for e in s {
                    if let Some(&c) = class_of.get(e) {
                        count[c] += 1;
                        if count[c] > bounds[c] {
                            return false;
                        }
                    }
                }
                true
            }
            Kind::Graphic { ends } => {
                let mut uf = UnionFind::default();
                s.iter().all(|e| match ends.get(e) {
                    Some(&(u, v)) => uf.union(u, v),
                    None => false,
                })
            }
            Kind::Transversal { avail } => transversal_independent(avail, s),
            Kind::Custom(f) => f(s),
        }
    }

    pub fn is_independent(&self, s: &EdgeSet) -> bool {
        if !s.is_subset(&self.ground) {
            return false;
        }
        if self.contracted.is_empty() {
            return self.base_independent(s);
        }
        let mut all = s.clone();
        all.extend(self.contracted.iter().copied());
        self.base_independent(&all)
    }

    /// Rank of `s ∩ ground` by greedy insertion in id order.
    pub fn rank(&self, s: &EdgeSet) -> usize {
        self.greedy_basis(s).len()
    }

    pub fn greedy_basis(&self, s: &EdgeSet) -> EdgeSet {
        let mut basis = EdgeSet::new();
        for &e in s.intersection(&self.ground) {
            basis.insert(e);
            if !self.is_independent(&basis) {
                basis.remove(&e);
            }
        }
        basis
    }

    pub fn ground_rank(&self) -> usize {
        self.rank(&self.ground.clone())
    }

    pub fn delete(&mut self, e: EdgeId) -> Result<()> {
        if !self.ground.remove(&e) {
            return Err(Error::UnknownEdge(e));
        }
        Ok(())
    }

    pub fn contract(&mut self, e: EdgeId) -> Result<()> {
        if !self.ground.contains(&e) {
            return Err(Error::UnknownEdge(e));
        }
        if !self.is_independent(&EdgeSet::from([e])) {
            return Err(Error::ContractLoop(e));
        }
        self.ground.remove(&e);
        self.contracted.insert(e);
        Ok(())
    }

    pub fn restricted(&self, keep: &EdgeSet) -> Matroid {
        Matroid {
            kind: self.kind.clone(),
            ground: self.ground.intersection(keep).copied().collect(),
            contracted: self.contracted.clone(),
        }
    }
}

fn transversal_independent(avail: &BTreeMap<EdgeId, Vec<usize>>, s: &EdgeSet) -> bool {
    let mut owner: BTreeMap<usize, EdgeId> = BTreeMap::new();
    fn augment(
        e: EdgeId,
        avail: &BTreeMap<EdgeId, Vec<usize>>,
        owner: &mut BTreeMap<usize, EdgeId>,
        seen: &mut BTreeSet<usize>,
    ) -> bool {
        for &o in avail.get(&e).map(Vec::as_slice).unwrap_or(&[]) {
            if !seen.insert(o) {
                continue;
            }
            let free = match owner.get(&o) {
                None => true,
                Some(&f) => augment(f, avail, owner, seen),
            };
            if free {
                owner.insert(o, e);
                return true;
            }
        }
        false
    }
    s.iter()
        .all(|&e| augment(e, avail, &mut owner, &mut BTreeSet::new()))
}

#[derive(Default)]
pub(crate) struct UnionFind {
    parent: BTreeMap<usize, usize>,
}

impl UnionFind {
    pub fn find(&mut self, x: usize) -> usize {
        let p = *self.parent.entry(x).or_insert(x);
        if p == x {
            return x;
        }
        let r = self.find(p);
        self.parent.insert(x, r);
        r
    }

    /// Returns false when `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent.insert(ra.max(rb), ra.min(rb));
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(n_edges: usize) -> Instance {
        let edges: Vec<String> = (0..n_edges)
            .map(|i| {
                format!(
                    r#"{{"id":{i},"endpoints":[{{"v":{},"demand":"1"}},{{"v":{},"demand":"1"}}],"profit":"1"}}"#,
                    i % 3,
                    (i + 1) % 3
                )
            })
            .collect();
        Instance::from_json(&format!(
            r#"{{"vertices":[{{"id":0,"capacity":"9"}},{{"id":1,"capacity":"9"}},{{"id":2,"capacity":"9"}}],"edges":[{}],"k":2}}"#,
            edges.join(",")
        ))
        .unwrap()
    }

    #[test]
    fn uniform_contraction_creates_loop() {
        let i = inst(2);
        let mut m = Matroid::from_spec(&MatroidSpec::Uniform { rank: 1 }, &i).unwrap();
        m.contract(0).unwrap();
        assert!(!m.is_independent(&EdgeSet::from([1])));
        assert!(m.is_independent(&EdgeSet::new()));
        assert!(matches!(m.contract(1), Err(Error::ContractLoop(1))));
    }

    #[test]
    fn partition_ranks() {
        let i = inst(3);
        let m = Matroid::from_spec(
            &MatroidSpec::Partition {
                classes: vec![vec![0, 1], vec![2]],
                bounds: vec![1, 1],
            },
            &i,
        )
        .unwrap();
        assert_eq!(m.rank(&EdgeSet::from([0, 1, 2])), 2);
        assert!(!m.is_independent(&EdgeSet::from([0, 1])));
    }

    #[test]
    fn graphic_triangle() {
        let i = inst(3);
        let m = Matroid::from_spec(&MatroidSpec::Graphic { endpoints: None }, &i).unwrap();
        assert_eq!(m.ground_rank(), 2);
        assert!(!m.is_independent(&EdgeSet::from([0, 1, 2])));
    }

    #[test]
    fn transversal_matching() {
        let i = inst(3);
        let spec = MatroidSpec::Transversal {
            availability: vec![(0, vec![0]), (1, vec![0, 1]), (2, vec![1])],
        };
        let m = Matroid::from_spec(&spec, &i).unwrap();
        assert!(m.is_independent(&EdgeSet::from([0, 1])));
        assert!(!m.is_independent(&EdgeSet::from([0, 1, 2])));
        assert_eq!(m.ground_rank(), 2);
    }

    #[test]
    fn loops_are_dropped_at_construction() {
        let i = inst(3);
        let spec = MatroidSpec::Transversal {
            availability: vec![(0, vec![0]), (2, vec![1])],
        };
        let m = Matroid::from_spec(&spec, &i).unwrap();
        assert_eq!(m.ground(), &EdgeSet::from([0, 2]));
    }

    #[test]
    fn spec_json_shapes() {
        let s: MatroidSpec =
            serde_json::from_str(r#"{"kind":"partition","classes":[[0,1],[2]],"bounds":[1,1]}"#)
                .unwrap();
        assert!(matches!(s, MatroidSpec::Partition { .. }));
        let g: MatroidSpec =
            serde_json::from_str(r#"{"kind":"graphic","endpoints":[[0,0,1]]}"#).unwrap();
        assert!(matches!(g, MatroidSpec::Graphic { endpoints: Some(_) }));
    }
}
