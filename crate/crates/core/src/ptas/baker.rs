//! Breadth-first layering and the residue classes removed by the shifting technique.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::instance::{Instance, VertexId};
use crate::rational::{ceil_usize, Q};

#[derive(Clone, Debug, Serialize)]
pub struct BakerPartition {
    pub k: usize,
    pub layer: BTreeMap<VertexId, usize>,
    /// `classes[i]` holds the vertices whose layer is `i mod (k + 1)`.
    pub classes: Vec<BTreeSet<VertexId>>,
}

/// Layers each component by BFS from its lowest vertex id, with `k = ⌈3/ε⌉`.
pub fn baker_partition(inst: &Instance, eps: &Q) -> BakerPartition {
    baker_with_k(inst, ceil_usize(&(Q::from_integer(3.into()) / eps)))
}

pub fn baker_with_k(inst: &Instance, k: usize) -> BakerPartition {
    let adj = inst.adjacency();
    let mut layer: BTreeMap<VertexId, usize> = BTreeMap::new();
    for &s in adj.keys() {
        if layer.contains_key(&s) {
            continue;
        }
        layer.insert(s, 0);
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &w in &adj[&u] {
                if !layer.contains_key(&w) {
                    layer.insert(w, layer[&u] + 1);
                    q.push_back(w);
                }
            }
        }
    }
    let mut classes = vec![BTreeSet::new(); k + 1];
    for (&v, &l) in &layer {
        classes[l % (k + 1)].insert(v);
    }
    BakerPartition { k, layer, classes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn path_layers() {
        let edges: Vec<String> = (0..5)
            .map(|i| format!(r#"{{"id":{i},"endpoints":[{{"v":{i},"demand":"1"}},{{"v":{},"demand":"1"}}],"profit":"1"}}"#, i + 1))
            .collect();
        let verts: Vec<String> = (0..6).map(|i| format!(r#"{{"id":{i},"capacity":"1"}}"#)).collect();
        let inst = Instance::from_json(&format!(
            r#"{{"vertices":[{}],"edges":[{}],"k":2}}"#,
            verts.join(","),
            edges.join(",")
        ))
        .unwrap();
        let b = baker_partition(&inst, &q(3, 2));
        assert_eq!(b.k, 2);
        assert_eq!(b.classes[0], BTreeSet::from([0, 3]));
        assert_eq!(b.classes[2], BTreeSet::from([2, 5]));
    }
}
