//! Tree decompositions: min-fill construction, validation and binary normalization.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{EdgeId, Instance, VertexId};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDecomposition {
    pub bags: Vec<BTreeSet<VertexId>>,
    pub edges: Vec<(usize, usize)>,
}

impl TreeDecomposition {
    pub fn width(&self) -> usize {
        self.bags.iter().map(|b| b.len()).max().unwrap_or(1).max(1) - 1
    }

    pub fn validate(&self, inst: &Instance) -> Result<()> {
        let bad = |m: String| Err(Error::Precondition(format!("invalid tree decomposition: {m}")));
        let n = self.bags.len();
        if n == 0 {
            return bad("no bags".into());
        }
        if self.edges.len() + 1 != n {
            return bad(format!("{} bags need {} tree edges", n, n - 1));
        }
        let mut uf = crate::matroid::UnionFind::default();
        for &(a, b) in &self.edges {
            if a >= n || b >= n || !uf.union(a, b) {
                return bad(format!("tree edge ({a}, {b}) is out of range or closes a cycle"));
            }
        }
        for v in inst.vertex_ids() {
            let holding: Vec<usize> = (0..n).filter(|&i| self.bags[i].contains(&v)).collect();
            if holding.is_empty() {
                return bad(format!("vertex {v} is in no bag"));
            }
            let mut uf = crate::matroid::UnionFind::default();
            let mut parts = holding.len();
            for &(a, b) in &self.edges {
                if self.bags[a].contains(&v) && self.bags[b].contains(&v) && uf.union(a, b) {
                    parts -= 1;
                }
            }
            if parts != 1 {
                return bad(format!("bags holding vertex {v} are not connected"));
            }
        }
        for e in inst.edges() {
            let vs: BTreeSet<VertexId> = e.vertices().collect();
            if !self.bags.iter().any(|b| vs.is_subset(b)) {
                return bad(format!("no bag covers edge {}", e.id));
            }
        }
        Ok(())
    }

    /// Same tree with every bag intersected with `keep`.
    pub fn restrict(&self, keep: &BTreeSet<VertexId>) -> TreeDecomposition {
        TreeDecomposition {
            bags: self
                .bags
                .iter()
                .map(|b| b.intersection(keep).copied().collect())
                .collect(),
            edges: self.edges.clone(),
        }
    }
}

/// Elimination by minimum fill-in (ties: fewer neighbours, then lower id).
pub fn tree_decompose(inst: &Instance) -> TreeDecomposition {
    let mut adj = inst.adjacency();
    if adj.is_empty() {
        return TreeDecomposition {
            bags: vec![BTreeSet::new()],
            edges: vec![],
        };
    }
    let mut order: Vec<VertexId> = Vec::new();
    let mut bag_of: BTreeMap<VertexId, BTreeSet<VertexId>> = BTreeMap::new();
    while !adj.is_empty() {
        let v = *adj
            .iter()
            .min_by_key(|(v, ns)| {
                let ns: Vec<&VertexId> = ns.iter().collect();
                let mut fill = 0usize;
                for i in 0..ns.len() {
                    for j in i + 1..ns.len() {
                        if !adj[ns[i]].contains(ns[j]) {
                            fill += 1;
                        }
                    }
                }
                (fill, ns.len(), **v)
            })
            .unwrap()
            .0;
        let ns = adj.remove(&v).unwrap();
        for a in &ns {
            let s = adj.get_mut(a).unwrap();
            s.remove(&v);
            s.extend(ns.iter().copied().filter(|b| b != a));
        }
        let mut bag = ns.clone();
        bag.insert(v);
        bag_of.insert(v, bag);
        order.push(v);
    }
    let pos: BTreeMap<VertexId, usize> = order.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let bags: Vec<BTreeSet<VertexId>> = order.iter().map(|v| bag_of[v].clone()).collect();
    let mut edges = Vec::new();
    let mut roots = Vec::new();
    for (i, v) in order.iter().enumerate() {
        let next = bag_of[v]
            .iter()
            .filter(|u| *u != v)
            .map(|u| pos[u])
            .min();
        match next {
            Some(j) => edges.push((i, j)),
            None => roots.push(i),
        }
    }
    for w in roots.windows(2) {
        edges.push((w[0], w[1]));
    }
    TreeDecomposition { bags, edges }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Here,
    Left,
    Right,
    Up,
}

/// Rooted decomposition in which every internal bag has exactly two children.
#[derive(Clone, Debug, Serialize)]
pub struct NormalizedTd {
    pub bags: Vec<BTreeSet<VertexId>>,
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
    pub root: usize,
    /// Topmost bag holding each vertex.
    pub top: BTreeMap<VertexId, usize>,
    depth: Vec<usize>,
    tin: Vec<usize>,
    tout: Vec<usize>,
    post: Vec<usize>,
}

/// Roots at bag 0; a single child gets an empty sibling, and extra children hang under
/// copies of their parent bag.
pub fn normalize(td: &TreeDecomposition) -> NormalizedTd {
    let n = td.bags.len();
    let mut nbr = vec![Vec::new(); n];
    for &(a, b) in &td.edges {
        nbr[a].push(b);
        nbr[b].push(a);
    }
    for l in nbr.iter_mut() {
        l.sort_unstable();
    }
    let mut out = NormalizedTd {
        bags: Vec::new(),
        parent: Vec::new(),
        children: Vec::new(),
        root: 0,
        top: BTreeMap::new(),
        depth: Vec::new(),
        tin: Vec::new(),
        tout: Vec::new(),
        post: Vec::new(),
    };
    fn add(out: &mut NormalizedTd, bag: BTreeSet<VertexId>, parent: Option<usize>) -> usize {
        out.bags.push(bag);
        out.parent.push(parent);
        out.children.push(Vec::new());
        if let Some(p) = parent {
            out.children[p].push(out.bags.len() - 1);
        }
        out.bags.len() - 1
    }
    // (original bag, its original parent, new parent)
    fn place(out: &mut NormalizedTd, td: &TreeDecomposition, nbr: &[Vec<usize>], orig: usize, from: Option<usize>, parent: Option<usize>) {
        let me = add(out, td.bags[orig].clone(), parent);
        let kids: Vec<usize> = nbr[orig].iter().copied().filter(|&c| Some(c) != from).collect();
        hang(out, td, nbr, orig, me, &kids);
    }
    fn hang(out: &mut NormalizedTd, td: &TreeDecomposition, nbr: &[Vec<usize>], orig: usize, me: usize, kids: &[usize]) {
        match kids.len() {
            0 => {}
            1 => {
                place(out, td, nbr, kids[0], Some(orig), Some(me));
                add(out, BTreeSet::new(), Some(me));
            }
            2 => {
                place(out, td, nbr, kids[0], Some(orig), Some(me));
                place(out, td, nbr, kids[1], Some(orig), Some(me));
            }
            _ => {
                place(out, td, nbr, kids[0], Some(orig), Some(me));
                let dup = add(out, td.bags[orig].clone(), Some(me));
                hang(out, td, nbr, orig, dup, &kids[1..]);
            }
        }
    }
    place(&mut out, td, &nbr, 0, None, None);
    let m = out.bags.len();
    out.depth = vec![0; m];
    out.tin = vec![0; m];
    out.tout = vec![0; m];
    let mut clock = 0;
    let mut stack = vec![(0usize, false)];
    while let Some((b, done)) = stack.pop() {
        if done {
            out.tout[b] = clock;
            out.post.push(b);
            continue;
        }
        out.tin[b] = clock;
        clock += 1;
        stack.push((b, true));
        for &c in out.children[b].iter().rev() {
            out.depth[c] = out.depth[b] + 1;
            stack.push((c, false));
        }
    }
    for b in 0..m {
        for &v in &out.bags[b] {
            let cur = out.top.entry(v).or_insert(b);
            if out.depth[b] < out.depth[*cur] {
                *cur = b;
            }
        }
    }
    out
}

impl NormalizedTd {
    /// `a` is `b` or an ancestor of `b`.
    pub fn contains_subtree(&self, a: usize, b: usize) -> bool {
        self.tin[a] <= self.tin[b] && self.tout[b] <= self.tout[a]
    }

    pub fn postorder(&self) -> &[usize] {
        &self.post
    }

    pub fn is_binary(&self) -> bool {
        self.children.iter().all(|c| c.is_empty() || c.len() == 2)
    }

    pub fn width(&self) -> usize {
        self.bags.iter().map(|b| b.len()).max().unwrap_or(1).max(1) - 1
    }

    /// Bag at which an edge is packed: the deeper of its endpoints' topmost bags.
    pub fn packing_bag(&self, inst: &Instance, e: EdgeId) -> usize {
        inst.e(e)
            .vertices()
            .map(|v| self.top[&v])
            .max_by_key(|&b| self.depth[b])
            .unwrap()
    }

    /// Where the topmost bag of `e`'s other endpoint lies, seen from bag `b` holding `v`.
    pub fn direction(&self, inst: &Instance, b: usize, v: VertexId, e: EdgeId) -> Option<Direction> {
        let other = inst.e(e).vertices().find(|&u| u != v).unwrap_or(v);
        let t = self.top[&other];
        if t == b {
            return Some(Direction::Here);
        }
        if self.contains_subtree(t, b) {
            return Some(Direction::Up);
        }
        let kids = &self.children[b];
        if kids.len() == 2 {
            if self.contains_subtree(kids[0], t) {
                return Some(Direction::Left);
            }
            if self.contains_subtree(kids[1], t) {
                return Some(Direction::Right);
            }
        }
        None
    }

    /// `δ^κ(v : b)` for each direction `κ`.
    pub fn direction_sets(&self, inst: &Instance, b: usize, v: VertexId) -> BTreeMap<Direction, Vec<EdgeId>> {
        let mut out: BTreeMap<Direction, Vec<EdgeId>> = BTreeMap::new();
        for &e in inst.incident(v) {
            if let Some(d) = self.direction(inst, b, v, e) {
                out.entry(d).or_default().push(e);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(w: usize, h: usize) -> Instance {
        let mut edges = Vec::new();
        let id = |x: usize, y: usize| y * w + x;
        for y in 0..h {
            for x in 0..w {
                if x + 1 < w {
                    edges.push((id(x, y), id(x + 1, y)));
                }
                if y + 1 < h {
                    edges.push((id(x, y), id(x, y + 1)));
                }
            }
        }
        let es: Vec<String> = edges
            .iter()
            .enumerate()
            .map(|(i, (a, b))| format!(r#"{{"id":{i},"endpoints":[{{"v":{a},"demand":"1"}},{{"v":{b},"demand":"1"}}],"profit":"1"}}"#))
            .collect();
        let vs: Vec<String> = (0..w * h).map(|i| format!(r#"{{"id":{i},"capacity":"2"}}"#)).collect();
        Instance::from_json(&format!(r#"{{"vertices":[{}],"edges":[{}],"k":2}}"#, vs.join(","), es.join(","))).unwrap()
    }

    #[test]
    fn grid_decomposition_is_valid_and_narrow() {
        let g = grid(3, 2);
        let td = tree_decompose(&g);
        td.validate(&g).unwrap();
        assert_eq!(td.width(), 2);
        let n = normalize(&td);
        assert!(n.is_binary());
        let back = TreeDecomposition {
            bags: n.bags.clone(),
            edges: (0..n.bags.len()).filter_map(|b| n.parent[b].map(|p| (p, b))).collect(),
        };
        back.validate(&g).unwrap();
    }

    #[test]
    fn star_decomposition_gets_duplicate() {
        let td = TreeDecomposition {
            bags: vec![
                BTreeSet::from([0]),
                BTreeSet::from([0, 1]),
                BTreeSet::from([0, 2]),
                BTreeSet::from([0, 3]),
            ],
            edges: vec![(0, 1), (0, 2), (0, 3)],
        };
        let n = normalize(&td);
        assert!(n.is_binary());
        assert_eq!(n.children[n.root].len(), 2);
        assert_eq!(n.bags.len(), 5);
        assert_eq!(n.top[&0], 0);
    }

    #[test]
    fn rejects_disconnected_occurrence() {
        let g = grid(2, 1);
        let td = TreeDecomposition {
            bags: vec![BTreeSet::from([0, 1]), BTreeSet::new(), BTreeSet::from([0])],
            edges: vec![(0, 1), (1, 2)],
        };
        assert!(td.validate(&g).is_err());
    }
}
