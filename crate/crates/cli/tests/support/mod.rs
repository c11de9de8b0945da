//! Random instance generators for the acceptance suite.

use gdm_core::instance::{Edge, Endpoint, Instance, Vertex};
use gdm_core::rational::{q, qi};
use gdm_core::{MatroidSpec, Q};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const KINDS: [&str; 5] = ["free", "uniform", "partition", "graphic", "transversal"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn amount(r: &mut ChaCha8Rng, lo: i64, hi: i64, fractional: bool) -> Q {
    if fractional {
        let d = r.gen_range(1..=3);
        q(r.gen_range(lo * d..=hi * d), d)
    } else {
        qi(r.gen_range(lo..=hi))
    }
}

fn distinct(r: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut vs: Vec<usize> = (0..n).collect();
    vs.shuffle(r);
    vs.truncate(k);
    vs
}

/// Validated instance with edges of exactly `k` endpoints (occasionally one).
pub fn instance(r: &mut ChaCha8Rng, n: usize, m: usize, k: usize, fractional: bool) -> Instance {
    let vertices = (0..n)
        .map(|id| Vertex { id, capacity: amount(r, 4, 14, fractional) })
        .collect();
    let edges = (0..m)
        .map(|id| {
            let arity = if r.gen_bool(0.1) { 1 } else { k };
            Edge {
                id,
                endpoints: distinct(r, n, arity)
                    .into_iter()
                    .map(|v| Endpoint { vertex: v, demand: amount(r, 1, 7, fractional) })
                    .collect(),
                profit: amount(r, 1, 9, fractional),
            }
        })
        .collect();
    Instance::new(vertices, edges, k).unwrap().validate().0
}

pub fn spec(r: &mut ChaCha8Rng, inst: &Instance, kind: &str) -> MatroidSpec {
    let ids: Vec<usize> = inst.edge_ids().collect();
    match kind {
        "free" => MatroidSpec::Free,
        "uniform" => MatroidSpec::Uniform { rank: r.gen_range(1..=ids.len().max(1)) },
        "partition" => {
            let parts = r.gen_range(1..=3);
            let mut classes = vec![Vec::new(); parts];
            for &e in &ids {
                classes[r.gen_range(0..parts)].push(e);
            }
            MatroidSpec::Partition { classes, bounds: (0..parts).map(|_| r.gen_range(1..=3)).collect() }
        }
        "graphic" => MatroidSpec::Graphic { endpoints: None },
        _ => {
            let outlets = r.gen_range(2..=5);
            MatroidSpec::Transversal {
                availability: ids
                    .iter()
                    .map(|&e| (e, (0..r.gen_range(1..=2)).map(|_| r.gen_range(0..outlets)).collect()))
                    .collect(),
            }
        }
    }
}

fn pair(r: &mut ChaCha8Rng, n: usize) -> (usize, usize) {
    let v = distinct(r, n, 2);
    (v[0], v[1])
}

fn edge(id: usize, a: (usize, Q), b: (usize, Q), profit: Q) -> Edge {
    Edge {
        id,
        endpoints: vec![Endpoint { vertex: a.0, demand: a.1 }, Endpoint { vertex: b.0, demand: b.1 }],
        profit,
    }
}

pub fn bipartite(r: &mut ChaCha8Rng, left: usize, right: usize, m: usize) -> Instance {
    let vertices = (0..left + right).map(|id| Vertex { id, capacity: qi(r.gen_range(6..=15)) }).collect();
    let edges = (0..m)
        .map(|id| {
            let a = (r.gen_range(0..left), qi(r.gen_range(1..=6)));
            let b = (left + r.gen_range(0..right), qi(r.gen_range(1..=6)));
            edge(id, a, b, qi(r.gen_range(1..=9)))
        })
        .collect();
    Instance::new(vertices, edges, 2).unwrap().validate().0
}

/// Demands grow with a hidden edge rank, so a consistent order exists.
pub fn consistent(r: &mut ChaCha8Rng, n: usize, m: usize) -> Instance {
    let vertices = (0..n).map(|id| Vertex { id, capacity: qi(r.gen_range(10..=30)) }).collect();
    let mut ranks: Vec<i64> = (1..=m as i64).collect();
    ranks.shuffle(r);
    let edges = (0..m)
        .map(|id| {
            let (a, b) = pair(r, n);
            let rank = ranks[id];
            let extra = r.gen_range(0..=1);
            edge(id, (a, qi(rank)), (b, qi(rank + extra)), qi(r.gen_range(1..=9)))
        })
        .collect();
    Instance::new(vertices, edges, 2).unwrap().validate().0
}

/// Every demand at most half its capacity.
pub fn conflict_free(r: &mut ChaCha8Rng, n: usize, m: usize) -> Instance {
    let caps: Vec<i64> = (0..n).map(|_| 2 * r.gen_range(3..=8)).collect();
    let vertices = (0..n).map(|id| Vertex { id, capacity: qi(caps[id]) }).collect();
    let edges = (0..m)
        .map(|id| {
            let (a, b) = pair(r, n);
            let da = qi(r.gen_range(1..=caps[a] / 2));
            let db = qi(r.gen_range(1..=caps[b] / 2));
            edge(id, (a, da), (b, db), qi(r.gen_range(1..=9)))
        })
        .collect();
    Instance::new(vertices, edges, 2).unwrap()
}

/// Demands in `1..=3` against capacity `3·ratio`.
pub fn small(r: &mut ChaCha8Rng, n: usize, m: usize, ratio: i64) -> Instance {
    let vertices = (0..n).map(|id| Vertex { id, capacity: qi(3 * ratio) }).collect();
    let edges = (0..m)
        .map(|id| {
            let (a, b) = pair(r, n);
            let (da, db) = (qi(r.gen_range(1..=3)), qi(r.gen_range(1..=3)));
            edge(id, (a, da), (b, db), qi(r.gen_range(1..=9)))
        })
        .collect();
    Instance::new(vertices, edges, 2).unwrap()
}

/// Graph with random demands in `1..=max_demand` and capacities in `[lo, hi]`.
pub fn graph(r: &mut ChaCha8Rng, n: usize, m: usize, max_demand: i64, lo: i64, hi: i64) -> Instance {
    let vertices = (0..n).map(|id| Vertex { id, capacity: qi(r.gen_range(lo..=hi)) }).collect();
    let edges = (0..m)
        .map(|id| {
            let (a, b) = pair(r, n);
            let (da, db) = (qi(r.gen_range(1..=max_demand)), qi(r.gen_range(1..=max_demand)));
            edge(id, (a, da), (b, db), qi(r.gen_range(1..=9)))
        })
        .collect();
    Instance::new(vertices, edges, 2).unwrap()
}

pub fn grid(r: &mut ChaCha8Rng, w: usize, h: usize, max_demand: i64, lo: i64, hi: i64) -> Instance {
    let id = |x: usize, y: usize| y * w + x;
    let mut pairs = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if x + 1 < w {
                pairs.push((id(x, y), id(x + 1, y)));
            }
            if y + 1 < h {
                pairs.push((id(x, y), id(x, y + 1)));
            }
        }
    }
    let vertices = (0..w * h).map(|id| Vertex { id, capacity: qi(r.gen_range(lo..=hi)) }).collect();
    let edges = pairs
        .into_iter()
        .enumerate()
        .map(|(i, (a, b))| {
            let (da, db) = (qi(r.gen_range(1..=max_demand)), qi(r.gen_range(1..=max_demand)));
            edge(i, (a, da), (b, db), qi(r.gen_range(1..=9)))
        })
        .collect();
    Instance::new(vertices, edges, 2).unwrap()
}

/// Unit triangle with capacities 1.
pub fn triangle() -> Instance {
    let vertices = (0..3).map(|id| Vertex { id, capacity: qi(1) }).collect();
    let edges = (0..3).map(|i| edge(i, (i, qi(1)), ((i + 1) % 3, qi(1)), qi(1))).collect();
    Instance::new(vertices, edges, 2).unwrap()
}
