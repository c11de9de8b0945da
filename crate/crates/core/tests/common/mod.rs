#![allow(dead_code)]

use gdm_core::instance::{Edge, Endpoint, Instance, Vertex};
use gdm_core::matroid::{Matroid, MatroidSpec};
use gdm_core::rational::{q, qi, Q};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub struct Shape {
    pub vertices: usize,
    pub edges: usize,
    pub k: usize,
    pub max_demand: i64,
    pub fractional: bool,
}

impl Shape {
    pub fn new(vertices: usize, edges: usize) -> Self {
        Shape {
            vertices,
            edges,
            k: 2,
            max_demand: 6,
            fractional: false,
        }
    }
}

fn amount(r: &mut ChaCha8Rng, lo: i64, hi: i64, fractional: bool) -> Q {
    if fractional {
        let d = r.gen_range(1..=3);
        q(r.gen_range(lo * d..=hi * d), d)
    } else {
        qi(r.gen_range(lo..=hi))
    }
}

/// Random validated instance: every edge fits its endpoints on its own.
pub fn instance(r: &mut ChaCha8Rng, s: &Shape) -> Instance {
    let vertices: Vec<Vertex> = (0..s.vertices)
        .map(|id| Vertex {
            id,
            capacity: amount(r, s.max_demand, 3 * s.max_demand, s.fractional),
        })
        .collect();
    let ids: Vec<usize> = (0..s.vertices).collect();
    let edges = (0..s.edges)
        .map(|id| {
            let arity = r.gen_range(1..=s.k.min(s.vertices)).max(if s.k >= 2 && s.vertices >= 2 { 2 } else { 1 });
            let arity = if r.gen_bool(0.1) { 1 } else { arity };
            let mut vs = ids.clone();
            vs.shuffle(r);
            Edge {
                id,
                endpoints: vs[..arity]
                    .iter()
                    .map(|&v| Endpoint {
                        vertex: v,
                        demand: amount(r, 1, s.max_demand, s.fractional),
                    })
                    .collect(),
                profit: amount(r, 1, 9, s.fractional),
            }
        })
        .collect();
    Instance::new(vertices, edges, s.k).unwrap().validate().0
}

pub fn matroid_spec(r: &mut ChaCha8Rng, inst: &Instance) -> MatroidSpec {
    let ids: Vec<usize> = inst.edge_ids().collect();
    match r.gen_range(0..5) {
        0 => MatroidSpec::Free,
        1 => MatroidSpec::Uniform {
            rank: r.gen_range(1..=ids.len().max(1)),
        },
        2 => {
            let parts = r.gen_range(1..=3);
            let mut classes = vec![Vec::new(); parts];
            for &e in &ids {
                if r.gen_bool(0.85) {
                    classes[r.gen_range(0..parts)].push(e);
                }
            }
            let bounds = (0..parts).map(|_| r.gen_range(1..=3)).collect();
            MatroidSpec::Partition { classes, bounds }
        }
        3 => MatroidSpec::Graphic { endpoints: None },
        _ => {
            let outlets = r.gen_range(1..=4);
            MatroidSpec::Transversal {
                availability: ids
                    .iter()
                    .map(|&e| {
                        let n = r.gen_range(0..=2);
                        (e, (0..n).map(|_| r.gen_range(0..outlets)).collect())
                    })
                    .collect(),
            }
        }
    }
}

pub fn matroid(r: &mut ChaCha8Rng, inst: &Instance) -> Matroid {
    Matroid::from_spec(&matroid_spec(r, inst), inst).unwrap()
}

/// Two-endpoint instance on a bipartite vertex split.
pub fn bipartite_instance(r: &mut ChaCha8Rng, left: usize, right: usize, edges: usize) -> Instance {
    let vertices: Vec<Vertex> = (0..left + right)
        .map(|id| Vertex { id, capacity: qi(r.gen_range(6..=15)) })
        .collect();
    let edges = (0..edges)
        .map(|id| Edge {
            id,
            endpoints: vec![
                Endpoint { vertex: r.gen_range(0..left), demand: qi(r.gen_range(1..=6)) },
                Endpoint { vertex: left + r.gen_range(0..right), demand: qi(r.gen_range(1..=6)) },
            ],
            profit: qi(r.gen_range(1..=9)),
        })
        .collect();
    Instance::new(vertices, edges, 2).unwrap().validate().0
}

/// Demands increase with a hidden global edge rank, so a consistent order exists.
pub fn consistent_instance(r: &mut ChaCha8Rng, n: usize, edges: usize) -> Instance {
    let vertices: Vec<Vertex> = (0..n)
        .map(|id| Vertex { id, capacity: qi(r.gen_range(10..=30)) })
        .collect();
    let mut ranks: Vec<i64> = (1..=edges as i64).collect();
    ranks.shuffle(r);
    let edges = (0..edges)
        .map(|id| {
            let a = r.gen_range(0..n);
            let mut b = r.gen_range(0..n);
            while b == a {
                b = r.gen_range(0..n);
            }
            let rank = ranks[id];
            Edge {
                id,
                endpoints: vec![
                    Endpoint { vertex: a, demand: qi(rank) },
                    Endpoint { vertex: b, demand: qi(rank + r.gen_range(0..=1)) },
                ],
                profit: qi(r.gen_range(1..=9)),
            }
        })
        .collect();
    Instance::new(vertices, edges, 2).unwrap().validate().0
}

/// Every demand at most half its capacity, so any two edges fit together.
pub fn conflict_free_instance(r: &mut ChaCha8Rng, n: usize, edges: usize) -> Instance {
    let vertices: Vec<Vertex> = (0..n)
        .map(|id| Vertex { id, capacity: qi(2 * r.gen_range(3..=8)) })
        .collect();
    let caps: Vec<Q> = vertices.iter().map(|v| v.capacity.clone()).collect();
    let edges = (0..edges)
        .map(|id| {
            let a = r.gen_range(0..n);
            let mut b = r.gen_range(0..n);
            while b == a {
                b = r.gen_range(0..n);
            }
            let half = |v: usize, r: &mut ChaCha8Rng| {
                let h: i64 = (caps[v].clone() / qi(2)).to_integer().try_into().unwrap();
                qi(r.gen_range(1..=h))
            };
            Edge {
                id,
                endpoints: vec![
                    Endpoint { vertex: a, demand: half(a, r) },
                    Endpoint { vertex: b, demand: half(b, r) },
                ],
                profit: qi(r.gen_range(1..=9)),
            }
        })
        .collect();
    Instance::new(vertices, edges, 2).unwrap()
}

/// Demands at most `cap / ratio`.
pub fn small_instance(r: &mut ChaCha8Rng, n: usize, edges: usize, ratio: i64) -> Instance {
    let vertices: Vec<Vertex> = (0..n)
        .map(|id| Vertex { id, capacity: qi(ratio * 3) })
        .collect();
    let edges = (0..edges)
        .map(|id| {
            let a = r.gen_range(0..n);
            let mut b = r.gen_range(0..n);
            while b == a {
                b = r.gen_range(0..n);
            }
            Edge {
                id,
                endpoints: vec![
                    Endpoint { vertex: a, demand: qi(r.gen_range(1..=3)) },
                    Endpoint { vertex: b, demand: qi(r.gen_range(1..=3)) },
                ],
                profit: qi(r.gen_range(1..=9)),
            }
        })
        .collect();
    Instance::new(vertices, edges, 2).unwrap()
}

/// Two-endpoint instance on `vertices` vertices with random demands, allowing parallel edges.
pub fn graph_instance(r: &mut ChaCha8Rng, vertices: usize, edges: usize, max_demand: i64) -> Instance {
    let vs: Vec<Vertex> = (0..vertices)
        .map(|id| Vertex { id, capacity: qi(r.gen_range(max_demand..=3 * max_demand)) })
        .collect();
    let es = (0..edges)
        .map(|id| {
            let a = r.gen_range(0..vertices);
            let b = (a + r.gen_range(1..vertices)) % vertices;
            Edge {
                id,
                endpoints: vec![
                    Endpoint { vertex: a, demand: qi(r.gen_range(1..=max_demand)) },
                    Endpoint { vertex: b, demand: qi(r.gen_range(1..=max_demand)) },
                ],
                profit: qi(r.gen_range(1..=9)),
            }
        })
        .collect();
    Instance::new(vs, es, 2).unwrap()
}

/// `w × h` grid graph with the given demand range and capacities in `[cap_lo, cap_hi]`.
pub fn grid_instance(r: &mut ChaCha8Rng, w: usize, h: usize, max_demand: i64, cap_lo: i64, cap_hi: i64) -> Instance {
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
    let vs: Vec<Vertex> = (0..w * h).map(|id| Vertex { id, capacity: qi(r.gen_range(cap_lo..=cap_hi)) }).collect();
    let es = pairs
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| Edge {
            id: i,
            endpoints: vec![
                Endpoint { vertex: a, demand: qi(r.gen_range(1..=max_demand)) },
                Endpoint { vertex: b, demand: qi(r.gen_range(1..=max_demand)) },
            ],
            profit: qi(r.gen_range(1..=9)),
        })
        .collect();
    Instance::new(vs, es, 2).unwrap()
}
