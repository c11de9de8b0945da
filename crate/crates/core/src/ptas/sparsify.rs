//! Randomized sparsification of a feasible solution into a relaxed one, as a measurable
//! procedure: keep the top demands at each busy vertex as large edges after dropping a random
//! handful of them.

use std::collections::{BTreeMap, BTreeSet};

use num::{One, ToPrimitive};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::relaxed::large_limit;
use crate::error::{Error, Result};
use crate::instance::{largest_at, EdgeId, EdgeSet, Instance, VertexId};
use crate::rational::{self, ceil_usize, Q};

#[derive(Clone, Debug, Serialize)]
pub struct SparsifyReport {
    pub trials: usize,
    pub large_limit: usize,
    pub dropped_per_vertex: usize,
    /// Samples in which every vertex kept at most `large_limit` large edges.
    pub size_ok: usize,
    /// Samples in which every remaining small edge satisfied `d ≤ ε·(b − d(M_v))`.
    pub small_ok: usize,
    pub base_profit: f64,
    pub target: f64,
    pub mean_profit: f64,
    pub std_error: f64,
    /// Highest empirical frequency with which one edge was dropped.
    pub max_removal_frequency: f64,
    /// `2·dropped_per_vertex / large_limit`, the per-edge drop bound.
    pub removal_bound: f64,
}

impl SparsifyReport {
    pub fn structural_ok(&self) -> bool {
        self.size_ok == self.trials && self.small_ok == self.trials
    }

    pub fn mean_ok(&self) -> bool {
        self.mean_profit >= self.target - 3.0 * self.std_error - 1e-9
    }
}

/// One sample: the kept edges and the large set of every vertex.
pub fn sparsify_once(
    inst: &Instance,
    m_star: &EdgeSet,
    eps: &Q,
    rng: &mut ChaCha8Rng,
) -> (EdgeSet, BTreeMap<VertexId, EdgeSet>) {
    let limit = large_limit(eps);
    let r = ceil_usize(&(Q::one() / eps)).min(limit);
    let mut tops: BTreeMap<VertexId, Vec<EdgeId>> = BTreeMap::new();
    let mut dropped = BTreeSet::new();
    for v in inst.vertex_ids() {
        let deg = inst.incident(v).iter().filter(|e| m_star.contains(e)).count();
        let top = largest_at(inst, v, m_star, limit);
        if deg >= limit {
            for i in sample(rng, top.len(), r).into_vec() {
                dropped.insert(top[i]);
            }
        }
        tops.insert(v, top);
    }
    let kept: EdgeSet = m_star.difference(&dropped).copied().collect();
    let large = tops
        .into_iter()
        .map(|(v, t)| (v, t.into_iter().filter(|e| kept.contains(e)).collect()))
        .collect();
    (kept, large)
}

pub fn sparsify_check(inst: &Instance, m_star: &EdgeSet, eps: &Q, trials: usize, seed: u64) -> Result<SparsifyReport> {
    if !inst.capacity_feasible(m_star) {
        return Err(Error::Precondition("sparsification needs a feasible solution".into()));
    }
    if trials == 0 {
        return Err(Error::Precondition("at least one trial is required".into()));
    }
    let limit = large_limit(eps);
    let r = ceil_usize(&(Q::one() / eps)).min(limit);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut size_ok, mut small_ok) = (0, 0);
    let mut profits = Vec::with_capacity(trials);
    let mut removed: BTreeMap<EdgeId, usize> = BTreeMap::new();
    for _ in 0..trials {
        let (kept, large) = sparsify_once(inst, m_star, eps, &mut rng);
        if large.values().all(|s| s.len() <= limit) {
            size_ok += 1;
        }
        let small = large.iter().all(|(&v, mv)| {
            let bbar = inst.capacity(v) - inst.load(v, mv);
            inst.incident(v)
                .iter()
                .filter(|e| kept.contains(e) && !mv.contains(e))
                .all(|&e| inst.demand(v, e) <= eps * &bbar)
        });
        if small {
            small_ok += 1;
        }
        for e in m_star.difference(&kept) {
            *removed.entry(*e).or_default() += 1;
        }
        profits.push(rational::to_f64(&inst.profit(&kept)));
    }
    let n = trials as f64;
    let mean = profits.iter().sum::<f64>() / n;
    let var = if trials > 1 {
        profits.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let base = rational::to_f64(&inst.profit(m_star));
    let two_eps = (eps * Q::from_integer(2.into())).to_f64().unwrap_or(0.0);
    Ok(SparsifyReport {
        trials,
        large_limit: limit,
        dropped_per_vertex: r,
        size_ok,
        small_ok,
        base_profit: base,
        target: (1.0 - two_eps) * base,
        mean_profit: mean,
        std_error: (var / n).sqrt(),
        max_removal_frequency: removed.values().max().map_or(0.0, |&c| c as f64 / n),
        removal_bound: 2.0 * r as f64 / limit as f64,
    })
}
