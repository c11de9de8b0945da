//! Pruning when every demand is a small fraction of its capacity: drop edges at random, then
//! greedily re-admit survivors, derandomized over a pairwise-independent family.

use num::{BigInt, One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::family::{next_prime, PairwiseFamily};
use crate::error::{Error, Result};
use crate::instance::{EdgeId, EdgeSet, Instance};
use crate::rational::{self, Q};

/// Largest family enumerated.
pub const MAX_EVENTS: u64 = 20_000_000;

#[derive(Clone, Debug, Serialize)]
pub struct SmallParams {
    #[serde(with = "rational::as_string")]
    pub eps: Q,
    /// Drop probability actually used: the least `j/p ≥ ε^{1/3}` for the chosen prime `p`.
    #[serde(with = "rational::as_string")]
    pub delta: Q,
    pub prime: u64,
    pub drop_threshold: u64,
    /// `1 − δ − 36ε/δ²`.
    #[serde(with = "rational::as_string")]
    pub bound: Q,
    /// The Chebyshev argument behind `bound` applies at this `ε` and `δ`.
    pub certified: bool,
}

/// Parameters for inputs whose loads exceed capacity by at most `(1 + overload·ε)`.
pub fn small_params(eps: &Q, overload: u32) -> SmallParams {
    // t = ⌈4 / ε^{1/3}⌉, the smallest integer with t³·ε ≥ 64
    let mut t: u64 = 1;
    while Q::from_integer(BigInt::from(t).pow(3)) * eps < Q::from_integer(64.into()) {
        t *= 2;
    }
    let (mut lo, mut hi) = (t / 2, t);
    while lo + 1 < hi {
        let mid = (lo + hi) / 2;
        if Q::from_integer(BigInt::from(mid).pow(3)) * eps >= Q::from_integer(64.into()) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let p = next_prime(hi.max(2));
    let p3 = Q::from_integer(BigInt::from(p).pow(3));
    let mut j: u64 = 0;
    while Q::from_integer(BigInt::from(j).pow(3)) < eps * &p3 {
        j += 1;
    }
    let j = j.min(p);
    let delta = rational::q(j as i64, p as i64);
    let bound = if delta.is_zero() {
        Q::one()
    } else {
        Q::one() - &delta - Q::from_integer(36.into()) * eps / (&delta * &delta)
    };
    let half = rational::q(1, 2);
    let o = Q::from_integer(overload.into());
    let certified = bound > Q::zero()
        && *eps <= half
        && (Q::one() - &delta) * (Q::one() + &o * eps) <= Q::one() - &delta * &half
        && eps * Q::from_integer(6.into()) <= delta;
    SmallParams {
        eps: eps.clone(),
        delta,
        prime: p,
        drop_threshold: j,
        bound,
        certified,
    }
}

#[derive(Clone, Debug)]
pub struct SmallRun {
    pub best: EdgeSet,
    pub average: Q,
    pub events: u64,
}

/// Enumerates the family over `items`; for each event drops the selected items and admits the
/// rest in id order whenever capacities allow.
pub fn run_family(inst: &Instance, items: &EdgeSet, params: &SmallParams) -> Result<SmallRun> {
    let order: Vec<EdgeId> = items.iter().copied().collect();
    let fam = PairwiseFamily::new(order.len().max(1), params.prime, params.drop_threshold);
    if fam.len() > MAX_EVENTS {
        return Err(Error::CapExceeded(format!(
            "pairwise family of {} events (cap {MAX_EVENTS})",
            fam.len()
        )));
    }
    let results: Vec<(u64, Q, EdgeSet)> = (0..fam.len())
        .into_par_iter()
        .map(|idx| {
            let dropped = fam.event(idx);
            let mut chosen = EdgeSet::new();
            let mut loads = std::collections::BTreeMap::new();
            for (i, &e) in order.iter().enumerate() {
                if dropped[i] {
                    continue;
                }
                let edge = inst.e(e);
                let fits = edge.endpoints.iter().all(|ep| {
                    let cur = loads.get(&ep.vertex).cloned().unwrap_or_else(Q::zero);
                    cur + &ep.demand <= *inst.capacity(ep.vertex)
                });
                if fits {
                    for ep in &edge.endpoints {
                        *loads.entry(ep.vertex).or_insert_with(Q::zero) += &ep.demand;
                    }
                    chosen.insert(e);
                }
            }
            (idx, inst.profit(&chosen), chosen)
        })
        .collect();
    let total = results.iter().fold(Q::zero(), |a, r| a + &r.1);
    let best = results
        .into_iter()
        .fold(None::<(u64, Q, EdgeSet)>, |acc, r| match acc {
            Some(a) if a.1 >= r.1 => Some(a),
            _ => Some(r),
        })
        .map(|r| r.2)
        .unwrap_or_default();
    Ok(SmallRun {
        best,
        average: total / Q::from_integer(fam.len().into()),
        events: fam.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn rounded_drop_probability_is_conservative() {
        for eps in [q(1, 64), q(1, 125), q(1, 1000), q(1, 100), q(1, 1_000_000)] {
            let p = small_params(&eps, 2);
            assert!(&p.delta * &p.delta * &p.delta >= eps);
            assert!(p.delta <= rational::qi(1));
        }
        let tiny = small_params(&q(1, 1_000_000), 2);
        assert!(tiny.certified);
        assert!(!small_params(&q(1, 64), 2).certified);
    }
}
