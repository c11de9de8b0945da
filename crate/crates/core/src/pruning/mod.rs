//! Turning the overloaded set `M'` into a feasible solution for two-endpoint instances.

pub mod family;
pub mod small;
pub mod split;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{audit, Error, Result};
use crate::instance::{
    classify, two_coloring, Classification, EdgeId, EdgeSet, Instance, Solution,
    VertexId,
};
use crate::iterated::{iterated_relax, RelaxedOutput};
use crate::matroid::Matroid;
use crate::rational::{self, q, Q};
use family::PairwiseFamily;
use split::{best_matchings, shatter, Component};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Auto,
    General,
    Bipartite,
    Consistent,
    ConflictFree,
    Small,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Strategy::Auto => "auto",
            Strategy::General => "general",
            Strategy::Bipartite => "bipartite",
            Strategy::Consistent => "consistent",
            Strategy::ConflictFree => "conflict-free",
            Strategy::Small => "small",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "auto" => Strategy::Auto,
            "general" => Strategy::General,
            "bipartite" => Strategy::Bipartite,
            "consistent" => Strategy::Consistent,
            "conflict-free" => Strategy::ConflictFree,
            "small" => Strategy::Small,
            _ => return Err(Error::Parse(format!("unknown strategy {s:?}"))),
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PruneOutcome {
    pub strategy: Strategy,
    pub solution: Solution,
    /// Guaranteed `p(M) ≥ factor · p(M')`.
    #[serde(with = "rational::as_string")]
    pub factor: Q,
    /// Exact average profit over the enumerated family, when one was used.
    #[serde(serialize_with = "rational::opt_string::serialize")]
    pub family_average: Option<Q>,
    pub events: u64,
}

/// Per-vertex label: `true` keeps the vertex's small edges, `false` its large ones.
#[derive(Clone, Debug, Serialize)]
pub struct LabeledSplit {
    pub labels: BTreeMap<VertexId, bool>,
    pub agree: EdgeSet,
    pub components: Vec<Component>,
}

fn large_lookup(rel: &RelaxedOutput) -> BTreeMap<VertexId, BTreeSet<EdgeId>> {
    rel.large
        .iter()
        .map(|(v, l)| (*v, l.iter().copied().collect()))
        .collect()
}

impl LabeledSplit {
    pub fn new(
        inst: &Instance,
        m_prime: &EdgeSet,
        large: &BTreeMap<VertexId, BTreeSet<EdgeId>>,
        labels: BTreeMap<VertexId, bool>,
    ) -> Result<Self> {
        let is_large = |e: EdgeId, v: VertexId| large.get(&v).is_some_and(|l| l.contains(&e));
        let agree: EdgeSet = m_prime
            .iter()
            .copied()
            .filter(|&e| {
                inst.e(e)
                    .vertices()
                    .all(|v| labels[&v] != is_large(e, v))
            })
            .collect();
        let components = shatter(inst, &agree, is_large)?;
        Ok(LabeledSplit {
            labels,
            agree,
            components,
        })
    }
}

fn check_two_endpoints(inst: &Instance, what: Strategy) -> Result<()> {
    if inst.edges().iter().any(|e| e.endpoints.len() > 2) {
        return Err(Error::StrategyInapplicable {
            strategy: what.to_string(),
            reason: "pruning needs edges with at most two endpoints".into(),
        });
    }
    Ok(())
}

fn vertex_labels(inst: &Instance, selected: &[bool]) -> BTreeMap<VertexId, bool> {
    inst.vertex_ids().zip(selected.iter().copied()).collect()
}

/// Evaluates `f` on every event and returns the best set and the exact average profit.
fn derandomize(
    inst: &Instance,
    fam: &PairwiseFamily,
    f: impl Fn(&[bool]) -> Result<EdgeSet> + Sync,
) -> Result<(EdgeSet, Q)> {
    let results: Vec<(Q, EdgeSet)> = (0..fam.len())
        .into_par_iter()
        .map(|i| {
            let s = f(&fam.event(i))?;
            Ok((inst.profit(&s), s))
        })
        .collect::<Result<_>>()?;
    let total = results.iter().fold(Q::zero(), |a, r| a + &r.0);
    let mut best: Option<(Q, EdgeSet)> = None;
    for r in results {
        if best.as_ref().is_none_or(|b| r.0 > b.0) {
            best = Some(r);
        }
    }
    Ok((
        best.map(|b| b.1).unwrap_or_default(),
        total / Q::from_integer(fam.len().into()),
    ))
}

fn finish(
    inst: &Instance,
    rel: &RelaxedOutput,
    strategy: Strategy,
    solution: EdgeSet,
    factor: Q,
    family_average: Option<Q>,
    events: u64,
) -> Result<PruneOutcome> {
    audit(solution.is_subset(&rel.m_prime.edges), || {
        format!("{strategy} pruning returned edges outside M'")
    })?;
    audit(inst.capacity_feasible(&solution), || {
        format!("{strategy} pruning returned an infeasible set")
    })?;
    let p = inst.profit(&solution);
    audit(p >= &factor * &rel.profit, || {
        format!(
            "{strategy} pruning kept {} of p(M') = {}, below factor {}",
            p, rel.profit, factor
        )
    })?;
    Ok(PruneOutcome {
        strategy,
        solution: Solution::new(solution),
        factor,
        family_average,
        events,
    })
}

/// Labels vertices with probability 2/5 small, keeps agreeing edges, and splits the shattered
/// paths and cycles into matchings. Keeps at least `3/25` of `p(M')`.
pub fn prune_general(inst: &Instance, rel: &RelaxedOutput) -> Result<PruneOutcome> {
    check_two_endpoints(inst, Strategy::General)?;
    let large = large_lookup(rel);
    let m_prime = &rel.m_prime.edges;
    let fam = PairwiseFamily::new(inst.vertices().len().max(1), 5, 2);
    let (best, avg) = derandomize(inst, &fam, |sel| {
        let split = LabeledSplit::new(inst, m_prime, &large, vertex_labels(inst, sel))?;
        Ok(best_matchings(inst, &split.components))
    })?;
    // survival lower bound per edge under independent labels
    let alpha = q(2, 5);
    let beta = Q::one() - &alpha;
    let mut expected = Q::zero();
    for &e in m_prime {
        let (mut s, mut l) = (0, 0);
        for v in inst.e(e).vertices() {
            if large[&v].contains(&e) {
                l += 1;
            } else {
                s += 1;
            }
        }
        let agree = num::pow(alpha.clone(), s) * num::pow(beta.clone(), l);
        let split = match (s, l) {
            (_, 0) => Q::one(),
            (0, 2) => q(1, 3),
            _ => q(1, 2),
        };
        expected += agree * split * &inst.e(e).profit;
    }
    audit(avg >= expected, || {
        format!("family average {avg} below the survival bound {expected}")
    })?;
    finish(inst, rel, Strategy::General, best, q(3, 25), Some(avg), fam.len())
}

/// Labels with probability 1/2 and keeps the agreeing edges, which are feasible when every pair
/// of edges is. Keeps at least `1/4` of `p(M')`.
pub fn prune_conflict_free(inst: &Instance, rel: &RelaxedOutput) -> Result<PruneOutcome> {
    check_two_endpoints(inst, Strategy::ConflictFree)?;
    if !crate::instance::is_conflict_free(inst) {
        return Err(Error::StrategyInapplicable {
            strategy: Strategy::ConflictFree.to_string(),
            reason: "some pair of edges is infeasible".into(),
        });
    }
    let large = large_lookup(rel);
    let m_prime = &rel.m_prime.edges;
    let fam = PairwiseFamily::new(inst.vertices().len().max(1), 2, 1);
    let (best, avg) = derandomize(inst, &fam, |sel| {
        Ok(LabeledSplit::new(inst, m_prime, &large, vertex_labels(inst, sel))?.agree)
    })?;
    let expected = m_prime.iter().fold(Q::zero(), |a, e| {
        let n = inst.e(*e).endpoints.len();
        a + num::pow(q(1, 2), n) * &inst.e(*e).profit
    });
    audit(avg >= expected, || {
        format!("family average {avg} below the survival bound {expected}")
    })?;
    finish(inst, rel, Strategy::ConflictFree, best, q(1, 4), Some(avg), fam.len())
}

/// Splits `M'` by the small/large status at the two sides of a bipartition into at most seven
/// feasible sets and returns the best. Keeps at least `1/7` of `p(M')`.
pub fn prune_bipartite(inst: &Instance, rel: &RelaxedOutput) -> Result<PruneOutcome> {
    check_two_endpoints(inst, Strategy::Bipartite)?;
    let side = two_coloring(inst).ok_or_else(|| Error::StrategyInapplicable {
        strategy: Strategy::Bipartite.to_string(),
        reason: "graph has an odd cycle".into(),
    })?;
    let large = large_lookup(rel);
    let is_large = |e: EdgeId, v: VertexId| large[&v].contains(&e);
    let mut groups: BTreeMap<(bool, bool), EdgeSet> = BTreeMap::new();
    for &e in &rel.m_prime.edges {
        let mut vs: Vec<VertexId> = inst.e(e).vertices().collect();
        vs.sort_by_key(|v| side[v]);
        let key = match vs.as_slice() {
            [v] => (is_large(e, *v), is_large(e, *v)),
            [a, b] => (is_large(e, *a), is_large(e, *b)),
            _ => unreachable!(),
        };
        groups.entry(key).or_default().insert(e);
    }
    let mut candidates: Vec<EdgeSet> = Vec::new();
    for (_, g) in groups {
        let comps = shatter(inst, &g, is_large)?;
        let mut per: Vec<EdgeSet> = Vec::new();
        for c in &comps {
            audit(!c.cycle || c.edges.len() % 2 == 0, || {
                "odd cycle in a bipartite group".into()
            })?;
            for (i, mt) in c.matchings().into_iter().enumerate() {
                if per.len() <= i {
                    per.push(EdgeSet::new());
                }
                per[i].extend(mt);
            }
        }
        candidates.extend(per);
    }
    audit(candidates.len() <= 7, || {
        format!("bipartite split produced {} sets", candidates.len())
    })?;
    let best = pick_best(inst, candidates, Strategy::Bipartite)?;
    finish(inst, rel, Strategy::Bipartite, best, q(1, 7), None, 0)
}

/// Colors `M'` in decreasing consistent order with five groups, keeping at each vertex either
/// only small edges or a single large one. Keeps at least `1/5` of `p(M')`.
pub fn prune_consistent(inst: &Instance, rel: &RelaxedOutput) -> Result<PruneOutcome> {
    check_two_endpoints(inst, Strategy::Consistent)?;
    let order = crate::instance::consistent_order(inst).ok_or_else(|| {
        Error::StrategyInapplicable {
            strategy: Strategy::Consistent.to_string(),
            reason: "demands admit no consistent edge order".into(),
        }
    })?;
    let pos: BTreeMap<EdgeId, usize> = order.iter().enumerate().map(|(i, e)| (*e, i)).collect();
    let m_prime = &rel.m_prime.edges;
    // large edges by position in the order, so they precede small ones when scanning backwards
    let large: BTreeMap<VertexId, BTreeSet<EdgeId>> = inst
        .vertex_ids()
        .map(|v| {
            let mut inc: Vec<EdgeId> = inst
                .incident(v)
                .iter()
                .copied()
                .filter(|e| m_prime.contains(e))
                .collect();
            inc.sort_by_key(|e| std::cmp::Reverse(pos[e]));
            (v, inc.into_iter().take(2).collect())
        })
        .collect();
    let mut groups: Vec<EdgeSet> = Vec::new();
    let mut group_of: BTreeMap<EdgeId, usize> = BTreeMap::new();
    let mut scan: Vec<EdgeId> = m_prime.iter().copied().collect();
    scan.sort_by_key(|e| std::cmp::Reverse(pos[e]));
    for e in scan {
        let blocked: BTreeSet<usize> = inst
            .e(e)
            .vertices()
            .flat_map(|v| large[&v].iter())
            .filter_map(|f| group_of.get(f).copied())
            .collect();
        let g = (0..).find(|g| !blocked.contains(g)).unwrap();
        audit(g < 5, || format!("edge {e} needed a sixth group"))?;
        if g == groups.len() {
            groups.push(EdgeSet::new());
        }
        groups[g].insert(e);
        group_of.insert(e, g);
    }
    let best = pick_best(inst, groups, Strategy::Consistent)?;
    finish(inst, rel, Strategy::Consistent, best, q(1, 5), None, 0)
}

fn pick_best(inst: &Instance, sets: Vec<EdgeSet>, s: Strategy) -> Result<EdgeSet> {
    let mut best: Option<(Q, EdgeSet)> = None;
    for set in sets {
        audit(inst.capacity_feasible(&set), || {
            format!("{s} produced an infeasible candidate {set:?}")
        })?;
        let p = inst.profit(&set);
        if best.as_ref().is_none_or(|b| p > b.0) {
            best = Some((p, set));
        }
    }
    Ok(best.map(|b| b.1).unwrap_or_default())
}

/// Random dropping plus greedy re-admission for instances with `max d/b ≤ ε`; falls back to
/// the general pruner when the certified fraction is not positive at this `ε`.
pub fn prune_small(inst: &Instance, rel: &RelaxedOutput, eps: &Q) -> Result<PruneOutcome> {
    check_two_endpoints(inst, Strategy::Small)?;
    let actual = crate::instance::epsilon_small(inst);
    if actual > *eps {
        return Err(Error::StrategyInapplicable {
            strategy: Strategy::Small.to_string(),
            reason: format!("max demand ratio {actual} exceeds ε = {eps}"),
        });
    }
    let params = small::small_params(eps, 2);
    if !params.certified {
        log::warn!(
            "small-demand bound {} is not certified at ε = {}; using the general pruner",
            params.bound,
            eps
        );
        return prune_general(inst, rel);
    }
    let run = small::run_family(inst, &rel.m_prime.edges, &params)?;
    audit(run.average >= &params.bound * &rel.profit, || {
        format!(
            "family average {} below {} · p(M')",
            run.average, params.bound
        )
    })?;
    finish(
        inst,
        rel,
        Strategy::Small,
        run.best,
        params.bound,
        Some(run.average),
        run.events,
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub strategy: Strategy,
    #[serde(with = "rational::as_string")]
    pub p: Q,
    #[serde(with = "rational::as_string")]
    pub lp: Q,
    /// `lp / p`, or 1 when both vanish.
    #[serde(with = "rational::as_string")]
    pub ratio: Q,
    /// Guaranteed upper bound on `ratio`.
    #[serde(with = "rational::as_string")]
    pub bound: Q,
    #[serde(with = "rational::as_string")]
    pub m_prime_profit: Q,
    pub feasible: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveOutput {
    pub solution: Solution,
    pub certificate: Certificate,
    pub relaxed: RelaxedOutput,
    pub classification: Classification,
    pub prune: PruneOutcome,
}

/// Runs the iterated relaxation and then the requested pruner.
pub fn solve(
    inst: &Instance,
    matroid: &Matroid,
    strategy: Strategy,
    eps: Option<&Q>,
) -> Result<SolveOutput> {
    let class = classify(inst);
    let strategy = match strategy {
        Strategy::Auto => pick_strategy(&class, eps),
        s => s,
    };
    check_two_endpoints(inst, strategy)?;
    let rel = iterated_relax(inst, matroid)?;
    let prune = match strategy {
        Strategy::General | Strategy::Auto => prune_general(inst, &rel)?,
        Strategy::Bipartite => prune_bipartite(inst, &rel)?,
        Strategy::Consistent => prune_consistent(inst, &rel)?,
        Strategy::ConflictFree => prune_conflict_free(inst, &rel)?,
        Strategy::Small => {
            let e = eps.cloned().unwrap_or_else(|| class.epsilon_small.clone());
            prune_small(inst, &rel, &e)?
        }
    };
    let p = inst.profit(&prune.solution.edges);
    let feasible = inst.is_feasible(&prune.solution.edges, matroid);
    audit(feasible, || "final solution is infeasible".into())?;
    let ratio = if p.is_zero() {
        audit(rel.lp.is_zero(), || "zero profit with a positive LP value".into())?;
        Q::one()
    } else {
        &rel.lp / &p
    };
    let bound = Q::one() / &prune.factor;
    audit(ratio <= bound, || format!("ratio {ratio} above guaranteed {bound}"))?;
    Ok(SolveOutput {
        solution: prune.solution.clone(),
        certificate: Certificate {
            strategy: prune.strategy,
            p,
            lp: rel.lp.clone(),
            ratio,
            bound,
            m_prime_profit: rel.profit.clone(),
            feasible,
        },
        relaxed: rel,
        classification: class,
        prune,
    })
}

/// The applicable pruner with the best guarantee.
pub fn pick_strategy(class: &Classification, eps: Option<&Q>) -> Strategy {
    let mut options: Vec<(Q, Strategy)> = vec![(q(25, 3), Strategy::General)];
    if class.conflict_free {
        options.push((rational::qi(4), Strategy::ConflictFree));
    }
    if class.consistent_order.is_some() {
        options.push((rational::qi(5), Strategy::Consistent));
    }
    if class.bipartite {
        options.push((rational::qi(7), Strategy::Bipartite));
    }
    let e = eps.cloned().unwrap_or_else(|| class.epsilon_small.clone());
    if class.epsilon_small <= e && e.is_positive() {
        let params = small::small_params(&e, 2);
        if params.certified {
            options.push((Q::one() / params.bound, Strategy::Small));
        }
    }
    options
        .into_iter()
        .min_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)))
        .unwrap()
        .1
}

