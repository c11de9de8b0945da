//! Exact dynamic program over a binary tree decomposition for the best relaxed solution.
//!
//! A bag state fixes, for each vertex of the bag, its large set and the grid units its small
//! edges have consumed inside the subtree. Every edge is decided once, at the deeper of its
//! endpoints' topmost bags, where both endpoints are present.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num::Zero;
use serde::Serialize;

use super::knapsack::{mdk_table, MdkItem, UsageTable};
use super::relaxed::{large_limit, small_units, usage_budget, RelaxedSolution};
use super::treedec::NormalizedTd;
use crate::error::{audit, Error, Result};
use crate::instance::{EdgeId, EdgeSet, Instance, VertexId};
use crate::rational::{self, Q};

pub const DEFAULT_STATE_CAP: usize = 2_000_000;

#[derive(Clone, Debug)]
pub struct DpParams {
    pub eps: Q,
    /// Largest number of states held for one bag.
    pub state_cap: usize,
}

impl DpParams {
    pub fn new(eps: Q) -> Self {
        DpParams { eps, state_cap: DEFAULT_STATE_CAP }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DpResult {
    #[serde(with = "rational::as_string")]
    pub value: Q,
    pub solution: RelaxedSolution,
    /// Total states stored over all bags.
    pub states: usize,
    pub width: usize,
}

struct LargeOption {
    edges: BTreeSet<EdgeId>,
    bbar: Q,
}

const NONE: u64 = u64::MAX;

#[derive(Clone)]
struct Back {
    child_keys: Vec<Vec<u64>>,
    opts: Vec<u64>,
    packed: Vec<EdgeId>,
}

type Table = BTreeMap<Vec<u64>, (Q, Back)>;

struct Ctx<'a> {
    inst: &'a Instance,
    eps: Q,
    m: usize,
    budget: u64,
    cap: usize,
    options: BTreeMap<VertexId, Vec<LargeOption>>,
}

impl Ctx<'_> {
    fn units(&self, v: VertexId, opt: u64, e: EdgeId) -> Option<u64> {
        let o = &self.options[&v][opt as usize];
        small_units(&self.inst.demand(v, e), &o.bbar, self.m, &self.eps)
    }

    fn check_cap(&self, n: usize, what: &str) -> Result<()> {
        if n > self.cap {
            return Err(Error::CapExceeded(format!(
                "{what} reached {n} states (cap {}); use a larger epsilon or a smaller instance",
                self.cap
            )));
        }
        Ok(())
    }
}

fn large_options(inst: &Instance, v: VertexId, limit: usize, cap: usize) -> Result<Vec<LargeOption>> {
    let inc = inst.incident(v).to_vec();
    let b = inst.capacity(v).clone();
    let mut out = Vec::new();
    let mut cur: Vec<EdgeId> = Vec::new();
    fn rec(
        inst: &Instance,
        v: VertexId,
        inc: &[EdgeId],
        i: usize,
        limit: usize,
        load: Q,
        b: &Q,
        cur: &mut Vec<EdgeId>,
        out: &mut Vec<LargeOption>,
        cap: usize,
    ) -> Result<()> {
        if i == inc.len() {
            if out.len() >= cap {
                return Err(Error::CapExceeded(format!("vertex {v} has more than {cap} large-set options")));
            }
            out.push(LargeOption { edges: cur.iter().copied().collect(), bbar: b - &load });
            return Ok(());
        }
        rec(inst, v, inc, i + 1, limit, load.clone(), b, cur, out, cap)?;
        if cur.len() < limit {
            let l = &load + inst.demand(v, inc[i]);
            if l <= *b {
                cur.push(inc[i]);
                rec(inst, v, inc, i + 1, limit, l, b, cur, out, cap)?;
                cur.pop();
            }
        }
        Ok(())
    }
    rec(inst, v, &inc, 0, limit, Q::zero(), &b, &mut cur, &mut out, cap)?;
    Ok(out)
}

struct LocalPack {
    forced: Vec<u64>,
    forced_profit: Q,
    forced_edges: Vec<EdgeId>,
    items: Vec<EdgeId>,
    table: UsageTable,
}

/// Edges packed at a bag under fixed large sets: those in some large set are forced, the
/// rest become knapsack items when small at every endpoint. `None` if a forced edge is not
/// small where it has to be.
fn local_pack(ctx: &Ctx, bv: &[VertexId], opts: &[u64], here: &[EdgeId]) -> Result<Option<LocalPack>> {
    let n = bv.len();
    let pos = |v: VertexId| bv.iter().position(|&w| w == v).expect("endpoint in packing bag");
    let mut lp = LocalPack {
        forced: vec![0; n],
        forced_profit: Q::zero(),
        forced_edges: Vec::new(),
        items: Vec::new(),
        table: UsageTable::new(),
    };
    let mut items = Vec::new();
    for &e in here {
        let edge = ctx.inst.e(e);
        let forced = edge
            .vertices()
            .any(|v| ctx.options[&v][opts[pos(v)] as usize].edges.contains(&e));
        let mut w = vec![0u64; n];
        let mut small_everywhere = true;
        for v in edge.vertices() {
            let i = pos(v);
            if ctx.options[&v][opts[i] as usize].edges.contains(&e) {
                continue;
            }
            match ctx.units(v, opts[i], e) {
                Some(u) => w[i] = u,
                None => small_everywhere = false,
            }
        }
        if forced {
            if !small_everywhere {
                return Ok(None);
            }
            for i in 0..n {
                lp.forced[i] += w[i];
            }
            lp.forced_profit += &edge.profit;
            lp.forced_edges.push(e);
        } else if small_everywhere {
            items.push(MdkItem { profit: edge.profit.clone(), weights: w });
            lp.items.push(e);
        }
    }
    if lp.forced.iter().any(|&f| f > ctx.budget) {
        return Ok(None);
    }
    let budgets: Vec<u64> = lp.forced.iter().map(|f| ctx.budget - f).collect();
    lp.table = mdk_table(&items, &budgets, ctx.cap)?;
    Ok(Some(lp))
}

fn put<V>(map: &mut BTreeMap<Vec<u64>, (Q, V)>, key: Vec<u64>, val: Q, extra: impl FnOnce() -> V) {
    match map.get(&key) {
        Some((old, _)) if *old >= val => {}
        _ => {
            map.insert(key, (val, extra()));
        }
    }
}

pub fn dp_relaxed_opt(inst: &Instance, td: &NormalizedTd, params: &DpParams) -> Result<DpResult> {
    let eps = params.eps.clone();
    if eps <= Q::zero() || eps > rational::one() {
        return Err(Error::Precondition("epsilon must lie in (0, 1]".into()));
    }
    if let Some(e) = inst.edges().iter().find(|e| e.endpoints.len() > 2) {
        return Err(Error::Precondition(format!("edge {} has more than two endpoints", e.id)));
    }
    for v in inst.vertex_ids() {
        if !td.top.contains_key(&v) {
            return Err(Error::Precondition(format!("vertex {v} is in no bag")));
        }
    }
    let nb = td.bags.len();
    let mut pack_at: Vec<Vec<EdgeId>> = vec![Vec::new(); nb];
    for e in inst.edges() {
        let b = td.packing_bag(inst, e.id);
        if !e.vertices().all(|v| td.bags[b].contains(&v)) {
            return Err(Error::Precondition(format!("no bag covers edge {}", e.id)));
        }
        pack_at[b].push(e.id);
    }
    let m = inst.edges().len();
    let limit = large_limit(&eps);
    let mut options = BTreeMap::new();
    for v in inst.vertex_ids() {
        options.insert(v, large_options(inst, v, limit, params.state_cap)?);
    }
    let ctx = Ctx { inst, budget: usage_budget(m, &eps), eps: eps.clone(), m, cap: params.state_cap, options };

    let mut tables: Vec<Table> = vec![Table::new(); nb];
    let mut states = 0usize;
    for &b in td.postorder() {
        let bv: Vec<VertexId> = td.bags[b].iter().copied().collect();
        let n = bv.len();
        let pos: HashMap<VertexId, usize> = bv.iter().enumerate().map(|(i, v)| (*v, i)).collect();

        let mut partial: BTreeMap<Vec<u64>, (Q, Vec<Vec<u64>>)> = BTreeMap::new();
        let mut blank = vec![0u64; 2 * n];
        for i in 0..n {
            blank[2 * i] = NONE;
        }
        partial.insert(blank, (Q::zero(), Vec::new()));
        for &c in &td.children[b] {
            let shared: Vec<usize> = td.bags[c].iter().filter_map(|v| pos.get(v).copied()).collect();
            let mut next = BTreeMap::new();
            for (pk, (pv, pkeys)) in &partial {
                'entries: for (ck, (cv, _)) in &tables[c] {
                    let mut key = pk.clone();
                    for (j, &i) in shared.iter().enumerate() {
                        let (o, u) = (ck[2 * j], ck[2 * j + 1]);
                        if key[2 * i] != NONE && key[2 * i] != o {
                            continue 'entries;
                        }
                        key[2 * i] = o;
                        key[2 * i + 1] += u;
                        if key[2 * i + 1] > ctx.budget {
                            continue 'entries;
                        }
                    }
                    put(&mut next, key, pv + cv, || {
                        let mut ks = pkeys.clone();
                        ks.push(ck.clone());
                        ks
                    });
                }
            }
            ctx.check_cap(next.len(), &format!("merging children at bag {b}"))?;
            partial = next;
        }
        for i in 0..n {
            let count = ctx.options[&bv[i]].len() as u64;
            if partial.keys().all(|k| k[2 * i] != NONE) {
                continue;
            }
            let mut next = BTreeMap::new();
            for (k, (val, keys)) in partial {
                for o in 0..count {
                    let mut k2 = k.clone();
                    k2[2 * i] = o;
                    next.insert(k2, (val.clone(), keys.clone()));
                }
            }
            ctx.check_cap(next.len(), &format!("choosing large sets at bag {b}"))?;
            partial = next;
        }

        let mut cache: HashMap<Vec<u64>, Option<LocalPack>> = HashMap::new();
        let mut full: Table = Table::new();
        for (k, (val, child_keys)) in partial {
            let opts: Vec<u64> = k.iter().step_by(2).copied().collect();
            if !cache.contains_key(&opts) {
                let lp = local_pack(&ctx, &bv, &opts, &pack_at[b])?;
                cache.insert(opts.clone(), lp);
            }
            let Some(lp) = &cache[&opts] else { continue };
            'packs: for (du, (p, chosen)) in &lp.table {
                let mut key = k.clone();
                for i in 0..n {
                    key[2 * i + 1] += lp.forced[i] + du[i];
                    if key[2 * i + 1] > ctx.budget {
                        continue 'packs;
                    }
                }
                put(&mut full, key, &val + &lp.forced_profit + p, || Back {
                    child_keys: child_keys.clone(),
                    opts: opts.clone(),
                    packed: lp
                        .forced_edges
                        .iter()
                        .copied()
                        .chain(chosen.iter().map(|&j| lp.items[j]))
                        .collect(),
                });
            }
            ctx.check_cap(full.len(), &format!("packing edges at bag {b}"))?;
        }

        let keep: Vec<usize> = match td.parent[b] {
            Some(p) => (0..n).filter(|&i| td.bags[p].contains(&bv[i])).collect(),
            None => Vec::new(),
        };
        let mut projected = Table::new();
        for (k, (val, back)) in full {
            let pk: Vec<u64> = keep.iter().flat_map(|&i| [k[2 * i], k[2 * i + 1]]).collect();
            put(&mut projected, pk, val, || back);
        }
        states += projected.len();
        tables[b] = projected;
    }

    let (value, _) = tables[td.root]
        .get(&Vec::new())
        .cloned()
        .ok_or_else(|| Error::Audit("root bag has no state".into()))?;
    let mut edges = EdgeSet::new();
    let mut large: BTreeMap<VertexId, EdgeSet> = BTreeMap::new();
    let mut stack = vec![(td.root, Vec::new())];
    while let Some((b, key)) = stack.pop() {
        let back = &tables[b][&key].1;
        for (i, &v) in td.bags[b].iter().enumerate() {
            let set = &ctx.options[&v][back.opts[i] as usize].edges;
            match large.get(&v) {
                Some(s) => audit(s == set, || format!("vertex {v} has two large sets in the witness"))?,
                None => {
                    large.insert(v, set.clone());
                }
            }
        }
        for &e in &back.packed {
            audit(edges.insert(e), || format!("edge {e} packed twice"))?;
        }
        for (&c, ck) in td.children[b].iter().zip(&back.child_keys) {
            stack.push((c, ck.clone()));
        }
    }
    large.retain(|_, s| !s.is_empty());
    let solution = RelaxedSolution { edges, large, eps };
    solution.audit(inst)?;
    audit(inst.profit(&solution.edges) == value, || "witness profit differs from the table value".into())?;
    Ok(DpResult { value, solution, states, width: td.width() })
}
