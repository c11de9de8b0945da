//! Approximation scheme for planar demand matching: remove one Baker class, solve the rest
//! exactly as a relaxed problem over a tree decomposition, prune, and keep the best class.

pub mod baker;
pub mod dp;
pub mod knapsack;
pub mod relaxed;
pub mod sparsify;
pub mod treedec;

use std::collections::{BTreeMap, BTreeSet};

use num::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{EdgeSet, Instance, VertexId};
use crate::matroid::Matroid;
use crate::oracle;
use crate::rational::{self, Q};

use baker::baker_partition;
use dp::{dp_relaxed_opt, DpParams, DEFAULT_STATE_CAP};
use relaxed::prune_relaxed;
use treedec::{normalize, tree_decompose, TreeDecomposition};

#[derive(Clone, Debug)]
pub struct PtasOptions {
    /// Accuracy handed to the relaxed DP; `ε/3` when absent.
    pub dp_eps: Option<Q>,
    /// Decomposition of the whole graph; restricted to each class complement.
    pub decomposition: Option<TreeDecomposition>,
    pub state_cap: usize,
    /// Compare against the exact optimum when the instance has at most this many edges.
    pub oracle_cap: usize,
}

impl Default for PtasOptions {
    fn default() -> Self {
        PtasOptions { dp_eps: None, decomposition: None, state_cap: DEFAULT_STATE_CAP, oracle_cap: 0 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassReport {
    pub class: usize,
    pub removed: Vec<VertexId>,
    pub edges: usize,
    pub width: usize,
    pub states: usize,
    #[serde(with = "rational::as_string")]
    pub relaxed_value: Q,
    #[serde(with = "rational::as_string")]
    pub profit: Q,
    /// Guaranteed fraction of the relaxed value kept by pruning, when the bound applies.
    #[serde(with = "rational::opt_string")]
    pub prune_bound: Option<Q>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PtasCertificate {
    #[serde(with = "rational::as_string")]
    pub eps: Q,
    #[serde(with = "rational::as_string")]
    pub dp_eps: Q,
    pub k: usize,
    pub classes: Vec<ClassReport>,
    pub best_class: usize,
    #[serde(with = "rational::as_string")]
    pub profit: Q,
    pub feasible: bool,
    #[serde(with = "rational::opt_string")]
    pub opt: Option<Q>,
    #[serde(with = "rational::opt_string")]
    pub ratio: Option<Q>,
    /// Best profit of an optimal solution's edges surviving one class removal.
    #[serde(with = "rational::opt_string")]
    pub partition_retained: Option<Q>,
    /// `(1 − 2/(k+1))·OPT`.
    #[serde(with = "rational::opt_string")]
    pub partition_bound: Option<Q>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PtasOutput {
    pub solution: EdgeSet,
    pub certificate: PtasCertificate,
}

/// Rejects hyperedges and graphs with more distinct edges than any planar graph allows.
pub fn check_planar_input(inst: &Instance) -> Result<()> {
    if let Some(e) = inst.edges().iter().find(|e| e.endpoints.len() > 2) {
        return Err(Error::Precondition(format!(
            "edge {} has {} endpoints; the approximation scheme needs a graph",
            e.id,
            e.endpoints.len()
        )));
    }
    let pairs: BTreeSet<(VertexId, VertexId)> = inst
        .edges()
        .iter()
        .filter(|e| e.endpoints.len() == 2)
        .map(|e| {
            let (a, b) = (e.endpoints[0].vertex, e.endpoints[1].vertex);
            (a.min(b), a.max(b))
        })
        .collect();
    let n = inst.vertices().len();
    if n >= 3 && pairs.len() > 3 * n - 6 {
        return Err(Error::Precondition(format!(
            "graph has {} distinct edges on {n} vertices, more than 3n-6, so it is not planar; \
             the layering decomposition only covers planar inputs",
            pairs.len()
        )));
    }
    Ok(())
}

struct ClassRun {
    report: ClassReport,
    solution: EdgeSet,
}

pub fn ptas(inst: &Instance, eps: &Q, opts: &PtasOptions) -> Result<PtasOutput> {
    if *eps <= Q::zero() || *eps > rational::one() {
        return Err(Error::Precondition("epsilon must lie in (0, 1]".into()));
    }
    check_planar_input(inst)?;
    if let Some(td) = &opts.decomposition {
        td.validate(inst)?;
    }
    let dp_eps = opts.dp_eps.clone().unwrap_or_else(|| eps / Q::from_integer(3.into()));
    let (scaled, _) = inst.scale_to_integers();
    let work = scaled.perturb()?;
    let part = baker_partition(&work, eps);

    let mut seen = BTreeSet::new();
    let classes: Vec<usize> = (0..part.classes.len())
        .filter(|&i| !part.classes[i].is_empty() || seen.insert(()))
        .collect();
    let all: BTreeSet<VertexId> = work.vertex_ids().collect();
    let runs: Vec<Result<ClassRun>> = classes
        .par_iter()
        .map(|&i| {
            let keep: BTreeSet<VertexId> = all.difference(&part.classes[i]).copied().collect();
            let sub = work.induced(&keep);
            let td = match &opts.decomposition {
                Some(td) => td.restrict(&keep),
                None => tree_decompose(&sub),
            };
            let ntd = normalize(&td);
            let dp = dp_relaxed_opt(&sub, &ntd, &DpParams { eps: dp_eps.clone(), state_cap: opts.state_cap })?;
            let pruned = prune_relaxed(&sub, &dp.solution)?;
            let certified = pruned.intact || pruned.params.certified;
            Ok(ClassRun {
                report: ClassReport {
                    class: i,
                    removed: part.classes[i].iter().copied().collect(),
                    edges: sub.edges().len(),
                    width: td.width(),
                    states: dp.states,
                    relaxed_value: dp.value,
                    profit: inst.profit(&pruned.solution),
                    prune_bound: if pruned.intact {
                        Some(rational::one())
                    } else if certified {
                        Some(pruned.params.bound.clone())
                    } else {
                        None
                    },
                },
                solution: pruned.solution,
            })
        })
        .collect();
    let runs: Vec<ClassRun> = runs.into_iter().collect::<Result<_>>()?;
    let best = runs
        .iter()
        .fold(None::<&ClassRun>, |acc, r| match acc {
            Some(a) if a.report.profit >= r.report.profit => Some(a),
            _ => Some(r),
        })
        .expect("at least one class");
    let solution = best.solution.clone();
    let profit = inst.profit(&solution);
    let feasible = inst.capacity_feasible(&solution);
    if !feasible {
        return Err(Error::Audit("approximation scheme output violates a capacity".into()));
    }

    let (mut opt, mut ratio, mut retained, mut bound) = (None, None, None, None);
    if opts.oracle_cap > 0 && inst.edges().len() <= opts.oracle_cap {
        let exact = oracle::exact_dm(inst, &Matroid::free(inst), opts.oracle_cap)?;
        let layer_class: BTreeMap<VertexId, usize> =
            part.layer.iter().map(|(&v, &l)| (v, l % (part.k + 1))).collect();
        let kept_best = (0..=part.k)
            .map(|i| {
                inst.profit(
                    exact
                        .witness
                        .edges
                        .iter()
                        .filter(|&&e| inst.e(e).vertices().all(|v| layer_class[&v] != i)),
                )
            })
            .max()
            .unwrap_or_else(Q::zero);
        let frac = rational::one() - Q::new(2.into(), (part.k + 1).into());
        if !exact.opt.is_zero() {
            ratio = Some(&profit / &exact.opt);
        }
        bound = Some(frac * &exact.opt);
        retained = Some(kept_best);
        opt = Some(exact.opt);
    }
    Ok(PtasOutput {
        certificate: PtasCertificate {
            eps: eps.clone(),
            dp_eps,
            k: part.k,
            classes: runs.iter().map(|r| r.report.clone()).collect(),
            best_class: best.report.class,
            profit,
            feasible,
            opt,
            ratio,
            partition_retained: retained,
            partition_bound: bound,
        },
        solution,
    })
}
