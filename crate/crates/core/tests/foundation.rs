mod common;

use std::collections::BTreeMap;

use gdm_core::instance::{EdgeSet, Instance};
use gdm_core::iterated::iterated_relax;
use gdm_core::lp::{self, LpMode, LpSubproblem};
use gdm_core::matroid::Separation;
use gdm_core::oracle::{enumerate_dm, exact_dm, DEFAULT_CAP};
use gdm_core::rational::{q, Q};
use num::Zero;
use proptest::prelude::*;
use rand::Rng;

fn exhaustive_min(m: &gdm_core::Matroid, x: &BTreeMap<usize, Q>) -> Q {
    let ids: Vec<usize> = x.keys().copied().collect();
    let mut best = Q::zero();
    for mask in 1u32..(1 << ids.len()) {
        let s: EdgeSet = (0..ids.len()).filter(|i| mask >> i & 1 == 1).map(|i| ids[i]).collect();
        let v = Q::from_integer(m.rank(&s).into()) - s.iter().fold(Q::zero(), |a, e| a + &x[e]);
        if v < best {
            best = v;
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn separation_matches_exhaustive_minimum(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let n_edges = r.gen_range(1..=11);
        let nv = r.gen_range(2..=5);
        let inst = common::instance(&mut r, &common::Shape::new(nv, n_edges));
        let mut m = common::matroid(&mut r, &inst);
        let ground: Vec<usize> = m.ground().iter().copied().collect();
        for e in ground {
            match r.gen_range(0..6) {
                0 => { let _ = m.contract(e); }
                1 => { m.delete(e).unwrap(); }
                _ => {}
            }
        }
        let x: BTreeMap<usize, Q> = m.ground().iter().map(|&e| (e, q(r.gen_range(0..=5i64), 4))).collect();
        let (set, value) = m.min_slack(&x).unwrap();
        prop_assert_eq!(&value, &exhaustive_min(&m, &x));
        let direct = Q::from_integer(m.rank(&set).into()) - set.iter().fold(Q::zero(), |a, e| a + &x[e]);
        prop_assert_eq!(&direct, &value);
        if let Separation::Violated { gap, .. } = m.separate(&x).unwrap() {
            prop_assert_eq!(gap, -value);
        }
    }

    #[test]
    fn extreme_point_is_feasible_and_bounds_opt(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let inst = { let nv = r.gen_range(2..=5); let ne = r.gen_range(1..=9); common::instance(&mut r, &common::Shape::new(nv, ne)) };
        let m = common::matroid(&mut r, &inst);
        let sub = LpSubproblem::full(&inst, &m, LpMode::Maximize);
        let x = lp::solve_extreme(&inst, &sub, &mut Vec::new()).unwrap();
        prop_assert!(x.basic);
        prop_assert_eq!(m.separate(&x.values).unwrap(), Separation::Inside);
        for v in inst.vertex_ids() {
            let load = inst.incident(v).iter().fold(Q::zero(), |a, e| a + inst.demand(v, *e) * x.get(*e));
            prop_assert!(load <= *inst.capacity(v));
        }
        let opt = exact_dm(&inst, &m, DEFAULT_CAP).unwrap().opt;
        prop_assert!(opt <= x.objective);
    }

    #[test]
    fn iterated_relaxation_dominates_lp(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let k = r.gen_range(2..=3);
        let nv = r.gen_range(2..=6);
        let ne = r.gen_range(1..=10);
        let mut shape = common::Shape::new(nv, ne);
        shape.k = k;
        shape.fractional = r.gen_bool(0.3);
        let inst = common::instance(&mut r, &shape);
        let m = common::matroid(&mut r, &inst);
        let out = iterated_relax(&inst, &m).unwrap();
        prop_assert!(out.profit >= out.lp);
        prop_assert_eq!(out.lp, lp::lp_value(&inst, &m).unwrap());
        prop_assert!(m.is_independent(&out.m_prime.edges));
    }

    #[test]
    fn branch_and_bound_matches_enumeration(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let inst = { let nv = r.gen_range(2..=5); let ne = r.gen_range(1..=12); common::instance(&mut r, &common::Shape::new(nv, ne)) };
        let m = common::matroid(&mut r, &inst);
        let a = exact_dm(&inst, &m, DEFAULT_CAP).unwrap();
        let b = enumerate_dm(&inst, &m).unwrap();
        prop_assert_eq!(&a.opt, &b.opt);
        prop_assert!(inst.is_feasible(&a.witness.edges, &m));
    }

    #[test]
    fn perturbation_preserves_feasible_sets(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let inst = { let nv = r.gen_range(1..=4); let ne = r.gen_range(1..=10); common::instance(&mut r, &common::Shape::new(nv, ne)) };
        let p = inst.perturb().unwrap();
        let ids: Vec<usize> = inst.edge_ids().collect();
        for mask in 0u32..(1 << ids.len()) {
            let s: EdgeSet = (0..ids.len()).filter(|i| mask >> i & 1 == 1).map(|i| ids[i]).collect();
            prop_assert_eq!(inst.capacity_feasible(&s), p.capacity_feasible(&s));
        }
        for v in p.vertex_ids() {
            let ds: Vec<Q> = p.incident(v).iter().map(|e| p.demand(v, *e)).collect();
            let uniq: std::collections::BTreeSet<&Q> = ds.iter().collect();
            prop_assert_eq!(uniq.len(), ds.len());
        }
    }
}

#[test]
fn scaling_then_perturbing_fractional_instance() {
    let inst = Instance::from_json(
        r#"{"vertices":[{"id":0,"capacity":"3/2"}],
        "edges":[{"id":0,"endpoints":[{"v":0,"demand":"1/2"}],"profit":"1"},
                 {"id":1,"endpoints":[{"v":0,"demand":"1"}],"profit":"1"}],"k":2}"#,
    )
    .unwrap();
    let (scaled, f) = inst.scale_to_integers();
    assert_eq!(f, 2.into());
    assert!(scaled.perturb().is_ok());
    assert!(inst.perturb().is_err());
}
