mod common;

use gdm_core::hardness::{restricted_opt, sat_to_dm, verify_reduction, Cnf};
use gdm_core::oracle::DEFAULT_CAP;
use rand::Rng;

/// Every non-tautological clause over `vars` variables.
fn clauses(vars: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for code in 1..3usize.pow(vars as u32) {
        let mut c = Vec::new();
        let mut x = code;
        for v in 1..=vars as i64 {
            match x % 3 {
                1 => c.push(v),
                2 => c.push(-v),
                _ => {}
            }
            x /= 3;
        }
        out.push(c);
    }
    out
}

fn subsets(pool: &[Vec<i64>], max: usize) -> Vec<Vec<Vec<i64>>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![(0usize, Vec::new())];
    for _ in 0..max {
        let mut next = Vec::new();
        for (start, cur) in &frontier {
            for i in *start..pool.len() {
                let mut c: Vec<Vec<i64>> = cur.clone();
                c.push(pool[i].clone());
                out.push(c.clone());
                next.push((i + 1, c));
            }
        }
        frontier = next;
    }
    out
}

#[test]
fn every_two_variable_formula() {
    for vars in 1..=2 {
        for cls in subsets(&clauses(vars), 4) {
            let cnf = Cnf { vars, clauses: cls };
            let chk = verify_reduction(&cnf, DEFAULT_CAP).unwrap();
            assert!(chk.holds, "{}", cnf.to_dimacs());
            assert_eq!(chk.opt, restricted_opt(&cnf), "{}", cnf.to_dimacs());
        }
    }
}

#[test]
fn random_three_variable_formulas() {
    let mut r = common::rng(21);
    let pool = clauses(3);
    for _ in 0..100 {
        let n = r.gen_range(0..=4);
        let cnf = Cnf { vars: 3, clauses: (0..n).map(|_| pool[r.gen_range(0..pool.len())].clone()).collect() };
        let chk = verify_reduction(&cnf, DEFAULT_CAP).unwrap();
        assert!(chk.holds, "{}", cnf.to_dimacs());
    }
}

#[test]
fn gadget_shape() {
    let cnf = Cnf { vars: 2, clauses: vec![vec![1, 2]] };
    let red = sat_to_dm(&cnf);
    assert_eq!(red.instance.vertices().len(), 1 + 6);
    assert_eq!(red.instance.edges().len(), 2 * 2 + 2);
    let unsat = Cnf { vars: 1, clauses: vec![vec![1], vec![-1]] };
    let chk = verify_reduction(&unsat, DEFAULT_CAP).unwrap();
    assert_eq!(chk.opt, &chk.target - gdm_core::rational::qi(1));
}

#[test]
fn dimacs_round_trip() {
    let cnf = Cnf { vars: 3, clauses: vec![vec![1, -3], vec![2], vec![-1, -2, 3]] };
    assert_eq!(Cnf::parse_dimacs(&cnf.to_dimacs()).unwrap(), cnf);
}
