//! Reduction from CNF satisfiability to demand matching on a bipartite graph.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{Edge, Endpoint, Instance, Vertex};
use crate::matroid::Matroid;
use crate::oracle;
use crate::rational::{self, qi, Q};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cnf {
    pub vars: usize,
    /// Literals are `±x` with `x` in `1..=vars`.
    pub clauses: Vec<Vec<i64>>,
}

impl Cnf {
    pub fn parse_dimacs(text: &str) -> Result<Cnf> {
        let mut vars = None;
        let mut clauses = Vec::new();
        let mut cur = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('p') {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                if parts.len() != 3 || parts[0] != "cnf" {
                    return Err(Error::Parse(format!("bad problem line {line:?}")));
                }
                vars = Some(
                    parts[1]
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad variable count in {line:?}")))?,
                );
                continue;
            }
            for tok in line.split_whitespace() {
                let lit: i64 = tok
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad literal {tok:?}")))?;
                if lit == 0 {
                    clauses.push(std::mem::take(&mut cur));
                } else {
                    cur.push(lit);
                }
            }
        }
        if !cur.is_empty() {
            clauses.push(cur);
        }
        let vars = vars.ok_or_else(|| Error::Parse("missing 'p cnf' line".into()))?;
        let cnf = Cnf { vars, clauses };
        cnf.check()?;
        Ok(cnf)
    }

    pub fn to_dimacs(&self) -> String {
        let mut s = format!("p cnf {} {}\n", self.vars, self.clauses.len());
        for c in &self.clauses {
            for l in c {
                s.push_str(&format!("{l} "));
            }
            s.push_str("0\n");
        }
        s
    }

    fn check(&self) -> Result<()> {
        for c in &self.clauses {
            for &l in c {
                if l == 0 || l.unsigned_abs() as usize > self.vars {
                    return Err(Error::Parse(format!("literal {l} out of range")));
                }
            }
        }
        Ok(())
    }

    pub fn satisfied_by(&self, assignment: u64) -> usize {
        self.clauses
            .iter()
            .filter(|c| {
                c.iter().any(|&l| {
                    let val = assignment >> (l.unsigned_abs() - 1) & 1 == 1;
                    val == (l > 0)
                })
            })
            .count()
    }

    /// Truth-table check; only for small variable counts.
    pub fn is_satisfiable(&self) -> bool {
        (0..1u64 << self.vars).any(|a| self.satisfied_by(a) == self.clauses.len())
    }

    fn distinct_literals(&self, c: &[i64]) -> Vec<i64> {
        let mut seen = BTreeSet::new();
        c.iter().copied().filter(|l| seen.insert(*l)).collect()
    }

    /// Largest vertex degree of the variable–clause incidence graph (at least 1).
    pub fn degree(&self) -> usize {
        let clause_max = self
            .clauses
            .iter()
            .map(|c| c.iter().map(|l| l.unsigned_abs()).collect::<BTreeSet<_>>().len())
            .max()
            .unwrap_or(0);
        let var_max = (1..=self.vars as u64)
            .map(|x| {
                self.clauses
                    .iter()
                    .filter(|c| c.iter().any(|l| l.unsigned_abs() == x))
                    .count()
            })
            .max()
            .unwrap_or(0);
        clause_max.max(var_max).max(1)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Reduction {
    pub instance: Instance,
    pub d: usize,
    /// `D·|X| + |C|`, reached exactly when the formula is satisfiable.
    #[serde(with = "rational::as_string")]
    pub target: Q,
}

/// Clause vertex `u_c` has id `c`; variable `x` owns `t_x, f_x, v_x` at `|C| + 3(x−1) + {0,1,2}`.
pub fn clause_vertex(c: usize) -> usize {
    c
}

pub fn variable_vertices(cnf: &Cnf, x: usize) -> (usize, usize, usize) {
    let base = cnf.clauses.len() + 3 * (x - 1);
    (base, base + 1, base + 2)
}

/// Builds the instance: heavy edges `v_x t_x`, `v_x f_x` of demand and profit `D`, and unit edges
/// from each clause to `t_x` for negative and `f_x` for positive occurrences of `x`.
pub fn sat_to_dm(cnf: &Cnf) -> Reduction {
    let d = cnf.degree() as i64;
    let mut vertices: Vec<Vertex> = (0..cnf.clauses.len())
        .map(|c| Vertex {
            id: clause_vertex(c),
            capacity: qi(1),
        })
        .collect();
    for x in 1..=cnf.vars {
        let (t, f, v) = variable_vertices(cnf, x);
        for id in [t, f, v] {
            vertices.push(Vertex { id, capacity: qi(d) });
        }
    }
    let mut edges = Vec::new();
    let ep = |vertex, demand: i64| Endpoint {
        vertex,
        demand: qi(demand),
    };
    for x in 1..=cnf.vars {
        let (t, f, v) = variable_vertices(cnf, x);
        for side in [t, f] {
            edges.push(Edge {
                id: edges.len(),
                endpoints: vec![ep(v, d), ep(side, d)],
                profit: qi(d),
            });
        }
    }
    for (c, clause) in cnf.clauses.iter().enumerate() {
        for l in cnf.distinct_literals(clause) {
            let (t, f, _) = variable_vertices(cnf, l.unsigned_abs() as usize);
            let side = if l > 0 { f } else { t };
            edges.push(Edge {
                id: edges.len(),
                endpoints: vec![ep(clause_vertex(c), 1), ep(side, 1)],
                profit: qi(1),
            });
        }
    }
    let instance = Instance::new(vertices, edges, 2).expect("reduction instance is valid");
    Reduction {
        instance,
        d: d as usize,
        target: qi(d * cnf.vars as i64 + cnf.clauses.len() as i64),
    }
}

/// Optimum over solutions that take exactly one heavy edge per variable: `D·|X|` plus the most
/// clauses any assignment satisfies.
pub fn restricted_opt(cnf: &Cnf) -> Q {
    let best = (0..1u64 << cnf.vars)
        .map(|a| cnf.satisfied_by(a))
        .max()
        .unwrap_or(0);
    qi((cnf.degree() * cnf.vars + best) as i64)
}

#[derive(Clone, Debug, Serialize)]
pub struct ReductionCheck {
    pub satisfiable: bool,
    #[serde(with = "rational::as_string")]
    pub opt: Q,
    #[serde(with = "rational::as_string")]
    pub target: Q,
    pub holds: bool,
}

/// Compares satisfiability with `OPT = D·|X| + |C|`, computing `OPT` exactly.
pub fn verify_reduction(cnf: &Cnf, cap: usize) -> Result<ReductionCheck> {
    let red = sat_to_dm(cnf);
    let m = Matroid::free(&red.instance);
    let opt = oracle::exact_dm_simple(&red.instance, &m, cap)?.opt;
    let satisfiable = cnf.is_satisfiable();
    Ok(ReductionCheck {
        satisfiable,
        holds: satisfiable == (opt == red.target),
        opt,
        target: red.target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_dimacs() {
        let c = Cnf::parse_dimacs("c demo\np cnf 2 2\n1 -2 0\n2\n0\n").unwrap();
        assert_eq!(c.clauses, vec![vec![1, -2], vec![2]]);
        assert!(Cnf::parse_dimacs("1 0").is_err());
        assert!(Cnf::parse_dimacs("p cnf 1 1\n2 0").is_err());
    }

    #[test]
    fn single_positive_clause() {
        let c = Cnf {
            vars: 1,
            clauses: vec![vec![1]],
        };
        let r = sat_to_dm(&c);
        assert_eq!(r.d, 1);
        assert_eq!(r.target, qi(2));
        let chk = verify_reduction(&c, oracle::DEFAULT_CAP).unwrap();
        assert!(chk.satisfiable && chk.holds);
    }

    #[test]
    fn contradiction_misses_target() {
        let c = Cnf {
            vars: 1,
            clauses: vec![vec![1], vec![-1]],
        };
        let chk = verify_reduction(&c, oracle::DEFAULT_CAP).unwrap();
        assert!(!chk.satisfiable && chk.holds);
        assert!(chk.opt < chk.target);
    }

    #[test]
    fn empty_formula() {
        let c = Cnf {
            vars: 2,
            clauses: vec![],
        };
        let chk = verify_reduction(&c, oracle::DEFAULT_CAP).unwrap();
        assert_eq!(chk.opt, qi(2));
        assert!(chk.holds);
    }
}
