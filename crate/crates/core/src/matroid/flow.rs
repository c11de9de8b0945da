//! Edmonds–Karp maximum flow over exact rationals.

use std::collections::VecDeque;

use num::Zero;

use crate::rational::Q;

pub(crate) struct FlowNetwork {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<Q>,
}

impl FlowNetwork {
    pub fn new(n: usize) -> Self {
        FlowNetwork {
            head: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    pub fn add_edge(&mut self, u: usize, v: usize, c: Q) {
        self.head[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(c);
        self.head[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(Q::zero());
    }

    /// Returns the flow value and the source side of a minimum cut.
    pub fn max_flow(&mut self, s: usize, t: usize) -> (Q, Vec<bool>) {
        let mut total = Q::zero();
        loop {
            let mut pred: Vec<Option<usize>> = vec![None; self.head.len()];
            let mut seen = vec![false; self.head.len()];
            seen[s] = true;
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                for &a in &self.head[u] {
                    let v = self.to[a];
                    if !seen[v] && self.cap[a] > Q::zero() {
                        seen[v] = true;
                        pred[v] = Some(a);
                        q.push_back(v);
                    }
                }
            }
            if !seen[t] {
                return (total, seen);
            }
            let mut bottleneck: Option<Q> = None;
            let mut v = t;
            while let Some(a) = pred[v] {
                if bottleneck.as_ref().is_none_or(|b| self.cap[a] < *b) {
                    bottleneck = Some(self.cap[a].clone());
                }
                v = self.to[a ^ 1];
            }
            let b = bottleneck.expect("path has an arc");
            let mut v = t;
            while let Some(a) = pred[v] {
                self.cap[a] -= &b;
                self.cap[a ^ 1] += &b;
                v = self.to[a ^ 1];
            }
            total += b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    #[test]
    fn small_network() {
        let mut g = FlowNetwork::new(4);
        g.add_edge(0, 1, qi(3));
        g.add_edge(0, 2, q(5, 2));
        g.add_edge(1, 2, qi(1));
        g.add_edge(1, 3, qi(2));
        g.add_edge(2, 3, qi(3));
        let (f, side) = g.max_flow(0, 3);
        assert_eq!(f, qi(5));
        assert!(side[0] && !side[3]);
    }
}
