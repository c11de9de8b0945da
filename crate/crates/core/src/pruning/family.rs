//! Pairwise-independent families of selection vectors.
//!
//! Items are identified with distinct vectors `φ(i) ∈ GF(p)^m` (base-`p` digits of `i`), and an
//! event `(a, b)` maps item `i` to `h(i) = ⟨a, φ(i)⟩ + b mod p`. Over all `p^(m+1)` events each
//! `h(i)` is uniform and any two are independent, so `h(i) < threshold` selects every item with
//! probability exactly `threshold / p` and every pair independently.

use crate::rational::{q, Q};

#[derive(Clone, Debug)]
pub struct PairwiseFamily {
    items: usize,
    p: u64,
    m: u32,
    threshold: u64,
}

impl PairwiseFamily {
    pub fn new(items: usize, p: u64, threshold: u64) -> Self {
        assert!(is_prime(p), "{p} is not prime");
        assert!(threshold <= p);
        let mut m = 1;
        while p.pow(m) < items as u64 {
            m += 1;
        }
        PairwiseFamily {
            items,
            p,
            m,
            threshold,
        }
    }

    pub fn items(&self) -> usize {
        self.items
    }

    pub fn len(&self) -> u64 {
        self.p.pow(self.m + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn marginal(&self) -> Q {
        q(self.threshold as i64, self.p as i64)
    }

    /// Hash values of all items under event `idx`.
    pub fn values(&self, idx: u64) -> Vec<u64> {
        let p = self.p;
        let mut rest = idx;
        let b = rest % p;
        rest /= p;
        let a: Vec<u64> = (0..self.m)
            .map(|_| {
                let d = rest % p;
                rest /= p;
                d
            })
            .collect();
        (0..self.items as u64)
            .map(|i| {
                let mut x = i;
                let mut h = b;
                for aj in &a {
                    h = (h + aj * (x % p)) % p;
                    x /= p;
                }
                h
            })
            .collect()
    }

    pub fn event(&self, idx: u64) -> Vec<bool> {
        self.values(idx)
            .into_iter()
            .map(|h| h < self.threshold)
            .collect()
    }
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

pub fn next_prime(n: u64) -> u64 {
    (n.max(2)..).find(|&x| is_prime(x)).unwrap()
}
