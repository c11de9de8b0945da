//! Multi-dimensional knapsack over integer budgets, solved by a sparse table of reachable
//! usage vectors.

use std::collections::BTreeMap;

use num::Zero;

use crate::error::{Error, Result};
use crate::rational::Q;

#[derive(Clone, Debug)]
pub struct MdkItem {
    pub profit: Q,
    pub weights: Vec<u64>,
}

/// Best profit and chosen item indices for every reachable usage vector within `budgets`.
pub type UsageTable = BTreeMap<Vec<u64>, (Q, Vec<usize>)>;

pub fn mdk_table(items: &[MdkItem], budgets: &[u64], cap: usize) -> Result<UsageTable> {
    let mut table: UsageTable = BTreeMap::new();
    table.insert(vec![0; budgets.len()], (Q::zero(), Vec::new()));
    for (i, item) in items.iter().enumerate() {
        if item.weights.len() != budgets.len() {
            return Err(Error::Precondition(format!(
                "item {i} has {} weights for {} budgets",
                item.weights.len(),
                budgets.len()
            )));
        }
        let mut next = table.clone();
        for (usage, (p, chosen)) in &table {
            let u: Vec<u64> = usage.iter().zip(&item.weights).map(|(a, b)| a + b).collect();
            if u.iter().zip(budgets).any(|(a, b)| a > b) {
                continue;
            }
            let cand = p + &item.profit;
            let better = next.get(&u).is_none_or(|(q, _)| cand > *q);
            if better {
                let mut c = chosen.clone();
                c.push(i);
                next.insert(u, (cand, c));
            }
        }
        if next.len() > cap {
            return Err(Error::CapExceeded(format!(
                "knapsack table reached {} usage vectors (cap {cap}); use a larger epsilon or a smaller instance",
                next.len()
            )));
        }
        table = next;
    }
    Ok(table)
}

/// Maximum-profit subset of `items` whose summed weights respect every budget.
pub fn mdk_pack(items: &[MdkItem], budgets: &[u64], cap: usize) -> Result<(Q, Vec<usize>)> {
    let table = mdk_table(items, budgets, cap)?;
    let mut best = (Q::zero(), Vec::new());
    for (p, c) in table.into_values() {
        if p > best.0 {
            best = (p, c);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qi;

    fn item(p: i64, w: &[u64]) -> MdkItem {
        MdkItem { profit: qi(p), weights: w.to_vec() }
    }

    #[test]
    fn single_budget() {
        let items = [item(6, &[6]), item(5, &[5]), item(5, &[5])];
        let (p, c) = mdk_pack(&items, &[10], 1000).unwrap();
        assert_eq!(p, qi(10));
        assert_eq!(c, vec![1, 2]);
    }

    #[test]
    fn zero_budgets_take_weightless_items() {
        let items = [item(3, &[0, 0]), item(9, &[1, 0]), item(2, &[0, 0])];
        let (p, c) = mdk_pack(&items, &[0, 0], 1000).unwrap();
        assert_eq!(p, qi(5));
        assert_eq!(c, vec![0, 2]);
    }

    #[test]
    fn item_counts_against_both_budgets() {
        let items = [item(4, &[2, 2]), item(3, &[2, 0]), item(3, &[0, 2])];
        let (p, _) = mdk_pack(&items, &[2, 2], 1000).unwrap();
        assert_eq!(p, qi(6));
    }

    #[test]
    fn cap_is_reported() {
        let items: Vec<MdkItem> = (0..12).map(|i| item(1, &[1 << i])).collect();
        assert!(matches!(mdk_pack(&items, &[1 << 13], 100), Err(Error::CapExceeded(_))));
    }
}
