//! Exact optimum of the joint configuration and RB assignment problem.
//!
//! For a fixed slot split `alpha` and a fixed codeword per cluster, the
//! objective is a sum of independent per-UE terms over a fixed multiset of
//! `K` RBs, so the UE placement is a square assignment problem solved
//! exactly. The outer loops enumerate every split and every codeword tuple.

use super::hungarian::max_weight_assignment;
use super::{check_instance, AssignmentGrid, Placement};
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::rate::RateTable;

/// Maximum number of (split, codeword tuple) leaves the oracle will visit.
pub const EXHAUSTIVE_LEAF_CAP: u128 = 10_000_000;

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Leaves visited: splits with `m` non-empty clusters contribute `C^m` each,
/// since empty clusters carry no codeword choice.
pub fn leaf_count(slots: usize, clusters: usize, columns: usize) -> u128 {
    let (s, z, c) = (slots as u128, clusters as u128, columns as u128);
    (1..=z.min(s))
        .map(|m| {
            let splits = binomial(z, m).saturating_mul(binomial(s - 1, m - 1));
            splits.saturating_mul(c.saturating_pow(m as u32))
        })
        .fold(0u128, u128::saturating_add)
}

fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() + 1 == parts {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for a in (0..=left).rev() {
            cur.push(a);
            rec(left - a, parts, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, parts, &mut Vec::with_capacity(parts), &mut out);
    out
}

/// Global optimum, refusing instances above [`EXHAUSTIVE_LEAF_CAP`].
pub fn exhaustive(table: &RateTable, cfg: &ScenarioConfig) -> Result<AssignmentGrid> {
    check_instance(table, cfg)?;
    let n_cols = table.n_columns();
    let leaves = leaf_count(cfg.slots(), cfg.z, n_cols);
    if leaves > EXHAUSTIVE_LEAF_CAP {
        return Err(Error::TooLarge {
            leaves,
            cap: EXHAUSTIVE_LEAF_CAP,
        });
    }
    let k = cfg.k;
    // (total, alpha, columns, slot list, matching)
    type Leaf = (f64, Vec<usize>, Vec<usize>, Vec<(usize, usize)>, Vec<usize>);
    let mut best: Option<Leaf> = None;
    let mut weights = vec![0.0; k * k];
    for alpha in compositions(cfg.slots(), cfg.z) {
        let active: Vec<usize> = (0..cfg.z).filter(|&z| alpha[z] > 0).collect();
        let slots: Vec<(usize, usize)> = active
            .iter()
            .flat_map(|&z| (0..alpha[z]).flat_map(move |_| (0..cfg.f).map(move |i| (z, i))))
            .collect();
        debug_assert_eq!(slots.len(), k);
        let mut digits = vec![0usize; active.len()];
        loop {
            let mut columns = vec![0usize; cfg.z];
            for (d, &z) in digits.iter().zip(&active) {
                columns[z] = *d;
            }
            for ue in 0..k {
                for (s, &(z, i)) in slots.iter().enumerate() {
                    weights[ue * k + s] = table.get(ue, columns[z], i);
                }
            }
            let (matching, total) = max_weight_assignment(&weights, k);
            if best.as_ref().is_none_or(|b| total > b.0) {
                best = Some((total, alpha.clone(), columns, slots.clone(), matching));
            }
            // odometer over active clusters
            let mut pos = 0;
            while pos < digits.len() {
                digits[pos] += 1;
                if digits[pos] < n_cols {
                    break;
                }
                digits[pos] = 0;
                pos += 1;
            }
            if pos == digits.len() {
                break;
            }
        }
    }
    let (_, alpha, columns, slots, matching) = best.expect("at least one split exists");
    let mut p = Placement::new(k, cfg.z, cfg.f);
    p.alpha = alpha;
    p.columns = columns;
    for (ue, &s) in matching.iter().enumerate() {
        let (z, i) = slots[s];
        p.place(ue, z, i);
    }
    Ok(p.into_grid(table, false))
}
