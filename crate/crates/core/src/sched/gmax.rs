//! Greedy maximum-rate scheduler.

use super::{check_instance, seeded_placement, AssignmentGrid, Placement};
use crate::config::ScenarioConfig;
use crate::error::Result;
use crate::rate::RateTable;

/// Best unassigned (UE, cluster, carrier) by rate. With `bounded`, only RBs
/// with `occupancy < alpha` qualify. Ties resolve to the lexicographically
/// smallest `(k, z, i)`.
fn best_move(table: &RateTable, p: &Placement, bounded: bool) -> Option<(usize, usize, usize)> {
    let mut best: Option<(usize, usize, usize, f64)> = None;
    for k in (0..p.slot.len()).filter(|&k| p.slot[k].is_none()) {
        for (z, &col) in p.columns.iter().enumerate() {
            for i in 0..p.n_carriers {
                if bounded && p.occ(z, i) >= p.alpha[z] {
                    continue;
                }
                let r = table.get(k, col, i);
                if best.is_none_or(|b| r > b.3) {
                    best = Some((k, z, i, r));
                }
            }
        }
    }
    best.map(|(k, z, i, _)| (k, z, i))
}

/// Runs the two-stage greedy scheduler.
///
/// The configuration step places the `Z` UEs with the highest peak rates
/// one per cluster, with one time slot per cluster. Remaining UEs are then
/// placed one at a time on the free RB that maximizes their rate; when every
/// RB is taken, the best move ignoring capacity opens a new time slot for
/// that cluster and the bounded filling resumes.
pub fn gmax(table: &RateTable, cfg: &ScenarioConfig) -> Result<AssignmentGrid> {
    check_instance(table, cfg)?;
    let mut p = seeded_placement(table, cfg)?;
    while p.assigned < cfg.k {
        while p.assigned < cfg.k && p.assigned < p.capacity() {
            let (k, z, i) = best_move(table, &p, true).expect("free RB and unassigned UE exist");
            p.place(k, z, i);
        }
        if p.assigned < cfg.k {
            let (k, z, i) = best_move(table, &p, false).expect("unassigned UE exists");
            p.alpha[z] += 1;
            p.place(k, z, i);
        }
    }
    Ok(p.into_grid(table, false))
}
