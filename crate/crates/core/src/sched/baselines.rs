//! Reference policies: deterministic assignment (DA) and the unconstrained
//! one-shot configuration baseline (UOSCBC).

use super::{check_instance, seeded_placement, AssignmentGrid, Placement};
use crate::config::ScenarioConfig;
use crate::error::Result;
use crate::rate::RateTable;

/// Deterministic assignment.
///
/// UEs in index order fill `Z` contiguous clusters of (almost) equal size,
/// with remainder slots going to the lowest clusters and carriers dealt
/// round-robin inside each cluster. Each cluster then takes the codeword that
/// maximizes its own sum rate (ties to the lower codeword).
pub fn da(table: &RateTable, cfg: &ScenarioConfig) -> Result<AssignmentGrid> {
    check_instance(table, cfg)?;
    let (base, rem) = (cfg.slots() / cfg.z, cfg.slots() % cfg.z);
    let mut p = Placement::new(cfg.k, cfg.z, cfg.f);
    let mut next = 0;
    for z in 0..cfg.z {
        p.alpha[z] = base + usize::from(z < rem);
        for j in 0..p.alpha[z] * cfg.f {
            p.place(next, z, j % cfg.f);
            next += 1;
        }
    }
    for z in 0..cfg.z {
        let members: Vec<(usize, usize)> = p
            .slot
            .iter()
            .enumerate()
            .filter_map(|(k, s)| s.filter(|s| s.cluster == z).map(|s| (k, s.carrier)))
            .collect();
        let mut best = (0, f64::NEG_INFINITY);
        for c in 0..table.n_columns() {
            let total: f64 = members.iter().map(|&(k, i)| table.get(k, c, i)).sum();
            if total > best.1 {
                best = (c, total);
            }
        }
        p.columns[z] = best.0;
    }
    Ok(p.into_grid(table, false))
}

/// Unconstrained baseline: same configuration step as GMAX, then every other
/// UE independently takes its best (cluster, carrier) with no limit on how
/// many UEs share an RB. The result is flagged `relaxed`; `alpha[z]` reports
/// the most crowded carrier of cluster `z`.
pub fn uoscbc(table: &RateTable, cfg: &ScenarioConfig) -> Result<AssignmentGrid> {
    check_instance(table, cfg)?;
    let mut p = seeded_placement(table, cfg)?;
    for k in 0..cfg.k {
        if p.slot[k].is_some() {
            continue;
        }
        let mut best = (0, 0, f64::NEG_INFINITY);
        for (z, &col) in p.columns.iter().enumerate() {
            for i in 0..cfg.f {
                let r = table.get(k, col, i);
                if r > best.2 {
                    best = (z, i, r);
                }
            }
        }
        p.place(k, best.0, best.1);
    }
    for z in 0..cfg.z {
        p.alpha[z] = (0..cfg.f).map(|i| p.occ(z, i)).max().unwrap_or(0);
    }
    Ok(p.into_grid(table, true))
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::super::{gmax, per_ue_rates, sum_rate, validate, Slot};
    use super::*;

    #[test]
    fn da_layout() {
        let cfg = cfg(4, 2, 2, 2);
        let t = random_table(&cfg, 0);
        let g = da(&t, &cfg).unwrap();
        let s = |cluster, carrier| Some(Slot { cluster, carrier });
        assert_eq!(g.assign, vec![s(0, 0), s(0, 1), s(1, 0), s(1, 1)]);
        assert_eq!(g.alpha, vec![1, 1]);
        assert_eq!(validate(&g, &cfg), Ok(()));
    }

    #[test]
    fn da_single_cluster_takes_best_total() {
        let cfg = cfg(6, 3, 1, 2);
        let t = random_table(&cfg, 1);
        let g = da(&t, &cfg).unwrap();
        let totals: Vec<f64> = (0..4)
            .map(|c| (0..6).map(|k| t.get(k, c, k % 3)).sum())
            .collect();
        let best = (0..4).fold(0, |b, c| if totals[c] > totals[b] { c } else { b });
        assert_eq!(g.configs, vec![best]);
        assert_eq!(g.alpha, vec![2]);
    }

    #[test]
    fn da_uneven_split_goes_to_low_clusters() {
        let cfg = cfg(10, 2, 3, 2);
        let g = da(&random_table(&cfg, 2), &cfg).unwrap();
        assert_eq!(g.alpha, vec![2, 2, 1]);
        assert_eq!(validate(&g, &cfg), Ok(()));
    }

    #[test]
    fn uoscbc_dominates_gmax_per_ue() {
        for (k, f, z) in [(4, 2, 2), (12, 3, 2), (9, 3, 3), (10, 1, 5)] {
            let cfg = cfg(k, f, z, 3);
            for seed in 0..50 {
                let t = random_table(&cfg, seed);
                let g = gmax(&t, &cfg).unwrap();
                let u = uoscbc(&t, &cfg).unwrap();
                assert!(u.relaxed);
                assert_eq!(validate(&u, &cfg), Ok(()));
                assert_eq!(u.configs, g.configs);
                let (rg, ru) = (per_ue_rates(&g, &t).unwrap(), per_ue_rates(&u, &t).unwrap());
                for (a, b) in rg.iter().zip(&ru) {
                    assert!(b >= a);
                }
                assert!(sum_rate(&u, &t).unwrap() >= sum_rate(&g, &t).unwrap());
            }
        }
    }

    #[test]
    fn single_rb_column_coincides_with_gmax() {
        let cfg = cfg(5, 1, 1, 2);
        let t = random_table(&cfg, 3);
        let g = gmax(&t, &cfg).unwrap();
        let u = uoscbc(&t, &cfg).unwrap();
        assert_eq!(AssignmentGrid { relaxed: false, ..u }, g);
    }
}
