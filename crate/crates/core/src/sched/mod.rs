//! Scheduling policies over a [`RateTable`].
//!
//! A frame has `K/F` time slots of `F` carriers. Cluster `z` keeps IRS
//! configuration `configs[z]` for `alpha[z]` slots and therefore owns
//! `alpha[z]` resource blocks on every carrier.

mod baselines;
mod exhaustive;
mod ga;
mod gmax;
mod hungarian;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::rate::RateTable;

pub use baselines::{da, uoscbc};
pub use exhaustive::{exhaustive, EXHAUSTIVE_LEAF_CAP};
pub use ga::ga;
pub use gmax::gmax;
pub use hungarian::max_weight_assignment;

/// Resource block of a UE: its cluster (time-slot group) and carrier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Slot {
    pub cluster: usize,
    pub carrier: usize,
}

/// Decision variables of one frame.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentGrid {
    /// Slot of each UE, `None` when unscheduled.
    pub assign: Vec<Option<Slot>>,
    /// Time slots held by each cluster.
    pub alpha: Vec<usize>,
    /// Codebook index used by each cluster.
    pub configs: Vec<usize>,
    /// Set by schedulers that ignore the one-UE-per-RB constraint.
    pub relaxed: bool,
}

impl AssignmentGrid {
    /// Grid with no UE scheduled and every cluster on codeword 0.
    pub fn empty(n_ues: usize, n_clusters: usize) -> Self {
        Self {
            assign: vec![None; n_ues],
            alpha: vec![0; n_clusters],
            configs: vec![0; n_clusters],
            relaxed: false,
        }
    }

    /// Number of UEs on `(cluster, carrier)`.
    pub fn occupancy(&self, cluster: usize, carrier: usize) -> usize {
        self.assign
            .iter()
            .filter(|s| **s == Some(Slot { cluster, carrier }))
            .count()
    }

    /// Distinct configurations actually in use. Clusters sharing a codeword
    /// are merged and scheduled back to back, so this is also the number of
    /// reconfigurations per frame.
    pub fn reconfigurations(&self) -> usize {
        let mut active: Vec<usize> = self
            .configs
            .iter()
            .enumerate()
            .filter(|&(z, _)| {
                self.alpha[z] > 0 || self.assign.iter().flatten().any(|s| s.cluster == z)
            })
            .map(|(_, &c)| c)
            .collect();
        active.sort_unstable();
        active.dedup();
        active.len()
    }

    /// Control bits spent on IRS reconfiguration in one frame.
    pub fn reconfiguration_bits(&self, b_q: u32) -> u64 {
        u64::from(b_q) * self.reconfigurations() as u64
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("grid serializes")
    }
}

/// A constraint broken by a grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    Shape {
        field: &'static str,
        expected: usize,
        found: usize,
    },
    Unassigned {
        ue: usize,
    },
    SlotOutOfRange {
        ue: usize,
        slot: Slot,
    },
    InvalidCodeword {
        cluster: usize,
        codeword: usize,
    },
    Cardinality {
        cluster: usize,
        carrier: usize,
        alpha: usize,
        occupancy: usize,
    },
    SlotSum {
        expected: usize,
        found: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape {
                field,
                expected,
                found,
            } => write!(f, "{field} has length {found}, expected {expected}"),
            Violation::Unassigned { ue } => write!(f, "UE {ue} is unassigned"),
            Violation::SlotOutOfRange { ue, slot } => write!(
                f,
                "UE {ue} on cluster {} carrier {} outside the grid",
                slot.cluster, slot.carrier
            ),
            Violation::InvalidCodeword { cluster, codeword } => {
                write!(f, "cluster {cluster} uses codeword {codeword} outside the codebook")
            }
            Violation::Cardinality {
                cluster,
                carrier,
                alpha,
                occupancy,
            } => write!(
                f,
                "cluster {cluster} carrier {carrier} holds {occupancy} UEs, alpha is {alpha}"
            ),
            Violation::SlotSum { expected, found } => {
                write!(f, "cluster slots sum to {found}, expected {expected}")
            }
        }
    }
}

/// Checks a grid against the frame constraints of `cfg`.
///
/// Relaxed grids are exempt from the per-RB cardinality and slot-sum checks.
pub fn validate(grid: &AssignmentGrid, cfg: &ScenarioConfig) -> std::result::Result<(), Vec<Violation>> {
    let mut v = Vec::new();
    let shape = [
        ("assign", cfg.k, grid.assign.len()),
        ("alpha", cfg.z, grid.alpha.len()),
        ("configs", cfg.z, grid.configs.len()),
    ];
    for (field, expected, found) in shape {
        if expected != found {
            v.push(Violation::Shape {
                field,
                expected,
                found,
            });
        }
    }
    if !v.is_empty() {
        return Err(v);
    }
    for (ue, slot) in grid.assign.iter().enumerate() {
        match slot {
            None => v.push(Violation::Unassigned { ue }),
            Some(s) if s.cluster >= cfg.z || s.carrier >= cfg.f => {
                v.push(Violation::SlotOutOfRange { ue, slot: *s })
            }
            Some(_) => {}
        }
    }
    for (cluster, &codeword) in grid.configs.iter().enumerate() {
        if codeword >= cfg.codebook_size() {
            v.push(Violation::InvalidCodeword { cluster, codeword });
        }
    }
    if !grid.relaxed {
        let mut occ = vec![0usize; cfg.z * cfg.f];
        for s in grid.assign.iter().flatten() {
            if s.cluster < cfg.z && s.carrier < cfg.f {
                occ[s.cluster * cfg.f + s.carrier] += 1;
            }
        }
        for cluster in 0..cfg.z {
            for carrier in 0..cfg.f {
                let occupancy = occ[cluster * cfg.f + carrier];
                if occupancy != grid.alpha[cluster] {
                    v.push(Violation::Cardinality {
                        cluster,
                        carrier,
                        alpha: grid.alpha[cluster],
                        occupancy,
                    });
                }
            }
        }
        let found: usize = grid.alpha.iter().sum();
        if found != cfg.slots() {
            v.push(Violation::SlotSum {
                expected: cfg.slots(),
                found,
            });
        }
    }
    if v.is_empty() {
        Ok(())
    } else {
        Err(v)
    }
}

/// Rate each UE obtains under `grid`; unscheduled UEs get 0.
pub fn per_ue_rates(grid: &AssignmentGrid, table: &RateTable) -> Result<Vec<f64>> {
    grid.assign
        .iter()
        .enumerate()
        .map(|(k, slot)| match slot {
            None => Ok(0.0),
            Some(s) => {
                let cw = *grid.configs.get(s.cluster).ok_or_else(|| {
                    Error::InvalidArgument(format!("UE {k} on missing cluster {}", s.cluster))
                })?;
                table.rate(k, cw, s.carrier).ok_or_else(|| {
                    Error::InvalidArgument(format!("codeword {cw} not in the rate table"))
                })
            }
        })
        .collect()
}

/// Frame sum rate in bit/s/Hz.
pub fn sum_rate(grid: &AssignmentGrid, table: &RateTable) -> Result<f64> {
    Ok(per_ue_rates(grid, table)?.iter().sum())
}

/// A UE placed alone in its own cluster by the configuration step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterSeed {
    pub ue: usize,
    /// Table column (not codebook index).
    pub column: usize,
    pub carrier: usize,
    pub rate: f64,
}

/// Best (column, carrier) of `ue`, ties to the lower column then carrier.
fn best_cell(table: &RateTable, ue: usize) -> (usize, usize, f64) {
    let mut best = (0, 0, f64::NEG_INFINITY);
    for c in 0..table.n_columns() {
        for i in 0..table.n_carriers() {
            let r = table.get(ue, c, i);
            if r > best.2 {
                best = (c, i, r);
            }
        }
    }
    best
}

/// Picks the `z` UEs with the highest individual peak rate, each with the
/// configuration and carrier attaining it. Ties go to the lower UE index.
pub fn configuration_assignment(table: &RateTable, z: usize) -> Result<Vec<ClusterSeed>> {
    if z > table.n_ues() {
        return Err(Error::InvalidArgument(format!(
            "{z} clusters for {} UEs",
            table.n_ues()
        )));
    }
    if table.n_columns() == 0 || table.n_carriers() == 0 {
        return Err(Error::InvalidArgument("empty rate table".into()));
    }
    let mut peaks: Vec<ClusterSeed> = (0..table.n_ues())
        .map(|ue| {
            let (column, carrier, rate) = best_cell(table, ue);
            ClusterSeed {
                ue,
                column,
                carrier,
                rate,
            }
        })
        .collect();
    peaks.sort_by(|a, b| b.rate.total_cmp(&a.rate).then(a.ue.cmp(&b.ue)));
    peaks.truncate(z);
    Ok(peaks)
}

/// Checks that `table` and `cfg` describe the same frame.
pub(crate) fn check_instance(table: &RateTable, cfg: &ScenarioConfig) -> Result<()> {
    if table.n_ues() != cfg.k || table.n_carriers() != cfg.f {
        return Err(Error::InvalidArgument(format!(
            "table is {}x{} (UEs x carriers), config is {}x{}",
            table.n_ues(),
            table.n_carriers(),
            cfg.k,
            cfg.f
        )));
    }
    if cfg.f == 0 || !cfg.k.is_multiple_of(cfg.f) {
        return Err(Error::InvalidArgument(format!(
            "k={} is not a multiple of f={}",
            cfg.k, cfg.f
        )));
    }
    if cfg.z == 0 || cfg.z > cfg.slots() {
        return Err(Error::InvalidArgument(format!(
            "z={} outside [1, {}]",
            cfg.z,
            cfg.slots()
        )));
    }
    if table.n_columns() == 0 {
        return Err(Error::InvalidArgument("rate table has no columns".into()));
    }
    Ok(())
}

/// Mutable placement state shared by the constructive schedulers; clusters
/// refer to table columns until [`Placement::into_grid`].
#[derive(Debug, Clone)]
pub(crate) struct Placement {
    pub slot: Vec<Option<Slot>>,
    pub alpha: Vec<usize>,
    pub columns: Vec<usize>,
    pub occ: Vec<usize>,
    pub n_carriers: usize,
    pub assigned: usize,
}

impl Placement {
    pub fn new(n_ues: usize, n_clusters: usize, n_carriers: usize) -> Self {
        Self {
            slot: vec![None; n_ues],
            alpha: vec![0; n_clusters],
            columns: vec![0; n_clusters],
            occ: vec![0; n_clusters * n_carriers],
            n_carriers,
            assigned: 0,
        }
    }

    pub fn occ(&self, cluster: usize, carrier: usize) -> usize {
        self.occ[cluster * self.n_carriers + carrier]
    }

    pub fn place(&mut self, ue: usize, cluster: usize, carrier: usize) {
        debug_assert!(self.slot[ue].is_none());
        self.slot[ue] = Some(Slot { cluster, carrier });
        self.occ[cluster * self.n_carriers + carrier] += 1;
        self.assigned += 1;
    }

    pub fn capacity(&self) -> usize {
        self.n_carriers * self.alpha.iter().sum::<usize>()
    }

    pub fn into_grid(self, table: &RateTable, relaxed: bool) -> AssignmentGrid {
        AssignmentGrid {
            assign: self.slot,
            alpha: self.alpha,
            configs: self.columns.iter().map(|&c| table.codeword(c)).collect(),
            relaxed,
        }
    }
}

/// Seeds a placement with the configuration step: cluster `z` gets seed
/// `z`'s column and its UE on the seed carrier.
pub(crate) fn seeded_placement(table: &RateTable, cfg: &ScenarioConfig) -> Result<Placement> {
    let seeds = configuration_assignment(table, cfg.z)?;
    let mut p = Placement::new(cfg.k, cfg.z, cfg.f);
    for (z, s) in seeds.iter().enumerate() {
        p.columns[z] = s.column;
        p.alpha[z] = 1;
        p.place(s.ue, z, s.carrier);
    }
    Ok(p)
}
