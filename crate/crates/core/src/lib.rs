//! Multi-carrier scheduling with a shared, codebook-driven intelligent
//! reflecting surface (IRS).
//!
//! The pipeline is: [`channel`] synthesizes per-carrier gNB-IRS-UE channels,
//! [`irs`] builds a k-means codebook of quantized IRS configurations,
//! [`rate`] evaluates the per-(UE, codeword, carrier) rate table, [`sched`]
//! assigns UEs to resource blocks under a cap on IRS reconfigurations per
//! frame, and [`harness`] runs seeded Monte Carlo sweeps and writes CSV/SVG.

pub mod channel;
pub mod config;
pub mod error;
pub mod harness;
pub mod irs;
pub mod rate;
pub mod rng;
pub mod sched;

pub use channel::{ChannelSet, UeDrop};
pub use config::{GaParams, ScenarioConfig};
pub use error::{Error, Result};
pub use harness::{
    emit_csv, emit_plots, run_experiment, CodebookSource, ExperimentOptions, ExperimentReport,
    MetricsReport, SchedulerKind, Sweep,
};
pub use irs::{Codebook, IrsConfiguration};
pub use rate::{RateTable, TableMode};
pub use sched::{AssignmentGrid, Slot, Violation};
