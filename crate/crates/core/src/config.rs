//! Scenario parameters and the JSON document they are read from.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Current version of the scenario JSON schema.
pub const SCHEMA_VERSION: u32 = 1;

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Largest codebook address width accepted by the simulator.
pub const MAX_CODEBOOK_BITS: u32 = 24;

/// Genetic algorithm knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaParams {
    pub population: usize,
    pub generations: usize,
    pub mutation_rate: f64,
    pub elitism: usize,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            population: 40,
            generations: 200,
            mutation_rate: 0.3,
            elitism: 2,
        }
    }
}

/// All physical and combinatorial parameters of a run.
///
/// Missing JSON fields fall back to the full-scale urban micro-cell scenario
/// returned by [`ScenarioConfig::default`]; [`ScenarioConfig::desk`] is the
/// reduced profile used for tests and quick sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    /// Number of UEs served per frame.
    pub k: usize,
    /// Number of carriers (resource blocks per time slot).
    pub f: usize,
    /// Maximum number of IRS configurations (clusters) per frame.
    pub z: usize,
    pub n_gnb: usize,
    pub n_ue: usize,
    pub irs_rows: usize,
    pub irs_cols: usize,
    /// Phase quantization bits per IRS element.
    pub b_irs: u32,
    /// Codebook address bits.
    pub b_codebook: u32,
    pub carrier_hz: f64,
    pub band_hz: f64,
    pub tx_power_dbm: f64,
    pub noise_psd_dbm_hz: f64,
    pub cell_radius_m: f64,
    pub gnb_pos_m: [f64; 2],
    pub irs_pos_m: [f64; 2],
    /// UEs in the codebook training drop.
    pub m_training: usize,
    pub n_drops: usize,
    pub seed: u64,
    pub ga: GaParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            k: 90,
            f: 5,
            z: 14,
            n_gnb: 32,
            n_ue: 4,
            irs_rows: 20,
            irs_cols: 40,
            b_irs: 1,
            b_codebook: 14,
            carrier_hz: 28e9,
            band_hz: 20e6,
            tx_power_dbm: 33.0,
            noise_psd_dbm_hz: -174.0,
            cell_radius_m: 167.0,
            gnb_pos_m: [0.0, 0.0],
            irs_pos_m: [75.0, 100.0],
            // 2^14 centroids need at least that many (UE, carrier) points
            m_training: 4000,
            n_drops: 50,
            seed: 0,
            ga: GaParams::default(),
        }
    }
}

impl ScenarioConfig {
    /// Desk-scale profile: K=30, F=3, 8x8 IRS, b_q=6.
    pub fn desk() -> Self {
        Self {
            k: 30,
            f: 3,
            z: 5,
            n_gnb: 8,
            n_ue: 2,
            irs_rows: 8,
            irs_cols: 8,
            b_irs: 1,
            b_codebook: 6,
            m_training: 300,
            ..Self::default()
        }
    }

    pub fn from_json_str(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Reads and validates a scenario document.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg = Self::from_json_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Number of IRS elements.
    pub fn n_irs(&self) -> usize {
        self.irs_rows * self.irs_cols
    }

    /// Number of time slots per frame.
    pub fn slots(&self) -> usize {
        self.k / self.f
    }

    pub fn codebook_size(&self) -> usize {
        1usize << self.b_codebook
    }

    /// Per-RB transmit power in watts (uniform split across carriers).
    pub fn sigma_s2(&self) -> f64 {
        dbm_to_watt(self.tx_power_dbm) / self.f as f64
    }

    /// Per-RB noise power in watts.
    pub fn sigma_n2(&self) -> f64 {
        dbm_to_watt(self.noise_psd_dbm_hz) * self.band_hz / self.f as f64
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    /// Carrier frequencies at the centres of `f` equal sub-bands.
    pub fn carriers(&self) -> Vec<f64> {
        let width = self.band_hz / self.f as f64;
        let low = self.carrier_hz - self.band_hz / 2.0;
        (0..self.f)
            .map(|i| low + (i as f64 + 0.5) * width)
            .collect()
    }

    /// Checks every structural invariant and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        let mut check = |ok: bool, msg: String| {
            if !ok {
                errs.push(msg);
            }
        };
        check(
            self.schema_version == SCHEMA_VERSION,
            format!(
                "schema_version {} unsupported (expected {SCHEMA_VERSION})",
                self.schema_version
            ),
        );
        check(self.k >= 1, "k must be positive".into());
        check(self.f >= 1, "f must be positive".into());
        if self.k >= 1 && self.f >= 1 {
            check(
                self.k.is_multiple_of(self.f),
                format!("k={} is not a multiple of f={}", self.k, self.f),
            );
            check(
                self.z >= 1 && self.z <= self.k / self.f,
                format!("z={} outside [1, k/f={}]", self.z, self.k / self.f),
            );
        }
        check(
            self.n_gnb >= 1 && self.n_ue >= 1 && self.n_irs() >= 1,
            "antenna and IRS element counts must be positive".into(),
        );
        check(
            (1..=8).contains(&self.b_irs),
            format!("b_irs={} outside [1, 8]", self.b_irs),
        );
        check(
            self.b_codebook <= MAX_CODEBOOK_BITS,
            format!("b_codebook={} exceeds {MAX_CODEBOOK_BITS}", self.b_codebook),
        );
        check(
            (self.b_codebook as usize) <= self.b_irs as usize * self.n_irs(),
            format!(
                "b_codebook={} exceeds b_irs*n_irs={}",
                self.b_codebook,
                self.b_irs as usize * self.n_irs()
            ),
        );
        check(
            self.m_training >= 10 * self.k,
            format!(
                "m_training={} below 10*k={}",
                self.m_training,
                10 * self.k
            ),
        );
        check(
            self.carrier_hz > 0.0 && self.band_hz > 0.0 && self.band_hz < 2.0 * self.carrier_hz,
            "carrier_hz and band_hz must be positive with band below twice the carrier".into(),
        );
        check(
            self.tx_power_dbm.is_finite() && self.noise_psd_dbm_hz.is_finite(),
            "powers must be finite".into(),
        );
        check(
            self.cell_radius_m > 0.0,
            "cell_radius_m must be positive".into(),
        );
        check(
            self.gnb_pos_m.iter().chain(&self.irs_pos_m).all(|v| v.is_finite()),
            "positions must be finite".into(),
        );
        check(self.n_drops >= 1, "n_drops must be positive".into());
        check(
            self.ga.population >= 1
                && self.ga.elitism >= 1
                && self.ga.elitism <= self.ga.population,
            "ga requires 1 <= elitism <= population".into(),
        );
        check(
            (0.0..=1.0).contains(&self.ga.mutation_rate),
            "ga.mutation_rate outside [0, 1]".into(),
        );
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(errs))
        }
    }
}

pub fn dbm_to_watt(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}
