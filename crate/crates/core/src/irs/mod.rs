//! IRS configurations: quantized phase vectors, circular distance, the
//! continuous-phase optimum of a single link and its quantization.

mod codebook;
mod kmeans;

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{CMatrix, CVector, ChannelSet};
use crate::error::{Error, Result};

pub use codebook::{build_codebook, map_to_codebook, training_points, Codebook};
pub use kmeans::{circular_frechet_mean, kmeans_circular, KMeans, KMeansOptions};

/// Quantized per-element phase state of the IRS.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IrsConfiguration {
    bits: u32,
    phase_idx: Vec<u16>,
}

impl IrsConfiguration {
    pub fn new(bits: u32, phase_idx: Vec<u16>) -> Result<Self> {
        if !(1..=16).contains(&bits) {
            return Err(Error::InvalidArgument(format!(
                "phase resolution of {bits} bits unsupported"
            )));
        }
        let levels = 1u32 << bits;
        if let Some(bad) = phase_idx.iter().find(|&&i| u32::from(i) >= levels) {
            return Err(Error::InvalidArgument(format!(
                "phase index {bad} out of range for {bits} bits"
            )));
        }
        Ok(Self { bits, phase_idx })
    }

    /// All elements at phase zero.
    pub fn zeros(bits: u32, n: usize) -> Self {
        Self::new(bits, vec![0; n]).expect("zero indices are valid")
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn levels(&self) -> usize {
        1 << self.bits
    }

    pub fn len(&self) -> usize {
        self.phase_idx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phase_idx.is_empty()
    }

    pub fn indices(&self) -> &[u16] {
        &self.phase_idx
    }

    pub fn into_indices(self) -> Vec<u16> {
        self.phase_idx
    }

    pub fn phases(&self) -> Vec<f64> {
        self.phase_idx
            .iter()
            .map(|&i| grid_phase(i, self.bits))
            .collect()
    }

    /// Reflection coefficients `e^{j theta_n}`.
    pub fn coefficients(&self) -> CVector {
        CVector::from_iterator(
            self.len(),
            self.phases().into_iter().map(|t| Complex64::from_polar(1.0, t)),
        )
    }
}

/// Phase of grid point `idx` at `bits` resolution.
pub fn grid_phase(idx: u16, bits: u32) -> f64 {
    TAU * f64::from(idx) / (1u32 << bits) as f64
}

/// Shortest angular separation of two phases, in `[0, pi]`.
pub fn circular_delta(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Sum of squared per-element angular separations.
pub fn circular_distance_phases(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "phase vectors of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter()
        .zip(b)
        .map(|(&x, &y)| circular_delta(x, y).powi(2))
        .sum())
}

pub fn circular_distance(a: &IrsConfiguration, b: &IrsConfiguration) -> Result<f64> {
    circular_distance_phases(&a.phases(), &b.phases())
}

/// Nearest grid index under circular distance; ties go to the lower index.
pub fn quantize_phase(theta: f64, bits: u32) -> u16 {
    let levels = 1u32 << bits;
    let step = TAU / levels as f64;
    let x = theta.rem_euclid(TAU) / step;
    let lo = (x.floor() as u32).min(levels - 1);
    let hi = (lo + 1) % levels;
    // distances in grid steps
    let d_lo = x - lo as f64;
    let d_hi = 1.0 - d_lo;
    let pick = if d_hi < d_lo || (d_hi == d_lo && hi < lo) {
        hi
    } else {
        lo
    };
    pick as u16
}

pub fn quantize_config(theta: &[f64], bits: u32) -> IrsConfiguration {
    IrsConfiguration::new(
        bits,
        theta.iter().map(|&t| quantize_phase(t, bits)).collect(),
    )
    .expect("quantized indices are in range")
}

/// Continuous-phase configuration maximizing the cascade gain of one link.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousOptimum {
    /// Phases in `[0, 2pi)`, referenced so that element 0 sits at zero.
    pub phases: Vec<f64>,
    /// Achieved `‖G diag(e^{j theta}) H w‖`.
    pub gain: f64,
    /// Set when the effective channel is identically zero.
    pub degenerate: bool,
    pub iterations: usize,
}

const MAX_ALTERNATIONS: usize = 50;
const GAIN_TOL: f64 = 1e-6;

/// Alternating maximization of `‖M e^{j theta}‖` over the phases, given the
/// per-element cascade columns `M` (see [`ChannelSet::cascade_columns`]).
pub fn optimal_phases(columns: &CMatrix) -> ContinuousOptimum {
    let n = columns.ncols();
    let degenerate = ContinuousOptimum {
        phases: vec![0.0; n],
        gain: 0.0,
        degenerate: true,
        iterations: 0,
    };
    let sum: CVector = columns.column_sum();
    let mut combiner = if sum.norm() > 0.0 {
        sum.normalize()
    } else {
        let best = (0..n).max_by(|&a, &b| {
            columns
                .column(a)
                .norm()
                .total_cmp(&columns.column(b).norm())
        });
        match best {
            Some(j) if columns.column(j).norm() > 0.0 => columns.column(j).normalize(),
            _ => return degenerate,
        }
    };

    let mut phases = vec![0.0; n];
    let mut gain = 0.0f64;
    let mut iterations = 0;
    while iterations < MAX_ALTERNATIONS {
        iterations += 1;
        for (j, t) in phases.iter_mut().enumerate() {
            *t = -combiner.dotc(&columns.column(j)).arg();
        }
        let coeffs = CVector::from_iterator(n, phases.iter().map(|&t| Complex64::from_polar(1.0, t)));
        let effective = columns * coeffs;
        let new_gain = effective.norm();
        let improved = new_gain - gain;
        let done = gain > 0.0 && improved <= GAIN_TOL * gain;
        gain = gain.max(new_gain);
        combiner = effective.normalize();
        if done {
            break;
        }
    }

    let reference = phases.first().copied().unwrap_or(0.0);
    for t in &mut phases {
        *t = (*t - reference).rem_euclid(TAU);
    }
    ContinuousOptimum {
        phases,
        gain,
        degenerate: false,
        iterations,
    }
}

/// Continuous optimum for `ue` on `carrier`.
pub fn optimal_continuous_config(
    channels: &ChannelSet,
    ue: usize,
    carrier: usize,
) -> Result<ContinuousOptimum> {
    if ue >= channels.n_ues() || carrier >= channels.n_carriers() {
        return Err(Error::InvalidArgument(format!(
            "ue {ue} / carrier {carrier} out of range"
        )));
    }
    Ok(optimal_phases(&channels.cascade_columns(ue, carrier)))
}
