//! User drops and frequency-dependent gNB→IRS and IRS→UE channels.
//!
//! The model is a clustered geometric one: the gNB→IRS link is a single LOS
//! path, while each IRS→UE link carries an optional LOS path plus a few NLOS
//! single-ray clusters with random angles and excess delays. All nodes lie in
//! the plane and every array is a half-wavelength ULA.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::{ScenarioConfig, SPEED_OF_LIGHT};
use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// NLOS clusters per IRS→UE link.
pub const NLOS_CLUSTERS: usize = 4;
pub const LOS_EXPONENT: f64 = 2.0;
pub const NLOS_EXPONENT: f64 = 3.2;
/// Upper bound of the per-path excess delay.
pub const MAX_EXCESS_DELAY_S: f64 = 200e-9;
/// Nodes closer than this are treated as co-located.
pub const MIN_DISTANCE_M: f64 = 1.0;
/// Element spacing in wavelengths of the centre frequency.
pub const ELEMENT_SPACING: f64 = 0.5;

// Array axes (unit vectors along the aperture). The gNB faces +x into the
// cell; the IRS panel runs along x.
const GNB_AXIS: [f64; 2] = [0.0, 1.0];
const IRS_AXIS: [f64; 2] = [1.0, 0.0];
const UE_AXIS: [f64; 2] = [0.0, 1.0];

/// Positions of one UE realization and its LOS state towards the IRS.
#[derive(Debug, Clone, PartialEq)]
pub struct UeDrop {
    pub positions: Vec<[f64; 2]>,
    pub los: Vec<bool>,
}

impl UeDrop {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Channel matrices of one drop, constant over the frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// gNB→IRS channel per carrier, `n_irs x n_gnb`.
    pub h_gi: Vec<CMatrix>,
    /// IRS→UE channel indexed `[ue][carrier]`, `n_ue x n_irs`.
    pub g_ue: Vec<Vec<CMatrix>>,
    /// Unit-norm gNB beamformer.
    pub w_gnb: CVector,
}

impl ChannelSet {
    pub fn n_ues(&self) -> usize {
        self.g_ue.len()
    }

    pub fn n_carriers(&self) -> usize {
        self.h_gi.len()
    }

    pub fn n_irs(&self) -> usize {
        self.h_gi.first().map_or(0, |h| h.nrows())
    }

    /// Field impinging on the IRS elements on `carrier`: `H(f_i) w`.
    pub fn irs_incident(&self, carrier: usize) -> CVector {
        &self.h_gi[carrier] * &self.w_gnb
    }

    /// Per-element cascade columns `G_k(f_i) diag(H(f_i) w)`.
    ///
    /// Column `n` is the contribution of IRS element `n` before its phase
    /// shift, so the received vector for coefficients `phi` is `M phi`.
    pub fn cascade_columns(&self, ue: usize, carrier: usize) -> CMatrix {
        let incident = self.irs_incident(carrier);
        let mut m = self.g_ue[ue][carrier].clone();
        for (n, mut col) in m.column_iter_mut().enumerate() {
            col *= incident[n];
        }
        m
    }
}

/// Unit-norm response of an `n`-element ULA towards `angle` (from broadside).
pub fn ula_steering(angle: f64, n: usize, spacing: f64) -> Result<CVector> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "steering vector needs at least one element".into(),
        ));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let step = 2.0 * PI * spacing * angle.sin();
    Ok(CVector::from_iterator(
        n,
        (0..n).map(|m| Complex64::from_polar(scale, step * m as f64)),
    ))
}

/// LOS probability of the 3GPP urban micro-cell street canyon scenario.
pub fn los_probability(distance_m: f64) -> f64 {
    if distance_m <= 18.0 {
        1.0
    } else {
        18.0 / distance_m + (-distance_m / 36.0).exp() * (1.0 - 18.0 / distance_m)
    }
}

/// Amplitude gain of a log-distance pathloss law anchored at free space at 1 m.
pub fn pathloss_amplitude(distance_m: f64, freq_hz: f64, exponent: f64) -> f64 {
    let fspl_1m_db = 20.0 * (4.0 * PI * freq_hz / SPEED_OF_LIGHT).log10();
    let loss_db = fspl_1m_db + 10.0 * exponent * distance_m.log10();
    10f64.powf(-loss_db / 20.0)
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Angle between the direction `from → to` and the broadside of an array
/// whose aperture runs along `axis`.
fn angle_from_broadside(from: [f64; 2], to: [f64; 2], axis: [f64; 2]) -> f64 {
    let d = distance(from, to);
    let proj = ((to[0] - from[0]) * axis[0] + (to[1] - from[1]) * axis[1]) / d;
    proj.clamp(-1.0, 1.0).asin()
}

/// Uniform point in the half-disc `x >= 0` around the gNB.
fn sample_position<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> [f64; 2] {
    loop {
        let r = cfg.cell_radius_m * rng.random::<f64>().sqrt();
        let a = rng.random_range(-FRAC_PI_2..=FRAC_PI_2);
        let p = [cfg.gnb_pos_m[0] + r * a.cos(), cfg.gnb_pos_m[1] + r * a.sin()];
        if distance(p, cfg.irs_pos_m) >= MIN_DISTANCE_M && distance(p, cfg.gnb_pos_m) >= MIN_DISTANCE_M
        {
            return p;
        }
    }
}

/// Drops `n` UEs uniformly over the cell and samples their LOS state.
pub fn drop_n<R: Rng + ?Sized>(cfg: &ScenarioConfig, n: usize, rng: &mut R) -> UeDrop {
    let mut positions = Vec::with_capacity(n);
    let mut los = Vec::with_capacity(n);
    for _ in 0..n {
        let p = sample_position(cfg, rng);
        let p_los = los_probability(distance(p, cfg.irs_pos_m));
        positions.push(p);
        los.push(rng.random::<f64>() < p_los);
    }
    UeDrop { positions, los }
}

/// Drops the `cfg.k` UEs of one frame.
pub fn drop_ues<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> UeDrop {
    drop_n(cfg, cfg.k, rng)
}

struct Path {
    gain: Complex64,
    exponent: f64,
    irs_angle: f64,
    ue_angle: f64,
    delay: f64,
}

/// Synthesizes the channels of `drop`.
pub fn synthesize_channels<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    drop: &UeDrop,
    rng: &mut R,
) -> Result<ChannelSet> {
    if drop.los.len() != drop.positions.len() {
        return Err(Error::InvalidArgument(
            "drop positions and LOS flags differ in length".into(),
        ));
    }
    let (n_g, n_i, n_u) = (cfg.n_gnb, cfg.n_irs(), cfg.n_ue);
    let carriers = cfg.carriers();

    let d_gi = distance(cfg.gnb_pos_m, cfg.irs_pos_m);
    if d_gi < MIN_DISTANCE_M {
        return Err(Error::InvalidGeometry(format!(
            "gNB and IRS are {d_gi} m apart"
        )));
    }
    let dep = angle_from_broadside(cfg.gnb_pos_m, cfg.irs_pos_m, GNB_AXIS);
    let arr = angle_from_broadside(cfg.irs_pos_m, cfg.gnb_pos_m, IRS_AXIS);
    let a_gnb = ula_steering(dep, n_g, ELEMENT_SPACING)?;
    let a_irs = ula_steering(arr, n_i, ELEMENT_SPACING)?;
    let los_gi = &a_irs * a_gnb.adjoint() * Complex64::from((n_i as f64 * n_g as f64).sqrt());
    let tau_gi = d_gi / SPEED_OF_LIGHT;
    let h_gi = carriers
        .iter()
        .map(|&fc| {
            let g = pathloss_amplitude(d_gi, fc, LOS_EXPONENT);
            &los_gi * Complex64::from_polar(g, -2.0 * PI * fc * tau_gi)
        })
        .collect();

    let mut g_ue = Vec::with_capacity(drop.len());
    for (&pos, &los) in drop.positions.iter().zip(&drop.los) {
        let d = distance(cfg.irs_pos_m, pos);
        if d < MIN_DISTANCE_M {
            return Err(Error::InvalidGeometry(format!(
                "UE at ({}, {}) is {d} m from the IRS",
                pos[0], pos[1]
            )));
        }
        let tau = d / SPEED_OF_LIGHT;
        let mut paths = Vec::with_capacity(NLOS_CLUSTERS + 1);
        if los {
            paths.push(Path {
                gain: Complex64::new(1.0, 0.0),
                exponent: LOS_EXPONENT,
                irs_angle: angle_from_broadside(cfg.irs_pos_m, pos, IRS_AXIS),
                ue_angle: angle_from_broadside(pos, cfg.irs_pos_m, UE_AXIS),
                delay: tau,
            });
        }
        let cluster_scale = (1.0 / (2.0 * NLOS_CLUSTERS as f64)).sqrt();
        for _ in 0..NLOS_CLUSTERS {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            paths.push(Path {
                gain: Complex64::new(re, im) * cluster_scale,
                exponent: NLOS_EXPONENT,
                irs_angle: rng.random_range(-FRAC_PI_2..FRAC_PI_2),
                ue_angle: rng.random_range(-FRAC_PI_2..FRAC_PI_2),
                delay: tau + rng.random_range(0.0..MAX_EXCESS_DELAY_S),
            });
        }
        let array_gain = Complex64::from((n_u as f64 * n_i as f64).sqrt());
        let responses: Vec<CMatrix> = paths
            .iter()
            .map(|p| {
                let a_u = ula_steering(p.ue_angle, n_u, ELEMENT_SPACING)?;
                let a_i = ula_steering(p.irs_angle, n_i, ELEMENT_SPACING)?;
                Ok(a_u * a_i.adjoint() * array_gain)
            })
            .collect::<Result<_>>()?;
        let per_carrier = carriers
            .iter()
            .map(|&fc| {
                let mut g = CMatrix::zeros(n_u, n_i);
                for (p, resp) in paths.iter().zip(&responses) {
                    let amp = pathloss_amplitude(d, fc, p.exponent);
                    let coeff = p.gain * Complex64::from_polar(amp, -2.0 * PI * fc * p.delay);
                    g += resp * coeff;
                }
                g
            })
            .collect();
        g_ue.push(per_carrier);
    }

    Ok(ChannelSet {
        h_gi,
        g_ue,
        w_gnb: a_gnb,
    })
}
