//! Achievable rate of a UE under a given IRS configuration, and the dense
//! table of rates that every scheduler consumes.

use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{CMatrix, CVector, ChannelSet};
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::irs::{map_to_codebook, optimal_phases, Codebook, IrsConfiguration};

/// Shannon rate for a cascade power gain `‖A‖^2`.
pub fn rate_from_gain(gain2: f64, sigma_s2: f64, sigma_n2: f64) -> f64 {
    (1.0 + gain2 * sigma_s2 / sigma_n2).log2()
}

/// Effective receive vector `G_k(f_i) Φ H(f_i) w`.
pub fn effective_vector(
    channels: &ChannelSet,
    irs: &IrsConfiguration,
    ue: usize,
    carrier: usize,
) -> Result<CVector> {
    if ue >= channels.n_ues() || carrier >= channels.n_carriers() {
        return Err(Error::InvalidArgument(format!(
            "ue {ue} / carrier {carrier} out of range"
        )));
    }
    if irs.len() != channels.n_irs() {
        return Err(Error::InvalidArgument(format!(
            "configuration has {} elements, IRS has {}",
            irs.len(),
            channels.n_irs()
        )));
    }
    let reflected = channels
        .irs_incident(carrier)
        .component_mul(&irs.coefficients());
    Ok(&channels.g_ue[ue][carrier] * reflected)
}

/// Rate in bit/s/Hz with a unit-norm matched-filter combiner at the UE.
///
/// The combiner `conj(A)/‖A‖` makes `|v^T A| = ‖A‖`, so the rate reduces to
/// `log2(1 + ‖A‖^2 sigma_s^2 / sigma_n^2)`. A blocked cascade yields 0.
pub fn achievable_rate(
    channels: &ChannelSet,
    irs: &IrsConfiguration,
    ue: usize,
    carrier: usize,
    sigma_s2: f64,
    sigma_n2: f64,
) -> Result<f64> {
    if !(sigma_s2 > 0.0 && sigma_n2 > 0.0) {
        return Err(Error::InvalidArgument("powers must be positive".into()));
    }
    let a = effective_vector(channels, irs, ue, carrier)?;
    let g2 = a.norm_squared();
    if g2 == 0.0 {
        return Ok(0.0);
    }
    Ok(rate_from_gain(g2, sigma_s2, sigma_n2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableMode {
    /// Every codeword evaluated for every (UE, carrier).
    Exhaustive,
    /// Only codewords nearest to some link's continuous optimum.
    Projected,
}

impl std::str::FromStr for TableMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Self::Exhaustive),
            "projected" => Ok(Self::Projected),
            other => Err(Error::InvalidArgument(format!("unknown table mode {other:?}"))),
        }
    }
}

/// Continuous optimum of one (UE, carrier) link and the codeword it maps to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectedCell {
    pub codeword: usize,
    /// Rate under `codeword`.
    pub rate: f64,
    /// Rate under the unquantized optimum.
    pub continuous_rate: f64,
}

/// Rates `r[k][c][i]` over a set of candidate codewords ("columns").
///
/// In exhaustive mode the columns are the whole codebook in order. In
/// projected mode they are the sorted union of the codewords selected by
/// projecting each link's continuous optimum, and every column is evaluated
/// for every (UE, carrier).
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    n_ues: usize,
    n_carriers: usize,
    codebook_size: usize,
    codewords: Vec<usize>,
    r: Vec<f64>,
    projected: Option<Vec<ProjectedCell>>,
}

impl RateTable {
    /// Table over the full codebook from a flat `[k][c][i]` array.
    pub fn from_rates(n_ues: usize, n_codewords: usize, n_carriers: usize, r: Vec<f64>) -> Result<Self> {
        Self::with_columns(n_ues, n_carriers, n_codewords, (0..n_codewords).collect(), r)
    }

    /// Table over selected codewords of a `codebook_size` codebook.
    pub fn with_columns(
        n_ues: usize,
        n_carriers: usize,
        codebook_size: usize,
        codewords: Vec<usize>,
        r: Vec<f64>,
    ) -> Result<Self> {
        if r.len() != n_ues * codewords.len() * n_carriers {
            return Err(Error::InvalidArgument(format!(
                "{} rates for a {n_ues}x{}x{n_carriers} table",
                r.len(),
                codewords.len()
            )));
        }
        if codewords.windows(2).any(|w| w[0] >= w[1]) || codewords.last().is_some_and(|&c| c >= codebook_size) {
            return Err(Error::InvalidArgument(
                "columns must be increasing codebook indices".into(),
            ));
        }
        if let Some(bad) = r.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidArgument(format!("rate {bad} is not finite and non-negative")));
        }
        Ok(Self {
            n_ues,
            n_carriers,
            codebook_size,
            codewords,
            r,
            projected: None,
        })
    }

    pub fn n_ues(&self) -> usize {
        self.n_ues
    }

    pub fn n_carriers(&self) -> usize {
        self.n_carriers
    }

    pub fn n_columns(&self) -> usize {
        self.codewords.len()
    }

    pub fn codebook_size(&self) -> usize {
        self.codebook_size
    }

    /// Codebook index of column `col`.
    pub fn codeword(&self, col: usize) -> usize {
        self.codewords[col]
    }

    pub fn codewords(&self) -> &[usize] {
        &self.codewords
    }

    /// Column holding `codeword`, if it was evaluated.
    pub fn column(&self, codeword: usize) -> Option<usize> {
        self.codewords.binary_search(&codeword).ok()
    }

    /// Rate of `ue` under column `col` on `carrier`.
    #[inline]
    pub fn get(&self, ue: usize, col: usize, carrier: usize) -> f64 {
        self.r[(ue * self.codewords.len() + col) * self.n_carriers + carrier]
    }

    /// Rate of `ue` under codebook entry `codeword`, if evaluated.
    pub fn rate(&self, ue: usize, codeword: usize, carrier: usize) -> Option<f64> {
        self.column(codeword).map(|c| self.get(ue, c, carrier))
    }

    pub fn rates(&self) -> &[f64] {
        &self.r
    }

    /// Projection results indexed `[k * n_carriers + i]` (projected mode only).
    pub fn projected(&self) -> Option<&[ProjectedCell]> {
        self.projected.as_deref()
    }

    pub fn mode(&self) -> TableMode {
        if self.projected.is_some() {
            TableMode::Projected
        } else {
            TableMode::Exhaustive
        }
    }

    /// Multiplies every rate by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut t = self.clone();
        t.r.iter_mut().for_each(|v| *v *= factor);
        t
    }

    /// Writes `ue,codeword,carrier,rate` rows.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let wrap = |source| Error::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut w = csv::Writer::from_path(path).map_err(wrap)?;
        w.write_record(["ue", "codeword", "carrier", "rate"]).map_err(wrap)?;
        for k in 0..self.n_ues {
            for (col, &cw) in self.codewords.iter().enumerate() {
                for i in 0..self.n_carriers {
                    w.write_record([
                        k.to_string(),
                        cw.to_string(),
                        i.to_string(),
                        self.get(k, col, i).to_string(),
                    ])
                    .map_err(wrap)?;
                }
            }
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

fn column_rates(m: &CMatrix, coeffs: &[CVector], s2: f64, n2: f64) -> Vec<f64> {
    coeffs
        .iter()
        .map(|phi| {
            let mut g2 = 0.0;
            for row in m.row_iter() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (a, b) in row.iter().zip(phi.iter()) {
                    acc += a * b;
                }
                g2 += acc.norm_sqr();
            }
            rate_from_gain(g2, s2, n2)
        })
        .collect()
}

/// Evaluates the rate table for one drop.
pub fn build_rate_table(
    channels: &ChannelSet,
    cb: &Codebook,
    cfg: &ScenarioConfig,
    mode: TableMode,
) -> Result<RateTable> {
    if channels.n_irs() != cb.n_irs() {
        return Err(Error::InvalidArgument(format!(
            "codebook for {} elements, channels for {}",
            cb.n_irs(),
            channels.n_irs()
        )));
    }
    if channels.n_carriers() != cfg.f {
        return Err(Error::InvalidArgument(format!(
            "channels for {} carriers, config has {}",
            channels.n_carriers(),
            cfg.f
        )));
    }
    let (s2, n2) = (cfg.sigma_s2(), cfg.sigma_n2());
    let (n_ues, n_car) = (channels.n_ues(), channels.n_carriers());

    let (codewords, projected) = match mode {
        TableMode::Exhaustive => ((0..cb.len()).collect::<Vec<_>>(), None),
        TableMode::Projected => {
            let cells: Vec<(usize, f64)> = (0..n_ues * n_car)
                .into_par_iter()
                .map(|ki| {
                    let m = channels.cascade_columns(ki / n_car, ki % n_car);
                    let opt = optimal_phases(&m);
                    let cw = if opt.degenerate {
                        0
                    } else {
                        map_to_codebook(&opt.phases, cb)?
                    };
                    Ok((cw, rate_from_gain(opt.gain * opt.gain, s2, n2)))
                })
                .collect::<Result<_>>()?;
            let mut union: Vec<usize> = cells.iter().map(|c| c.0).collect();
            union.sort_unstable();
            union.dedup();
            (union, Some(cells))
        }
    };

    let coeffs: Vec<CVector> = codewords
        .iter()
        .map(|&c| cb.entry(c).coefficients())
        .collect();
    let per_ue: Vec<Vec<f64>> = (0..n_ues)
        .into_par_iter()
        .map(|k| {
            let by_carrier: Vec<Vec<f64>> = (0..n_car)
                .map(|i| column_rates(&channels.cascade_columns(k, i), &coeffs, s2, n2))
                .collect();
            // reorder to [c][i]
            let mut out = Vec::with_capacity(codewords.len() * n_car);
            for c in 0..codewords.len() {
                for rates in &by_carrier {
                    out.push(rates[c]);
                }
            }
            out
        })
        .collect();
    let mut table = RateTable::with_columns(
        n_ues,
        n_car,
        cb.len(),
        codewords,
        per_ue.into_iter().flatten().collect(),
    )?;
    if let Some(cells) = projected {
        let filled = cells
            .iter()
            .enumerate()
            .map(|(ki, &(cw, continuous_rate))| {
                let col = table.column(cw).expect("projected codeword is a column");
                ProjectedCell {
                    codeword: cw,
                    rate: table.get(ki / n_car, col, ki % n_car),
                    continuous_rate,
                }
            })
            .collect();
        table.projected = Some(filled);
    }
    Ok(table)
}
