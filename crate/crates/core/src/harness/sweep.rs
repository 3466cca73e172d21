//! Parameter sweeps: `name=v1,v2,...` axes combined as a cartesian grid.

use std::fmt;
use std::str::FromStr;

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};

/// Scenario field that a sweep axis may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    K,
    F,
    Z,
    BCodebook,
    BIrs,
    /// IRS panel as `rows x cols`.
    Irs,
    NUe,
    NGnb,
    MTraining,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::K => "k",
            SweepParam::F => "f",
            SweepParam::Z => "z",
            SweepParam::BCodebook => "b_codebook",
            SweepParam::BIrs => "b_irs",
            SweepParam::Irs => "irs",
            SweepParam::NUe => "n_ue",
            SweepParam::NGnb => "n_gnb",
            SweepParam::MTraining => "m_training",
        }
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "k" => SweepParam::K,
            "f" => SweepParam::F,
            "z" => SweepParam::Z,
            "b_codebook" | "bq" | "b_q" => SweepParam::BCodebook,
            "b_irs" | "bi" | "b_i" => SweepParam::BIrs,
            "irs" => SweepParam::Irs,
            "n_ue" => SweepParam::NUe,
            "n_gnb" => SweepParam::NGnb,
            "m_training" => SweepParam::MTraining,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown sweep parameter {other:?}"
                )))
            }
        })
    }
}

/// One value of a sweep axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepValue {
    Int(usize),
    Panel(usize, usize),
}

impl SweepValue {
    /// Position on a plot axis (element count for panels).
    pub fn as_f64(self) -> f64 {
        match self {
            SweepValue::Int(v) => v as f64,
            SweepValue::Panel(r, c) => (r * c) as f64,
        }
    }
}

impl fmt::Display for SweepValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepValue::Int(v) => write!(f, "{v}"),
            SweepValue::Panel(r, c) => write!(f, "{r}x{c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub values: Vec<SweepValue>,
}

impl FromStr for SweepAxis {
    type Err = Error;

    /// Parses `name=v1,v2,...`; panel values are written `ROWSxCOLS`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, list) = s
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("sweep {s:?} lacks '='")))?;
        let param: SweepParam = name.trim().parse()?;
        let bad = |v: &str| Error::InvalidArgument(format!("bad value {v:?} for {}", param.name()));
        let values = list
            .split(',')
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .map(|v| match param {
                SweepParam::Irs => {
                    let (r, c) = v.split_once(['x', 'X']).ok_or_else(|| bad(v))?;
                    Ok(SweepValue::Panel(
                        r.parse().map_err(|_| bad(v))?,
                        c.parse().map_err(|_| bad(v))?,
                    ))
                }
                _ => v.parse().map(SweepValue::Int).map_err(|_| bad(v)),
            })
            .collect::<Result<Vec<_>>>()?;
        if values.is_empty() {
            return Err(Error::InvalidArgument(format!("sweep {s:?} has no values")));
        }
        Ok(Self { param, values })
    }
}

/// Cartesian product of axes; the first axis varies slowest.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Sweep {
    pub axes: Vec<SweepAxis>,
}

/// One grid point: the value taken on every axis.
pub type SweepPoint = Vec<(SweepParam, SweepValue)>;

impl Sweep {
    pub fn new(axes: Vec<SweepAxis>) -> Self {
        Self { axes }
    }

    pub fn parse<S: AsRef<str>>(specs: &[S]) -> Result<Self> {
        Ok(Self::new(
            specs
                .iter()
                .map(|s| s.as_ref().parse())
                .collect::<Result<_>>()?,
        ))
    }

    /// All points; a sweep without axes has a single empty point.
    pub fn points(&self) -> Vec<SweepPoint> {
        let mut out: Vec<SweepPoint> = vec![Vec::new()];
        for axis in &self.axes {
            out = out
                .into_iter()
                .flat_map(|p| {
                    axis.values.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push((axis.param, v));
                        q
                    })
                })
                .collect();
        }
        out
    }
}

pub fn point_label(point: &SweepPoint) -> String {
    if point.is_empty() {
        return "base".into();
    }
    point
        .iter()
        .map(|(p, v)| format!("{}={v}", p.name()))
        .collect::<Vec<_>>()
        .join(";")
}

/// `base` with the point's overrides applied (not validated).
pub fn apply(base: &ScenarioConfig, point: &SweepPoint) -> ScenarioConfig {
    let mut cfg = base.clone();
    for &(param, value) in point {
        match (param, value) {
            (SweepParam::Irs, SweepValue::Panel(r, c)) => {
                cfg.irs_rows = r;
                cfg.irs_cols = c;
            }
            (SweepParam::Irs, SweepValue::Int(n)) => {
                cfg.irs_rows = 1;
                cfg.irs_cols = n;
            }
            (p, v) => {
                let n = v.as_f64() as usize;
                match p {
                    SweepParam::K => cfg.k = n,
                    SweepParam::F => cfg.f = n,
                    SweepParam::Z => cfg.z = n,
                    SweepParam::BCodebook => cfg.b_codebook = n as u32,
                    SweepParam::BIrs => cfg.b_irs = n as u32,
                    SweepParam::NUe => cfg.n_ue = n,
                    SweepParam::NGnb => cfg.n_gnb = n,
                    SweepParam::MTraining => cfg.m_training = n,
                    SweepParam::Irs => unreachable!(),
                }
            }
        }
    }
    cfg
}
