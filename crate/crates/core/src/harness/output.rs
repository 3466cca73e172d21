//! CSV and JSON-lines outputs. Everything here except the timing file is a
//! pure function of the report, so reruns with the same seed are
//! byte-identical.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::ExperimentReport;
use crate::error::{Error, Result};

pub const SUMMARY_HEADER: [&str; 15] = [
    "point",
    "scheduler",
    "k",
    "f",
    "z",
    "b_codebook",
    "n_irs",
    "n_drops",
    "mean_sum_rate",
    "std_err",
    "mean_ue_rate",
    "reconfig_bits_per_frame",
    "reduction_factor",
    "violations",
    "status",
];

pub const DROPS_HEADER: [&str; 7] = [
    "point",
    "scheduler",
    "drop",
    "sum_rate",
    "reconfigurations",
    "reconfig_bits",
    "violations",
];

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).map_err(|e| Error::Csv {
        path: path.to_owned(),
        source: e,
    })
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error {
    let path = path.to_owned();
    move |e| Error::Csv {
        path: path.clone(),
        source: e,
    }
}

/// Writes `summary.csv`, `drops.csv` and `ue_rates.csv` into `dir`.
/// An empty report yields header-only files.
pub fn emit_csv(report: &ExperimentReport, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let summary = dir.join("summary.csv");
    let mut w = writer(&summary)?;
    let err = csv_err(&summary);
    w.write_record(SUMMARY_HEADER).map_err(&err)?;
    for p in &report.points {
        for m in &p.schedulers {
            let status = match &m.skipped {
                Some(r) => format!("skipped: {r}"),
                None => "ok".into(),
            };
            w.write_record([
                p.label.clone(),
                m.scheduler.to_string(),
                p.cfg.k.to_string(),
                p.cfg.f.to_string(),
                p.cfg.z.to_string(),
                p.cfg.b_codebook.to_string(),
                p.cfg.n_irs().to_string(),
                m.n_drops().to_string(),
                m.mean_sum_rate().to_string(),
                m.std_err().to_string(),
                m.mean_ue_rate().to_string(),
                m.mean_reconfig_bits().to_string(),
                m.reduction_factor(&p.cfg).to_string(),
                m.violations().to_string(),
                status,
            ])
            .map_err(&err)?;
        }
    }
    w.flush().map_err(|e| Error::io(&summary, e))?;

    let drops = dir.join("drops.csv");
    let mut w = writer(&drops)?;
    let err = csv_err(&drops);
    w.write_record(DROPS_HEADER).map_err(&err)?;
    for p in &report.points {
        for m in &p.schedulers {
            for d in &m.drops {
                w.write_record([
                    p.label.clone(),
                    m.scheduler.to_string(),
                    d.drop.to_string(),
                    d.sum_rate.to_string(),
                    d.reconfigurations.to_string(),
                    d.reconfig_bits.to_string(),
                    d.violations.len().to_string(),
                ])
                .map_err(&err)?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(&drops, e))?;

    let ues = dir.join("ue_rates.csv");
    let mut w = writer(&ues)?;
    let err = csv_err(&ues);
    w.write_record(["point", "scheduler", "drop", "ue", "rate"]).map_err(&err)?;
    for p in &report.points {
        for m in &p.schedulers {
            for d in &m.drops {
                for (k, r) in d.ue_rates.iter().enumerate() {
                    w.write_record([
                        p.label.clone(),
                        m.scheduler.to_string(),
                        d.drop.to_string(),
                        k.to_string(),
                        r.to_string(),
                    ])
                    .map_err(&err)?;
                }
            }
        }
    }
    w.flush().map_err(|e| Error::io(&ues, e))?;

    Ok(vec![summary, drops, ues])
}

/// Mean wall-clock time per drop; varies between runs by nature.
pub fn write_timing_csv(report: &ExperimentReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    let err = csv_err(path);
    w.write_record(["point", "scheduler", "mean_seconds_per_drop"]).map_err(&err)?;
    for p in &report.points {
        for m in &p.schedulers {
            w.write_record([p.label.clone(), m.scheduler.to_string(), m.mean_elapsed_s().to_string()])
                .map_err(&err)?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// One JSON object per retained grid: `{point, scheduler, drop, grid}`.
pub fn write_audit(report: &ExperimentReport, path: impl AsRef<Path>) -> Result<usize> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut n = 0;
    for p in &report.points {
        for m in &p.schedulers {
            for d in &m.drops {
                if let Some(grid) = &d.grid {
                    let line = serde_json::json!({
                        "point": p.label,
                        "scheduler": m.scheduler,
                        "drop": d.drop,
                        "grid": grid,
                    });
                    writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
                    n += 1;
                }
            }
        }
    }
    out.flush().map_err(|e| Error::io(path, e))?;
    Ok(n)
}
