use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use irsched::harness::{
    drop_table, emit_csv, emit_plots, run_experiment, write_audit, write_timing_csv,
    CodebookSource, ExperimentOptions, SchedulerKind, Sweep,
};
use irsched::irs::build_codebook;
use irsched::rng::{stream, Stream};
use irsched::{Codebook, ScenarioConfig, TableMode};

#[derive(Parser)]
#[command(name = "irsched", version, about = "IRS-aided multi-carrier scheduling simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    Desk,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo sweep and write CSV and SVG results.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Sweep axis `name=v1,v2,...`; repeat for a cartesian grid.
        #[arg(long)]
        sweep: Vec<String>,
        #[arg(long, default_value = "gmax,da,uoscbc")]
        schedulers: String,
        #[arg(long)]
        out: PathBuf,
        /// Codebook JSON file, or `build` to train one per point.
        #[arg(long, default_value = "build")]
        codebook: String,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "exhaustive")]
        mode: String,
        /// Also write every assignment grid to audit.jsonl.
        #[arg(long)]
        audit: bool,
        #[arg(long)]
        no_plots: bool,
    },
    /// Train a codebook and save it as JSON.
    Codebook {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write the rate table of one drop as CSV.
    Table {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        codebook: PathBuf,
        #[arg(long, default_value_t = 0)]
        drop: usize,
        #[arg(long, default_value = "exhaustive")]
        mode: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print a built-in scenario profile as JSON.
    Config {
        #[arg(long, value_enum, default_value = "desk")]
        profile: Profile,
    },
}

fn load_config(path: &Path, seed: Option<u64>) -> anyhow::Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Config { profile } => {
            let cfg = match profile {
                Profile::Desk => ScenarioConfig::desk(),
                Profile::Full => ScenarioConfig::default(),
            };
            println!("{}", cfg.to_json());
            Ok(true)
        }
        Command::Codebook { config, out, seed } => {
            let cfg = load_config(&config, seed)?;
            let cb = build_codebook(&cfg, &mut stream(cfg.seed, Stream::Training, 0))?;
            cb.save(&out)?;
            println!("wrote {} codewords to {}", cb.len(), out.display());
            Ok(true)
        }
        Command::Table { config, codebook, drop, mode, out } => {
            let cfg = load_config(&config, None)?;
            let mode: TableMode = mode.parse()?;
            let cb = Codebook::load(&codebook)?;
            if !cb.matches(&cfg) {
                bail!("codebook {} does not fit the scenario", codebook.display());
            }
            drop_table(&cfg, &cb, mode, drop)?.write_csv(&out)?;
            println!("wrote {}", out.display());
            Ok(true)
        }
        Command::Run {
            config,
            sweep,
            schedulers,
            out,
            codebook,
            seed,
            mode,
            audit,
            no_plots,
        } => {
            let cfg = load_config(&config, seed)?;
            let sweep = Sweep::parse(&sweep)?;
            let codebook = if codebook == "build" {
                CodebookSource::Build
            } else {
                CodebookSource::Fixed(Codebook::load(&codebook)?)
            };
            let opts = ExperimentOptions {
                schedulers: SchedulerKind::parse_list(&schedulers)?,
                mode: mode.parse()?,
                codebook,
                keep_grids: audit,
            };
            let report = run_experiment(&cfg, &sweep, &opts)?;

            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            std::fs::write(out.join("config.json"), cfg.to_json() + "\n")
                .with_context(|| format!("writing config to {}", out.display()))?;
            let mut files = emit_csv(&report, &out)?;
            write_timing_csv(&report, out.join("timing.csv"))?;
            if audit {
                write_audit(&report, out.join("audit.jsonl"))?;
            }
            if !no_plots && !report.is_empty() {
                files.extend(emit_plots(&report, &out)?);
            }

            for p in &report.points {
                for m in &p.schedulers {
                    match &m.skipped {
                        Some(reason) => println!("{:<28} {:<10} skipped: {reason}", p.label, m.scheduler),
                        None => println!(
                            "{:<28} {:<10} mean sum rate {:.4} +/- {:.4} bit/s/Hz, {} violations",
                            p.label,
                            m.scheduler,
                            m.mean_sum_rate(),
                            m.std_err(),
                            m.violations()
                        ),
                    }
                }
            }
            for s in &report.skipped {
                eprintln!("skipped point {}: {}", s.label, s.reason);
            }
            println!("wrote {} files to {}", files.len() + 2, out.display());

            let violations = report.total_violations();
            if violations > 0 {
                eprintln!("error: {violations} constraint violations in scheduler output");
            }
            if report.is_empty() {
                eprintln!("error: no valid sweep point");
            }
            Ok(violations == 0 && report.skipped.is_empty() && !report.is_empty())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
