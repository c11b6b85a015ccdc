use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use blaster_core::runner::{
    parse_solver_set, simulate_day, simulate_hour, trace_file_name, write_metrics, write_trace,
    MetricsRecord, SolverKind,
};
use blaster_core::scenario::HOURS_PER_DAY;
use blaster_core::{Error, SimConfig};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "blaster", version, about = "Integrated terrestrial/satellite downlink optimizer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the 24-hour sweep and write the metrics CSV.
    Run {
        /// JSON config; built-in defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "blaster,ntn3gpp,tnonly,fixedsplit")]
        solvers: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Parse and validate a config file.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Dump the per-iteration utility trace of one hour.
    Trace {
        #[arg(long)]
        hour: usize,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Config { .. }) => EXIT_CONFIG,
        Some(e) if e.is_infeasibility() => EXIT_INFEASIBLE,
        _ => EXIT_FAILURE,
    }
}

fn load(config: Option<&Path>) -> anyhow::Result<SimConfig> {
    Ok(match config {
        Some(path) => SimConfig::load(path)?,
        None => SimConfig::default(),
    })
}

fn dispatch(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Run {
            config,
            seed,
            solvers,
            out,
        } => {
            let cfg = load(config.as_deref())?;
            let solvers = parse_solver_set(&solvers)?;
            let day = simulate_day(&cfg, seed, &solvers)?;
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let records: Vec<MetricsRecord> = day.records.iter().map(MetricsRecord::from).collect();
            let metrics_path = out.join(&cfg.output.metrics_file);
            write_metrics(&records, &metrics_path)?;
            for hour in &cfg.output.trace_hours {
                if let Some(trace) = day.traces.get(hour) {
                    write_trace(trace, &out.join(trace_file_name(*hour)))?;
                }
            }
            println!("wrote {} rows to {}", records.len(), metrics_path.display());
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = SimConfig::load(&config)?;
            println!(
                "ok: {} terrestrial stations, satellite {}, peak {} UEs",
                cfg.deployment.build_stations().len() - usize::from(cfg.deployment.satellite.is_some()),
                if cfg.deployment.satellite.is_some() { "on" } else { "off" },
                cfg.traffic.hourly_ue_counts().iter().max().copied().unwrap_or(0),
            );
            Ok(())
        }
        Command::Trace {
            hour,
            config,
            seed,
            out,
        } => {
            if hour >= HOURS_PER_DAY {
                anyhow::bail!("hour {hour} is outside 0..{HOURS_PER_DAY}");
            }
            let cfg = load(config.as_deref())?;
            let outcome = simulate_hour(&cfg, seed, hour, &[SolverKind::Blaster])?;
            let solution = outcome.solution.context("no solution produced")?;
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let path = out.join(trace_file_name(hour));
            write_trace(&solution.trace, &path)?;
            println!(
                "{} iterations ({:?}), trace in {}",
                solution.trace.len(),
                solution.termination,
                path.display()
            );
            Ok(())
        }
    }
}
