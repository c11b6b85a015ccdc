//! 24-hour sweep: per-hour snapshot, every requested solver on it, metrics
//! and traces to CSV.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{run_benchmark, BenchmarkSetting};
use crate::blaster::{bcga_solve, IterationRecord, Solution};
use crate::channel::ChannelState;
use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::metrics::{benchmark_metrics, solution_metrics, HourMetrics};
use crate::scenario::{hourly_params, Scenario, HOURS_PER_DAY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Blaster,
    Ntn3gpp,
    TnOnly,
    FixedSplit,
}

impl SolverKind {
    pub const ALL: [SolverKind; 4] = [
        SolverKind::Blaster,
        SolverKind::Ntn3gpp,
        SolverKind::TnOnly,
        SolverKind::FixedSplit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Blaster => "blaster",
            SolverKind::Ntn3gpp => "ntn3gpp",
            SolverKind::TnOnly => "tnonly",
            SolverKind::FixedSplit => "fixedsplit",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "unknown solver `{s}` (expected blaster, ntn3gpp, tnonly or fixedsplit)"
                ))
            })
    }
}

/// Parses a comma-separated solver list, keeping order and dropping repeats.
pub fn parse_solver_set(list: &str) -> Result<Vec<SolverKind>> {
    let mut out = Vec::new();
    for item in list.split(',').filter(|s| !s.trim().is_empty()) {
        let kind: SolverKind = item.parse()?;
        if !out.contains(&kind) {
            out.push(kind);
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidInput("empty solver list".into()));
    }
    Ok(out)
}

/// Seeds for the UE drop and the channel draw of one hour.
pub fn hour_seeds(seed: u64, hour: usize) -> (u64, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(hour as u64);
    (rng.next_u64(), rng.next_u64())
}

/// Scenario and channel shared by every solver in one hour.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub hour: usize,
    pub lambda: f64,
    pub scenario: Scenario,
    pub state: ChannelState,
}

pub fn hour_snapshot(config: &SimConfig, seed: u64, hour: usize) -> Result<Snapshot> {
    let params = hourly_params(&config.traffic, hour)?;
    let (drop_seed, channel_seed) = hour_seeds(seed, hour);
    let scenario = config.deployment.generate(params.ue_count, drop_seed)?;
    let state = ChannelState::draw(&scenario, &config.channel, channel_seed)?;
    Ok(Snapshot {
        hour,
        lambda: params.lambda,
        scenario,
        state,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HourRecord {
    pub solver: SolverKind,
    pub metrics: HourMetrics,
    /// Fingerprint of the channel state the solver ran on.
    pub channel_fingerprint: u64,
}

#[derive(Debug, Clone)]
pub struct HourOutcome {
    pub records: Vec<HourRecord>,
    /// BLASTER solution when it was requested.
    pub solution: Option<Solution>,
}

pub fn simulate_hour(
    config: &SimConfig,
    seed: u64,
    hour: usize,
    solvers: &[SolverKind],
) -> Result<HourOutcome> {
    let snap = hour_snapshot(config, seed, hour)?;
    let accounting = config.power_accounting;
    let mut records = Vec::with_capacity(solvers.len());
    let mut solution = None;
    for &solver in solvers {
        let state = &snap.state;
        let metrics = match solver {
            SolverKind::Blaster => {
                let sol = bcga_solve(&snap.scenario, state, snap.lambda, &config.solver)?;
                let m = solution_metrics(&sol, &snap.scenario, state, hour, accounting);
                solution = Some(sol);
                m
            }
            other => {
                let setting = match other {
                    SolverKind::Ntn3gpp => BenchmarkSetting::Ntn3gpp,
                    SolverKind::TnOnly => BenchmarkSetting::TnOnly,
                    _ => BenchmarkSetting::FixedSplit,
                };
                let outcome = run_benchmark(setting, &snap.scenario, state, snap.lambda, &config.solver)?;
                benchmark_metrics(&outcome, &snap.scenario, state, hour, accounting)
            }
        };
        records.push(HourRecord {
            solver,
            metrics,
            channel_fingerprint: state.fingerprint(),
        });
    }
    Ok(HourOutcome { records, solution })
}

#[derive(Debug, Clone)]
pub struct DayOutcome {
    /// Ordered by hour, then by the requested solver order.
    pub records: Vec<HourRecord>,
    /// BLASTER iteration traces by hour.
    pub traces: BTreeMap<usize, Vec<IterationRecord>>,
}

pub fn simulate_day(config: &SimConfig, seed: u64, solvers: &[SolverKind]) -> Result<DayOutcome> {
    let hours: Vec<HourOutcome> = (0..HOURS_PER_DAY)
        .into_par_iter()
        .map(|h| simulate_hour(config, seed, h, solvers))
        .collect::<Result<_>>()?;
    let mut records = Vec::new();
    let mut traces = BTreeMap::new();
    for (h, outcome) in hours.into_iter().enumerate() {
        records.extend(outcome.records);
        if let Some(sol) = outcome.solution {
            traces.insert(h, sol.trace);
        }
    }
    Ok(DayOutcome { records, traces })
}

/// `simulate_day` on a config file.
pub fn simulate_day_from_path(path: &Path, seed: u64, solvers: &[SolverKind]) -> Result<DayOutcome> {
    let config = SimConfig::load(path)?;
    simulate_day(&config, seed, solvers)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct MetricsRow {
    hour: usize,
    solver: SolverKind,
    ue_count: usize,
    sum_throughput_bps: f64,
    sum_log_throughput: f64,
    network_power_w: f64,
    satellite_share: f64,
    active_terrestrial: usize,
    coverage_ratio: f64,
    epsilon: f64,
}

/// A metrics CSV row: solver name plus its hour metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub solver: SolverKind,
    pub metrics: HourMetrics,
}

impl From<&HourRecord> for MetricsRecord {
    fn from(r: &HourRecord) -> Self {
        Self {
            solver: r.solver,
            metrics: r.metrics.clone(),
        }
    }
}

pub fn write_metrics(records: &[MetricsRecord], path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let mut writer = csv::Writer::from_path(path)?;
    for r in records {
        let m = &r.metrics;
        writer.serialize(MetricsRow {
            hour: m.hour,
            solver: r.solver,
            ue_count: m.ue_count,
            sum_throughput_bps: m.sum_throughput,
            sum_log_throughput: m.sum_log_throughput,
            network_power_w: m.network_power,
            satellite_share: m.satellite_share,
            active_terrestrial: m.active_terrestrial,
            coverage_ratio: m.coverage_ratio,
            epsilon: m.epsilon,
        })?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRecord>> {
    let mut reader = csv::Reader::from_path(path)?;
    reader
        .deserialize::<MetricsRow>()
        .map(|row| {
            let row = row?;
            Ok(MetricsRecord {
                solver: row.solver,
                metrics: HourMetrics {
                    hour: row.hour,
                    ue_count: row.ue_count,
                    sum_throughput: row.sum_throughput_bps,
                    sum_log_throughput: row.sum_log_throughput,
                    network_power: row.network_power_w,
                    satellite_share: row.satellite_share,
                    active_terrestrial: row.active_terrestrial,
                    coverage_ratio: row.coverage_ratio,
                    epsilon: row.epsilon,
                },
            })
        })
        .collect()
}

#[derive(Serialize)]
struct TraceRow {
    iteration: usize,
    utility: f64,
    epsilon: f64,
    active_terrestrial: usize,
}

/// Writes `iteration,utility,epsilon,active_terrestrial`.
pub fn write_trace(trace: &[IterationRecord], path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for r in trace {
        writer.serialize(TraceRow {
            iteration: r.iteration,
            utility: r.utility,
            epsilon: r.epsilon,
            active_terrestrial: r.active_terrestrial,
        })?;
    }
    if trace.is_empty() {
        writer.write_record(["iteration", "utility", "epsilon", "active_terrestrial"])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn trace_file_name(hour: usize) -> String {
    format!("trace_{hour}.csv")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solver_names_round_trip() {
        for k in SolverKind::ALL {
            assert_eq!(k.name().parse::<SolverKind>().unwrap(), k);
        }
        let set = parse_solver_set("blaster,ntn3gpp,tnonly,fixedsplit").unwrap();
        assert_eq!(set, SolverKind::ALL.to_vec());
        assert!(parse_solver_set("blaster,qlearning").is_err());
        assert!(parse_solver_set("").is_err());
    }

    #[test]
    fn hour_seeds_differ_by_hour_and_repeat_by_seed() {
        assert_eq!(hour_seeds(7, 3), hour_seeds(7, 3));
        assert_ne!(hour_seeds(7, 3), hour_seeds(7, 4));
        assert_ne!(hour_seeds(7, 3), hour_seeds(8, 3));
    }

    #[test]
    fn empty_records_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let err = write_metrics(&[], &dir.path().join("m.csv")).unwrap_err();
        assert!(matches!(err, Error::EmptyRecords));
    }

    #[test]
    fn metrics_round_trip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let records: Vec<MetricsRecord> = (0..3)
            .map(|h| MetricsRecord {
                solver: SolverKind::ALL[h % 4],
                metrics: HourMetrics {
                    hour: h,
                    ue_count: 10 + h,
                    sum_throughput: 1.234_567_890_123e8 / (h as f64 + 3.0),
                    sum_log_throughput: 0.1 + 1.0 / 3.0,
                    network_power: 1_140.000_000_000_1,
                    satellite_share: 1.0 / 7.0,
                    active_terrestrial: 19 - h,
                    coverage_ratio: 0.95,
                    epsilon: 2.0 / 11.0,
                },
            })
            .collect();
        write_metrics(&records, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(
            "hour,solver,ue_count,sum_throughput_bps,sum_log_throughput,network_power_w,satellite_share,active_terrestrial,coverage_ratio,epsilon\n"
        ));
        assert_eq!(text.lines().count(), 4);
        assert_eq!(read_metrics(&path).unwrap(), records);
    }
}
