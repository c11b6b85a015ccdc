//! Per-hour report quantities, shared by optimized and benchmark runs.

use serde::{Deserialize, Serialize};

use crate::baselines::BenchmarkOutcome;
use crate::blaster::Solution;
use crate::channel::{sinr_matrix, ChannelState, TierBandwidth};
use crate::power_model::station_consumption;
use crate::scenario::{Scenario, Tier};

/// What a run hands to the metrics: binary association, powers and the
/// bandwidth each tier received.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    /// Serving station per UE, `None` when uncovered.
    pub serving: Vec<Option<usize>>,
    /// Per-RE transmit power per station, watts.
    pub p: Vec<f64>,
    pub bandwidth: TierBandwidth,
    /// Satellite fraction of the bandwidth, reported as is.
    pub epsilon: f64,
}

impl Allocation {
    pub fn from_solution(solution: &Solution, total_bandwidth: f64) -> Self {
        Self {
            serving: solution.serving.clone(),
            p: solution.p.clone(),
            bandwidth: TierBandwidth::split(total_bandwidth, solution.epsilon),
            epsilon: solution.epsilon,
        }
    }
}

/// RE count used to turn per-RE power into station transmit power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerAccounting {
    /// REs of the bandwidth the terrestrial tier was given.
    #[default]
    AllocatedBandwidth,
    /// REs of the whole system bandwidth, whatever the split.
    FullBandwidth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourMetrics {
    pub hour: usize,
    pub ue_count: usize,
    /// bit/s over covered UEs.
    pub sum_throughput: f64,
    pub sum_log_throughput: f64,
    /// Total terrestrial consumption, watts.
    pub network_power: f64,
    /// Fraction of covered UEs on a satellite.
    pub satellite_share: f64,
    pub active_terrestrial: usize,
    pub coverage_ratio: f64,
    pub epsilon: f64,
}

pub fn compute_metrics(
    allocation: &Allocation,
    scenario: &Scenario,
    state: &ChannelState,
    hour: usize,
    accounting: PowerAccounting,
) -> HourMetrics {
    let tiers = scenario.tiers();
    let k = allocation.serving.len();
    let mut load = vec![0usize; tiers.len()];
    for j in allocation.serving.iter().flatten() {
        load[*j] += 1;
    }
    let sinr = sinr_matrix(state, &allocation.p);

    let mut sum_throughput = 0.0;
    let mut sum_log_throughput = 0.0;
    let mut covered = 0usize;
    let mut on_satellite = 0usize;
    for (i, s) in allocation.serving.iter().enumerate() {
        let Some(j) = *s else { continue };
        covered += 1;
        if tiers[j] == Tier::Satellite {
            on_satellite += 1;
        }
        let rate =
            allocation.bandwidth.for_tier(tiers[j]) / load[j] as f64 * (1.0 + sinr[[i, j]]).log2();
        sum_throughput += rate;
        sum_log_throughput += rate.ln();
    }

    let re_count = match accounting {
        PowerAccounting::AllocatedBandwidth => allocation.bandwidth.terrestrial,
        PowerAccounting::FullBandwidth => scenario.total_bandwidth(),
    } / scenario.re_bandwidth();
    let mut network_power = 0.0;
    let mut active_terrestrial = 0;
    for (station, &p) in scenario.stations().iter().zip(&allocation.p) {
        if station.tier != Tier::Terrestrial {
            continue;
        }
        if p > 0.0 {
            active_terrestrial += 1;
        }
        network_power += station_consumption(p * re_count, station.static_power, station.sleep_floor);
    }

    HourMetrics {
        hour,
        ue_count: k,
        sum_throughput,
        sum_log_throughput,
        network_power,
        satellite_share: if covered == 0 {
            0.0
        } else {
            on_satellite as f64 / covered as f64
        },
        active_terrestrial,
        coverage_ratio: if k == 0 { 0.0 } else { covered as f64 / k as f64 },
        epsilon: allocation.epsilon,
    }
}

/// Metrics of an optimizer solution.
pub fn solution_metrics(
    solution: &Solution,
    scenario: &Scenario,
    state: &ChannelState,
    hour: usize,
    accounting: PowerAccounting,
) -> HourMetrics {
    let allocation = Allocation::from_solution(solution, scenario.total_bandwidth());
    compute_metrics(&allocation, scenario, state, hour, accounting)
}

/// Metrics of a benchmark outcome.
pub fn benchmark_metrics(
    outcome: &BenchmarkOutcome,
    scenario: &Scenario,
    state: &ChannelState,
    hour: usize,
    accounting: PowerAccounting,
) -> HourMetrics {
    compute_metrics(&outcome.allocation, scenario, state, hour, accounting)
}
