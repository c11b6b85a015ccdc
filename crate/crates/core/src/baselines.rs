//! Benchmark settings: terrestrial only, 3GPP split with max-RSRP, and the
//! fixed equal split.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::assoc_opt::tol_feas;
use crate::blaster::{bcga_solve, SolverConfig};
use crate::channel::{rsrp_matrix, ChannelState, TierBandwidth};
use crate::error::Result;
use crate::metrics::Allocation;
use crate::scenario::{Scenario, Tier};

/// Terrestrial bandwidth of both 3GPP settings, Hz.
pub const THREEGPP_TERRESTRIAL_BANDWIDTH: f64 = 10e6;
/// Satellite bandwidth of the 3GPP NTN setting, Hz.
pub const THREEGPP_SATELLITE_BANDWIDTH: f64 = 30e6;
pub const FIXED_SPLIT_EPSILON: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BenchmarkSetting {
    /// Terrestrial stations only, 10 MHz, max-RSRP, max power.
    TnOnly,
    /// 30 MHz satellite / 10 MHz terrestrial, max-RSRP, max power.
    Ntn3gpp,
    /// Optimized association and power with the split pinned at one half.
    FixedSplit,
}

/// Serving station per UE by largest RSRP among `active` stations; `None`
/// when the best active RSRP is below the floor. Ties go to the lowest index.
pub fn max_rsrp_association(
    rsrp: ArrayView2<'_, f64>,
    active: &[bool],
    rsrp_min: f64,
) -> Vec<Option<usize>> {
    let floor = rsrp_min - tol_feas(rsrp_min);
    rsrp.rows()
        .into_iter()
        .map(|row| {
            let mut best: Option<(usize, f64)> = None;
            for (j, &v) in row.iter().enumerate() {
                if active[j] && best.is_none_or(|(_, b)| v > b) {
                    best = Some((j, v));
                }
            }
            best.filter(|&(_, v)| v >= floor).map(|(j, _)| j)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkOutcome {
    pub setting: BenchmarkSetting,
    pub allocation: Allocation,
}

/// Runs one benchmark on a snapshot. `config` and `lambda` are used by
/// [`BenchmarkSetting::FixedSplit`] only.
pub fn run_benchmark(
    setting: BenchmarkSetting,
    scenario: &Scenario,
    state: &ChannelState,
    lambda: f64,
    config: &SolverConfig,
) -> Result<BenchmarkOutcome> {
    let tiers = scenario.tiers();
    let allocation = match setting {
        BenchmarkSetting::TnOnly => {
            let active: Vec<bool> = tiers.iter().map(|&t| t == Tier::Terrestrial).collect();
            let p: Vec<f64> = scenario
                .stations()
                .iter()
                .map(|s| if s.tier == Tier::Terrestrial { s.p_max } else { 0.0 })
                .collect();
            let serving = max_rsrp_association(rsrp_matrix(state, &p).view(), &active, scenario.rsrp_min());
            Allocation {
                serving,
                p,
                bandwidth: TierBandwidth {
                    terrestrial: THREEGPP_TERRESTRIAL_BANDWIDTH,
                    satellite: 0.0,
                },
                epsilon: 0.0,
            }
        }
        BenchmarkSetting::Ntn3gpp => {
            let p = scenario.p_max();
            let active = vec![true; tiers.len()];
            let serving = max_rsrp_association(rsrp_matrix(state, &p).view(), &active, scenario.rsrp_min());
            let bandwidth = TierBandwidth {
                terrestrial: THREEGPP_TERRESTRIAL_BANDWIDTH,
                satellite: THREEGPP_SATELLITE_BANDWIDTH,
            };
            Allocation {
                serving,
                p,
                epsilon: bandwidth.satellite / (bandwidth.satellite + bandwidth.terrestrial),
                bandwidth,
            }
        }
        BenchmarkSetting::FixedSplit => {
            let pinned = SolverConfig {
                optimize_split: false,
                epsilon_init: FIXED_SPLIT_EPSILON,
                ..config.clone()
            };
            let solution = bcga_solve(scenario, state, lambda, &pinned)?;
            Allocation::from_solution(&solution, scenario.total_bandwidth())
        }
    };
    Ok(BenchmarkOutcome { setting, allocation })
}
