//! Joint UE association, terrestrial power control with shutdown, and
//! terrestrial/satellite bandwidth split for an integrated downlink network.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assoc_opt;
pub mod baselines;
pub mod blaster;
pub mod channel;
pub mod config;
pub mod error;
pub mod metrics;
pub mod power_model;
pub mod power_opt;
pub mod runner;
pub mod scenario;
pub mod units;

pub use baselines::{max_rsrp_association, run_benchmark, BenchmarkOutcome, BenchmarkSetting};
pub use blaster::{
    bcga_solve, evaluate_utility, optimal_bandwidth_split, IterationRecord, Problem, Solution,
    SolverConfig, Termination,
};
pub use channel::{ChannelParams, ChannelState, TierBandwidth};
pub use config::SimConfig;
pub use error::{Error, Result};
pub use metrics::{compute_metrics, Allocation, HourMetrics, PowerAccounting};
pub use power_model::GroupMode;
pub use runner::{simulate_day, simulate_hour, SolverKind};
pub use scenario::{Scenario, StationSpec, Tier, TrafficProfile};
