mod common;

use blaster_core::assoc_opt::{dual_solve, round_association, tol_feas, DualOptions};
use blaster_core::blaster::{bcga_solve, evaluate_utility, optimal_bandwidth_split, Problem};
use blaster_core::channel::{sinr_matrix, ChannelState};
use blaster_core::metrics::{benchmark_metrics, solution_metrics};
use blaster_core::power_model::reweight;
use blaster_core::power_opt::{block_soft_threshold, Threshold};
use blaster_core::runner::{hour_snapshot, simulate_day, simulate_hour, SolverKind};
use blaster_core::{
    max_rsrp_association, Allocation, BenchmarkOutcome, BenchmarkSetting, GroupMode,
    PowerAccounting, Scenario, SimConfig, StationSpec, Tier,
};
use ndarray::Array2;
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Array2<f64>> {
    prop::collection::vec(1e-3f64..1e3, rows * cols)
        .prop_map(move |v| Array2::from_shape_vec((rows, cols), v).unwrap())
}

fn gains(rows: usize, cols: usize) -> impl Strategy<Value = Array2<f64>> {
    prop::collection::vec(-15.0f64..-11.0, rows * cols)
        .prop_map(move |v| Array2::from_shape_vec((rows, cols), v.into_iter().map(|e| 10f64.powf(e)).collect()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn max_rsrp_association_survives_monotone_transforms(rsrp in matrix(6, 4)) {
        let active = [true; 4];
        let base = max_rsrp_association(rsrp.view(), &active, 0.0);
        for transform in [|v: f64| v.sqrt(), |v: f64| v.powi(3), |v: f64| (1.0 + v).ln(), |v: f64| 7.0 * v] {
            let mapped = rsrp.mapv(transform);
            prop_assert_eq!(&max_rsrp_association(mapped.view(), &active, 0.0), &base);
        }
    }

    #[test]
    fn rounding_survives_row_rescaling(
        x in matrix(5, 3),
        beta in gains(5, 3),
        scales in prop::collection::vec(1e-3f64..1e3, 5),
    ) {
        let p = [0.05, 0.04, 0.03];
        let base = round_association(x.view(), beta.view(), &p, 1e-15).unwrap();
        let mut scaled = x.clone();
        for (mut row, s) in scaled.rows_mut().into_iter().zip(&scales) {
            row *= *s;
        }
        prop_assert_eq!(round_association(scaled.view(), beta.view(), &p, 1e-15).unwrap(), base);
    }

    #[test]
    fn projection_is_feasible_with_nonpositive_multipliers(
        x_tilde in prop::collection::vec(-1.0f64..1.5, 12),
        beta in gains(4, 3),
        p in prop::collection::vec(0.001f64..0.06, 3),
    ) {
        let x_tilde = Array2::from_shape_vec((4, 3), x_tilde).unwrap();
        let rsrp_min = 1e-15;
        let sol = dual_solve(x_tilde.view(), beta.view(), &p, rsrp_min, &DualOptions::default(), None);
        prop_assert!(sol.converged);
        prop_assert!(sol.x.iter().all(|&v| v >= 0.0));
        prop_assert!(sol.mu.iter().all(|&m| m <= 0.0));
        for i in 0..4 {
            let rsrp: f64 = (0..3).map(|j| sol.x[[i, j]] * beta[[i, j]] * p[j]).sum();
            prop_assert!(rsrp >= rsrp_min - tol_feas(rsrp_min));
        }
    }

    #[test]
    fn prox_shrinks_along_the_input_direction(
        v in prop::collection::vec(-5.0f64..5.0, 1..6),
        t in 0.0f64..10.0,
    ) {
        let out = block_soft_threshold(&v, &Threshold::Group(t));
        let norm = |u: &[f64]| u.iter().map(|a| a * a).sum::<f64>().sqrt();
        let (n_in, n_out) = (norm(&v), norm(&out));
        prop_assert!(n_out <= n_in + 1e-12);
        prop_assert!((n_out - (n_in - t).max(0.0)).abs() <= 1e-9 * n_in.max(1.0));
        let dot: f64 = v.iter().zip(&out).map(|(a, b)| a * b).sum();
        prop_assert!((dot - n_in * n_out).abs() <= 1e-9 * n_in.max(1.0).powi(2));
    }

    #[test]
    fn reweight_inverts_power_plus_delta(p in prop::collection::vec(0.0f64..0.1, 1..20)) {
        let delta = 1e-6;
        let w = reweight(&p, delta);
        for (pj, wj) in p.iter().zip(&w) {
            prop_assert!((wj * (pj + delta) - 1.0).abs() < 1e-12);
        }
        for a in 0..p.len() {
            for b in 0..p.len() {
                if p[a] < p[b] {
                    prop_assert!(w[a] > w[b]);
                }
            }
        }
    }

    #[test]
    fn sinr_is_scale_free_without_noise(beta in gains(4, 4), scale in 1e-3f64..1e3) {
        // Two stations per tier so that no link is interference-free.
        let tiers = vec![Tier::Terrestrial, Tier::Terrestrial, Tier::Satellite, Tier::Satellite];
        let state = ChannelState::from_gains(beta, tiers, 0.0).unwrap();
        let p = [0.01, 0.02, 0.03, 0.04];
        let scaled: Vec<f64> = p.iter().map(|v| v * scale).collect();
        let a = sinr_matrix(&state, &p);
        let b = sinr_matrix(&state, &scaled);
        for (u, v) in a.iter().zip(b.iter()) {
            prop_assert!((u - v).abs() <= 1e-12 * u.abs().max(1e-300));
        }
    }

    #[test]
    fn tiers_do_not_interfere(beta in gains(3, 4), sat in 1e-4f64..1.0, ter in 1e-4f64..1.0) {
        let tiers = vec![Tier::Terrestrial, Tier::Terrestrial, Tier::Satellite, Tier::Satellite];
        let state = ChannelState::from_gains(beta, tiers, 1e-16).unwrap();
        let p = [0.01, 0.02, 0.03, 0.04];
        let base = sinr_matrix(&state, &p);
        let sat_moved = sinr_matrix(&state, &[0.01, 0.02, sat, 0.04]);
        let ter_moved = sinr_matrix(&state, &[ter, 0.02, 0.03, 0.04]);
        for i in 0..3 {
            for j in 0..2 {
                prop_assert_eq!(base[[i, j]].to_bits(), sat_moved[[i, j]].to_bits());
            }
            for j in 2..4 {
                prop_assert_eq!(base[[i, j]].to_bits(), ter_moved[[i, j]].to_bits());
            }
        }
    }

    #[test]
    fn split_is_the_satellite_share(serving in prop::collection::vec(0usize..4, 1..40)) {
        let tiers = [Tier::Terrestrial, Tier::Terrestrial, Tier::Satellite, Tier::Terrestrial];
        let on_satellite = serving.iter().filter(|&&j| j == 2).count();
        let eps = optimal_bandwidth_split(&serving, &tiers).unwrap();
        prop_assert_eq!(eps, on_satellite as f64 / serving.len() as f64);
    }
}

fn two_station_scenario() -> Scenario {
    let station = |id: usize| StationSpec {
        id,
        tier: Tier::Terrestrial,
        position: [id as f64 * 200.0, 0.0, 30.0],
        tx_antenna_gain: 1.0,
        p_max: 0.05,
        static_power: 50.0,
        sleep_floor: 10.0,
    };
    Scenario::new(vec![station(0), station(1)], vec![[0.0, 1.0], [200.0, 1.0]], 1.5, 10e6, 15e3, 1e-20, 1e-15, 0)
        .unwrap()
}

#[test]
fn symmetric_instance_has_symmetric_solution() {
    let scenario = two_station_scenario();
    let beta = ndarray::array![[1e-11, 2e-13], [2e-13, 1e-11]];
    let state = ChannelState::from_gains(beta, vec![Tier::Terrestrial; 2], 1.5e-16).unwrap();
    let config = SimConfig::default();
    let sol = bcga_solve(&scenario, &state, 0.05, &config.solver).unwrap();
    assert!((sol.p[0] - sol.p[1]).abs() <= 1e-12 * sol.p[0].max(1e-300));
    assert_eq!(sol.serving, vec![Some(0), Some(1)]);
}

#[test]
fn higher_lambda_never_raises_terrestrial_power() {
    let config = SimConfig::default();
    let c = config.traffic.lambda_coefficient();
    let k = 60;
    for seed in 0..5 {
        let scenario = config.deployment.generate(k, seed).unwrap();
        let state = ChannelState::draw(&scenario, &config.channel, seed + 100).unwrap();
        let tiers = scenario.tiers();
        let powers: Vec<f64> = [0.1 * c, c, 10.0 * c]
            .iter()
            .map(|coef| {
                let sol = bcga_solve(&scenario, &state, coef / k as f64, &config.solver).unwrap();
                sol.p.iter().zip(&tiers).filter(|(_, t)| **t == Tier::Terrestrial).map(|(p, _)| p).sum()
            })
            .collect();
        assert!(
            powers[1] <= powers[0] && powers[2] <= powers[1],
            "seed {seed}: terrestrial power {powers:?}"
        );
    }
}

#[test]
fn metrics_entry_points_agree_on_the_same_allocation() {
    let config = SimConfig::default();
    let snap = hour_snapshot(&config, 3, 12).unwrap();
    let sol = bcga_solve(&snap.scenario, &snap.state, snap.lambda, &config.solver).unwrap();
    let outcome = BenchmarkOutcome {
        setting: BenchmarkSetting::FixedSplit,
        allocation: Allocation::from_solution(&sol, snap.scenario.total_bandwidth()),
    };
    for accounting in [PowerAccounting::AllocatedBandwidth, PowerAccounting::FullBandwidth] {
        let a = solution_metrics(&sol, &snap.scenario, &snap.state, 12, accounting);
        let b = benchmark_metrics(&outcome, &snap.scenario, &snap.state, 12, accounting);
        assert_eq!(a, b);
        assert_eq!(a.epsilon, sol.epsilon);
    }
}

#[test]
fn sum_log_throughput_matches_unpenalized_utility() {
    let config = SimConfig::default();
    let snap = hour_snapshot(&config, 5, 9).unwrap();
    let sol = bcga_solve(&snap.scenario, &snap.state, snap.lambda, &config.solver).unwrap();
    let rows: Vec<usize> = (0..sol.covered.len()).filter(|&i| sol.covered[i]).collect();
    let sub = snap.state.select_ues(&rows);
    let x = sol.x_binary().select(ndarray::Axis(0), &rows);
    let problem = Problem::new(&snap.scenario, &sub, 0.0, GroupMode::PerStation);
    let utility = evaluate_utility(&problem, x.view(), &sol.p, sol.epsilon, &sol.weights).unwrap();
    let m = solution_metrics(&sol, &snap.scenario, &snap.state, 9, PowerAccounting::AllocatedBandwidth);
    assert!((m.sum_log_throughput - utility).abs() <= 1e-9 * utility.abs());
}

#[test]
fn every_solver_in_an_hour_sees_the_same_channel() {
    let config = SimConfig::default();
    for hour in [0, 7, 20] {
        let out = simulate_hour(&config, 9, hour, &SolverKind::ALL).unwrap();
        let snap = hour_snapshot(&config, 9, hour).unwrap();
        for r in &out.records {
            assert_eq!(r.channel_fingerprint, snap.state.fingerprint());
        }
    }
}

#[test]
fn day_level_invariants() {
    let config = SimConfig::from_json(r#"{"channel": {"blockage_probability": 0.05}}"#).unwrap();
    let day = simulate_day(&config, 21, &[SolverKind::Ntn3gpp, SolverKind::TnOnly]).unwrap();
    let static_floor: f64 = config
        .deployment
        .build_stations()
        .iter()
        .filter(|s| s.tier == Tier::Terrestrial)
        .map(|s| s.sleep_floor)
        .sum();
    let mut ntn_power = Vec::new();
    let mut tn_power = Vec::new();
    for pair in day.records.chunks(2) {
        let (ntn, tn) = (&pair[0].metrics, &pair[1].metrics);
        assert!(tn.coverage_ratio <= ntn.coverage_ratio, "hour {}", ntn.hour);
        for m in [ntn, tn] {
            assert!((0.0..=1.0).contains(&m.satellite_share));
            assert!((0.0..=1.0).contains(&m.coverage_ratio));
            assert!(m.network_power >= static_floor);
        }
        assert_eq!(tn.satellite_share, 0.0);
        ntn_power.push(ntn.network_power);
        tn_power.push(tn.network_power);
    }
    assert!(ntn_power.iter().all(|&p| p == ntn_power[0]));
    assert!(tn_power.iter().all(|&p| p == tn_power[0]));
}

#[test]
fn benchmark_splits_pass_through_to_metrics() {
    let config = SimConfig::default();
    let out = simulate_hour(&config, 2, 14, &SolverKind::ALL).unwrap();
    let eps: Vec<f64> = out.records.iter().map(|r| r.metrics.epsilon).collect();
    assert_eq!(eps[1], 0.75);
    assert_eq!(eps[2], 0.0);
    assert_eq!(eps[3], 0.5);
    let sol = out.solution.unwrap();
    assert_eq!(eps[0], sol.epsilon);
}

#[test]
fn shipped_default_config_matches_builtin_defaults() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.json");
    assert_eq!(SimConfig::load(&path).unwrap(), SimConfig::default());
}
