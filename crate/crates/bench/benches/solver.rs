use std::hint::black_box;

use blaster_core::assoc_opt::{dual_solve, DualOptions};
use blaster_core::channel::{sinr_matrix, ChannelState};
use blaster_core::{bcga_solve, SimConfig};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ndarray::Array2;

fn snapshot(config: &SimConfig, ue_count: usize) -> (blaster_core::Scenario, ChannelState) {
    let scenario = config.deployment.generate(ue_count, 7).unwrap();
    let state = ChannelState::draw(&scenario, &config.channel, 8).unwrap();
    (scenario, state)
}

fn bench_bcga(c: &mut Criterion) {
    let config = SimConfig::default();
    let mut group = c.benchmark_group("bcga_solve");
    group.sample_size(20);
    for k in [20, 80, 200] {
        let (scenario, state) = snapshot(&config, k);
        let lambda = config.traffic.lambda_coefficient() / k as f64;
        group.bench_with_input(BenchmarkId::from_parameter(k), &k, |b, _| {
            b.iter(|| bcga_solve(&scenario, &state, lambda, &config.solver).unwrap())
        });
    }
    group.finish();
}

fn bench_dual(c: &mut Criterion) {
    let config = SimConfig::default();
    let (scenario, state) = snapshot(&config, 200);
    let p = scenario.p_max();
    let x_tilde = Array2::from_shape_fn(state.beta().raw_dim(), |(i, j)| ((i * 7 + j * 3) % 11) as f64 / 10.0 - 0.4);
    c.bench_function("dual_solve/200x20", |b| {
        b.iter(|| {
            dual_solve(
                black_box(x_tilde.view()),
                state.beta().view(),
                &p,
                scenario.rsrp_min(),
                &DualOptions::default(),
                None,
            )
        })
    });
}

fn bench_sinr(c: &mut Criterion) {
    let config = SimConfig::default();
    let (scenario, state) = snapshot(&config, 200);
    let p = scenario.p_max();
    c.bench_function("sinr_matrix/200x20", |b| b.iter(|| sinr_matrix(&state, black_box(&p))));
}

criterion_group!(benches, bench_bcga, bench_dual, bench_sinr);
criterion_main!(benches);
