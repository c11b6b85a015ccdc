//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use blaster_core::Tier;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Exact Euclidean projection of `target` onto `{x ≥ 0, aᵀx ≥ b}` by
/// enumerating which coordinates sit at zero and whether the halfspace is
/// tight, keeping the closest feasible candidate.
pub fn projection_oracle(target: &[f64], a: &[f64], b: f64) -> Vec<f64> {
    let n = target.len();
    let feasible = |x: &[f64]| {
        let ax: f64 = x.iter().zip(a).map(|(u, v)| u * v).sum();
        x.iter().all(|&v| v >= 0.0) && ax >= b * (1.0 - 1e-12)
    };
    let dist = |x: &[f64]| -> f64 { x.iter().zip(target).map(|(u, v)| (u - v).powi(2)).sum() };
    let mut best: Option<(f64, Vec<f64>)> = None;
    for zeros in 0u32..(1 << n) {
        let free: Vec<usize> = (0..n).filter(|j| zeros & (1 << j) == 0).collect();
        let mut inactive = vec![0.0; n];
        for &j in &free {
            inactive[j] = target[j];
        }
        let mut candidates = vec![inactive.clone()];
        let norm2: f64 = free.iter().map(|&j| a[j] * a[j]).sum();
        if norm2 > 0.0 {
            let gap = b - free.iter().map(|&j| a[j] * target[j]).sum::<f64>();
            let mut tight = vec![0.0; n];
            for &j in &free {
                tight[j] = target[j] + gap / norm2 * a[j];
            }
            candidates.push(tight);
        }
        for c in candidates {
            if feasible(&c) {
                let d = dist(&c);
                if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                    best = Some((d, c));
                }
            }
        }
    }
    best.expect("feasible set is nonempty when some a_j > 0").1
}

/// `argmin_x ½‖x - v‖² + t‖x‖₂` over the plane by successively refined grid
/// search.
pub fn prox_grid_oracle(v: [f64; 2], t: f64) -> [f64; 2] {
    let obj = |x: [f64; 2]| {
        0.5 * ((x[0] - v[0]).powi(2) + (x[1] - v[1]).powi(2)) + t * x[0].hypot(x[1])
    };
    let mut center = [0.0, 0.0];
    let mut half = v[0].abs().max(v[1].abs()) + 1.0;
    let n = 200;
    for _ in 0..12 {
        let mut best = (f64::INFINITY, center);
        for a in 0..=n {
            for b in 0..=n {
                let x = [
                    center[0] - half + 2.0 * half * a as f64 / n as f64,
                    center[1] - half + 2.0 * half * b as f64 / n as f64,
                ];
                let f = obj(x);
                if f < best.0 {
                    best = (f, x);
                }
            }
        }
        center = best.1;
        half *= 0.1;
    }
    center
}

/// Same-tier SINR computed link by link.
pub fn sinr_oracle(beta: &[Vec<f64>], tiers: &[Tier], p: &[f64], noise: f64) -> Vec<Vec<f64>> {
    beta.iter()
        .map(|row| {
            (0..tiers.len())
                .map(|j| {
                    let interference: f64 = (0..tiers.len())
                        .filter(|&m| m != j && tiers[m] == tiers[j])
                        .map(|m| row[m] * p[m])
                        .sum();
                    row[j] * p[j] / (interference + noise)
                })
                .collect()
        })
        .collect()
}

/// `Σ_i log Σ_j x_ij W_j / max(k_j, 1) log2(1 + γ_ij)` with the loads given.
pub fn slt_oracle(
    x: &[Vec<f64>],
    loads: &[f64],
    sinr: &[Vec<f64>],
    tiers: &[Tier],
    epsilon: f64,
    total: f64,
) -> f64 {
    x.iter()
        .zip(sinr)
        .map(|(xr, sr)| {
            let rate: f64 = (0..tiers.len())
                .map(|j| {
                    let w = match tiers[j] {
                        Tier::Satellite => epsilon * total,
                        Tier::Terrestrial => (1.0 - epsilon) * total,
                    };
                    xr[j] * w / loads[j].max(1.0) * (1.0 + sr[j]).log2()
                })
                .sum();
            rate.ln()
        })
        .sum()
}

pub fn column_sums(x: &[Vec<f64>]) -> Vec<f64> {
    let l = x[0].len();
    (0..l).map(|j| x.iter().map(|r| r[j]).sum()).collect()
}

/// Random gains between 1e-13 and 1e-10 (satellite column weaker).
pub fn random_gains(rng: &mut ChaCha8Rng, k: usize, tiers: &[Tier]) -> Vec<Vec<f64>> {
    (0..k)
        .map(|_| {
            tiers
                .iter()
                .map(|t| {
                    let exp = match t {
                        Tier::Terrestrial => rng.random_range(-13.0..-10.0),
                        Tier::Satellite => rng.random_range(-13.5..-12.0),
                    };
                    10f64.powf(exp)
                })
                .collect()
        })
        .collect()
}

pub fn max_rel_err(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(u, v)| (u - v).abs() / u.abs().max(v.abs()).max(1e-300))
        .fold(0.0, f64::max)
}
