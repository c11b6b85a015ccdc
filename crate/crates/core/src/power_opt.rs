//! Power block: proximal gradient ascent on terrestrial transmit powers with
//! block soft thresholding and a clamp onto the RSRP / max-power box.

use std::f64::consts::LN_2;

use ndarray::{Array1, ArrayView2};

use crate::channel::{rate_context, ChannelState};
use crate::error::{Error, Result};
use crate::power_model::GroupMode;
use crate::scenario::Tier;

/// Gradient of `Σ_i log R_i - λ Σ_{j∈T} p_j` with respect to every station
/// power, association and split held fixed. Satellite entries carry the
/// throughput part only; they are not optimized.
pub fn utility_grad_p(
    p: &[f64],
    x: ArrayView2<'_, f64>,
    state: &ChannelState,
    epsilon: f64,
    total_bandwidth: f64,
    lambda: f64,
) -> Result<Array1<f64>> {
    let ctx = rate_context(state, x, p, epsilon, total_bandwidth);
    if let Some(ue) = ctx.ue_rate.iter().position(|&r| !(r > 0.0)) {
        return Err(Error::ZeroRate { ue });
    }
    let (k, l) = x.dim();
    let tiers = state.tiers();
    let beta = state.beta();
    let noise = state.noise_power();
    let mut grad = Array1::zeros(l);
    let mut coef = vec![0.0; l];

    for i in 0..k {
        let r_i = ctx.ue_rate[i];
        let mut tier_sum = [0.0f64; 2];
        let mut weighted = [0.0f64; 2];
        for j in 0..l {
            tier_sum[tier_slot(tiers[j])] += beta[[i, j]] * p[j];
        }
        for j in 0..l {
            let xij = x[[i, j]];
            if xij == 0.0 {
                coef[j] = 0.0;
                continue;
            }
            let own = beta[[i, j]] * p[j];
            let denom = tier_sum[tier_slot(tiers[j])] - own + noise;
            let gamma = ctx.sinr[[i, j]];
            let share = bandwidth_share(tiers[j], epsilon, total_bandwidth) / ctx.load[j].max(1.0);
            coef[j] = xij * share / (LN_2 * (1.0 + gamma) * denom * r_i);
            weighted[tier_slot(tiers[j])] += coef[j] * gamma;
        }
        for m in 0..l {
            let b = beta[[i, m]];
            if b == 0.0 {
                continue;
            }
            let others = weighted[tier_slot(tiers[m])] - coef[m] * ctx.sinr[[i, m]];
            grad[m] += b * (coef[m] - others);
        }
    }

    for (g, &tier) in grad.iter_mut().zip(tiers) {
        if tier == Tier::Terrestrial {
            *g -= lambda;
        }
    }
    Ok(grad)
}

fn tier_slot(tier: Tier) -> usize {
    match tier {
        Tier::Terrestrial => 0,
        Tier::Satellite => 1,
    }
}

fn bandwidth_share(tier: Tier, epsilon: f64, total: f64) -> f64 {
    match tier {
        Tier::Terrestrial => (1.0 - epsilon) * total,
        Tier::Satellite => epsilon * total,
    }
}

/// Shrinkage level(s) of the proximal step.
#[derive(Debug, Clone, PartialEq)]
pub enum Threshold {
    /// Single group covering the whole vector.
    Group(f64),
    /// One scalar group per entry.
    PerEntry(Vec<f64>),
}

/// Proximal operator of `t‖·‖₂`: `max{1 - t/‖p̃‖₂, 0} p̃`, per group.
pub fn block_soft_threshold(p_tilde: &[f64], threshold: &Threshold) -> Vec<f64> {
    let shrink = |v: f64, norm: f64, t: f64| {
        if norm <= t || norm == 0.0 {
            0.0
        } else {
            (1.0 - t / norm) * v
        }
    };
    match threshold {
        Threshold::Group(t) => {
            let norm = p_tilde.iter().map(|v| v * v).sum::<f64>().sqrt();
            p_tilde.iter().map(|&v| shrink(v, norm, *t)).collect()
        }
        Threshold::PerEntry(ts) => p_tilde
            .iter()
            .zip(ts)
            .map(|(&v, &t)| shrink(v, v.abs(), t))
            .collect(),
    }
}

/// `τ_j = max_{i served by j} RSRP_min / β_ij`, zero for idle stations.
pub fn lower_bounds(
    serving: &[usize],
    beta: ArrayView2<'_, f64>,
    rsrp_min: f64,
    num_stations: usize,
) -> Vec<f64> {
    let mut tau = vec![0.0f64; num_stations];
    for (i, &j) in serving.iter().enumerate() {
        tau[j] = tau[j].max(rsrp_min / beta[[i, j]]);
    }
    tau
}

/// Inputs of one proximal power update. Vectors span every station; only
/// terrestrial entries are read for the threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerStepParams {
    /// η
    pub step: f64,
    /// Per-station multipliers of η (diagonal metric). Must be uniform in
    /// `WholeVector` mode.
    pub metric: Vec<f64>,
    pub lambda: f64,
    pub weights: Vec<f64>,
    pub static_power: Vec<f64>,
    /// τ
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub group_mode: GroupMode,
}

impl PowerStepParams {
    /// `t = λ·η·s·wᵀψ` over terrestrial stations, or `t_j = λ·η·s_j·w_j·ψ_j`.
    pub fn threshold(&self, tiers: &[Tier]) -> Threshold {
        let scale = self.lambda * self.step;
        let mut terrestrial = tiers
            .iter()
            .enumerate()
            .filter(|(_, &t)| t == Tier::Terrestrial)
            .map(|(j, _)| j)
            .peekable();
        match self.group_mode {
            GroupMode::WholeVector => {
                let s = terrestrial.peek().map_or(1.0, |&j| self.metric[j]);
                Threshold::Group(
                    scale
                        * s
                        * terrestrial
                            .map(|j| self.weights[j] * self.static_power[j])
                            .sum::<f64>(),
                )
            }
            GroupMode::PerStation => Threshold::PerEntry(
                terrestrial
                    .map(|j| scale * self.metric[j] * self.weights[j] * self.static_power[j])
                    .collect(),
            ),
        }
    }
}

/// `p_next = [prox(p + η∇f)]_τ^{p_max}` on terrestrial stations; satellites
/// are pinned to their maximum.
pub fn power_step(
    p: &[f64],
    grad: &[f64],
    params: &PowerStepParams,
    tiers: &[Tier],
) -> Result<Vec<f64>> {
    for (j, &tier) in tiers.iter().enumerate() {
        if tier == Tier::Terrestrial && params.lower[j] > params.upper[j] {
            return Err(Error::Infeasible {
                station: j,
                lower_bound: params.lower[j],
                p_max: params.upper[j],
            });
        }
    }
    let idx: Vec<usize> = (0..tiers.len())
        .filter(|&j| tiers[j] == Tier::Terrestrial)
        .collect();
    if params.group_mode == GroupMode::WholeVector
        && idx.windows(2).any(|w| params.metric[w[0]] != params.metric[w[1]])
    {
        return Err(Error::InvalidInput(
            "whole-vector power step needs a uniform metric".into(),
        ));
    }
    let p_tilde: Vec<f64> = idx
        .iter()
        .map(|&j| p[j] + params.step * params.metric[j] * grad[j])
        .collect();
    let p_hat = block_soft_threshold(&p_tilde, &params.threshold(tiers));

    let mut next = params.upper.clone();
    for (&j, v) in idx.iter().zip(p_hat) {
        next[j] = v.clamp(params.lower[j], params.upper[j]);
    }
    Ok(next)
}
