//! Block coordinate gradient ascent over association, bandwidth split and
//! terrestrial power, with power-weight reweighting between passes.

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::assoc_opt::{
    assignment_matrix, association_step, round_association, tol_feas, utility_grad_x, DualOptions,
};
use crate::baselines::max_rsrp_association;
use crate::channel::{rsrp_matrix, sinr_matrix, ChannelState, RateContext, TierBandwidth};
use crate::error::{Error, Result};
use crate::power_model::{penalty, reweight, GroupMode};
use crate::power_opt::{lower_bounds, power_step, utility_grad_p, PowerStepParams};
use crate::scenario::{Scenario, Tier};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_outer_iterations: usize,
    /// Stop once |Δf| / |f| over one outer iteration falls below this.
    pub utility_rel_tolerance: f64,
    pub group_mode: GroupMode,
    pub epsilon_init: f64,
    /// When false the split stays at `epsilon_init` (fixed-split ablation).
    pub optimize_split: bool,
    /// δ in `w_j = 1/(p_j + δ)`, watts.
    pub reweight_delta: f64,
    /// Step halvings tried before a block takes a null step.
    pub max_backtracks: usize,
    /// Initial association step before backtracking; `None` means `1 / (K·L)`.
    pub association_step: Option<f64>,
    pub dual: DualOptions,
    /// Reuse the previous multipliers as the dual starting point.
    pub warm_start_dual: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_outer_iterations: 300,
            utility_rel_tolerance: 1e-4,
            group_mode: GroupMode::PerStation,
            epsilon_init: 0.5,
            optimize_split: true,
            reweight_delta: 1e-6,
            max_backtracks: 20,
            association_step: Some(1.0),
            dual: DualOptions::default(),
            warm_start_dual: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_outer_iterations == 0 {
            return Err(Error::config("optimizer.max_outer_iterations", "must be >= 1"));
        }
        if !(self.utility_rel_tolerance > 0.0) {
            return Err(Error::config("optimizer.utility_rel_tolerance", "must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.epsilon_init) {
            return Err(Error::config("optimizer.epsilon_init", "must lie in [0, 1]"));
        }
        if !(self.reweight_delta > 0.0) {
            return Err(Error::config("optimizer.reweight_delta", "must be > 0"));
        }
        if let Some(a) = self.association_step {
            if !(a > 0.0) {
                return Err(Error::config("optimizer.association_step", "must be > 0"));
            }
        }
        if !(self.dual.tolerance > 0.0) || self.dual.max_iterations == 0 {
            return Err(Error::config(
                "optimizer.dual",
                "tolerance must be > 0 and max_iterations >= 1",
            ));
        }
        Ok(())
    }
}

/// The objective for one channel snapshot restricted to covered UEs.
#[derive(Debug, Clone)]
pub struct Problem<'a> {
    pub state: &'a ChannelState,
    pub p_max: Vec<f64>,
    pub static_power: Vec<f64>,
    pub total_bandwidth: f64,
    pub rsrp_min: f64,
    pub lambda: f64,
    pub group_mode: GroupMode,
}

impl<'a> Problem<'a> {
    pub fn new(scenario: &Scenario, state: &'a ChannelState, lambda: f64, group_mode: GroupMode) -> Self {
        Self {
            state,
            p_max: scenario.p_max(),
            static_power: scenario.static_power(),
            total_bandwidth: scenario.total_bandwidth(),
            rsrp_min: scenario.rsrp_min(),
            lambda,
            group_mode,
        }
    }

    pub fn tiers(&self) -> &[Tier] {
        self.state.tiers()
    }

    fn terrestrial(&self) -> impl Iterator<Item = usize> + '_ {
        self.tiers()
            .iter()
            .enumerate()
            .filter(|(_, &t)| t == Tier::Terrestrial)
            .map(|(j, _)| j)
    }

    /// Group-sparse penalty over the terrestrial stations.
    pub fn penalty(&self, p: &[f64], w: &[f64]) -> f64 {
        let idx: Vec<usize> = self.terrestrial().collect();
        let pick = |v: &[f64]| idx.iter().map(|&j| v[j]).collect::<Vec<_>>();
        penalty(
            &pick(p),
            &pick(w),
            &pick(&self.static_power),
            self.lambda,
            self.group_mode,
        )
    }

    /// Merit with the log penalty `λ Σ_{j∈T} (p_j + ψ_j ln(p_j + δ))`.
    pub fn merit(
        &self,
        x: ArrayView2<'_, f64>,
        p: &[f64],
        epsilon: f64,
        delta: f64,
    ) -> Result<f64> {
        let ctx = RateContext::new(
            sinr_matrix(self.state, p),
            x,
            self.tiers(),
            TierBandwidth::split(self.total_bandwidth, epsilon),
            self.total_bandwidth,
        );
        let slt = sum_log_rates(&ctx.ue_rate)?;
        let penalty: f64 = self
            .terrestrial()
            .map(|j| p[j] + self.static_power[j] * (p[j] + delta).ln())
            .sum();
        Ok(slt - self.lambda * penalty)
    }

    fn utility_with_sinr(
        &self,
        sinr: &Array2<f64>,
        x: ArrayView2<'_, f64>,
        p: &[f64],
        epsilon: f64,
        w: &[f64],
    ) -> Result<f64> {
        let ctx = RateContext::new(
            sinr.clone(),
            x,
            self.tiers(),
            TierBandwidth::split(self.total_bandwidth, epsilon),
            self.total_bandwidth,
        );
        sum_log_rates(&ctx.ue_rate).map(|slt| slt - self.penalty(p, w))
    }
}

fn sum_log_rates(rates: &Array1<f64>) -> Result<f64> {
    let mut total = 0.0;
    for (ue, &r) in rates.iter().enumerate() {
        if !(r > 0.0) {
            return Err(Error::ZeroRate { ue });
        }
        total += r.ln();
    }
    Ok(total)
}

/// `Σ_i log R_i - λ(‖p‖₁ + Σ_j ψ_j w_j ‖p‖₂)` under the problem's group mode.
pub fn evaluate_utility(
    problem: &Problem<'_>,
    x: ArrayView2<'_, f64>,
    p: &[f64],
    epsilon: f64,
    w: &[f64],
) -> Result<f64> {
    let sinr = sinr_matrix(problem.state, p);
    problem.utility_with_sinr(&sinr, x, p, epsilon, w)
}

/// `ε* = K_S / K` for a rounded association.
pub fn optimal_bandwidth_split(serving: &[usize], tiers: &[Tier]) -> Result<f64> {
    if serving.is_empty() {
        return Err(Error::InvalidInput("bandwidth split needs at least one UE".into()));
    }
    let on_satellite = serving
        .iter()
        .filter(|&&j| tiers[j] == Tier::Satellite)
        .count();
    Ok(on_satellite as f64 / serving.len() as f64)
}

/// `∂f/∂ε = Σ_i (Σ_{j∈S} x_ij r_ij - Σ_{j∈T} x_ij r_ij) / R_i(ε)` with
/// `r_ij` the full-band base rates.
pub fn split_gradient(
    x: ArrayView2<'_, f64>,
    base_rate: ArrayView2<'_, f64>,
    tiers: &[Tier],
    epsilon: f64,
) -> f64 {
    x.rows()
        .into_iter()
        .zip(base_rate.rows())
        .map(|(xr, rr)| {
            let (mut sat, mut ter) = (0.0, 0.0);
            for ((&xv, &rv), &tier) in xr.iter().zip(rr.iter()).zip(tiers) {
                match tier {
                    Tier::Satellite => sat += xv * rv,
                    Tier::Terrestrial => ter += xv * rv,
                }
            }
            (sat - ter) / (epsilon * sat + (1.0 - epsilon) * ter)
        })
        .sum()
}

/// UEs that clear the RSRP floor on at least one station at `p`.
pub fn coverage_mask(state: &ChannelState, p: &[f64], rsrp_min: f64) -> Vec<bool> {
    let floor = rsrp_min - tol_feas(rsrp_min);
    rsrp_matrix(state, p)
        .rows()
        .into_iter()
        .map(|row| row.iter().any(|&v| v >= floor))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Converged,
    MaxIterations,
    /// Nothing to optimize: no UE reaches the RSRP floor anywhere.
    NoCoveredUes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Utility after reweighting; drives the convergence test.
    pub utility: f64,
    /// Utility entering the iteration, under the weights the blocks used.
    pub start_utility: f64,
    /// Utility after the association, split and power blocks, same weights.
    pub block_utility: f64,
    /// `SLT - λ Σ_j (p_j + ψ_j ln(p_j + δ))`, the concave-penalty merit that
    /// the reweighted steps majorize; non-decreasing from the first
    /// iteration on under per-station groups.
    pub merit: f64,
    pub epsilon: f64,
    /// UEs the rounded association puts on a satellite.
    pub satellite_ues: usize,
    /// Covered UEs taking part in the optimization.
    pub served_ues: usize,
    pub active_terrestrial: usize,
    /// Accepted association step, 0 for a null step.
    pub association_step: f64,
    /// Accepted power step, 0 for a null step.
    pub power_step: f64,
    pub dual_converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// Per UE of the scenario; uncovered UEs are excluded from optimization.
    pub covered: Vec<bool>,
    /// Relaxed association, zero rows for uncovered UEs.
    pub x_relaxed: Array2<f64>,
    /// Serving station per UE, `None` when uncovered.
    pub serving: Vec<Option<usize>>,
    pub p: Vec<f64>,
    pub epsilon: f64,
    pub weights: Vec<f64>,
    /// Last RSRP multipliers, zero for uncovered UEs.
    pub mu: Array1<f64>,
    pub lambda: f64,
    pub initial_utility: f64,
    pub trace: Vec<IterationRecord>,
    pub termination: Termination,
    pub channel_fingerprint: u64,
}

impl Solution {
    pub fn x_binary(&self) -> Array2<f64> {
        let mut x = Array2::zeros(self.x_relaxed.raw_dim());
        for (i, s) in self.serving.iter().enumerate() {
            if let Some(j) = *s {
                x[[i, j]] = 1.0;
            }
        }
        x
    }

    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    pub fn active_terrestrial(&self, tiers: &[Tier]) -> usize {
        count_active(&self.p, tiers)
    }

    /// Constraint audit against the scenario the solution came from.
    pub fn audit(&self, scenario: &Scenario, state: &ChannelState) -> Audit {
        let rsrp_min = scenario.rsrp_min();
        let floor = rsrp_min - tol_feas(rsrp_min);
        let tiers = scenario.tiers();
        let p_max = scenario.p_max();
        let beta = state.beta();

        let mut rsrp_violations = 0;
        let mut served = Vec::new();
        let mut rows = Vec::new();
        for (i, s) in self.serving.iter().enumerate() {
            if let Some(j) = *s {
                if beta[[i, j]] * self.p[j] < floor {
                    rsrp_violations += 1;
                }
                served.push(j);
                rows.push(i);
            }
        }
        let sub = state.select_ues(&rows);
        let tau = lower_bounds(&served, sub.beta().view(), rsrp_min, tiers.len());
        let mut box_violations = 0;
        for (j, &tier) in tiers.iter().enumerate() {
            let ok = match tier {
                // τ is compared with the same relative slack as the RSRP check.
                Tier::Terrestrial => {
                    self.p[j] >= tau[j] * (1.0 - crate::assoc_opt::FEASIBILITY_TOLERANCE)
                        && self.p[j] <= p_max[j]
                }
                Tier::Satellite => self.p[j] == p_max[j],
            };
            if !ok {
                box_violations += 1;
            }
        }
        let shutdown_with_ues = served
            .iter()
            .filter(|&&j| tiers[j] == Tier::Terrestrial && self.p[j] == 0.0)
            .count();
        let share = if served.is_empty() {
            None
        } else {
            optimal_bandwidth_split(&served, &tiers).ok()
        };
        Audit {
            rsrp_violations,
            box_violations,
            shutdown_with_ues,
            epsilon_in_range: (0.0..=1.0).contains(&self.epsilon),
            mu_nonpositive: self.mu.iter().all(|&m| m <= 0.0),
            single_serving: self
                .x_binary()
                .rows()
                .into_iter()
                .zip(&self.covered)
                .all(|(row, &c)| row.sum() == if c { 1.0 } else { 0.0 }),
            epsilon_matches_share: share.is_none_or(|s| s == self.epsilon),
        }
    }
}

/// Outcome of [`Solution::audit`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Audit {
    pub rsrp_violations: usize,
    pub box_violations: usize,
    pub shutdown_with_ues: usize,
    pub epsilon_in_range: bool,
    pub mu_nonpositive: bool,
    pub single_serving: bool,
    /// Only meaningful when the split is optimized.
    pub epsilon_matches_share: bool,
}

impl Audit {
    pub fn is_clean(&self) -> bool {
        self.rsrp_violations == 0
            && self.box_violations == 0
            && self.shutdown_with_ues == 0
            && self.epsilon_in_range
            && self.mu_nonpositive
            && self.single_serving
    }
}

pub fn count_active(p: &[f64], tiers: &[Tier]) -> usize {
    p.iter()
        .zip(tiers)
        .filter(|(&v, &t)| t == Tier::Terrestrial && v > 0.0)
        .count()
}

/// Runs the alternating scheme from the max-RSRP / max-power / equal-split
/// starting point until the utility settles.
pub fn bcga_solve(
    scenario: &Scenario,
    state: &ChannelState,
    lambda: f64,
    config: &SolverConfig,
) -> Result<Solution> {
    config.validate()?;
    let k_all = state.num_ues();
    let l = state.num_stations();
    let rsrp_min = scenario.rsrp_min();
    let p_max = scenario.p_max();
    let tiers = scenario.tiers();

    let covered = coverage_mask(state, &p_max, rsrp_min);
    let rows: Vec<usize> = (0..k_all).filter(|&i| covered[i]).collect();
    let fingerprint = state.fingerprint();

    if rows.is_empty() {
        let p = tiers
            .iter()
            .zip(&p_max)
            .map(|(&t, &pm)| if t == Tier::Satellite { pm } else { 0.0 })
            .collect();
        return Ok(Solution {
            covered,
            x_relaxed: Array2::zeros((k_all, l)),
            serving: vec![None; k_all],
            p,
            epsilon: if config.optimize_split { 0.0 } else { config.epsilon_init },
            weights: vec![1.0; l],
            mu: Array1::zeros(k_all),
            lambda,
            initial_utility: 0.0,
            trace: Vec::new(),
            termination: Termination::NoCoveredUes,
            channel_fingerprint: fingerprint,
        });
    }

    let sub = state.select_ues(&rows);
    let problem = Problem::new(scenario, &sub, lambda, config.group_mode);
    let beta = sub.beta().view();
    let k = rows.len();

    let mut p = p_max.clone();
    let mut serving: Vec<usize> = max_rsrp_association(rsrp_matrix(&sub, &p).view(), &vec![true; l], rsrp_min)
        .into_iter()
        .map(|s| s.expect("covered UE has a feasible station"))
        .collect();
    // Relaxed iterate for the gradient/projection dynamics, and its rounding,
    // which is what the utility, the power block and the split see.
    let mut x = assignment_matrix(&serving, l);
    let mut x_binary = x.clone();
    let mut epsilon = config.epsilon_init;
    let mut w = vec![1.0; l];
    let mut mu = Array1::zeros(k);
    let alpha0 = config
        .association_step
        .unwrap_or(1.0 / (k as f64 * l as f64));

    let wrap = |iteration: usize| move |e: Error| Error::Solver {
        iteration,
        source: Box::new(e),
    };

    let mut f = evaluate_utility(&problem, x_binary.view(), &p, epsilon, &w).map_err(wrap(0))?;
    let initial_utility = f;
    let mut previous = f;
    let mut trace = Vec::new();
    let mut termination = Termination::MaxIterations;

    for iteration in 0..config.max_outer_iterations {
        let start_utility = f;

        // Association and split. A candidate is the projected gradient step,
        // its rounding, and the split that rounding implies.
        let sinr = sinr_matrix(&sub, &p);
        let ctx = RateContext::new(
            sinr.clone(),
            x.view(),
            &tiers,
            TierBandwidth::split(problem.total_bandwidth, epsilon),
            problem.total_bandwidth,
        );
        let grad = utility_grad_x(x.view(), &ctx).map_err(wrap(iteration))?;
        let mut alpha = alpha0;
        let mut association_taken = 0.0;
        let mut dual_converged = true;
        for _ in 0..=config.max_backtracks {
            let warm = config.warm_start_dual.then_some(mu.view());
            let dual = association_step(
                x.view(),
                grad.view(),
                beta,
                &p,
                alpha,
                rsrp_min,
                &config.dual,
                warm,
            );
            let candidate_serving =
                round_association(dual.x.view(), beta, &p, rsrp_min).map_err(wrap(iteration))?;
            let candidate_epsilon = if config.optimize_split {
                optimal_bandwidth_split(&candidate_serving, &tiers).map_err(wrap(iteration))?
            } else {
                epsilon
            };
            let candidate_binary = assignment_matrix(&candidate_serving, l);
            if let Ok(value) =
                problem.utility_with_sinr(&sinr, candidate_binary.view(), &p, candidate_epsilon, &w)
            {
                if value >= f {
                    f = value;
                    x = dual.x;
                    x_binary = candidate_binary;
                    mu = dual.mu;
                    serving = candidate_serving;
                    epsilon = candidate_epsilon;
                    association_taken = alpha;
                    dual_converged = dual.converged;
                    break;
                }
            }
            alpha *= 0.5;
        }

        // Power.
        let tau = lower_bounds(&serving, beta, rsrp_min, l);
        let grad_p = utility_grad_p(&p, x_binary.view(), &sub, epsilon, problem.total_bandwidth, lambda)
            .map_err(wrap(iteration))?;
        // PerStation mode uses the diagonal metric max(p_j, τ_j)², which is
        // the inverse curvature of a log-rate term and keeps near-idle
        // stations from dictating the step of the rest. The whole-vector
        // prox needs a uniform metric.
        let (metric, mut eta) = match config.group_mode {
            GroupMode::PerStation => {
                let metric: Vec<f64> = p.iter().zip(&tau).map(|(&v, &t)| v.max(t).powi(2)).collect();
                (metric, 1.0)
            }
            GroupMode::WholeVector => {
                let grad_norm = tiers
                    .iter()
                    .zip(grad_p.iter())
                    .filter(|(&t, _)| t == Tier::Terrestrial)
                    .map(|(_, g)| g.abs())
                    .fold(0.0, f64::max);
                let p_ceiling = tiers
                    .iter()
                    .zip(&p_max)
                    .filter(|(&t, _)| t == Tier::Terrestrial)
                    .map(|(_, &v)| v)
                    .fold(0.0, f64::max);
                let eta = if grad_norm > 0.0 { p_ceiling / grad_norm } else { 0.0 };
                (vec![1.0; l], eta)
            }
        };
        let mut power_taken = 0.0;
        if eta > 0.0 {
            for _ in 0..=config.max_backtracks {
                let params = PowerStepParams {
                    step: eta,
                    metric: metric.clone(),
                    lambda,
                    weights: w.clone(),
                    static_power: problem.static_power.clone(),
                    lower: tau.clone(),
                    upper: p_max.clone(),
                    group_mode: config.group_mode,
                };
                let candidate = power_step(&p, grad_p.as_slice().unwrap(), &params, &tiers)
                    .map_err(wrap(iteration))?;
                if let Ok(value) = evaluate_utility(&problem, x_binary.view(), &candidate, epsilon, &w) {
                    if value >= f {
                        f = value;
                        p = candidate;
                        power_taken = eta;
                        break;
                    }
                }
                eta *= 0.5;
            }
        }
        let block_utility = f;
        let merit = problem.merit(x_binary.view(), &p, epsilon, config.reweight_delta).map_err(wrap(iteration))?;

        w = reweight(&p, config.reweight_delta);
        f = evaluate_utility(&problem, x_binary.view(), &p, epsilon, &w).map_err(wrap(iteration))?;
        trace.push(IterationRecord {
            iteration,
            utility: f,
            start_utility,
            block_utility,
            merit,
            epsilon,
            satellite_ues: serving.iter().filter(|&&j| tiers[j] == Tier::Satellite).count(),
            served_ues: k,
            active_terrestrial: count_active(&p, &tiers),
            association_step: association_taken,
            power_step: power_taken,
            dual_converged,
        });

        if (f - previous).abs() <= config.utility_rel_tolerance * previous.abs().max(1e-12) {
            termination = Termination::Converged;
            break;
        }
        previous = f;
    }

    // Scatter back to the full UE set.
    let mut x_full = Array2::zeros((k_all, l));
    let mut mu_full = Array1::zeros(k_all);
    let mut serving_full = vec![None; k_all];
    for (r, &i) in rows.iter().enumerate() {
        x_full.row_mut(i).assign(&x.row(r));
        mu_full[i] = mu[r];
        serving_full[i] = Some(serving[r]);
    }

    Ok(Solution {
        covered,
        x_relaxed: x_full,
        serving: serving_full,
        p,
        epsilon,
        weights: w,
        mu: mu_full,
        lambda,
        initial_utility,
        trace,
        termination,
        channel_fingerprint: fingerprint,
    })
}
