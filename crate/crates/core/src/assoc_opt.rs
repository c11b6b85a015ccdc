//! Association block: gradient ascent on the relaxed association matrix,
//! projection onto the RSRP-feasible set through its Lagrangian dual, and the
//! final rounding to one serving station per UE.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::channel::RateContext;
use crate::error::{Error, Result};

/// Relative slack accepted on the RSRP floor.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-6;

/// Absolute RSRP slack for a given floor.
pub fn tol_feas(rsrp_min: f64) -> f64 {
    FEASIBILITY_TOLERANCE * rsrp_min
}

/// ∂/∂x_ij of Σ_i log R_i with loads held at their current values:
/// `R_ij / R_i`.
pub fn utility_grad_x(x: ArrayView2<'_, f64>, ctx: &RateContext) -> Result<Array2<f64>> {
    debug_assert_eq!(x.dim(), ctx.link_rate.dim());
    if let Some(ue) = ctx.ue_rate.iter().position(|&r| !(r > 0.0)) {
        return Err(Error::ZeroRate { ue });
    }
    let mut grad = ctx.link_rate.clone();
    for (mut row, &r) in grad.rows_mut().into_iter().zip(ctx.ue_rate.iter()) {
        row /= r;
    }
    Ok(grad)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualOptions {
    pub max_iterations: usize,
    /// Bound on the projected dual gradient, in units of the RSRP floor.
    pub tolerance: f64,
}

impl Default for DualOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    /// Multipliers of the per-UE RSRP constraints, all ≤ 0.
    pub mu: Array1<f64>,
    /// Primal projection `max{X̃ - β⊙p_PAD⊙μ_PAD, 0}` at `mu`.
    pub x: Array2<f64>,
    /// Largest per-UE iteration count.
    pub iterations: usize,
    pub converged: bool,
}

/// Primal point minimizing the Lagrangian for fixed multipliers.
pub fn primal_from_dual(
    x_tilde: ArrayView2<'_, f64>,
    beta: ArrayView2<'_, f64>,
    p: &[f64],
    mu: ArrayView1<'_, f64>,
) -> Array2<f64> {
    let mut out = x_tilde.to_owned();
    for ((i, j), v) in out.indexed_iter_mut() {
        *v = (*v - beta[[i, j]] * p[j] * mu[i]).max(0.0);
    }
    out
}

/// Solves `min_{μ≤0} ½‖X*(μ)‖²_F + RSRP_min·1ᵀμ` by projected gradient.
///
/// The problem separates by UE. Each row runs in the scaled variable
/// `ν_i = RSRP_min·μ_i` with link weights `a_ij = β_ij p_j / RSRP_min`, and
/// steps by the inverse curvature of the active links. Non-convergence is
/// reported through [`DualSolution::converged`], never as an error.
pub fn dual_solve(
    x_tilde: ArrayView2<'_, f64>,
    beta: ArrayView2<'_, f64>,
    p: &[f64],
    rsrp_min: f64,
    opts: &DualOptions,
    warm_start: Option<ArrayView1<'_, f64>>,
) -> DualSolution {
    let (k, l) = x_tilde.dim();
    let mut mu = Array1::zeros(k);
    let mut converged = true;
    let mut max_iters = 0;
    let mut a = vec![0.0; l];

    for i in 0..k {
        for j in 0..l {
            a[j] = beta[[i, j]] * p[j] / rsrp_min;
        }
        let xt = x_tilde.row(i);
        let norm2: f64 = a.iter().map(|v| v * v).sum();
        let coverage = |nu: f64| -> (f64, f64) {
            // Returns (Σ_j a_j x*_j, active curvature).
            let mut h = 0.0;
            let mut c = 0.0;
            for j in 0..l {
                let v = xt[j] - a[j] * nu;
                if v > 0.0 {
                    h += a[j] * v;
                    c += a[j] * a[j];
                }
            }
            (h, c)
        };

        if norm2 == 0.0 {
            // No powered link: the constraint cannot be influenced.
            if coverage(0.0).0 < 1.0 - opts.tolerance {
                converged = false;
            }
            continue;
        }

        let mut nu = warm_start.map_or(0.0, |w| (w[i] * rsrp_min).min(0.0));
        let mut row_converged = false;
        let mut iters = 0;
        while iters < opts.max_iterations {
            iters += 1;
            let (h, c) = coverage(nu);
            let grad = 1.0 - h;
            if c == 0.0 && grad > 0.0 {
                // No link open yet: jump to the first breakpoint and take the
                // Newton step of the links that open there.
                let (open_at, curvature) = (0..l).filter(|&j| a[j] > 0.0).fold(
                    (f64::NEG_INFINITY, 0.0),
                    |(b, c), j| {
                        let bj = xt[j] / a[j];
                        if bj > b {
                            (bj, a[j] * a[j])
                        } else if bj == b {
                            (b, c + a[j] * a[j])
                        } else {
                            (b, c)
                        }
                    },
                );
                nu = (open_at - 1.0 / curvature).min(0.0);
                continue;
            }
            let step = if c > 0.0 { 1.0 / c } else { 1.0 / norm2 };
            let next = (nu - step * grad).min(0.0);
            let projected = (nu - next) / step;
            nu = next;
            if projected.abs() <= opts.tolerance {
                row_converged = true;
                break;
            }
        }
        if !row_converged {
            converged = false;
        }
        max_iters = max_iters.max(iters);
        mu[i] = nu / rsrp_min;
    }

    let x = primal_from_dual(x_tilde, beta, p, mu.view());
    DualSolution {
        mu,
        x,
        iterations: max_iters,
        converged,
    }
}

/// Objective of the dual problem at `mu`.
pub fn dual_objective(
    x_tilde: ArrayView2<'_, f64>,
    beta: ArrayView2<'_, f64>,
    p: &[f64],
    rsrp_min: f64,
    mu: ArrayView1<'_, f64>,
) -> f64 {
    let x = primal_from_dual(x_tilde, beta, p, mu);
    0.5 * x.iter().map(|v| v * v).sum::<f64>() + rsrp_min * mu.sum()
}

/// `X_next = max{X + α∇f - β⊙p_PAD⊙μ*_PAD, 0}`.
#[allow(clippy::too_many_arguments)]
pub fn association_step(
    x: ArrayView2<'_, f64>,
    grad: ArrayView2<'_, f64>,
    beta: ArrayView2<'_, f64>,
    p: &[f64],
    alpha: f64,
    rsrp_min: f64,
    opts: &DualOptions,
    warm_start: Option<ArrayView1<'_, f64>>,
) -> DualSolution {
    let x_tilde = &x + &(&grad * alpha);
    dual_solve(x_tilde.view(), beta, p, rsrp_min, opts, warm_start)
}

/// One serving station per UE: the largest relaxed entry among links that
/// meet the RSRP floor, or the strongest link when none does. Ties go to the
/// lowest station index.
pub fn round_association(
    x: ArrayView2<'_, f64>,
    beta: ArrayView2<'_, f64>,
    p: &[f64],
    rsrp_min: f64,
) -> Result<Vec<usize>> {
    let floor = rsrp_min - tol_feas(rsrp_min);
    x.rows()
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            if !row.iter().any(|&v| v > 0.0) {
                return Err(Error::EmptyRow { ue: i });
            }
            let mut best: Option<(usize, f64)> = None;
            for (j, &v) in row.iter().enumerate() {
                if beta[[i, j]] * p[j] >= floor && best.is_none_or(|(_, b)| v > b) {
                    best = Some((j, v));
                }
            }
            Ok(match best {
                Some((j, _)) => j,
                None => strongest(beta.row(i), p),
            })
        })
        .collect()
}

fn strongest(beta_row: ArrayView1<'_, f64>, p: &[f64]) -> usize {
    let mut best = 0;
    for j in 1..p.len() {
        if beta_row[j] * p[j] > beta_row[best] * p[best] {
            best = j;
        }
    }
    best
}

/// 0/1 matrix with a single one per row at the serving station.
pub fn assignment_matrix(serving: &[usize], num_stations: usize) -> Array2<f64> {
    let mut x = Array2::zeros((serving.len(), num_stations));
    for (i, &j) in serving.iter().enumerate() {
        x[[i, j]] = 1.0;
    }
    x
}
