//! Station power consumption, the group-sparse power penalty and its
//! reweighting.

use serde::{Deserialize, Serialize};

/// Q_j = P0 + p_j + ψ_j·[p_j > 0].
///
/// `p` is whatever transmit power the caller accounts for: per-RE watts in the
/// optimizer, per-RE watts times the RE count in network reports.
pub fn station_consumption(p: f64, static_power: f64, sleep_floor: f64) -> f64 {
    let on = if p > 0.0 { static_power } else { 0.0 };
    sleep_floor + p + on
}

/// How the L2 part of the penalty groups the power vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupMode {
    /// One group holding every terrestrial power: λ(‖p‖₁ + (Σψ_j w_j)‖p‖₂).
    WholeVector,
    /// One group per station: λ Σ_j (p_j + ψ_j w_j p_j).
    #[default]
    PerStation,
}

/// Group-sparse penalty over terrestrial entries (`p`, `w`, `psi` aligned).
pub fn penalty(p: &[f64], w: &[f64], psi: &[f64], lambda: f64, mode: GroupMode) -> f64 {
    debug_assert!(p.len() == w.len() && p.len() == psi.len());
    let l1: f64 = p.iter().sum();
    match mode {
        GroupMode::WholeVector => {
            let weight: f64 = psi.iter().zip(w).map(|(s, w)| s * w).sum();
            let l2 = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            lambda * (l1 + weight * l2)
        }
        GroupMode::PerStation => {
            let weighted: f64 = p
                .iter()
                .zip(w)
                .zip(psi)
                .map(|((p, w), s)| s * w * p.abs())
                .sum();
            lambda * (l1 + weighted)
        }
    }
}

/// Reweighting rule `w_j = 1 / (p_j + δ)`.
pub fn reweight(p: &[f64], delta: f64) -> Vec<f64> {
    assert!(delta > 0.0, "reweighting offset must be positive");
    p.iter().map(|&v| 1.0 / (v + delta)).collect()
}

/// Power vector together with the penalty weights it induced.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerState {
    pub p: Vec<f64>,
    pub w: Vec<f64>,
    pub delta: f64,
}

impl PowerState {
    /// Starting point: the given powers with unit weights.
    pub fn new(p: Vec<f64>, delta: f64) -> Self {
        let w = vec![1.0; p.len()];
        Self { p, w, delta }
    }

    pub fn reweight(&mut self) {
        self.w = reweight(&self.p, self.delta);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn consumption_examples() {
        assert_eq!(station_consumption(0.0, 50.0, 10.0), 10.0);
        assert_eq!(station_consumption(2.0, 50.0, 10.0), 62.0);
        assert_eq!(station_consumption(3.0, 0.0, 0.0), 3.0);
    }

    #[test]
    fn penalty_examples() {
        let zero = penalty(&[0.0, 0.0], &[1.0, 1.0], &[1.0, 1.0], 1.0, GroupMode::WholeVector);
        assert_eq!(zero, 0.0);
        let p = [3.0, 4.0];
        let ones = [1.0, 1.0];
        assert_eq!(penalty(&p, &ones, &ones, 1.0, GroupMode::WholeVector), 17.0);
        assert_eq!(penalty(&p, &ones, &ones, 1.0, GroupMode::PerStation), 14.0);
    }

    #[test]
    fn reweight_examples() {
        assert_eq!(reweight(&[0.0], 1e-6), vec![1e6]);
        assert!((reweight(&[1.0], 1e-6)[0] - 0.999999).abs() < 1e-9);
        let w = reweight(&[0.1, 0.2], 1e-6);
        assert!(w[0] > w[1]);
    }

    #[test]
    fn shutdown_saves_static_and_transmit_power() {
        let (psi, p0, p) = (50.0, 10.0, 0.3);
        let saved = station_consumption(p, psi, p0) - station_consumption(0.0, psi, p0);
        assert!((saved - (psi + p)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn reweight_inverts_offset(p in proptest::collection::vec(0.0f64..10.0, 1..8), delta in 1e-9f64..1.0) {
            let w = reweight(&p, delta);
            for (pj, wj) in p.iter().zip(&w) {
                prop_assert!((wj * (pj + delta) - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn penalty_is_positively_homogeneous(
            p in proptest::collection::vec(0.0f64..5.0, 1..6),
            scale in 0.0f64..20.0,
            whole in any::<bool>(),
        ) {
            let mode = if whole { GroupMode::WholeVector } else { GroupMode::PerStation };
            let w: Vec<f64> = (0..p.len()).map(|j| 0.5 + j as f64).collect();
            let psi: Vec<f64> = (0..p.len()).map(|j| 1.0 + 2.0 * j as f64).collect();
            let scaled: Vec<f64> = p.iter().map(|v| v * scale).collect();
            let a = penalty(&scaled, &w, &psi, 0.7, mode);
            let b = scale * penalty(&p, &w, &psi, 0.7, mode);
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
        }
    }
}
