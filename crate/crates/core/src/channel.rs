//! Large-scale channel gains, RSRP, SINR and per-link rates.

use std::hash::{Hash, Hasher};

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{Point2, Scenario, StationSpec, Tier};
use crate::units::SPEED_OF_LIGHT;

/// Distance-dependent propagation gain (linear, ≤ 1).
pub trait PathLoss {
    fn gain(&self, carrier_frequency: f64, distance_3d: f64, los: bool) -> f64;
    fn los_probability(&self, distance_2d: f64) -> f64;
}

/// Friis free-space gain `(c / (4π d f))²`.
pub fn friis_gain(carrier_frequency: f64, distance: f64) -> f64 {
    let x = SPEED_OF_LIGHT / (4.0 * std::f64::consts::PI * distance * carrier_frequency);
    x * x
}

/// `gain(d) = gain_at_1m · d^(-exponent)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogDistanceBranch {
    pub gain_at_1m: f64,
    pub exponent: f64,
}

impl LogDistanceBranch {
    pub fn gain(&self, distance: f64) -> f64 {
        self.gain_at_1m * distance.powf(-self.exponent)
    }
}

/// Log-distance model with separate LoS/NLoS branches and an exponential
/// LoS-probability curve: 1 up to `los_breakpoint`, then
/// `exp(-(d - los_breakpoint) / los_decay)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogDistance {
    pub los: LogDistanceBranch,
    pub nlos: LogDistanceBranch,
    pub los_breakpoint: f64,
    pub los_decay: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PathLossModel {
    FreeSpace,
    LogDistance(LogDistance),
}

impl PathLoss for PathLossModel {
    fn gain(&self, carrier_frequency: f64, distance_3d: f64, los: bool) -> f64 {
        match self {
            PathLossModel::FreeSpace => friis_gain(carrier_frequency, distance_3d),
            PathLossModel::LogDistance(m) => {
                let g_los = m.los.gain(distance_3d);
                if los {
                    g_los
                } else {
                    // NLoS is never better than LoS at the same distance.
                    g_los.min(m.nlos.gain(distance_3d))
                }
            }
        }
    }

    fn los_probability(&self, distance_2d: f64) -> f64 {
        match self {
            PathLossModel::FreeSpace => 1.0,
            PathLossModel::LogDistance(m) => {
                if distance_2d <= m.los_breakpoint {
                    1.0
                } else {
                    (-(distance_2d - m.los_breakpoint) / m.los_decay).exp()
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerrestrialChannel {
    pub path_loss: PathLossModel,
    /// Std-dev of ln(SF) for LoS links.
    pub shadow_sigma_los: f64,
    pub shadow_sigma_nlos: f64,
    /// Probability that a UE is deeply blocked from every terrestrial site.
    pub blockage_probability: f64,
    /// Linear gain (≤ 1) applied to all terrestrial links of a blocked UE.
    pub blockage_gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatelliteChannel {
    /// Std-dev of ln(SF).
    pub shadow_sigma: f64,
    /// Linear clutter-loss factor CL (≤ 1).
    pub clutter_gain: f64,
    /// Linear scintillation-loss factor PL_s (≤ 1).
    pub scintillation_gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub carrier_frequency: f64,
    pub terrestrial: TerrestrialChannel,
    pub satellite: SatelliteChannel,
}

/// Frozen large-scale randomness of one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkDraw {
    pub los: bool,
    /// Linear shadowing factor (includes blockage when drawn).
    pub shadowing: f64,
}

impl LinkDraw {
    pub const NEUTRAL: LinkDraw = LinkDraw {
        los: true,
        shadowing: 1.0,
    };
}

fn distances(station: &StationSpec, ue: Point2, ue_height: f64) -> (f64, f64) {
    let dx = station.position[0] - ue[0];
    let dy = station.position[1] - ue[1];
    let dz = station.position[2] - ue_height;
    let d2 = (dx * dx + dy * dy).sqrt();
    (d2, (d2 * d2 + dz * dz).sqrt())
}

/// `β = G_TX · PL(d) · SF` for a terrestrial link.
pub fn terrestrial_gain(
    station: &StationSpec,
    ue: Point2,
    ue_height: f64,
    params: &ChannelParams,
    draw: LinkDraw,
    ue_index: usize,
) -> Result<f64> {
    if station.tier != Tier::Terrestrial {
        return Err(Error::WrongTier {
            station: station.id,
            expected: "terrestrial",
        });
    }
    let (_, d3) = distances(station, ue, ue_height);
    if !(d3 > 0.0) {
        return Err(Error::ZeroDistance {
            station: station.id,
            ue: ue_index,
        });
    }
    let pl = params
        .terrestrial
        .path_loss
        .gain(params.carrier_frequency, d3, draw.los);
    Ok(station.tx_antenna_gain * pl * draw.shadowing)
}

/// `β = G_TX · FSPL(slant) · SF · CL · PL_s` with the slant range equal to the
/// satellite altitude (nadir beam center for every UE).
pub fn satellite_gain(station: &StationSpec, params: &ChannelParams, draw: LinkDraw) -> Result<f64> {
    if station.tier != Tier::Satellite {
        return Err(Error::WrongTier {
            station: station.id,
            expected: "satellite",
        });
    }
    let slant = station.position[2];
    let sat = &params.satellite;
    Ok(station.tx_antenna_gain
        * friis_gain(params.carrier_frequency, slant)
        * draw.shadowing
        * sat.clutter_gain
        * sat.scintillation_gain)
}

/// Large-scale gains of every UE–station link for one snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    beta: Array2<f64>,
    los: Array2<bool>,
    shadowing: Array2<f64>,
    tiers: Vec<Tier>,
    noise_power: f64,
}

impl ChannelState {
    /// Draws LoS states and shadowing for every link from `seed` and evaluates
    /// the gains.
    pub fn draw(scenario: &Scenario, params: &ChannelParams, seed: u64) -> Result<Self> {
        let k = scenario.num_ues();
        let l = scenario.num_stations();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut beta = Array2::zeros((k, l));
        let mut los = Array2::from_elem((k, l), true);
        let mut shadowing = Array2::ones((k, l));
        let tp = &params.terrestrial;

        for (i, &ue) in scenario.ues().iter().enumerate() {
            // Always consume the same number of variates so that toggling
            // blockage does not reshuffle the rest of the stream.
            let blocked = rng.random::<f64>() < tp.blockage_probability;
            for (j, station) in scenario.stations().iter().enumerate() {
                let u: f64 = rng.random();
                let z: f64 = rng.sample(StandardNormal);
                let draw = match station.tier {
                    Tier::Terrestrial => {
                        let (d2, _) = distances(station, ue, scenario.ue_height());
                        let is_los = u < tp.path_loss.los_probability(d2);
                        let sigma = if is_los {
                            tp.shadow_sigma_los
                        } else {
                            tp.shadow_sigma_nlos
                        };
                        let mut sf = (sigma * z).exp();
                        if blocked {
                            sf *= tp.blockage_gain;
                        }
                        LinkDraw {
                            los: is_los,
                            shadowing: sf,
                        }
                    }
                    Tier::Satellite => LinkDraw {
                        los: true,
                        shadowing: (params.satellite.shadow_sigma * z).exp(),
                    },
                };
                beta[[i, j]] = match station.tier {
                    Tier::Terrestrial => {
                        terrestrial_gain(station, ue, scenario.ue_height(), params, draw, i)?
                    }
                    Tier::Satellite => satellite_gain(station, params, draw)?,
                };
                los[[i, j]] = draw.los;
                shadowing[[i, j]] = draw.shadowing;
            }
        }

        Ok(Self {
            beta,
            los,
            shadowing,
            tiers: scenario.tiers(),
            noise_power: scenario.noise_power(),
        })
    }

    /// State with explicit gains and neutral draws.
    pub fn from_gains(beta: Array2<f64>, tiers: Vec<Tier>, noise_power: f64) -> Result<Self> {
        if beta.ncols() != tiers.len() {
            return Err(Error::InvalidInput(format!(
                "gain matrix has {} columns but {} tiers were given",
                beta.ncols(),
                tiers.len()
            )));
        }
        if beta.iter().any(|&b| !(b >= 0.0 && b.is_finite())) {
            return Err(Error::InvalidInput("gains must be finite and >= 0".into()));
        }
        if !(noise_power >= 0.0) {
            return Err(Error::InvalidInput("noise power must be >= 0".into()));
        }
        let dim = beta.raw_dim();
        Ok(Self {
            beta,
            los: Array2::from_elem(dim, true),
            shadowing: Array2::ones(dim),
            tiers,
            noise_power,
        })
    }

    pub fn beta(&self) -> &Array2<f64> {
        &self.beta
    }

    pub fn los(&self) -> &Array2<bool> {
        &self.los
    }

    pub fn shadowing(&self) -> &Array2<f64> {
        &self.shadowing
    }

    pub fn tiers(&self) -> &[Tier] {
        &self.tiers
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    pub fn num_ues(&self) -> usize {
        self.beta.nrows()
    }

    pub fn num_stations(&self) -> usize {
        self.beta.ncols()
    }

    /// Restriction to a subset of UE rows, in the given order.
    pub fn select_ues(&self, rows: &[usize]) -> Self {
        Self {
            beta: self.beta.select(Axis(0), rows),
            los: self.los.select(Axis(0), rows),
            shadowing: self.shadowing.select(Axis(0), rows),
            tiers: self.tiers.clone(),
            noise_power: self.noise_power,
        }
    }

    /// Stable hash of the gains, tiers and noise power.
    pub fn fingerprint(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.beta.dim().hash(&mut h);
        for b in self.beta.iter() {
            b.to_bits().hash(&mut h);
        }
        self.tiers.hash(&mut h);
        self.noise_power.to_bits().hash(&mut h);
        h.finish()
    }
}

/// `β_ij · p_j`, watts per RE.
pub fn rsrp_matrix(state: &ChannelState, p: &[f64]) -> Array2<f64> {
    let mut out = state.beta.clone();
    for mut row in out.rows_mut() {
        for (v, &pj) in row.iter_mut().zip(p) {
            *v *= pj;
        }
    }
    out
}

/// Large-scale SINR. Interference comes only from other stations of the same
/// tier; the two tiers use disjoint spectrum.
pub fn sinr_matrix(state: &ChannelState, p: &[f64]) -> Array2<f64> {
    let (k, l) = state.beta.dim();
    assert_eq!(p.len(), l, "power vector length must match station count");
    let mut out = Array2::zeros((k, l));
    let mut tier_terms = vec![0.0; l];
    for (i, row) in state.beta.rows().into_iter().enumerate() {
        for j in 0..l {
            tier_terms[j] = row[j] * p[j];
        }
        for j in 0..l {
            let interference: f64 = (0..l)
                .filter(|&m| m != j && state.tiers[m] == state.tiers[j])
                .map(|m| tier_terms[m])
                .sum();
            out[[i, j]] = tier_terms[j] / (interference + state.noise_power);
        }
    }
    out
}

/// Bandwidth available to each tier, Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TierBandwidth {
    pub terrestrial: f64,
    pub satellite: f64,
}

impl TierBandwidth {
    /// Satellite tier gets `ε·W`, terrestrial tier `(1-ε)·W`.
    pub fn split(total: f64, epsilon: f64) -> Self {
        Self {
            terrestrial: (1.0 - epsilon) * total,
            satellite: epsilon * total,
        }
    }

    pub fn for_tier(&self, tier: Tier) -> f64 {
        match tier {
            Tier::Terrestrial => self.terrestrial,
            Tier::Satellite => self.satellite,
        }
    }
}

/// Load-dependent rates for one association/power/bandwidth point.
#[derive(Debug, Clone, PartialEq)]
pub struct RateContext {
    pub sinr: Array2<f64>,
    /// Column sums of the association matrix.
    pub load: Array1<f64>,
    /// `r_ij = W / max(k_j, 1) · log2(1 + γ_ij)` at the full system bandwidth.
    pub base_rate: Array2<f64>,
    /// `R_ij = W_j / max(k_j, 1) · log2(1 + γ_ij)`.
    pub link_rate: Array2<f64>,
    /// `R_i = Σ_j x_ij R_ij`.
    pub ue_rate: Array1<f64>,
}

impl RateContext {
    pub fn new(
        sinr: Array2<f64>,
        x: ArrayView2<'_, f64>,
        tiers: &[Tier],
        bandwidth: TierBandwidth,
        total_bandwidth: f64,
    ) -> Self {
        let load = x.sum_axis(Axis(0));
        let mut base_rate = Array2::zeros(sinr.raw_dim());
        let mut link_rate = Array2::zeros(sinr.raw_dim());
        for ((i, j), &g) in sinr.indexed_iter() {
            // A station never hands more than its whole band to one UE.
            let se = (1.0 + g).log2() / load[j].max(1.0);
            base_rate[[i, j]] = total_bandwidth * se;
            link_rate[[i, j]] = bandwidth.for_tier(tiers[j]) * se;
        }
        let ue_rate = (&x * &link_rate).sum_axis(Axis(1));
        Self {
            sinr,
            load,
            base_rate,
            link_rate,
            ue_rate,
        }
    }
}

/// Rates under the `ε` split of the system bandwidth.
pub fn rate_context(
    state: &ChannelState,
    x: ArrayView2<'_, f64>,
    p: &[f64],
    epsilon: f64,
    total_bandwidth: f64,
) -> RateContext {
    RateContext::new(
        sinr_matrix(state, p),
        x,
        state.tiers(),
        TierBandwidth::split(total_bandwidth, epsilon),
        total_bandwidth,
    )
}
