//! Simulation configuration file. Every power or gain accepts either a
//! linear key or a dB-suffixed key; values are linear once loaded.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::blaster::SolverConfig;
use crate::channel::{
    ChannelParams, LogDistance, LogDistanceBranch, PathLossModel, SatelliteChannel,
    TerrestrialChannel,
};
use crate::error::{Error, Result};
use crate::metrics::PowerAccounting;
use crate::scenario::{
    DeploymentParams, RadioParams, SatelliteParams, TerrestrialParams, TrafficProfile,
    HOURS_PER_DAY,
};
use crate::units::{db_sigma_to_ln_sigma, db_to_linear, dbm_to_watts};

/// Fully resolved configuration in linear units.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub deployment: DeploymentParams,
    pub channel: ChannelParams,
    pub traffic: TrafficProfile,
    pub solver: SolverConfig,
    pub power_accounting: PowerAccounting,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub metrics_file: PathBuf,
    /// Hours whose per-iteration trace is written during `run`.
    pub trace_hours: Vec<usize>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            metrics_file: PathBuf::from("metrics.csv"),
            trace_hours: Vec::new(),
        }
    }
}

impl Default for SimConfig {
    fn default() -> Self {
        RawConfig::default()
            .resolve()
            .expect("built-in defaults are valid")
    }
}

impl SimConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(if path == "." { String::new() } else { path }, e.inner().to_string())
        })?;
        raw.resolve()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::config(path.display().to_string(), format!("cannot read config: {e}"))
        })?;
        Self::from_json(&text)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawConfig {
    layout: RawLayout,
    stations: RawStations,
    satellite: RawSatellite,
    channel: RawChannel,
    radio: RawRadio,
    traffic: RawTraffic,
    optimizer: SolverConfig,
    metrics: RawMetrics,
    output: OutputConfig,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawLayout {
    inter_site_distance_m: Option<f64>,
    rings: Option<u32>,
    ue_height_m: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawStations {
    antenna_gain: Option<f64>,
    antenna_gain_dbi: Option<f64>,
    p_max_w: Option<f64>,
    p_max_dbm: Option<f64>,
    static_power_w: Option<f64>,
    static_power_dbm: Option<f64>,
    sleep_floor_w: Option<f64>,
    sleep_floor_dbm: Option<f64>,
    height_m: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawSatellite {
    enabled: Option<bool>,
    altitude_m: Option<f64>,
    antenna_gain: Option<f64>,
    antenna_gain_dbi: Option<f64>,
    p_max_w: Option<f64>,
    p_max_dbm: Option<f64>,
    shadow_sigma_db: Option<f64>,
    clutter_gain: Option<f64>,
    clutter_loss_db: Option<f64>,
    scintillation_gain: Option<f64>,
    scintillation_loss_db: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawChannel {
    carrier_frequency_hz: Option<f64>,
    path_loss: Option<RawPathLoss>,
    shadow_sigma_los_db: Option<f64>,
    shadow_sigma_nlos_db: Option<f64>,
    blockage_probability: Option<f64>,
    blockage_gain: Option<f64>,
    blockage_loss_db: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
enum RawPathLoss {
    FreeSpace,
    LogDistance {
        los_loss_at_1m_db: f64,
        los_exponent: f64,
        nlos_loss_at_1m_db: f64,
        nlos_exponent: f64,
        los_breakpoint_m: f64,
        los_decay_m: f64,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawRadio {
    total_bandwidth_hz: Option<f64>,
    subcarrier_spacing_hz: Option<f64>,
    noise_density_w_per_hz: Option<f64>,
    noise_density_dbm_per_hz: Option<f64>,
    rsrp_min_w: Option<f64>,
    rsrp_min_dbm: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawTraffic {
    hourly_ue_counts: Option<Vec<usize>>,
    peak_ue_count: Option<usize>,
    lambda_coefficient: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawMetrics {
    power_accounting: PowerAccounting,
}

/// Shipped defaults.
pub mod defaults {
    pub const INTER_SITE_DISTANCE_M: f64 = 1732.0;
    pub const RINGS: u32 = 2;
    pub const UE_HEIGHT_M: f64 = 1.5;
    pub const STATION_HEIGHT_M: f64 = 35.0;
    pub const STATION_GAIN_DBI: f64 = 14.0;
    pub const STATION_P_MAX_DBM: f64 = 17.7;
    pub const STATIC_POWER_W: f64 = 50.0;
    pub const SLEEP_FLOOR_W: f64 = 10.0;
    pub const SATELLITE_ALTITUDE_M: f64 = 600e3;
    pub const SATELLITE_GAIN_DBI: f64 = 30.0;
    pub const SATELLITE_P_MAX_DBM: f64 = 15.8;
    pub const SATELLITE_SHADOW_DB: f64 = 4.0;
    pub const CLUTTER_LOSS_DB: f64 = 0.0;
    pub const SCINTILLATION_LOSS_DB: f64 = 2.2;
    pub const CARRIER_HZ: f64 = 2e9;
    pub const LOS_LOSS_AT_1M_DB: f64 = 38.46;
    pub const LOS_EXPONENT: f64 = 2.1;
    pub const NLOS_LOSS_AT_1M_DB: f64 = 9.6;
    pub const NLOS_EXPONENT: f64 = 3.86;
    pub const LOS_BREAKPOINT_M: f64 = 10.0;
    pub const LOS_DECAY_M: f64 = 1000.0;
    pub const SHADOW_LOS_DB: f64 = 4.0;
    pub const SHADOW_NLOS_DB: f64 = 8.0;
    pub const BLOCKAGE_PROBABILITY: f64 = 0.0;
    pub const BLOCKAGE_LOSS_DB: f64 = 30.0;
    pub const TOTAL_BANDWIDTH_HZ: f64 = 40e6;
    pub const SUBCARRIER_SPACING_HZ: f64 = 15e3;
    pub const NOISE_DENSITY_DBM_PER_HZ: f64 = -174.0;
    pub const RSRP_MIN_DBM: f64 = -120.0;
    pub const PEAK_UE_COUNT: usize = 200;
    pub const LAMBDA_COEFFICIENT: f64 = 5.0;
}

/// Picks the linear value, the converted dB value, or the default; both
/// keys at once is an error.
fn either(
    section: &str,
    name: &str,
    linear: Option<f64>,
    (db_key, db): (&str, Option<f64>),
    convert: fn(f64) -> f64,
    default: f64,
) -> Result<f64> {
    let value = match (linear, db) {
        (Some(_), Some(_)) => {
            return Err(Error::config(
                format!("{section}.{name}"),
                format!("give either `{name}` or `{db_key}`, not both"),
            ))
        }
        (Some(v), None) => v,
        (None, Some(d)) => convert(d),
        (None, None) => default,
    };
    if !value.is_finite() {
        return Err(Error::config(format!("{section}.{name}"), "must be finite"));
    }
    Ok(value)
}

fn positive(path: &str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::config(path, format!("must be > 0, got {value}")))
    }
}

fn non_negative(path: &str, value: f64) -> Result<f64> {
    if value >= 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::config(path, format!("must be >= 0, got {value}")))
    }
}

fn unit_gain(path: &str, value: f64) -> Result<f64> {
    if value > 0.0 && value <= 1.0 {
        Ok(value)
    } else {
        Err(Error::config(path, format!("must lie in (0, 1], got {value}")))
    }
}

fn loss_db_to_gain(db: f64) -> f64 {
    db_to_linear(-db)
}

fn dbm_per_hz_to_w(dbm: f64) -> f64 {
    dbm_to_watts(dbm)
}

impl RawConfig {
    fn resolve(self) -> Result<SimConfig> {
        use defaults as d;
        let l = self.layout;
        let st = self.stations;
        let sat = self.satellite;
        let ch = self.channel;
        let r = self.radio;
        let tr = self.traffic;

        let terrestrial = TerrestrialParams {
            antenna_gain: positive(
                "stations.antenna_gain",
                either("stations", "antenna_gain", st.antenna_gain, ("antenna_gain_dbi", st.antenna_gain_dbi), db_to_linear, db_to_linear(d::STATION_GAIN_DBI))?,
            )?,
            p_max: positive(
                "stations.p_max",
                either("stations", "p_max", st.p_max_w, ("p_max_dbm", st.p_max_dbm), dbm_to_watts, dbm_to_watts(d::STATION_P_MAX_DBM))?,
            )?,
            static_power: non_negative(
                "stations.static_power",
                either("stations", "static_power", st.static_power_w, ("static_power_dbm", st.static_power_dbm), dbm_to_watts, d::STATIC_POWER_W)?,
            )?,
            sleep_floor: non_negative(
                "stations.sleep_floor",
                either("stations", "sleep_floor", st.sleep_floor_w, ("sleep_floor_dbm", st.sleep_floor_dbm), dbm_to_watts, d::SLEEP_FLOOR_W)?,
            )?,
            height: positive("stations.height_m", st.height_m.unwrap_or(d::STATION_HEIGHT_M))?,
        };

        let satellite = if sat.enabled.unwrap_or(true) {
            Some(SatelliteParams {
                altitude: positive("satellite.altitude_m", sat.altitude_m.unwrap_or(d::SATELLITE_ALTITUDE_M))?,
                antenna_gain: positive(
                    "satellite.antenna_gain",
                    either("satellite", "antenna_gain", sat.antenna_gain, ("antenna_gain_dbi", sat.antenna_gain_dbi), db_to_linear, db_to_linear(d::SATELLITE_GAIN_DBI))?,
                )?,
                p_max: positive(
                    "satellite.p_max",
                    either("satellite", "p_max", sat.p_max_w, ("p_max_dbm", sat.p_max_dbm), dbm_to_watts, dbm_to_watts(d::SATELLITE_P_MAX_DBM))?,
                )?,
            })
        } else {
            None
        };

        let satellite_channel = SatelliteChannel {
            shadow_sigma: db_sigma_to_ln_sigma(non_negative(
                "satellite.shadow_sigma_db",
                sat.shadow_sigma_db.unwrap_or(d::SATELLITE_SHADOW_DB),
            )?),
            clutter_gain: unit_gain(
                "satellite.clutter",
                either("satellite", "clutter_gain", sat.clutter_gain, ("clutter_loss_db", sat.clutter_loss_db), loss_db_to_gain, loss_db_to_gain(d::CLUTTER_LOSS_DB))?,
            )?,
            scintillation_gain: unit_gain(
                "satellite.scintillation",
                either("satellite", "scintillation_gain", sat.scintillation_gain, ("scintillation_loss_db", sat.scintillation_loss_db), loss_db_to_gain, loss_db_to_gain(d::SCINTILLATION_LOSS_DB))?,
            )?,
        };

        let path_loss = match ch.path_loss.unwrap_or(RawPathLoss::LogDistance {
            los_loss_at_1m_db: d::LOS_LOSS_AT_1M_DB,
            los_exponent: d::LOS_EXPONENT,
            nlos_loss_at_1m_db: d::NLOS_LOSS_AT_1M_DB,
            nlos_exponent: d::NLOS_EXPONENT,
            los_breakpoint_m: d::LOS_BREAKPOINT_M,
            los_decay_m: d::LOS_DECAY_M,
        }) {
            RawPathLoss::FreeSpace => PathLossModel::FreeSpace,
            RawPathLoss::LogDistance {
                los_loss_at_1m_db,
                los_exponent,
                nlos_loss_at_1m_db,
                nlos_exponent,
                los_breakpoint_m,
                los_decay_m,
            } => PathLossModel::LogDistance(LogDistance {
                los: LogDistanceBranch {
                    gain_at_1m: loss_db_to_gain(los_loss_at_1m_db),
                    exponent: positive("channel.path_loss.los_exponent", los_exponent)?,
                },
                nlos: LogDistanceBranch {
                    gain_at_1m: loss_db_to_gain(nlos_loss_at_1m_db),
                    exponent: positive("channel.path_loss.nlos_exponent", nlos_exponent)?,
                },
                los_breakpoint: non_negative("channel.path_loss.los_breakpoint_m", los_breakpoint_m)?,
                los_decay: positive("channel.path_loss.los_decay_m", los_decay_m)?,
            }),
        };
        let blockage_probability = ch.blockage_probability.unwrap_or(d::BLOCKAGE_PROBABILITY);
        if !(0.0..=1.0).contains(&blockage_probability) {
            return Err(Error::config("channel.blockage_probability", "must lie in [0, 1]"));
        }
        let channel = ChannelParams {
            carrier_frequency: positive("channel.carrier_frequency_hz", ch.carrier_frequency_hz.unwrap_or(d::CARRIER_HZ))?,
            terrestrial: TerrestrialChannel {
                path_loss,
                shadow_sigma_los: db_sigma_to_ln_sigma(non_negative(
                    "channel.shadow_sigma_los_db",
                    ch.shadow_sigma_los_db.unwrap_or(d::SHADOW_LOS_DB),
                )?),
                shadow_sigma_nlos: db_sigma_to_ln_sigma(non_negative(
                    "channel.shadow_sigma_nlos_db",
                    ch.shadow_sigma_nlos_db.unwrap_or(d::SHADOW_NLOS_DB),
                )?),
                blockage_probability,
                blockage_gain: unit_gain(
                    "channel.blockage",
                    either("channel", "blockage_gain", ch.blockage_gain, ("blockage_loss_db", ch.blockage_loss_db), loss_db_to_gain, loss_db_to_gain(d::BLOCKAGE_LOSS_DB))?,
                )?,
            },
            satellite: satellite_channel,
        };

        let radio = RadioParams {
            total_bandwidth: positive("radio.total_bandwidth_hz", r.total_bandwidth_hz.unwrap_or(d::TOTAL_BANDWIDTH_HZ))?,
            subcarrier_spacing: positive("radio.subcarrier_spacing_hz", r.subcarrier_spacing_hz.unwrap_or(d::SUBCARRIER_SPACING_HZ))?,
            noise_density: positive(
                "radio.noise_density",
                either("radio", "noise_density", r.noise_density_w_per_hz, ("noise_density_dbm_per_hz", r.noise_density_dbm_per_hz), dbm_per_hz_to_w, dbm_per_hz_to_w(d::NOISE_DENSITY_DBM_PER_HZ))?,
            )?,
            rsrp_min: positive(
                "radio.rsrp_min",
                either("radio", "rsrp_min", r.rsrp_min_w, ("rsrp_min_dbm", r.rsrp_min_dbm), dbm_to_watts, dbm_to_watts(d::RSRP_MIN_DBM))?,
            )?,
        };
        if radio.subcarrier_spacing > radio.total_bandwidth {
            return Err(Error::config(
                "radio.subcarrier_spacing_hz",
                "must not exceed the total bandwidth",
            ));
        }

        let deployment = DeploymentParams {
            inter_site_distance: positive("layout.inter_site_distance_m", l.inter_site_distance_m.unwrap_or(d::INTER_SITE_DISTANCE_M))?,
            rings: l.rings.unwrap_or(d::RINGS),
            ue_height: positive("layout.ue_height_m", l.ue_height_m.unwrap_or(d::UE_HEIGHT_M))?,
            terrestrial,
            satellite,
            radio,
        };

        let c = tr.lambda_coefficient.unwrap_or(d::LAMBDA_COEFFICIENT);
        let traffic = match (tr.hourly_ue_counts, tr.peak_ue_count) {
            (Some(_), Some(_)) => {
                return Err(Error::config(
                    "traffic",
                    "give either `hourly_ue_counts` or `peak_ue_count`, not both",
                ))
            }
            (Some(counts), None) => {
                let counts: [usize; HOURS_PER_DAY] = counts.try_into().map_err(|v: Vec<usize>| {
                    Error::config(
                        "traffic.hourly_ue_counts",
                        format!("expected {HOURS_PER_DAY} entries, got {}", v.len()),
                    )
                })?;
                TrafficProfile::new(counts, c)?
            }
            (None, peak) => {
                let peak = peak.unwrap_or(d::PEAK_UE_COUNT);
                if peak == 0 {
                    return Err(Error::config("traffic.peak_ue_count", "must be >= 1"));
                }
                TrafficProfile::daily_curve(peak, c)?
            }
        };

        self.optimizer.validate()?;
        if let Some(&h) = self.output.trace_hours.iter().find(|&&h| h >= HOURS_PER_DAY) {
            return Err(Error::config(
                "output.trace_hours",
                format!("hour {h} is outside 0..{HOURS_PER_DAY}"),
            ));
        }

        Ok(SimConfig {
            deployment,
            channel,
            traffic,
            solver: self.optimizer,
            power_accounting: self.metrics.power_accounting,
            output: self.output,
        })
    }
}
