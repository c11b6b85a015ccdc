//! Deployment snapshots: the hexagonal terrestrial grid, the overhead
//! satellite beam, uniform UE drops and the daily traffic schedule.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point2 = [f64; 2];
pub type Point3 = [f64; 3];

pub const HOURS_PER_DAY: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tier {
    Terrestrial,
    Satellite,
}

/// One transmitting station. All quantities are linear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationSpec {
    pub id: usize,
    pub tier: Tier,
    /// Meters. Satellites sit on the z-axis above the grid center.
    pub position: Point3,
    pub tx_antenna_gain: f64,
    /// Watts per resource element.
    pub p_max: f64,
    /// Load-independent consumption removed by shutdown, watts.
    pub static_power: f64,
    /// Consumption that remains while shut down, watts.
    pub sleep_floor: f64,
}

impl StationSpec {
    fn validate(&self) -> Result<()> {
        let path = format!("stations[{}]", self.id);
        if !(self.p_max > 0.0 && self.p_max.is_finite()) {
            return Err(Error::config(format!("{path}.p_max"), "must be > 0"));
        }
        if !(self.static_power >= 0.0) {
            return Err(Error::config(format!("{path}.static_power"), "must be >= 0"));
        }
        if !(self.sleep_floor >= 0.0) {
            return Err(Error::config(format!("{path}.sleep_floor"), "must be >= 0"));
        }
        if !(self.tx_antenna_gain > 0.0) {
            return Err(Error::config(format!("{path}.tx_antenna_gain"), "must be > 0"));
        }
        if self.tier == Tier::Satellite && (self.static_power != 0.0 || self.sleep_floor != 0.0) {
            return Err(Error::config(
                path,
                "satellite stations are solar powered: static_power and sleep_floor must be 0",
            ));
        }
        Ok(())
    }
}

/// Immutable deployment snapshot for one hour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    stations: Vec<StationSpec>,
    ues: Vec<Point2>,
    ue_height: f64,
    /// Total system bandwidth W, Hz.
    total_bandwidth: f64,
    /// Subcarrier spacing, Hz.
    re_bandwidth: f64,
    /// W/Hz.
    noise_density: f64,
    /// Watts.
    rsrp_min: f64,
    rng_seed: u64,
}

impl Scenario {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        stations: Vec<StationSpec>,
        ues: Vec<Point2>,
        ue_height: f64,
        total_bandwidth: f64,
        re_bandwidth: f64,
        noise_density: f64,
        rsrp_min: f64,
        rng_seed: u64,
    ) -> Result<Self> {
        let scenario = Self {
            stations,
            ues,
            ue_height,
            total_bandwidth,
            re_bandwidth,
            noise_density,
            rsrp_min,
            rng_seed,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ues.is_empty() {
            return Err(Error::config("ues", "at least one UE is required"));
        }
        if self.stations.is_empty() {
            return Err(Error::config("stations", "at least one station is required"));
        }
        for (idx, station) in self.stations.iter().enumerate() {
            if station.id != idx {
                return Err(Error::config(
                    format!("stations[{idx}].id"),
                    "station ids must equal their index",
                ));
            }
            station.validate()?;
        }
        if !(self.total_bandwidth > 0.0) {
            return Err(Error::config("radio.total_bandwidth", "must be > 0"));
        }
        if !(self.re_bandwidth > 0.0) {
            return Err(Error::config("radio.subcarrier_spacing", "must be > 0"));
        }
        if !(self.noise_density > 0.0) {
            return Err(Error::config("radio.noise_density", "must be > 0"));
        }
        if !(self.rsrp_min > 0.0) {
            return Err(Error::config("radio.rsrp_min", "must be > 0"));
        }
        Ok(())
    }

    pub fn stations(&self) -> &[StationSpec] {
        &self.stations
    }

    pub fn ues(&self) -> &[Point2] {
        &self.ues
    }

    pub fn num_ues(&self) -> usize {
        self.ues.len()
    }

    pub fn num_stations(&self) -> usize {
        self.stations.len()
    }

    pub fn ue_height(&self) -> f64 {
        self.ue_height
    }

    pub fn total_bandwidth(&self) -> f64 {
        self.total_bandwidth
    }

    pub fn re_bandwidth(&self) -> f64 {
        self.re_bandwidth
    }

    pub fn noise_density(&self) -> f64 {
        self.noise_density
    }

    /// Noise power per resource element, watts.
    pub fn noise_power(&self) -> f64 {
        self.noise_density * self.re_bandwidth
    }

    pub fn rsrp_min(&self) -> f64 {
        self.rsrp_min
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn tiers(&self) -> Vec<Tier> {
        self.stations.iter().map(|s| s.tier).collect()
    }

    pub fn p_max(&self) -> Vec<f64> {
        self.stations.iter().map(|s| s.p_max).collect()
    }

    pub fn static_power(&self) -> Vec<f64> {
        self.stations.iter().map(|s| s.static_power).collect()
    }

    pub fn terrestrial(&self) -> impl Iterator<Item = &StationSpec> {
        self.stations.iter().filter(|s| s.tier == Tier::Terrestrial)
    }

    pub fn satellites(&self) -> impl Iterator<Item = &StationSpec> {
        self.stations.iter().filter(|s| s.tier == Tier::Satellite)
    }

    pub fn has_satellite(&self) -> bool {
        self.satellites().next().is_some()
    }
}

/// Linear-unit parameters of a terrestrial macro station.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerrestrialParams {
    pub antenna_gain: f64,
    pub p_max: f64,
    pub static_power: f64,
    pub sleep_floor: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatelliteParams {
    pub altitude: f64,
    pub antenna_gain: f64,
    pub p_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioParams {
    pub total_bandwidth: f64,
    pub subcarrier_spacing: f64,
    pub noise_density: f64,
    pub rsrp_min: f64,
}

/// Everything needed to build a [`Scenario`] apart from the UE count and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeploymentParams {
    pub inter_site_distance: f64,
    pub rings: u32,
    pub ue_height: f64,
    pub terrestrial: TerrestrialParams,
    pub satellite: Option<SatelliteParams>,
    pub radio: RadioParams,
}

impl DeploymentParams {
    /// Region UEs are dropped in: a hexagon around the outermost ring,
    /// pushed out by half an inter-site distance.
    pub fn ue_region(&self) -> Region {
        Region::hexagon(
            self.rings as f64 * self.inter_site_distance + 0.5 * self.inter_site_distance,
        )
    }

    pub fn build_stations(&self) -> Vec<StationSpec> {
        let t = &self.terrestrial;
        let mut stations: Vec<StationSpec> =
            generate_hex_layout(self.inter_site_distance, self.rings)
                .into_iter()
                .enumerate()
                .map(|(id, [x, y])| StationSpec {
                    id,
                    tier: Tier::Terrestrial,
                    position: [x, y, t.height],
                    tx_antenna_gain: t.antenna_gain,
                    p_max: t.p_max,
                    static_power: t.static_power,
                    sleep_floor: t.sleep_floor,
                })
                .collect();
        if let Some(sat) = &self.satellite {
            stations.push(StationSpec {
                id: stations.len(),
                tier: Tier::Satellite,
                position: [0.0, 0.0, sat.altitude],
                tx_antenna_gain: sat.antenna_gain,
                p_max: sat.p_max,
                static_power: 0.0,
                sleep_floor: 0.0,
            });
        }
        stations
    }

    pub fn generate(&self, ue_count: usize, seed: u64) -> Result<Scenario> {
        let ues = spawn_ues(ue_count, &self.ue_region(), seed)?;
        Scenario::new(
            self.build_stations(),
            ues,
            self.ue_height,
            self.radio.total_bandwidth,
            self.radio.subcarrier_spacing,
            self.radio.noise_density,
            self.radio.rsrp_min,
            seed,
        )
    }
}

/// Hexagonal lattice centers, nearest-neighbour spacing `isd`, centered at the
/// origin. Sites are listed ring by ring starting from the center.
pub fn generate_hex_layout(isd: f64, rings: u32) -> Vec<Point2> {
    // Axial directions, walked counter-clockwise.
    const DIRS: [(i64, i64); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];
    let axial_to_xy = |q: i64, r: i64| -> Point2 {
        [
            isd * (q as f64 + 0.5 * r as f64),
            isd * (3f64.sqrt() / 2.0) * r as f64,
        ]
    };

    let mut sites = vec![[0.0, 0.0]];
    for ring in 1..=rings as i64 {
        // Start at the corner in direction 4 and walk each of the six edges.
        let (mut q, mut r) = (DIRS[4].0 * ring, DIRS[4].1 * ring);
        for &(dq, dr) in &DIRS {
            for _ in 0..ring {
                sites.push(axial_to_xy(q, r));
                q += dq;
                r += dr;
            }
        }
    }
    sites
}

/// Simple polygon in the plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    vertices: Vec<Point2>,
}

impl Region {
    pub fn new(vertices: Vec<Point2>) -> Self {
        Self { vertices }
    }

    /// Regular hexagon centered at the origin with corners at 0°, 60°, ...,
    /// matching the corner sites of [`generate_hex_layout`].
    pub fn hexagon(circumradius: f64) -> Self {
        let vertices = (0..6)
            .map(|k| {
                let a = std::f64::consts::FRAC_PI_3 * k as f64;
                [circumradius * a.cos(), circumradius * a.sin()]
            })
            .collect();
        Self { vertices }
    }

    pub fn unit_square() -> Self {
        Self::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        if n < 3 {
            return 0.0;
        }
        let twice: f64 = (0..n)
            .map(|k| {
                let [x0, y0] = self.vertices[k];
                let [x1, y1] = self.vertices[(k + 1) % n];
                x0 * y1 - x1 * y0
            })
            .sum();
        0.5 * twice.abs()
    }

    /// Even-odd rule point-in-polygon test.
    pub fn contains(&self, [px, py]: Point2) -> bool {
        let n = self.vertices.len();
        let mut inside = false;
        let mut j = n.wrapping_sub(1);
        for i in 0..n {
            let [xi, yi] = self.vertices[i];
            let [xj, yj] = self.vertices[j];
            if (yi > py) != (yj > py) && px < (xj - xi) * (py - yi) / (yj - yi) + xi {
                inside = !inside;
            }
            j = i;
        }
        inside
    }

    fn bounding_box(&self) -> (Point2, Point2) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &self.vertices {
            for d in 0..2 {
                lo[d] = lo[d].min(v[d]);
                hi[d] = hi[d].max(v[d]);
            }
        }
        (lo, hi)
    }
}

/// `count` i.i.d. uniform positions inside `region`, reproducible for a seed.
pub fn spawn_ues(count: usize, region: &Region, seed: u64) -> Result<Vec<Point2>> {
    if count == 0 {
        return Err(Error::InvalidInput("UE count must be >= 1".into()));
    }
    let area = region.area();
    let (lo, hi) = region.bounding_box();
    let box_area = (hi[0] - lo[0]) * (hi[1] - lo[1]);
    if !(area > 1e-12 * box_area.max(1e-300)) || !area.is_finite() {
        return Err(Error::DegenerateRegion);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p = [
            rng.random_range(lo[0]..hi[0]),
            rng.random_range(lo[1]..hi[1]),
        ];
        if region.contains(p) {
            out.push(p);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TrafficClass {
    Low,
    Average,
    High,
}

/// Hourly UE counts and the trade-off weight schedule λ_h = c / K_h.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficProfile {
    hourly_ue_counts: [usize; HOURS_PER_DAY],
    lambda_coefficient: f64,
    classes: [TrafficClass; HOURS_PER_DAY],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HourParams {
    pub ue_count: usize,
    pub lambda: f64,
    pub class: TrafficClass,
}

impl TrafficProfile {
    /// Classes are assigned by terciles of the hourly counts.
    pub fn new(hourly_ue_counts: [usize; HOURS_PER_DAY], lambda_coefficient: f64) -> Result<Self> {
        if let Some(h) = hourly_ue_counts.iter().position(|&k| k == 0) {
            return Err(Error::config(
                format!("traffic.hourly_ue_counts[{h}]"),
                "must be >= 1",
            ));
        }
        if !(lambda_coefficient > 0.0 && lambda_coefficient.is_finite()) {
            return Err(Error::config("traffic.lambda_coefficient", "must be > 0"));
        }
        let mut sorted = hourly_ue_counts;
        sorted.sort_unstable();
        let low_cut = sorted[HOURS_PER_DAY / 3 - 1];
        let high_cut = sorted[2 * HOURS_PER_DAY / 3];
        let classes = hourly_ue_counts.map(|k| {
            if k >= high_cut {
                TrafficClass::High
            } else if k <= low_cut {
                TrafficClass::Low
            } else {
                TrafficClass::Average
            }
        });
        Ok(Self {
            hourly_ue_counts,
            lambda_coefficient,
            classes,
        })
    }

    /// Smooth day curve: trough of 10% of `peak` at 04:00, maximum at 20:00,
    /// raised-cosine ramps in between.
    pub fn daily_curve(peak: usize, lambda_coefficient: f64) -> Result<Self> {
        const TROUGH_HOUR: f64 = 4.0;
        const PEAK_HOUR: f64 = 20.0;
        let trough = 0.1 * peak as f64;
        let rise = PEAK_HOUR - TROUGH_HOUR;
        let fall = HOURS_PER_DAY as f64 - rise;
        let mut counts = [0usize; HOURS_PER_DAY];
        for (h, slot) in counts.iter_mut().enumerate() {
            let h = h as f64;
            // Fraction of the way from trough to peak.
            let phase = if (TROUGH_HOUR..=PEAK_HOUR).contains(&h) {
                (h - TROUGH_HOUR) / rise
            } else {
                let since_peak = (h - PEAK_HOUR).rem_euclid(HOURS_PER_DAY as f64);
                1.0 - since_peak / fall
            };
            let level = 0.5 * (1.0 - (std::f64::consts::PI * phase).cos());
            *slot = ((trough + (peak as f64 - trough) * level).round() as usize).max(1);
        }
        Self::new(counts, lambda_coefficient)
    }

    pub fn hourly_ue_counts(&self) -> &[usize; HOURS_PER_DAY] {
        &self.hourly_ue_counts
    }

    pub fn lambda_coefficient(&self) -> f64 {
        self.lambda_coefficient
    }

    pub fn classes(&self) -> &[TrafficClass; HOURS_PER_DAY] {
        &self.classes
    }

    pub fn peak_hour(&self) -> usize {
        // First hour attaining the maximum.
        let max = *self.hourly_ue_counts.iter().max().unwrap();
        self.hourly_ue_counts.iter().position(|&k| k == max).unwrap()
    }

    pub fn trough_hour(&self) -> usize {
        let min = *self.hourly_ue_counts.iter().min().unwrap();
        self.hourly_ue_counts.iter().position(|&k| k == min).unwrap()
    }
}

pub fn hourly_params(profile: &TrafficProfile, hour: usize) -> Result<HourParams> {
    if hour >= HOURS_PER_DAY {
        return Err(Error::InvalidInput(format!("hour {hour} is outside 0..24")));
    }
    let ue_count = profile.hourly_ue_counts[hour];
    Ok(HourParams {
        ue_count,
        lambda: profile.lambda_coefficient / ue_count as f64,
        class: profile.classes[hour],
    })
}
