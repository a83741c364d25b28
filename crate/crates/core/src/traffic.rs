//! Per-satellite serving/demand rates and the source-destination flow set.

use std::path::Path;

use chrono::{DateTime, Utc};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{FlowPair, NodeFeatures};
use crate::orbit::{SatelliteState, EARTH_RADIUS, EARTH_ROTATION_RATE};

#[derive(Debug, Error)]
pub enum TrafficError {
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("{path}, record {record}: {reason}")]
    Record {
        path: String,
        record: u64,
        reason: String,
    },
    #[error("invalid traffic parameter: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrafficParams {
    /// Rate requested by each active user (Gbit/s).
    pub per_user_rate: f64,
    /// Gateway capacity of a satellite with gateway access (Gbit/s).
    pub gateway_rate: f64,
    /// Servers paired with each demanding satellite.
    pub nearest_gateways: usize,
    /// Ground coverage radius around the sub-satellite point (m).
    pub coverage_radius: f64,
    /// Fraction of covered population that is active.
    pub activity_fraction: f64,
    pub rng_seed: u64,
}

impl Default for TrafficParams {
    fn default() -> Self {
        TrafficParams {
            per_user_rate: 0.1,
            gateway_rate: 20.0,
            nearest_gateways: 5,
            coverage_radius: 200e3,
            activity_fraction: 1e-4,
            rng_seed: 0,
        }
    }
}

impl TrafficParams {
    pub fn validate(&self) -> Result<(), TrafficError> {
        if !(self.per_user_rate > 0.0) || !(self.gateway_rate > 0.0) {
            return Err(TrafficError::Invalid(
                "user and gateway rates must be positive".into(),
            ));
        }
        if self.nearest_gateways == 0 {
            return Err(TrafficError::Invalid(
                "nearest_gateways must be at least 1".into(),
            ));
        }
        if !(self.coverage_radius > 0.0) {
            return Err(TrafficError::Invalid(
                "coverage_radius must be positive".into(),
            ));
        }
        if !(self.activity_fraction > 0.0 && self.activity_fraction <= 1.0) {
            return Err(TrafficError::Invalid(
                "activity_fraction must lie in (0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// A weighted point on the spherical Earth (radians).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundPoint {
    pub latitude: f64,
    pub longitude: f64,
    pub weight: f64,
}

#[derive(Debug, Deserialize)]
struct PopulationRow {
    lat_deg: f64,
    lon_deg: f64,
    population: f64,
}

#[derive(Debug, Deserialize)]
struct GatewayRow {
    lat_deg: f64,
    lon_deg: f64,
    #[allow(dead_code)]
    name: String,
}

fn read_points<R, T>(
    path: &str,
    reader: R,
    convert: impl Fn(T) -> (f64, f64, f64),
) -> Result<Vec<GroundPoint>, TrafficError>
where
    R: std::io::Read,
    T: serde::de::DeserializeOwned,
{
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for (k, row) in rdr.deserialize::<T>().enumerate() {
        let row = row.map_err(|source| TrafficError::Csv {
            path: path.to_string(),
            source,
        })?;
        let (lat, lon, weight) = convert(row);
        let record = k as u64 + 1;
        if !(lat.abs() <= 90.0) || !lon.is_finite() {
            return Err(TrafficError::Record {
                path: path.to_string(),
                record,
                reason: format!("coordinates ({lat}, {lon}) out of range"),
            });
        }
        if !(weight >= 0.0 && weight.is_finite()) {
            return Err(TrafficError::Record {
                path: path.to_string(),
                record,
                reason: format!("weight {weight} must be non-negative"),
            });
        }
        out.push(GroundPoint {
            latitude: lat.to_radians(),
            longitude: lon.to_radians(),
            weight,
        });
    }
    Ok(out)
}

/// Reads rows with `lat_deg`, `lon_deg` and `population` columns; other columns are ignored.
pub fn parse_population_csv(
    name: &str,
    reader: impl std::io::Read,
) -> Result<Vec<GroundPoint>, TrafficError> {
    read_points(name, reader, |r: PopulationRow| {
        (r.lat_deg, r.lon_deg, r.population)
    })
}

/// Reads rows with `lat_deg` and `lon_deg` columns; every site has unit weight.
pub fn parse_gateways_csv(
    name: &str,
    reader: impl std::io::Read,
) -> Result<Vec<GroundPoint>, TrafficError> {
    read_points(name, reader, |r: GatewayRow| (r.lat_deg, r.lon_deg, 1.0))
}

fn open(path: &Path) -> Result<std::fs::File, TrafficError> {
    std::fs::File::open(path).map_err(|e| TrafficError::Csv {
        path: path.display().to_string(),
        source: e.into(),
    })
}

pub fn load_population(path: &Path) -> Result<Vec<GroundPoint>, TrafficError> {
    parse_population_csv(&path.display().to_string(), open(path)?)
}

pub fn load_gateways(path: &Path) -> Result<Vec<GroundPoint>, TrafficError> {
    parse_gateways_csv(&path.display().to_string(), open(path)?)
}

/// Earth rotation angle (rad) at a UTC instant.
pub fn earth_rotation_angle(at: &DateTime<Utc>) -> f64 {
    let jd = at.timestamp() as f64 / 86_400.0
        + at.timestamp_subsec_nanos() as f64 / 8.64e13
        + 2_440_587.5;
    let du = jd - 2_451_545.0;
    (std::f64::consts::TAU * (0.779_057_273_264_0 + 1.002_737_811_911_354_48 * du))
        .rem_euclid(std::f64::consts::TAU)
}

/// Maps scenario time to the Earth rotation angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EarthFrame {
    /// Rotation angle at scenario time 0 (rad).
    pub angle_at_t0: f64,
}

impl EarthFrame {
    pub fn new(t0: &DateTime<Utc>) -> Self {
        EarthFrame {
            angle_at_t0: earth_rotation_angle(t0),
        }
    }

    pub fn angle(&self, t: f64) -> f64 {
        self.angle_at_t0 + EARTH_ROTATION_RATE * t
    }

    /// Geocentric latitude and Earth-fixed longitude (rad) below a satellite.
    pub fn sub_satellite_point(&self, s: &SatelliteState, t: f64) -> (f64, f64) {
        let p = s.position;
        let lat = (p.z() / p.norm()).asin();
        let lon = p.y().atan2(p.x()) - self.angle(t);
        (
            lat,
            (lon + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI,
        )
    }
}

/// Great-circle distance on the spherical Earth (m).
pub fn ground_distance(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let h = ((lat2 - lat1) / 2.0).sin().powi(2)
        + lat1.cos() * lat2.cos() * ((lon2 - lon1) / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS * h.sqrt().min(1.0).asin()
}

/// Total weight of `points` within `radius` of the sub-satellite point at `t`.
pub fn covered_population(
    s: &SatelliteState,
    points: &[GroundPoint],
    radius: f64,
    t: f64,
    frame: &EarthFrame,
) -> f64 {
    let (lat, lon) = frame.sub_satellite_point(s, t);
    points
        .iter()
        .filter(|p| ground_distance(lat, lon, p.latitude, p.longitude) <= radius)
        .map(|p| p.weight)
        .fold(0.0, |a, b| a + b)
}

/// True when any gateway site lies within `radius` of the sub-satellite point.
pub fn sees_gateway(
    s: &SatelliteState,
    gateways: &[GroundPoint],
    radius: f64,
    t: f64,
    frame: &EarthFrame,
) -> bool {
    let (lat, lon) = frame.sub_satellite_point(s, t);
    gateways
        .iter()
        .any(|p| ground_distance(lat, lon, p.latitude, p.longitude) <= radius)
}

/// Generator keyed by `(seed, satellite, epoch)` so draws do not depend on
/// evaluation order.
pub fn satellite_rng(seed: u64, sat_id: u32, epoch: f64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..12].copy_from_slice(&sat_id.to_le_bytes());
    key[16..24].copy_from_slice(&epoch.to_bits().to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Poisson draw with mean `mean`; zero when the mean is zero.
pub fn poisson_count(mean: f64, rng: &mut ChaCha8Rng) -> u64 {
    if !(mean > 0.0) {
        return 0;
    }
    Poisson::new(mean)
        .map(|d| d.sample(rng) as u64)
        .unwrap_or(0)
}

/// Active users among `population` people covered by satellite `sat_id` at `epoch`.
pub fn draw_active_users(population: f64, p: &TrafficParams, sat_id: u32, epoch: f64) -> u64 {
    let mut rng = satellite_rng(p.rng_seed, sat_id, epoch);
    poisson_count(p.activity_fraction * population, &mut rng)
}

pub fn serving_rate(users: u64, has_gateway: bool, p: &TrafficParams) -> f64 {
    if has_gateway {
        (p.gateway_rate - users as f64 * p.per_user_rate).max(0.0)
    } else {
        0.0
    }
}

pub fn demand_rate(users: u64, has_gateway: bool, p: &TrafficParams) -> f64 {
    let load = users as f64 * p.per_user_rate;
    if has_gateway {
        (load - p.gateway_rate).max(0.0)
    } else {
        load
    }
}

pub fn node_features(users: u64, has_gateway: bool, p: &TrafficParams) -> NodeFeatures {
    NodeFeatures {
        serving: serving_rate(users, has_gateway, p),
        demand: demand_rate(users, has_gateway, p),
    }
}

/// Flow set with a flag raised when there was demand but no server.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSet {
    pub pairs: Vec<FlowPair>,
    pub no_servers: bool,
}

/// Pairs every demanding satellite with its `m` nearest serving satellites by
/// ECI range, ties to the lower index. Sorted by `(source, dest)`.
pub fn flow_pairs(states: &[SatelliteState], nodes: &[NodeFeatures], m: usize) -> FlowSet {
    let servers: Vec<usize> = (0..nodes.len())
        .filter(|&s| nodes[s].serving > 0.0)
        .collect();
    let demanders: Vec<usize> = (0..nodes.len())
        .filter(|&s| nodes[s].demand > 0.0)
        .collect();
    if servers.is_empty() {
        if !demanders.is_empty() {
            log::warn!(
                "{} satellites have demand but none can serve; flow set is empty",
                demanders.len()
            );
        }
        return FlowSet {
            pairs: Vec::new(),
            no_servers: !demanders.is_empty(),
        };
    }
    let mut pairs = Vec::new();
    for &d in &demanders {
        let mut ranked: Vec<(f64, usize)> = servers
            .iter()
            .filter(|&&s| s != d)
            .map(|&s| ((states[s].position - states[d].position).norm(), s))
            .collect();
        let take = m.min(ranked.len());
        if take == 0 {
            continue;
        }
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if take < ranked.len() {
            ranked.select_nth_unstable_by(take - 1, cmp);
        }
        ranked.truncate(take);
        pairs.extend(
            ranked
                .into_iter()
                .map(|(_, s)| FlowPair { source: s, dest: d }),
        );
    }
    pairs.sort();
    FlowSet {
        pairs,
        no_servers: false,
    }
}
