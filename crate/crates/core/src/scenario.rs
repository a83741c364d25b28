//! Scenario configuration and seeded snapshot construction from a TLE
//! catalog, population points and gateway sites.

use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dual::LaduConfig;
use crate::graph::{
    build_lct_graph, ConstellationSnapshot, GeometryParams, SnapshotError, SnapshotParts,
};
use crate::optics::{OpticalParams, OpticsError};
use crate::orbit::{
    build_terminals, parse_t0, parse_tle, KeplerPropagator, OrbitError, OrbitalElements,
    Propagator, SatelliteState, TleError,
};
use crate::traffic::{
    covered_population, draw_active_users, flow_pairs, load_gateways, load_population,
    node_features, poisson_count, satellite_rng, sees_gateway, EarthFrame, GroundPoint,
    TrafficError, TrafficParams,
};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Tle {
        path: String,
        #[source]
        source: TleError,
    },
    #[error(transparent)]
    Traffic(#[from] TrafficError),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error(transparent)]
    Optics(#[from] OpticsError),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error("requested {requested} satellites but the catalog holds {available}")]
    TooManySatellites { requested: usize, available: usize },
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    /// `I` catalog entries drawn uniformly without replacement.
    #[default]
    Uniform,
    /// The `I` satellites nearest to a randomly drawn anchor satellite.
    Cluster,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OrbitalConfig {
    /// Label used in coherence tables.
    pub constellation: String,
    /// ISO-8601 UTC instant of scenario time 0.
    pub t0: String,
    pub satellites: usize,
    pub lcts_per_satellite: usize,
    pub sampling: Sampling,
    /// Dataset epochs are drawn from `[0, epoch_window)` s.
    pub epoch_window: f64,
}

impl Default for OrbitalConfig {
    fn default() -> Self {
        OrbitalConfig {
            constellation: "starlink".into(),
            t0: "2025-07-16T16:00:00Z".into(),
            satellites: 1000,
            lcts_per_satellite: 2,
            sampling: Sampling::Uniform,
            epoch_window: 5_760.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TrafficSource {
    /// Users from covered population, gateways from site visibility.
    #[default]
    Population,
    /// Gateway access and user counts drawn per satellite.
    Synthetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrafficConfig {
    pub source: TrafficSource,
    /// Gbit/s
    pub per_user_rate: f64,
    /// Gbit/s
    pub gateway_rate: f64,
    pub nearest_gateways: usize,
    /// m
    pub coverage_radius: f64,
    pub activity_fraction: f64,
    /// Combined with the snapshot seed.
    pub rng_seed: u64,
    /// Synthetic source only.
    pub gateway_probability: f64,
    /// Synthetic source only: Poisson mean of active users per satellite.
    pub mean_users: f64,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        let p = TrafficParams::default();
        TrafficConfig {
            source: TrafficSource::Population,
            per_user_rate: p.per_user_rate,
            gateway_rate: p.gateway_rate,
            nearest_gateways: p.nearest_gateways,
            coverage_radius: p.coverage_radius,
            activity_fraction: p.activity_fraction,
            rng_seed: p.rng_seed,
            gateway_probability: 0.1,
            mean_users: 100.0,
        }
    }
}

impl TrafficConfig {
    /// Traffic parameters for the snapshot drawn with `seed`.
    pub fn params(&self, seed: u64) -> TrafficParams {
        TrafficParams {
            per_user_rate: self.per_user_rate,
            gateway_rate: self.gateway_rate,
            nearest_gateways: self.nearest_gateways,
            coverage_radius: self.coverage_radius,
            activity_fraction: self.activity_fraction,
            rng_seed: self.rng_seed.wrapping_add(seed),
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.params(0).validate()?;
        if self.source == TrafficSource::Synthetic {
            if !(0.0..=1.0).contains(&self.gateway_probability) {
                return Err(ScenarioError::Invalid(format!(
                    "gateway_probability {} must lie in [0, 1]",
                    self.gateway_probability
                )));
            }
            if !(self.mean_users >= 0.0 && self.mean_users.is_finite()) {
                return Err(ScenarioError::Invalid(format!(
                    "mean_users {} must be non-negative",
                    self.mean_users
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub ladu: LaduConfig,
    /// Seed of the random-matching baseline.
    pub random_seed: u64,
}

/// Input files, relative to the config file's directory unless absolute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsConfig {
    pub tle: PathBuf,
    pub population: PathBuf,
    pub gateways: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub orbital: OrbitalConfig,
    #[serde(default)]
    pub optics: OpticalParams,
    #[serde(default)]
    pub geometry: GeometryParams,
    #[serde(default)]
    pub traffic: TrafficConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    pub paths: PathsConfig,
}

impl ScenarioConfig {
    pub fn from_json(text: &str, origin: &str) -> Result<Self, ScenarioError> {
        let cfg: ScenarioConfig =
            serde_json::from_str(text).map_err(|source| ScenarioError::Json {
                path: origin.to_string(),
                source,
            })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        parse_t0(&self.orbital.t0)
            .map_err(|e| ScenarioError::Invalid(format!("t0 '{}': {e}", self.orbital.t0)))?;
        if self.orbital.satellites == 0 {
            return Err(ScenarioError::Invalid(
                "satellites must be at least 1".into(),
            ));
        }
        if self.orbital.lcts_per_satellite == 0 {
            return Err(ScenarioError::Invalid(
                "lcts_per_satellite must be at least 1".into(),
            ));
        }
        if !(self.orbital.epoch_window >= 0.0 && self.orbital.epoch_window.is_finite()) {
            return Err(ScenarioError::Invalid(
                "epoch_window must be non-negative".into(),
            ));
        }
        self.optics.validate()?;
        self.geometry.validate()?;
        self.traffic.validate()?;
        self.solver
            .ladu
            .validate()
            .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        Ok(())
    }
}

fn read_text(path: &Path) -> Result<String, ScenarioError> {
    std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// A validated config with its catalog and ground data loaded.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub t0: DateTime<Utc>,
    pub catalog: Vec<OrbitalElements>,
    pub population: Vec<GroundPoint>,
    pub gateways: Vec<GroundPoint>,
}

impl Scenario {
    pub fn load(config_path: &Path) -> Result<Self, ScenarioError> {
        let text = read_text(config_path)?;
        let config = ScenarioConfig::from_json(&text, &config_path.display().to_string())?;
        let base = config_path.parent().unwrap_or(Path::new("."));
        Self::from_config(config, base)
    }

    pub fn from_config(config: ScenarioConfig, base_dir: &Path) -> Result<Self, ScenarioError> {
        config.validate()?;
        let t0 = parse_t0(&config.orbital.t0).map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        let resolve = |p: &Path| {
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base_dir.join(p)
            }
        };
        let tle_path = resolve(&config.paths.tle);
        let catalog =
            parse_tle(&read_text(&tle_path)?, t0).map_err(|source| ScenarioError::Tle {
                path: tle_path.display().to_string(),
                source,
            })?;
        let population = load_population(&resolve(&config.paths.population))?;
        let gateways = load_gateways(&resolve(&config.paths.gateways))?;
        Ok(Scenario {
            config,
            t0,
            catalog,
            population,
            gateways,
        })
    }

    /// Catalog indices of the satellites in the snapshot drawn with `seed`, ascending.
    pub fn sample_satellites(&self, epoch: f64, seed: u64) -> Result<Vec<usize>, ScenarioError> {
        let want = self.config.orbital.satellites;
        let have = self.catalog.len();
        if want > have {
            return Err(ScenarioError::TooManySatellites {
                requested: want,
                available: have,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked = match self.config.orbital.sampling {
            Sampling::Uniform => sample(&mut rng, have, want).into_vec(),
            Sampling::Cluster => {
                let anchor = rng.random_range(0..have);
                let prop = KeplerPropagator;
                let states = self
                    .catalog
                    .iter()
                    .map(|el| prop.propagate(el, epoch))
                    .collect::<Result<Vec<_>, _>>()?;
                let origin = states[anchor].position;
                let mut ranked: Vec<(f64, usize)> = states
                    .iter()
                    .enumerate()
                    .map(|(k, s)| ((s.position - origin).norm(), k))
                    .collect();
                ranked.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
                ranked.into_iter().take(want).map(|(_, k)| k).collect()
            }
        };
        picked.sort_unstable();
        Ok(picked)
    }

    /// Seeded snapshot at `epoch` s after T0.
    pub fn snapshot(&self, epoch: f64, seed: u64) -> Result<ConstellationSnapshot, ScenarioError> {
        let picked = self.sample_satellites(epoch, seed)?;
        let elements: Vec<OrbitalElements> = picked.iter().map(|&k| self.catalog[k]).collect();
        self.snapshot_from_elements(elements, epoch, seed)
    }

    /// Snapshot over the given satellites, with traffic drawn from `seed`.
    pub fn snapshot_from_elements(
        &self,
        elements: Vec<OrbitalElements>,
        epoch: f64,
        seed: u64,
    ) -> Result<ConstellationSnapshot, ScenarioError> {
        let cfg = &self.config;
        let prop = KeplerPropagator;
        let mut states: Vec<SatelliteState> = elements
            .iter()
            .map(|el| prop.propagate(el, epoch))
            .collect::<Result<_, _>>()?;
        let params = cfg.traffic.params(seed);
        let frame = EarthFrame::new(&self.t0);
        let nodes: Vec<_> = states
            .iter_mut()
            .map(|s| {
                let (users, gateway) = match cfg.traffic.source {
                    TrafficSource::Population => {
                        let pop = covered_population(
                            s,
                            &self.population,
                            params.coverage_radius,
                            epoch,
                            &frame,
                        );
                        let gateway =
                            sees_gateway(s, &self.gateways, params.coverage_radius, epoch, &frame);
                        (draw_active_users(pop, &params, s.sat_id, epoch), gateway)
                    }
                    TrafficSource::Synthetic => {
                        let mut rng = satellite_rng(params.rng_seed, s.sat_id, epoch);
                        let gateway = rng.random_bool(cfg.traffic.gateway_probability);
                        (poisson_count(cfg.traffic.mean_users, &mut rng), gateway)
                    }
                };
                s.has_gateway = gateway;
                node_features(users, gateway, &params)
            })
            .collect();
        let lcts = build_terminals(&states, cfg.orbital.lcts_per_satellite)?;
        let lct_edges = build_lct_graph(&states, &lcts, &cfg.geometry, &cfg.optics);
        let flows = flow_pairs(&states, &nodes, params.nearest_gateways);
        Ok(ConstellationSnapshot::new(SnapshotParts {
            epoch,
            satellites: states,
            lcts,
            lct_edges,
            node_features: nodes,
            flow_pairs: flows.pairs,
            elements: Some(elements),
            geometry: cfg.geometry,
            optics: cfg.optics,
            lcts_per_satellite: cfg.orbital.lcts_per_satellite,
            seed: Some(seed),
        })?)
    }

    /// Per-snapshot `(seed, epoch)` draws for a dataset of `count` snapshots.
    pub fn dataset_draws(&self, count: usize, seed: u64) -> Vec<(u64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let window = self.config.orbital.epoch_window;
        (0..count)
            .map(|_| {
                let s: u64 = rng.random();
                let epoch = if window > 0.0 {
                    rng.random_range(0.0..window)
                } else {
                    0.0
                };
                (s, epoch)
            })
            .collect()
    }
}
