//! Orbital state: TLE ingestion, two-body propagation, pairwise geometry and
//! LCT mount directions.

mod kepler;
mod terminals;
mod tle;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vec3::Vec3;

pub use kepler::{KeplerPropagator, Propagator};
pub use terminals::{build_terminals, mount_directions, LctTerminal};
pub use tle::{format_tle, parse_t0, parse_tle, TleError, TleErrorKind};

/// Mean Earth radius (m).
pub const EARTH_RADIUS: f64 = 6.3781e6;
/// Earth rotation rate about the ECI z-axis (rad/s).
pub const EARTH_ROTATION_RATE: f64 = 7.2921e-5;
/// Earth gravitational parameter (m^3/s^2).
pub const EARTH_MU: f64 = 3.986_004_418e14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrbitError {
    #[error("invalid orbital elements for satellite {sat_id}: {reason}")]
    InvalidElements { sat_id: u32, reason: String },
    #[error("propagation time {0} s is negative or not finite")]
    InvalidTime(f64),
    #[error("Kepler's equation did not converge for satellite {sat_id} (residual {residual:e})")]
    KeplerNonConvergence { sat_id: u32, residual: f64 },
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
}

/// Classical elements of one satellite, SI units, epoch relative to the scenario T0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitalElements {
    pub sat_id: u32,
    /// m
    pub semi_major_axis: f64,
    pub eccentricity: f64,
    /// rad
    pub inclination: f64,
    /// rad
    pub raan: f64,
    /// rad
    pub arg_perigee: f64,
    /// rad
    pub mean_anomaly_at_epoch: f64,
    /// rad/s
    pub mean_motion: f64,
    /// s, offset from T0
    pub epoch: f64,
}

impl OrbitalElements {
    /// Builds elements from a mean motion, deriving the semi-major axis from
    /// Kepler's third law.
    #[allow(clippy::too_many_arguments)]
    pub fn from_mean_motion(
        sat_id: u32,
        mean_motion: f64,
        eccentricity: f64,
        inclination: f64,
        raan: f64,
        arg_perigee: f64,
        mean_anomaly_at_epoch: f64,
        epoch: f64,
    ) -> Result<Self, OrbitError> {
        let semi_major_axis = (EARTH_MU / (mean_motion * mean_motion)).cbrt();
        let el = OrbitalElements {
            sat_id,
            semi_major_axis,
            eccentricity,
            inclination,
            raan,
            arg_perigee,
            mean_anomaly_at_epoch,
            mean_motion,
            epoch,
        };
        el.validate()?;
        Ok(el)
    }

    pub fn validate(&self) -> Result<(), OrbitError> {
        let fail = |reason: &str| {
            Err(OrbitError::InvalidElements {
                sat_id: self.sat_id,
                reason: reason.to_string(),
            })
        };
        if !(0.0..1.0).contains(&self.eccentricity) {
            return fail("eccentricity outside [0, 1)");
        }
        if !(self.semi_major_axis > EARTH_RADIUS) {
            return fail("semi-major axis inside the Earth");
        }
        if !(self.mean_motion > 0.0) {
            return fail("mean motion must be positive");
        }
        let angles = [
            self.inclination,
            self.raan,
            self.arg_perigee,
            self.mean_anomaly_at_epoch,
            self.epoch,
        ];
        if angles.iter().any(|a| !a.is_finite()) {
            return fail("non-finite angle or epoch");
        }
        Ok(())
    }

    /// Orbital period (s).
    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / self.mean_motion
    }
}

/// ECI state of one satellite at an instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SatelliteState {
    pub sat_id: u32,
    pub position: Vec3,
    pub velocity: Vec3,
    pub has_gateway: bool,
}

/// Inter-satellite range `z` and the unit vector `d` pointing from `a` toward `b`.
pub fn range_and_direction(
    a: &SatelliteState,
    b: &SatelliteState,
) -> Result<(f64, Vec3), OrbitError> {
    if a.sat_id == b.sat_id {
        return Err(OrbitError::DegenerateGeometry(format!(
            "range requested between satellite {} and itself",
            a.sat_id
        )));
    }
    range_and_direction_between(&a.position, &b.position).ok_or_else(|| {
        OrbitError::DegenerateGeometry(format!(
            "satellites {} and {} are coincident",
            a.sat_id, b.sat_id
        ))
    })
}

pub(crate) fn range_and_direction_between(from: &Vec3, to: &Vec3) -> Option<(f64, Vec3)> {
    let delta = *to - *from;
    let z = delta.norm();
    if z > 0.0 && z.is_finite() {
        Some((z, delta / z))
    } else {
        None
    }
}
