//! Gaussian-beam LISL capacity with Rayleigh pointing jitter and an outage budget.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OpticsError {
    #[error("range {range} m exceeds the maximum LISL range {max} m")]
    OutOfRange { range: f64, max: f64 },
    #[error("invalid optical parameter {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
}

/// Link-budget inputs, SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OpticalParams {
    /// Transmit power (W).
    pub tx_power: f64,
    /// Receiver aperture area (m^2).
    pub aperture: f64,
    /// Photodetector responsivity (A/W).
    pub responsivity: f64,
    /// Receiver noise current standard deviation (A).
    pub noise_current: f64,
    /// Electrical bandwidth (Hz).
    pub bandwidth: f64,
    /// Wavelength (m).
    pub wavelength: f64,
    /// Beam waist radius (m).
    pub waist: f64,
    /// Rayleigh range (m).
    pub rayleigh_range: f64,
    /// Rayleigh scale of the pointing jitter angle (rad).
    pub jitter: f64,
    /// Outage probability budget.
    pub outage: f64,
    /// Maximum LISL range (m).
    pub max_range: f64,
}

impl Default for OpticalParams {
    fn default() -> Self {
        let waist = 9.87e-3;
        let wavelength = 1.55e-6;
        OpticalParams {
            tx_power: 20.0,
            aperture: 0.01,
            responsivity: 0.5,
            noise_current: 3e-7,
            bandwidth: 1e9,
            wavelength,
            waist,
            rayleigh_range: PI * waist * waist / wavelength,
            jitter: 10e-6,
            outage: 1e-3,
            max_range: 3e6,
        }
    }
}

impl OpticalParams {
    pub fn validate(&self) -> Result<(), OpticsError> {
        let fields = [
            ("tx_power", self.tx_power),
            ("aperture", self.aperture),
            ("responsivity", self.responsivity),
            ("noise_current", self.noise_current),
            ("bandwidth", self.bandwidth),
            ("wavelength", self.wavelength),
            ("waist", self.waist),
            ("rayleigh_range", self.rayleigh_range),
            ("jitter", self.jitter),
            ("outage", self.outage),
            ("max_range", self.max_range),
        ];
        for (name, value) in fields {
            if !(value > 0.0 && value.is_finite()) {
                return Err(OpticsError::InvalidParameter { name, value });
            }
        }
        if self.outage >= 1.0 {
            return Err(OpticsError::InvalidParameter {
                name: "outage",
                value: self.outage,
            });
        }
        Ok(())
    }

    /// Copy with the waist set from a half-angle divergence, `W0 = λ / (π θ)`,
    /// and the Rayleigh range recomputed as `π W0² / λ`.
    pub fn with_divergence(&self, half_angle: f64) -> OpticalParams {
        let waist = self.wavelength / (PI * half_angle);
        OpticalParams {
            waist,
            rayleigh_range: PI * waist * waist / self.wavelength,
            ..*self
        }
    }

    /// Half-angle far-field divergence `λ / (π W0)`.
    pub fn divergence(&self) -> f64 {
        self.wavelength / (PI * self.waist)
    }
}

/// Beam radius at distance `z` from the waist.
pub fn beam_radius(z: f64, p: &OpticalParams) -> f64 {
    let ratio = z / p.rayleigh_range;
    p.waist * (1.0 + ratio * ratio).sqrt()
}

/// Intensity at radial offset `y` and distance `z` (W/m²).
pub fn beam_intensity(y: f64, z: f64, p: &OpticalParams) -> f64 {
    let w = beam_radius(z, p);
    let peak = 2.0 * p.tx_power / (PI * p.waist * p.waist);
    peak * (p.waist / w).powi(2) * (-2.0 * y * y / (w * w)).exp()
}

/// Capacity lower bound at offset `y` and distance `z` (bit/s).
pub fn instantaneous_capacity(y: f64, z: f64, p: &OpticalParams) -> f64 {
    let current = p.aperture * beam_intensity(y, z, p) * p.responsivity;
    let snr = current * current / (2.0 * PI * E * p.noise_current * p.noise_current);
    0.5 * p.bandwidth * snr.ln_1p() / std::f64::consts::LN_2
}

/// Jitter angle exceeded with probability `outage` under the Rayleigh model.
pub fn jitter_threshold(p: &OpticalParams) -> f64 {
    p.jitter * (-2.0 * p.outage.ln()).sqrt()
}

/// Outage-adjusted LISL rate at range `z` (Gbit/s).
pub fn lisl_rate(z: f64, p: &OpticalParams) -> Result<f64, OpticsError> {
    if !(z > 0.0) || z > p.max_range {
        return Err(OpticsError::OutOfRange {
            range: z,
            max: p.max_range,
        });
    }
    Ok(lisl_rate_unchecked(z, p))
}

pub(crate) fn lisl_rate_unchecked(z: f64, p: &OpticalParams) -> f64 {
    let offset = z * jitter_threshold(p);
    (1.0 - p.outage) * instantaneous_capacity(offset, z, p) / 1e9
}
