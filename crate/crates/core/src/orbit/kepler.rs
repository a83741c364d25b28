use super::{OrbitError, OrbitalElements, SatelliteState, EARTH_MU};
use crate::vec3::Vec3;

const KEPLER_MAX_STEPS: usize = 64;
const KEPLER_TOLERANCE: f64 = 1e-12;

/// Maps orbital elements to an ECI state at time `t` (s after T0).
pub trait Propagator: Send + Sync {
    fn propagate(&self, el: &OrbitalElements, t: f64) -> Result<SatelliteState, OrbitError>;
}

/// Unperturbed two-body propagation.
#[derive(Debug, Clone, Copy, Default)]
pub struct KeplerPropagator;

impl Propagator for KeplerPropagator {
    fn propagate(&self, el: &OrbitalElements, t: f64) -> Result<SatelliteState, OrbitError> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(OrbitError::InvalidTime(t));
        }
        let mean_anomaly = el.mean_anomaly_at_epoch + el.mean_motion * (t - el.epoch);
        let ecc_anomaly = solve_kepler(el.sat_id, mean_anomaly, el.eccentricity)?;

        let e = el.eccentricity;
        let a = el.semi_major_axis;
        let (sin_e, cos_e) = ecc_anomaly.sin_cos();
        let beta = (1.0 - e * e).sqrt();
        let r = a * (1.0 - e * cos_e);

        // Perifocal frame: x toward perigee, z along angular momentum.
        let p_pf = [a * (cos_e - e), a * beta * sin_e];
        let v_scale = (EARTH_MU * a).sqrt() / r;
        let v_pf = [-v_scale * sin_e, v_scale * beta * cos_e];

        let (sin_o, cos_o) = el.raan.sin_cos();
        let (sin_i, cos_i) = el.inclination.sin_cos();
        let (sin_w, cos_w) = el.arg_perigee.sin_cos();
        // Columns of R3(-raan) R1(-i) R3(-argp) for the perifocal x and y axes.
        let px = Vec3::new(
            cos_o * cos_w - sin_o * sin_w * cos_i,
            sin_o * cos_w + cos_o * sin_w * cos_i,
            sin_w * sin_i,
        );
        let py = Vec3::new(
            -cos_o * sin_w - sin_o * cos_w * cos_i,
            -sin_o * sin_w + cos_o * cos_w * cos_i,
            cos_w * sin_i,
        );
        Ok(SatelliteState {
            sat_id: el.sat_id,
            position: px * p_pf[0] + py * p_pf[1],
            velocity: px * v_pf[0] + py * v_pf[1],
            has_gateway: false,
        })
    }
}

/// Newton iteration on E - e sin E = M.
fn solve_kepler(sat_id: u32, mean_anomaly: f64, e: f64) -> Result<f64, OrbitError> {
    let m = (mean_anomaly + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU)
        - std::f64::consts::PI;
    let mut ecc = if e < 0.8 {
        m
    } else {
        std::f64::consts::PI.copysign(m)
    };
    let mut residual = ecc - e * ecc.sin() - m;
    for _ in 0..KEPLER_MAX_STEPS {
        if residual.abs() <= KEPLER_TOLERANCE {
            return Ok(ecc);
        }
        ecc -= residual / (1.0 - e * ecc.cos());
        residual = ecc - e * ecc.sin() - m;
    }
    if residual.abs() <= KEPLER_TOLERANCE {
        Ok(ecc)
    } else {
        Err(OrbitError::KeplerNonConvergence { sat_id, residual })
    }
}
