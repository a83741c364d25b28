use serde::{Deserialize, Serialize};

use super::{OrbitError, SatelliteState};
use crate::vec3::Vec3;

/// A laser communication terminal and its body-fixed mount direction in ECI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LctTerminal {
    /// Dense terminal index within a snapshot.
    pub lct_id: usize,
    /// Dense index of the carrying satellite within the same snapshot.
    pub sat_id: usize,
    pub mount_direction: Vec3,
}

/// Mount directions for `per_sat` terminals on an Earth-pointing satellite.
///
/// One terminal points along the velocity; two point along and against it.
/// Any other count is spread evenly over the local horizontal plane spanned by
/// the velocity and the orbit normal, starting at the velocity direction.
pub fn mount_directions(s: &SatelliteState, per_sat: usize) -> Result<Vec<Vec3>, OrbitError> {
    if per_sat == 0 {
        return Err(OrbitError::DegenerateGeometry(
            "a satellite needs at least one terminal".into(),
        ));
    }
    let along = s.velocity.normalized().ok_or_else(|| {
        OrbitError::DegenerateGeometry(format!("satellite {} has zero velocity", s.sat_id))
    })?;
    match per_sat {
        1 => Ok(vec![along]),
        2 => Ok(vec![along, -along]),
        n => {
            let normal = s.position.cross(&s.velocity);
            // Remove any residual along-track component so the basis is orthonormal.
            let normal = (normal - along * normal.dot(&along))
                .normalized()
                .ok_or_else(|| {
                    OrbitError::DegenerateGeometry(format!(
                        "satellite {} velocity is parallel to its position",
                        s.sat_id
                    ))
                })?;
            Ok((0..n)
                .map(|k| {
                    let phi = std::f64::consts::TAU * k as f64 / n as f64;
                    let (sin, cos) = phi.sin_cos();
                    along * cos + normal * sin
                })
                .collect())
        }
    }
}

/// Terminals for a list of satellites, `per_sat` each, densely numbered in
/// satellite order.
pub fn build_terminals(
    states: &[SatelliteState],
    per_sat: usize,
) -> Result<Vec<LctTerminal>, OrbitError> {
    let mut out = Vec::with_capacity(states.len() * per_sat);
    for (sat, s) in states.iter().enumerate() {
        for dir in mount_directions(s, per_sat)? {
            out.push(LctTerminal {
                lct_id: out.len(),
                sat_id: sat,
                mount_direction: dir,
            });
        }
    }
    Ok(out)
}
