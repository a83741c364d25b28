use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    build_lct_graph, lct_pair_connectable, ConstellationSnapshot, GeometryParams, LctEdge,
};
use crate::optics::OpticalParams;
use crate::orbit::{
    build_terminals, mount_directions, OrbitError, OrbitalElements, Propagator, SatelliteState,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoherenceError {
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error("threshold ratio {0} must lie strictly between 0 and 1")]
    Threshold(f64),
    #[error("no sampled start epoch had any connectable terminal pair")]
    NoEdges,
    #[error("snapshot carries no orbital elements to re-propagate")]
    MissingElements,
    #[error("elapsed time {0} s must be non-negative")]
    Elapsed(f64),
}

/// What is needed to re-propagate a snapshot and re-test its edges.
#[derive(Clone, Copy)]
pub struct RebuildContext<'a> {
    /// Aligned with the snapshot's satellites.
    pub elements: &'a [OrbitalElements],
    pub propagator: &'a dyn Propagator,
    pub geometry: GeometryParams,
}

impl<'a> RebuildContext<'a> {
    pub fn from_snapshot(
        snap: &'a ConstellationSnapshot,
        propagator: &'a dyn Propagator,
    ) -> Result<Self, CoherenceError> {
        Ok(RebuildContext {
            elements: snap.elements().ok_or(CoherenceError::MissingElements)?,
            propagator,
            geometry: *snap.geometry(),
        })
    }
}

/// A terminal edge expressed as (satellite, mount slot) endpoints.
#[derive(Debug, Clone, Copy)]
struct SlotEdge {
    sat_a: usize,
    slot_a: usize,
    sat_b: usize,
    slot_b: usize,
}

fn slot_edges(sat_of: &[usize], edges: &[LctEdge]) -> (Vec<SlotEdge>, Vec<usize>) {
    let n_sat = sat_of.iter().map(|&s| s + 1).max().unwrap_or(0);
    let mut per_sat = vec![0usize; n_sat];
    let mut slot = Vec::with_capacity(sat_of.len());
    for &s in sat_of {
        slot.push(per_sat[s]);
        per_sat[s] += 1;
    }
    let out = edges
        .iter()
        .map(|e| SlotEdge {
            sat_a: sat_of[e.a],
            slot_a: slot[e.a],
            sat_b: sat_of[e.b],
            slot_b: slot[e.b],
        })
        .collect();
    (out, per_sat)
}

/// Fraction of `edges` that fail the connectivity predicate at time `t`.
fn lost_fraction(
    edges: &[SlotEdge],
    mounts_per_sat: &[usize],
    elements: &[OrbitalElements],
    propagator: &dyn Propagator,
    geometry: &GeometryParams,
    t: f64,
) -> Result<f64, OrbitError> {
    if edges.is_empty() {
        return Ok(0.0);
    }
    let mut cache: Vec<Option<(SatelliteState, Vec<crate::Vec3>)>> = vec![None; elements.len()];
    let mut lost = 0usize;
    for e in edges {
        for s in [e.sat_a, e.sat_b] {
            if cache[s].is_none() {
                let st = propagator.propagate(&elements[s], t)?;
                let mounts = mount_directions(&st, mounts_per_sat[s])?;
                cache[s] = Some((st, mounts));
            }
        }
        let (sa, ma) = cache[e.sat_a].as_ref().unwrap();
        let (sb, mb) = cache[e.sat_b].as_ref().unwrap();
        if lct_pair_connectable(
            &sa.position,
            &ma[e.slot_a],
            &sb.position,
            &mb[e.slot_b],
            geometry,
        )
        .is_none()
        {
            lost += 1;
        }
    }
    Ok(lost as f64 / edges.len() as f64)
}

/// Fraction of the reference snapshot's terminal edges that are no longer
/// connectable after `elapsed` seconds, with mounts re-derived from the new
/// velocities.
pub fn coherent_loss_fraction(
    reference: &ConstellationSnapshot,
    elapsed: f64,
    ctx: &RebuildContext<'_>,
) -> Result<f64, CoherenceError> {
    if !(elapsed >= 0.0) {
        return Err(CoherenceError::Elapsed(elapsed));
    }
    if elapsed == 0.0 || reference.lct_edges().is_empty() {
        return Ok(0.0);
    }
    let sat_of: Vec<usize> = reference.lcts().iter().map(|t| t.sat_id).collect();
    let (edges, mut per_sat) = slot_edges(&sat_of, reference.lct_edges());
    per_sat.resize(reference.satellite_count(), 0);
    Ok(lost_fraction(
        &edges,
        &per_sat,
        ctx.elements,
        ctx.propagator,
        &ctx.geometry,
        reference.epoch() + elapsed,
    )?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoherenceSettings {
    pub threshold_ratio: f64,
    pub samples: usize,
    pub seed: u64,
    /// Longest elapsed time examined (s).
    pub horizon: f64,
    /// Grid spacing of the elapsed-time search (s).
    pub resolution: f64,
    /// Start epochs are drawn uniformly from `[0, start_window)` s.
    pub start_window: f64,
    pub lcts_per_satellite: usize,
    pub geometry: GeometryParams,
}

impl Default for CoherenceSettings {
    fn default() -> Self {
        CoherenceSettings {
            threshold_ratio: 0.999,
            samples: 10,
            seed: 1,
            horizon: 100.0,
            resolution: 0.01,
            start_window: 5_760.0,
            lcts_per_satellite: 2,
            geometry: GeometryParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceEstimate {
    /// Mean over used samples (s). Equals `horizon` when every sample saturated.
    pub coherent_time: f64,
    /// Per-sample times; saturated samples report `horizon`.
    pub sample_times: Vec<f64>,
    pub saturated_samples: usize,
    pub skipped_samples: usize,
    /// True when no sample lost enough edges within the horizon.
    pub saturated: bool,
}

/// Average earliest elapsed time at which more than `1 - threshold_ratio` of
/// the connectable terminal pairs are lost, over random start epochs.
pub fn estimate_coherent_time(
    elements: &[OrbitalElements],
    propagator: &dyn Propagator,
    optics: &OpticalParams,
    settings: &CoherenceSettings,
) -> Result<CoherenceEstimate, CoherenceError> {
    let tr = settings.threshold_ratio;
    if !(tr > 0.0 && tr < 1.0) {
        return Err(CoherenceError::Threshold(tr));
    }
    let allowed = 1.0 - tr;
    let steps = (settings.horizon / settings.resolution).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut times = Vec::new();
    let (mut saturated, mut skipped) = (0, 0);
    for _ in 0..settings.samples {
        let t0 = if settings.start_window > 0.0 {
            rng.random_range(0.0..settings.start_window)
        } else {
            0.0
        };
        let states = elements
            .iter()
            .map(|el| propagator.propagate(el, t0))
            .collect::<Result<Vec<_>, _>>()?;
        let lcts = build_terminals(&states, settings.lcts_per_satellite)?;
        let edge_list = build_lct_graph(&states, &lcts, &settings.geometry, optics);
        if edge_list.is_empty() {
            skipped += 1;
            continue;
        }
        let sat_of: Vec<usize> = lcts.iter().map(|t| t.sat_id).collect();
        let (edges, mut per_sat) = slot_edges(&sat_of, &edge_list);
        per_sat.resize(elements.len(), 0);
        let loss = |k: usize| {
            lost_fraction(
                &edges,
                &per_sat,
                elements,
                propagator,
                &settings.geometry,
                t0 + k as f64 * settings.resolution,
            )
        };
        if loss(steps)? <= allowed {
            saturated += 1;
            times.push(settings.horizon);
            continue;
        }
        let (mut lo, mut hi) = (0usize, steps);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if loss(mid)? > allowed {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        times.push(hi as f64 * settings.resolution);
    }
    if times.is_empty() {
        return Err(CoherenceError::NoEdges);
    }
    Ok(CoherenceEstimate {
        coherent_time: times.iter().sum::<f64>() / times.len() as f64,
        saturated: saturated == times.len(),
        sample_times: times,
        saturated_samples: saturated,
        skipped_samples: skipped,
    })
}
