//! Re-evaluates a fixed solution after the constellation has moved on.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dual::{DualError, FlowRate};
use crate::graph::{lct_pair_connectable, ConstellationSnapshot, FlowPair};
use crate::optics::lisl_rate_unchecked;
use crate::orbit::{mount_directions, OrbitError, Propagator, SatelliteState};
use crate::primal::{allocate_rates_with_capacity, PrimalSolution};
use crate::routing::Route;
use crate::Vec3;

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error("snapshot carries no orbital elements to re-propagate")]
    MissingElements,
    #[error("elapsed time {0} s must be non-negative and finite")]
    Elapsed(f64),
    #[error("solution does not match the snapshot: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error(transparent)]
    Dual(#[from] DualError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolveStatus {
    Ok,
    /// Every matched terminal pair broke; throughput is zero.
    AllLinksLost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolvedSolution {
    /// s
    pub elapsed: f64,
    pub status: EvolveStatus,
    /// Matched terminal edges still connectable, by edge id.
    pub surviving_edges: Vec<usize>,
    pub lost_edges: Vec<usize>,
    /// Flows whose fixed route crosses a link with no surviving capacity.
    pub dropped_flows: Vec<FlowPair>,
    pub rates: Vec<FlowRate>,
    pub throughput: f64,
}

/// Keeps the matching and routes of `sol`, moves the constellation forward by
/// `elapsed` seconds, drops matched pairs that are no longer connectable and
/// flows routed over them, and re-solves the rates on the new capacities.
pub fn evolve_solution(
    snap: &ConstellationSnapshot,
    sol: &PrimalSolution,
    elapsed: f64,
    propagator: &dyn Propagator,
) -> Result<EvolvedSolution, EvolveError> {
    if !(elapsed >= 0.0 && elapsed.is_finite()) {
        return Err(EvolveError::Elapsed(elapsed));
    }
    let flows = snap.flow_pairs();
    if sol.routes.len() != flows.len() {
        return Err(EvolveError::Mismatch(format!(
            "{} routes for {} flows",
            sol.routes.len(),
            flows.len()
        )));
    }
    let edges = snap.lct_edges();
    let matched = sol.matched_edges();
    if let Some(&k) = matched.iter().find(|&&k| k >= edges.len()) {
        return Err(EvolveError::Mismatch(format!("unknown terminal edge {k}")));
    }

    let (states, mounts) = if elapsed == 0.0 {
        let mounts: Vec<Vec3> = snap.lcts().iter().map(|t| t.mount_direction).collect();
        (snap.satellites().to_vec(), mounts)
    } else {
        let elements = snap.elements().ok_or(EvolveError::MissingElements)?;
        let t = snap.epoch() + elapsed;
        let states: Vec<SatelliteState> = elements
            .iter()
            .zip(snap.satellites())
            .map(|(el, old)| {
                propagator.propagate(el, t).map(|mut s| {
                    s.has_gateway = old.has_gateway;
                    s
                })
            })
            .collect::<Result<_, _>>()?;
        let per_sat = snap.parts().lcts_per_satellite;
        let mut by_sat = Vec::with_capacity(states.len());
        for s in &states {
            by_sat.push(mount_directions(s, per_sat)?);
        }
        let mut slot = vec![0usize; states.len()];
        let mut mounts = Vec::with_capacity(snap.lcts().len());
        for term in snap.lcts() {
            let dirs = &by_sat[term.sat_id];
            let k = slot[term.sat_id];
            if k >= dirs.len() {
                return Err(EvolveError::Mismatch(format!(
                    "satellite {} has more than {per_sat} terminals",
                    term.sat_id
                )));
            }
            mounts.push(dirs[k]);
            slot[term.sat_id] += 1;
        }
        (states, mounts)
    };

    let lcts = snap.lcts();
    let mut cap = vec![0.0; snap.link_count()];
    let (mut surviving, mut lost) = (Vec::new(), Vec::new());
    for &k in &matched {
        let e = &edges[k];
        let (sa, sb) = (lcts[e.a].sat_id, lcts[e.b].sat_id);
        let capacity = if elapsed == 0.0 {
            Some(e.capacity)
        } else {
            lct_pair_connectable(
                &states[sa].position,
                &mounts[e.a],
                &states[sb].position,
                &mounts[e.b],
                snap.geometry(),
            )
            .map(|z| lisl_rate_unchecked(z, snap.optics()))
            .filter(|&r| r > 0.0)
        };
        match capacity {
            Some(c) => {
                surviving.push(k);
                let p = snap.edge_pair(k);
                cap[2 * p] += c;
                cap[2 * p + 1] += c;
            }
            None => lost.push(k),
        }
    }

    let mut dropped = Vec::new();
    let mut routes: Vec<Option<Route>> = Vec::with_capacity(flows.len());
    for (f, fp) in flows.iter().zip(&sol.routes) {
        let Some(path) = &fp.path else {
            routes.push(None);
            continue;
        };
        let mut links = Vec::with_capacity(path.len().saturating_sub(1));
        for w in path.windows(2) {
            let l = snap.link_id(w[0], w[1]).ok_or_else(|| {
                EvolveError::Mismatch(format!("route hop {} -> {} is not a link", w[0], w[1]))
            })?;
            links.push(l);
        }
        if links.iter().all(|&l| cap[l] > 0.0) {
            routes.push(Some(Route {
                nodes: path.clone(),
                links,
                cost: 0.0,
            }));
        } else {
            dropped.push(*f);
            routes.push(None);
        }
    }

    let rates = allocate_rates_with_capacity(snap, &cap, &routes)?;
    let status = if !matched.is_empty() && surviving.is_empty() {
        EvolveStatus::AllLinksLost
    } else {
        EvolveStatus::Ok
    };
    Ok(EvolvedSolution {
        elapsed,
        status,
        surviving_edges: surviving,
        lost_edges: lost,
        dropped_flows: dropped,
        throughput: rates.iter().fold(0.0, |a, b| a + b),
        rates: flows
            .iter()
            .zip(rates)
            .map(|(f, rate)| FlowRate {
                source: f.source,
                dest: f.dest,
                rate,
            })
            .collect(),
    })
}
