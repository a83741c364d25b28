//! LCT connectivity graph, satellite adjacency graph and the snapshot that
//! bundles them with traffic.

mod coherence;
mod document;

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::optics::{lisl_rate_unchecked, OpticalParams};
use crate::orbit::{range_and_direction_between, LctTerminal, OrbitalElements, SatelliteState};

pub use coherence::{
    coherent_loss_fraction, estimate_coherent_time, CoherenceEstimate, CoherenceSettings,
    RebuildContext,
};
pub use document::{SnapshotDocument, SNAPSHOT_FORMAT_VERSION};

/// Range and field-of-regard limits for a terminal pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryParams {
    /// m
    pub max_range: f64,
    /// Field-of-regard half-angle (rad).
    pub for_half_angle: f64,
}

impl Default for GeometryParams {
    fn default() -> Self {
        GeometryParams {
            max_range: 3e6,
            for_half_angle: 60f64.to_radians(),
        }
    }
}

impl GeometryParams {
    pub fn validate(&self) -> Result<(), SnapshotError> {
        if !(self.max_range > 0.0 && self.max_range.is_finite()) {
            return Err(SnapshotError::Invalid(format!(
                "max_range {} must be positive",
                self.max_range
            )));
        }
        if !(self.for_half_angle > 0.0 && self.for_half_angle <= std::f64::consts::PI) {
            return Err(SnapshotError::Invalid(format!(
                "field-of-regard half-angle {} must lie in (0, pi]",
                self.for_half_angle
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SnapshotError {
    #[error("inconsistent snapshot: {0}")]
    Invalid(String),
    #[error("unsupported snapshot format version {0}")]
    Version(u32),
}

/// Unordered connectable terminal pair, `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LctEdge {
    #[serde(rename = "n")]
    pub a: usize,
    #[serde(rename = "m")]
    pub b: usize,
    /// Gbit/s
    pub capacity: f64,
}

/// Per-satellite serving and demand rates (Gbit/s).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NodeFeatures {
    pub serving: f64,
    pub demand: f64,
}

/// A source-destination pair of satellite indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FlowPair {
    pub source: usize,
    pub dest: usize,
}

/// Satellites `a < b` joined by at least one connectable terminal pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SatPair {
    pub a: usize,
    pub b: usize,
    /// Indices into the snapshot's LCT edge list, ascending.
    pub edges: Vec<usize>,
    /// Sum of the member edge capacities (Gbit/s).
    pub capacity: f64,
}

/// Field-of-regard and range test for terminals `u_n` on a satellite at
/// `from` and `u_m` on one at `to`. Returns the range when connectable.
pub fn lct_pair_connectable(
    from: &crate::Vec3,
    u_n: &crate::Vec3,
    to: &crate::Vec3,
    u_m: &crate::Vec3,
    geo: &GeometryParams,
) -> Option<f64> {
    let (z, d) = range_and_direction_between(from, to)?;
    let cos_theta = geo.for_half_angle.cos();
    (z <= geo.max_range && d.dot(u_n) > cos_theta && (-d).dot(u_m) > cos_theta).then_some(z)
}

/// All connectable terminal pairs with their LISL capacities, sorted by `(a, b)`.
/// Pairs whose capacity evaluates to zero are left out.
pub fn build_lct_graph(
    states: &[SatelliteState],
    lcts: &[LctTerminal],
    geo: &GeometryParams,
    optics: &OpticalParams,
) -> Vec<LctEdge> {
    let mut by_sat: Vec<Vec<&LctTerminal>> = vec![Vec::new(); states.len()];
    for t in lcts {
        by_sat[t.sat_id].push(t);
    }
    let cos_theta = geo.for_half_angle.cos();
    let mut edges: Vec<LctEdge> = (0..states.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut local = Vec::new();
            for j in (i + 1)..states.len() {
                let Some((z, d)) =
                    range_and_direction_between(&states[i].position, &states[j].position)
                else {
                    continue;
                };
                if z > geo.max_range {
                    continue;
                }
                let rate = lisl_rate_unchecked(z, optics);
                if !(rate > 0.0) {
                    continue;
                }
                for n in &by_sat[i] {
                    if d.dot(&n.mount_direction) <= cos_theta {
                        continue;
                    }
                    for m in &by_sat[j] {
                        if (-d).dot(&m.mount_direction) > cos_theta {
                            let (a, b) = if n.lct_id < m.lct_id {
                                (n.lct_id, m.lct_id)
                            } else {
                                (m.lct_id, n.lct_id)
                            };
                            local.push(LctEdge {
                                a,
                                b,
                                capacity: rate,
                            });
                        }
                    }
                }
            }
            local
        })
        .collect();
    edges.sort_by_key(|e| (e.a, e.b));
    edges
}

/// Groups terminal edges by the unordered satellite pair they connect.
/// Pairs are sorted by `(a, b)`; the directed links are `(a, b)` and `(b, a)`.
pub fn build_sat_graph(lcts: &[LctTerminal], edges: &[LctEdge]) -> Vec<SatPair> {
    let mut groups: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (k, e) in edges.iter().enumerate() {
        let (i, j) = (lcts[e.a].sat_id, lcts[e.b].sat_id);
        groups.entry((i.min(j), i.max(j))).or_default().push(k);
    }
    let mut pairs: Vec<SatPair> = groups
        .into_iter()
        .map(|((a, b), edge_ids)| SatPair {
            a,
            b,
            capacity: edge_ids.iter().map(|&k| edges[k].capacity).sum(),
            edges: edge_ids,
        })
        .collect();
    pairs.sort_by_key(|p| (p.a, p.b));
    pairs
}

/// Raw snapshot contents before indexing and validation.
#[derive(Debug, Clone, Default)]
pub struct SnapshotParts {
    pub epoch: f64,
    pub satellites: Vec<SatelliteState>,
    pub lcts: Vec<LctTerminal>,
    pub lct_edges: Vec<LctEdge>,
    pub node_features: Vec<NodeFeatures>,
    pub flow_pairs: Vec<FlowPair>,
    /// Elements aligned with `satellites`, needed to re-propagate the snapshot.
    pub elements: Option<Vec<OrbitalElements>>,
    pub geometry: GeometryParams,
    pub optics: OpticalParams,
    pub lcts_per_satellite: usize,
    pub seed: Option<u64>,
}

/// The two constellation graphs, node features and flow set at one instant.
///
/// Satellites and terminals are densely indexed; `SatelliteState::sat_id`
/// keeps the catalog number. Directed link `2p` is `(a, b)` of pair `p` and
/// link `2p + 1` is `(b, a)`.
#[derive(Debug, Clone)]
pub struct ConstellationSnapshot {
    parts: SnapshotParts,
    pairs: Vec<SatPair>,
    link_of: HashMap<(usize, usize), usize>,
    out_links: Vec<Vec<usize>>,
    edge_pair: Vec<usize>,
}

impl ConstellationSnapshot {
    pub fn new(mut parts: SnapshotParts) -> Result<Self, SnapshotError> {
        let bad = |msg: String| Err(SnapshotError::Invalid(msg));
        let n_sat = parts.satellites.len();
        if parts.node_features.len() != n_sat {
            return bad(format!(
                "{} node feature rows for {} satellites",
                parts.node_features.len(),
                n_sat
            ));
        }
        if let Some(el) = &parts.elements {
            if el.len() != n_sat {
                return bad(format!(
                    "{} element sets for {} satellites",
                    el.len(),
                    n_sat
                ));
            }
        }
        for (k, t) in parts.lcts.iter().enumerate() {
            if t.lct_id != k {
                return bad(format!("terminal at position {k} has id {}", t.lct_id));
            }
            if t.sat_id >= n_sat {
                return bad(format!(
                    "terminal {k} refers to missing satellite {}",
                    t.sat_id
                ));
            }
        }
        for e in parts.lct_edges.iter_mut() {
            if e.a > e.b {
                std::mem::swap(&mut e.a, &mut e.b);
            }
        }
        parts.lct_edges.sort_by_key(|e| (e.a, e.b));
        for w in parts.lct_edges.windows(2) {
            if (w[0].a, w[0].b) == (w[1].a, w[1].b) {
                return bad(format!("duplicate terminal edge ({}, {})", w[0].a, w[0].b));
            }
        }
        for e in &parts.lct_edges {
            if e.b >= parts.lcts.len() {
                return bad(format!(
                    "edge ({}, {}) refers to a missing terminal",
                    e.a, e.b
                ));
            }
            if parts.lcts[e.a].sat_id == parts.lcts[e.b].sat_id {
                return bad(format!(
                    "edge ({}, {}) joins terminals of one satellite",
                    e.a, e.b
                ));
            }
            if !(e.capacity > 0.0 && e.capacity.is_finite()) {
                return bad(format!(
                    "edge ({}, {}) has capacity {}",
                    e.a, e.b, e.capacity
                ));
            }
        }
        for (i, f) in parts.node_features.iter().enumerate() {
            if !(f.serving >= 0.0
                && f.demand >= 0.0
                && f.serving.is_finite()
                && f.demand.is_finite())
            {
                return bad(format!("satellite {i} has invalid rates {f:?}"));
            }
        }
        for f in &parts.flow_pairs {
            if f.source >= n_sat || f.dest >= n_sat || f.source == f.dest {
                return bad(format!("invalid flow pair {f:?}"));
            }
            if !(parts.node_features[f.dest].demand > 0.0) {
                return bad(format!("flow {f:?} ends at a satellite without demand"));
            }
        }
        let mut flows = parts.flow_pairs.clone();
        flows.sort();
        flows.dedup();
        if flows.len() != parts.flow_pairs.len() {
            return bad("duplicate flow pairs".into());
        }

        let pairs = build_sat_graph(&parts.lcts, &parts.lct_edges);
        let mut link_of = HashMap::with_capacity(2 * pairs.len());
        let mut out_links = vec![Vec::new(); n_sat];
        let mut edge_pair = vec![0; parts.lct_edges.len()];
        for (p, pair) in pairs.iter().enumerate() {
            link_of.insert((pair.a, pair.b), 2 * p);
            link_of.insert((pair.b, pair.a), 2 * p + 1);
            out_links[pair.a].push(2 * p);
            out_links[pair.b].push(2 * p + 1);
            for &e in &pair.edges {
                edge_pair[e] = p;
            }
        }
        let mut snap = ConstellationSnapshot {
            parts,
            pairs,
            link_of,
            out_links,
            edge_pair,
        };
        for i in 0..n_sat {
            let mut links = std::mem::take(&mut snap.out_links[i]);
            links.sort_by_key(|&l| snap.link(l).1);
            snap.out_links[i] = links;
        }
        Ok(snap)
    }

    pub fn parts(&self) -> &SnapshotParts {
        &self.parts
    }

    pub fn epoch(&self) -> f64 {
        self.parts.epoch
    }

    pub fn satellites(&self) -> &[SatelliteState] {
        &self.parts.satellites
    }

    pub fn satellite_count(&self) -> usize {
        self.parts.satellites.len()
    }

    pub fn lcts(&self) -> &[LctTerminal] {
        &self.parts.lcts
    }

    pub fn lct_edges(&self) -> &[LctEdge] {
        &self.parts.lct_edges
    }

    pub fn node_features(&self) -> &[NodeFeatures] {
        &self.parts.node_features
    }

    pub fn flow_pairs(&self) -> &[FlowPair] {
        &self.parts.flow_pairs
    }

    pub fn geometry(&self) -> &GeometryParams {
        &self.parts.geometry
    }

    pub fn optics(&self) -> &OpticalParams {
        &self.parts.optics
    }

    pub fn elements(&self) -> Option<&[OrbitalElements]> {
        self.parts.elements.as_deref()
    }

    pub fn pairs(&self) -> &[SatPair] {
        &self.pairs
    }

    /// Number of directed satellite links (twice the pair count).
    pub fn link_count(&self) -> usize {
        2 * self.pairs.len()
    }

    /// Endpoints `(from, to)` of a directed link.
    pub fn link(&self, id: usize) -> (usize, usize) {
        let p = &self.pairs[id / 2];
        if id.is_multiple_of(2) {
            (p.a, p.b)
        } else {
            (p.b, p.a)
        }
    }

    pub fn link_id(&self, from: usize, to: usize) -> Option<usize> {
        self.link_of.get(&(from, to)).copied()
    }

    /// Directed link ids leaving a satellite, ordered by head index.
    pub fn out_links(&self, sat: usize) -> &[usize] {
        &self.out_links[sat]
    }

    /// Pair index of a terminal edge.
    pub fn edge_pair(&self, edge: usize) -> usize {
        self.edge_pair[edge]
    }

    /// Satellites carrying the two terminals of an edge, in edge order.
    pub fn edge_satellites(&self, edge: usize) -> (usize, usize) {
        let e = &self.parts.lct_edges[edge];
        (self.parts.lcts[e.a].sat_id, self.parts.lcts[e.b].sat_id)
    }

    /// Symmetric matrix of summed LISL capacity between satellites (Gbit/s).
    pub fn edge_feature_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.satellite_count();
        let mut r = vec![vec![0.0; n]; n];
        for p in &self.pairs {
            r[p.a][p.b] = p.capacity;
            r[p.b][p.a] = p.capacity;
        }
        r
    }

    /// Catalog number of each dense satellite index.
    pub fn catalog_ids(&self) -> Vec<u32> {
        self.parts.satellites.iter().map(|s| s.sat_id).collect()
    }

    /// Same snapshot with a different flow set.
    pub fn with_flows(&self, flows: Vec<FlowPair>) -> Result<Self, SnapshotError> {
        let mut parts = self.parts.clone();
        parts.flow_pairs = flows;
        ConstellationSnapshot::new(parts)
    }
}
