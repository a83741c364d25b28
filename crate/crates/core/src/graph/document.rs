use serde::{Deserialize, Serialize};

use super::{
    ConstellationSnapshot, FlowPair, GeometryParams, LctEdge, NodeFeatures, SnapshotError,
    SnapshotParts,
};
use crate::optics::OpticalParams;
use crate::orbit::{LctTerminal, OrbitalElements, SatelliteState};
use crate::Vec3;

pub const SNAPSHOT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotMeta {
    pub format_version: u32,
    /// s after the scenario T0
    pub epoch_t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub lcts_per_satellite: usize,
    pub geometry: GeometryParams,
    pub optics: OpticalParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SatelliteEntry {
    pub index: usize,
    pub catalog_id: u32,
    pub position: Vec3,
    pub velocity: Vec3,
    pub has_gateway: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elements: Option<OrbitalElements>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SatLinkEntry {
    pub i: usize,
    pub j: usize,
    /// Indices into `lct_edges`.
    pub edges: Vec<usize>,
    pub capacity: f64,
}

/// JSON interchange form of a [`ConstellationSnapshot`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotDocument {
    pub meta: SnapshotMeta,
    pub satellites: Vec<SatelliteEntry>,
    pub lcts: Vec<LctTerminal>,
    pub lct_edges: Vec<LctEdge>,
    pub sat_links: Vec<SatLinkEntry>,
    pub node_features: Vec<NodeFeatures>,
    pub flow_pairs: Vec<FlowPair>,
}

impl SnapshotDocument {
    pub fn from_snapshot(snap: &ConstellationSnapshot) -> Self {
        let parts = snap.parts();
        let satellites = parts
            .satellites
            .iter()
            .enumerate()
            .map(|(index, s)| SatelliteEntry {
                index,
                catalog_id: s.sat_id,
                position: s.position,
                velocity: s.velocity,
                has_gateway: s.has_gateway,
                elements: parts.elements.as_ref().map(|e| e[index]),
            })
            .collect();
        let sat_links = (0..snap.link_count())
            .map(|l| {
                let (i, j) = snap.link(l);
                let pair = &snap.pairs()[l / 2];
                SatLinkEntry {
                    i,
                    j,
                    edges: pair.edges.clone(),
                    capacity: pair.capacity,
                }
            })
            .collect();
        SnapshotDocument {
            meta: SnapshotMeta {
                format_version: SNAPSHOT_FORMAT_VERSION,
                epoch_t: parts.epoch,
                seed: parts.seed,
                lcts_per_satellite: parts.lcts_per_satellite,
                geometry: parts.geometry,
                optics: parts.optics,
            },
            satellites,
            lcts: parts.lcts.clone(),
            lct_edges: parts.lct_edges.clone(),
            sat_links,
            node_features: parts.node_features.clone(),
            flow_pairs: parts.flow_pairs.clone(),
        }
    }

    /// Validates the document and rebuilds the indexed snapshot. The
    /// `sat_links` section must agree with the grouping derived from `lct_edges`.
    pub fn into_snapshot(self) -> Result<ConstellationSnapshot, SnapshotError> {
        if self.meta.format_version != SNAPSHOT_FORMAT_VERSION {
            return Err(SnapshotError::Version(self.meta.format_version));
        }
        for (k, s) in self.satellites.iter().enumerate() {
            if s.index != k {
                return Err(SnapshotError::Invalid(format!(
                    "satellite at position {k} has index {}",
                    s.index
                )));
            }
        }
        let elements = if self.satellites.iter().all(|s| s.elements.is_some())
            && !self.satellites.is_empty()
        {
            Some(
                self.satellites
                    .iter()
                    .map(|s| s.elements.unwrap())
                    .collect(),
            )
        } else {
            None
        };
        let parts = SnapshotParts {
            epoch: self.meta.epoch_t,
            satellites: self
                .satellites
                .iter()
                .map(|s| SatelliteState {
                    sat_id: s.catalog_id,
                    position: s.position,
                    velocity: s.velocity,
                    has_gateway: s.has_gateway,
                })
                .collect(),
            lcts: self.lcts,
            lct_edges: self.lct_edges,
            node_features: self.node_features,
            flow_pairs: self.flow_pairs,
            elements,
            geometry: self.meta.geometry,
            optics: self.meta.optics,
            lcts_per_satellite: self.meta.lcts_per_satellite,
            seed: self.meta.seed,
        };
        let snap = ConstellationSnapshot::new(parts)?;
        if self.sat_links.len() != snap.link_count() {
            return Err(SnapshotError::Invalid(format!(
                "sat_links lists {} directed links but the terminal edges imply {}",
                self.sat_links.len(),
                snap.link_count()
            )));
        }
        for entry in &self.sat_links {
            let Some(l) = snap.link_id(entry.i, entry.j) else {
                return Err(SnapshotError::Invalid(format!(
                    "sat_links entry ({}, {}) has no terminal edge",
                    entry.i, entry.j
                )));
            };
            let mut listed = entry.edges.clone();
            listed.sort_unstable();
            if listed != snap.pairs()[l / 2].edges {
                return Err(SnapshotError::Invalid(format!(
                    "sat_links entry ({}, {}) lists edges {:?}, expected {:?}",
                    entry.i,
                    entry.j,
                    entry.edges,
                    snap.pairs()[l / 2].edges
                )));
            }
        }
        Ok(snap)
    }
}
