//! Hand-built snapshots for unit tests.

use crate::graph::{ConstellationSnapshot, FlowPair, LctEdge, NodeFeatures, SnapshotParts};
use crate::orbit::{LctTerminal, SatelliteState};
use crate::Vec3;

/// Satellites on a line; each `(a, b, capacity)` gets two fresh terminals.
/// `nodes` holds `(serving, demand)` per satellite.
pub(crate) fn line_snapshot(
    n: usize,
    edges: &[(usize, usize, f64)],
    nodes: &[(f64, f64)],
    flows: &[(usize, usize)],
) -> ConstellationSnapshot {
    let satellites = (0..n)
        .map(|i| SatelliteState {
            sat_id: i as u32,
            position: Vec3::new(7e6, i as f64 * 1e5, 0.0),
            velocity: Vec3::new(0.0, 7500.0, 0.0),
            has_gateway: nodes[i].0 > 0.0,
        })
        .collect();
    let mut lcts = Vec::new();
    let mut lct_edges = Vec::new();
    for &(a, b, c) in edges {
        let id = lcts.len();
        for (k, s) in [a, b].into_iter().enumerate() {
            lcts.push(LctTerminal {
                lct_id: id + k,
                sat_id: s,
                mount_direction: Vec3::new(0.0, 1.0, 0.0),
            });
        }
        lct_edges.push(LctEdge {
            a: id,
            b: id + 1,
            capacity: c,
        });
    }
    ConstellationSnapshot::new(SnapshotParts {
        satellites,
        lcts,
        lct_edges,
        node_features: nodes
            .iter()
            .map(|&(serving, demand)| NodeFeatures { serving, demand })
            .collect(),
        flow_pairs: flows
            .iter()
            .map(|&(source, dest)| FlowPair { source, dest })
            .collect(),
        ..Default::default()
    })
    .unwrap()
}

/// Unit-capacity links between the given satellite pairs, no traffic.
pub(crate) fn pair_snapshot(n: usize, pairs: &[(usize, usize)]) -> ConstellationSnapshot {
    let edges: Vec<_> = pairs.iter().map(|&(a, b)| (a, b, 1.0)).collect();
    line_snapshot(n, &edges, &vec![(0.0, 0.0); n], &[])
}
