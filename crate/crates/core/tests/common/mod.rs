//! Independent oracles and fixture builders shared by the integration tests.
#![allow(dead_code)]

use std::collections::VecDeque;
use std::path::PathBuf;

use lislnet_core::graph::{
    ConstellationSnapshot, FlowPair, GeometryParams, LctEdge, NodeFeatures, SnapshotParts,
};
use lislnet_core::lp::LinearProgram;
use lislnet_core::optics::OpticalParams;
use lislnet_core::orbit::{LctTerminal, SatelliteState};
use lislnet_core::scenario::Scenario;
use lislnet_core::Vec3;
use rand::Rng;

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn load_scenario(config: &str) -> Scenario {
    Scenario::load(&repo_root().join("configs").join(config)).expect("scenario config")
}

/// Desk scenario resized to `satellites`.
pub fn desk_scenario(satellites: usize) -> Scenario {
    let mut s = load_scenario("desk.json");
    s.config.orbital.satellites = satellites;
    s
}

pub fn desk_snapshots(satellites: usize, count: usize, seed: u64) -> Vec<ConstellationSnapshot> {
    let sc = desk_scenario(satellites);
    sc.dataset_draws(count, seed)
        .into_iter()
        .map(|(s, epoch)| sc.snapshot(epoch, s).expect("snapshot"))
        .collect()
}

/// Hand-built snapshot: `n` satellites with `per_sat` terminals each, the
/// given terminal edges `(a, b, capacity)`, `(serving, demand)` per
/// satellite, and flows.
pub fn build_snapshot(
    n: usize,
    per_sat: usize,
    edges: &[(usize, usize, f64)],
    nodes: &[(f64, f64)],
    flows: &[(usize, usize)],
) -> ConstellationSnapshot {
    let satellites = (0..n)
        .map(|i| {
            let phi = std::f64::consts::TAU * i as f64 / n as f64;
            SatelliteState {
                sat_id: i as u32 + 1,
                position: Vec3::new(7e6 * phi.cos(), 7e6 * phi.sin(), 0.0),
                velocity: Vec3::new(-7.5e3 * phi.sin(), 7.5e3 * phi.cos(), 0.0),
                has_gateway: nodes[i].0 > 0.0,
            }
        })
        .collect::<Vec<_>>();
    let lcts = (0..n * per_sat)
        .map(|k| {
            let s = &satellites[k / per_sat];
            let v = s.velocity * (1.0 / s.velocity.norm());
            LctTerminal {
                lct_id: k,
                sat_id: k / per_sat,
                mount_direction: if k % 2 == 0 { v } else { -v },
            }
        })
        .collect();
    ConstellationSnapshot::new(SnapshotParts {
        epoch: 0.0,
        satellites,
        lcts,
        lct_edges: edges
            .iter()
            .map(|&(a, b, capacity)| LctEdge { a, b, capacity })
            .collect(),
        node_features: nodes
            .iter()
            .map(|&(serving, demand)| NodeFeatures { serving, demand })
            .collect(),
        flow_pairs: flows
            .iter()
            .map(|&(source, dest)| FlowPair { source, dest })
            .collect(),
        elements: None,
        geometry: GeometryParams::default(),
        optics: OpticalParams::default(),
        lcts_per_satellite: per_sat,
        seed: None,
    })
    .expect("valid hand-built snapshot")
}

/// Random instance: two terminals per satellite, `n_edges` distinct
/// terminal pairs on distinct satellites, servers and demanders split at
/// random, each demander paired with up to two servers, at most `max_flows` flows.
pub fn random_instance(
    rng: &mut impl Rng,
    n: usize,
    n_edges: usize,
    max_flows: usize,
) -> ConstellationSnapshot {
    let per_sat = 2;
    let t = n * per_sat;
    let mut candidates = Vec::new();
    for a in 0..t {
        for b in (a + 1)..t {
            if a / per_sat != b / per_sat {
                candidates.push((a, b));
            }
        }
    }
    let mut edges = Vec::new();
    for _ in 0..n_edges.min(candidates.len()) {
        let k = rng.random_range(0..candidates.len());
        let (a, b) = candidates.swap_remove(k);
        edges.push((a, b, rng.random_range(0.5..5.0)));
    }
    let mut nodes = vec![(0.0, 0.0); n];
    let (mut servers, mut demanders) = (Vec::new(), Vec::new());
    for (i, node) in nodes.iter_mut().enumerate() {
        match rng.random_range(0..3) {
            0 => {
                node.0 = rng.random_range(1.0..10.0);
                servers.push(i);
            }
            1 => {
                node.1 = rng.random_range(1.0..10.0);
                demanders.push(i);
            }
            _ => {}
        }
    }
    let mut flows = Vec::new();
    for &d in &demanders {
        for _ in 0..2 {
            if servers.is_empty() || flows.len() >= max_flows {
                break;
            }
            let s = servers[rng.random_range(0..servers.len())];
            if !flows.contains(&(s, d)) {
                flows.push((s, d));
            }
        }
    }
    build_snapshot(n, per_sat, &edges, &nodes, &flows)
}

pub fn random_prices(rng: &mut impl Rng, n: usize, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0.0..hi)).collect()
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..n {
                        a[r][c] -= f * a[col][c];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Best objective over all basic feasible points of a bounded LP, found by
/// making every `n`-subset of the inequalities (rows, `x ≥ 0`, upper
/// bounds) tight. `None` when no vertex is feasible.
pub fn vertex_enumeration(lp: &LinearProgram) -> Option<f64> {
    let n = lp.objective.len();
    let mut rows: Vec<(Vec<f64>, f64)> = lp
        .constraints
        .iter()
        .map(|c| {
            let mut a = vec![0.0; n];
            for &(j, v) in &c.terms {
                a[j] += v;
            }
            (a, c.bound)
        })
        .collect();
    for j in 0..n {
        let mut a = vec![0.0; n];
        a[j] = -1.0;
        rows.push((a, 0.0));
        if let Some(Some(u)) = lp.upper_bounds.get(j) {
            let mut a = vec![0.0; n];
            a[j] = 1.0;
            rows.push((a, *u));
        }
    }
    let m = rows.len();
    let mut best: Option<f64> = None;
    let mut pick = Vec::with_capacity(n);
    fn rec(
        start: usize,
        m: usize,
        n: usize,
        pick: &mut Vec<usize>,
        rows: &[(Vec<f64>, f64)],
        objective: &[f64],
        best: &mut Option<f64>,
    ) {
        if pick.len() == n {
            let a = pick.iter().map(|&r| rows[r].0.clone()).collect();
            let b = pick.iter().map(|&r| rows[r].1).collect();
            if let Some(x) = solve_square(a, b) {
                let feasible = rows.iter().all(|(a, b)| {
                    let lhs: f64 = a.iter().zip(&x).map(|(p, q)| p * q).sum();
                    lhs <= b + 1e-9 * (1.0 + b.abs())
                });
                if feasible {
                    let v: f64 = objective.iter().zip(&x).map(|(c, x)| c * x).sum();
                    if best.is_none_or(|cur| v > cur) {
                        *best = Some(v);
                    }
                }
            }
            return;
        }
        for r in start..m {
            if m - r < n - pick.len() {
                break;
            }
            pick.push(r);
            rec(r + 1, m, n, pick, rows, objective, best);
            pick.pop();
        }
    }
    if n == 0 {
        return rows.iter().all(|(_, b)| *b >= 0.0).then_some(0.0);
    }
    rec(0, m, n, &mut pick, &rows, &lp.objective, &mut best);
    best
}

/// Maximum total weight of a matching, by exhaustive include/exclude search.
pub fn brute_force_matching(edges: &[(usize, usize)], weights: &[f64]) -> f64 {
    fn rec(k: usize, used: &mut Vec<bool>, edges: &[(usize, usize)], weights: &[f64]) -> f64 {
        if k == edges.len() {
            return 0.0;
        }
        let skip = rec(k + 1, used, edges, weights);
        let (a, b) = edges[k];
        if used[a] || used[b] {
            return skip;
        }
        used[a] = true;
        used[b] = true;
        let take = weights[k] + rec(k + 1, used, edges, weights);
        used[a] = false;
        used[b] = false;
        skip.max(take)
    }
    let n = edges.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0);
    rec(0, &mut vec![false; n], edges, weights)
}

/// Single-source shortest distances over directed weighted arcs.
pub fn bellman_ford(n: usize, arcs: &[(usize, usize, f64)], source: usize) -> Vec<Option<f64>> {
    let mut dist = vec![None; n];
    dist[source] = Some(0.0);
    for _ in 0..n {
        let mut changed = false;
        for &(u, v, w) in arcs {
            if let Some(du) = dist[u] {
                let cand = du + w;
                if dist[v].is_none_or(|dv: f64| cand < dv) {
                    dist[v] = Some(cand);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    dist
}

pub fn bfs_reachable(n: usize, arcs: &[(usize, usize)], source: usize) -> Vec<bool> {
    let mut seen = vec![false; n];
    seen[source] = true;
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        for &(a, b) in arcs {
            if a == u && !seen[b] {
                seen[b] = true;
                queue.push_back(b);
            }
        }
    }
    seen
}

/// Directed satellite arcs `(i, j, cost)` for links accepted by `usable`.
pub fn link_arcs(
    snap: &ConstellationSnapshot,
    cost: &[f64],
    usable: impl Fn(usize) -> bool,
) -> Vec<(usize, usize, f64)> {
    (0..snap.link_count())
        .filter(|&l| usable(l))
        .map(|l| {
            let (i, j) = snap.link(l);
            (i, j, cost[l])
        })
        .collect()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}
