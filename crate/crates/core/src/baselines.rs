//! Heuristic matchings, reciprocal-capacity routing, the rate-only pipeline,
//! and an exhaustive oracle for tiny instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dual::{lct_endpoints, DualError};
use crate::graph::{ConstellationSnapshot, FlowPair};
use crate::matching::{greedy_matching, Matching};
use crate::orbit::range_and_direction_between;
use crate::primal::{allocate_rates, assemble, connected_links, link_capacities, PrimalSolution};
use crate::routing::{route_flows, Route};

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("{what} is {value}, above the oracle limit {limit}")]
    TooLarge {
        what: &'static str,
        value: usize,
        limit: usize,
    },
    #[error("flow ({}, {}) has more than {limit} simple paths", flow.source, flow.dest)]
    TooManyPaths { flow: FlowPair, limit: usize },
    #[error(transparent)]
    Dual(#[from] DualError),
}

fn greedy(snap: &ConstellationSnapshot, weights: &[f64]) -> Matching {
    greedy_matching(snap.lcts().len(), &lct_endpoints(snap), weights)
        .expect("finite heuristic weights")
}

/// Greedy matching on raw link rate.
pub fn match_mrate(snap: &ConstellationSnapshot) -> Matching {
    let w: Vec<f64> = snap.lct_edges().iter().map(|e| e.capacity).collect();
    greedy(snap, &w)
}

/// Pointing alignment `d_nm·u_n + d_mn·u_m` of each terminal edge.
pub fn grid_weights(snap: &ConstellationSnapshot) -> Vec<f64> {
    let sats = snap.satellites();
    let lcts = snap.lcts();
    snap.lct_edges()
        .iter()
        .map(|e| {
            let (tn, tm) = (&lcts[e.a], &lcts[e.b]);
            let (pn, pm) = (sats[tn.sat_id].position, sats[tm.sat_id].position);
            match range_and_direction_between(&pn, &pm) {
                Some((_, d)) => d.dot(&tn.mount_direction) - d.dot(&tm.mount_direction),
                None => 0.0,
            }
        })
        .collect()
}

/// Greedy matching favouring terminals pointed at each other.
pub fn match_grid(snap: &ConstellationSnapshot) -> Matching {
    greedy(snap, &grid_weights(snap))
}

/// Greedy matching on independent uniform weights.
pub fn match_random(snap: &ConstellationSnapshot, seed: u64) -> Matching {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<f64> = (0..snap.lct_edges().len())
        .map(|_| rng.random::<f64>())
        .collect();
    greedy(snap, &w)
}

/// Shortest paths over the matched links, each weighted by the reciprocal of
/// its matched capacity.
pub fn ospf_route(snap: &ConstellationSnapshot, matched: &[usize]) -> Vec<Option<Route>> {
    let usable = connected_links(snap, matched);
    let cap = link_capacities(snap, matched);
    let cost: Vec<f64> = cap
        .iter()
        .map(|&c| if c > 0.0 { 1.0 / c } else { 0.0 })
        .collect();
    route_flows(snap, snap.flow_pairs(), &cost, Some(&usable))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum HeuristicMatcher {
    Mrate,
    #[default]
    Grid,
    Random,
}

/// Heuristic matching, reciprocal-capacity routes, then optimal rates for that topology.
pub fn sate_pipeline(
    snap: &ConstellationSnapshot,
    matcher: HeuristicMatcher,
    seed: u64,
) -> Result<PrimalSolution, BaselineError> {
    let m = match matcher {
        HeuristicMatcher::Mrate => match_mrate(snap),
        HeuristicMatcher::Grid => match_grid(snap),
        HeuristicMatcher::Random => match_random(snap, seed),
    };
    let routes = ospf_route(snap, &m.edges);
    let rates = allocate_rates(snap, &m.edges, &routes)?;
    Ok(assemble(snap, &m.edges, routes, rates))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleLimits {
    pub max_edges: usize,
    pub max_flows: usize,
    pub max_satellites: usize,
    pub max_paths_per_flow: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_edges: 12,
            max_flows: 4,
            max_satellites: 8,
            max_paths_per_flow: 64,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub throughput: f64,
    pub solution: PrimalSolution,
    pub matchings_checked: usize,
    pub lps_solved: usize,
}

fn maximal_matchings(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    fn go(
        k: usize,
        edges: &[(usize, usize)],
        used: &mut Vec<bool>,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if k == edges.len() {
            if edges.iter().all(|&(a, b)| used[a] || used[b]) {
                out.push(cur.clone());
            }
            return;
        }
        let (a, b) = edges[k];
        if !used[a] && !used[b] {
            used[a] = true;
            used[b] = true;
            cur.push(k);
            go(k + 1, edges, used, cur, out);
            cur.pop();
            used[a] = false;
            used[b] = false;
        }
        go(k + 1, edges, used, cur, out);
    }
    let mut out = Vec::new();
    go(0, edges, &mut vec![false; n], &mut Vec::new(), &mut out);
    out
}

fn simple_paths(
    snap: &ConstellationSnapshot,
    usable: &[bool],
    source: usize,
    dest: usize,
    limit: usize,
) -> Option<Vec<Route>> {
    #[allow(clippy::too_many_arguments)]
    fn go(
        snap: &ConstellationSnapshot,
        usable: &[bool],
        dest: usize,
        nodes: &mut Vec<usize>,
        links: &mut Vec<usize>,
        on_path: &mut Vec<bool>,
        out: &mut Vec<Route>,
        limit: usize,
    ) -> bool {
        let here = *nodes.last().unwrap();
        if here == dest {
            if out.len() == limit {
                return false;
            }
            out.push(Route {
                nodes: nodes.clone(),
                links: links.clone(),
                cost: links.len() as f64,
            });
            return true;
        }
        for &l in snap.out_links(here) {
            let (_, next) = snap.link(l);
            if !usable[l] || on_path[next] {
                continue;
            }
            on_path[next] = true;
            nodes.push(next);
            links.push(l);
            let ok = go(snap, usable, dest, nodes, links, on_path, out, limit);
            links.pop();
            nodes.pop();
            on_path[next] = false;
            if !ok {
                return false;
            }
        }
        true
    }
    let mut on_path = vec![false; snap.satellite_count()];
    on_path[source] = true;
    let mut out = Vec::new();
    let ok = go(
        snap,
        usable,
        dest,
        &mut vec![source],
        &mut Vec::new(),
        &mut on_path,
        &mut out,
        limit,
    );
    ok.then_some(out)
}

/// Exact optimum of the joint problem by enumerating maximal matchings and
/// per-flow simple paths, solving the rate LP for every combination. Adding an
/// edge to a matching never removes capacity or paths, so maximal matchings
/// suffice.
pub fn brute_force_p1(
    snap: &ConstellationSnapshot,
    limits: &OracleLimits,
) -> Result<OracleResult, BaselineError> {
    let checks = [
        (
            "terminal edge count",
            snap.lct_edges().len(),
            limits.max_edges,
        ),
        ("flow count", snap.flow_pairs().len(), limits.max_flows),
        (
            "satellite count",
            snap.satellite_count(),
            limits.max_satellites,
        ),
    ];
    for (what, value, limit) in checks {
        if value > limit {
            return Err(BaselineError::TooLarge { what, value, limit });
        }
    }
    let flows = snap.flow_pairs();
    let mut best: Option<(f64, PrimalSolution)> = None;
    let mut lps = 0;
    let matchings = maximal_matchings(snap.lcts().len(), &lct_endpoints(snap));
    for matched in &matchings {
        let usable = connected_links(snap, matched);
        let mut options: Vec<Vec<Option<Route>>> = Vec::with_capacity(flows.len());
        for f in flows {
            let paths = simple_paths(snap, &usable, f.source, f.dest, limits.max_paths_per_flow)
                .ok_or(BaselineError::TooManyPaths {
                    flow: *f,
                    limit: limits.max_paths_per_flow,
                })?;
            options.push(if paths.is_empty() {
                vec![None]
            } else {
                paths.into_iter().map(Some).collect()
            });
        }
        let mut choice = vec![0usize; flows.len()];
        loop {
            let routes: Vec<Option<Route>> = choice
                .iter()
                .zip(&options)
                .map(|(&c, o)| o[c].clone())
                .collect();
            let rates = allocate_rates(snap, matched, &routes)?;
            lps += 1;
            let total: f64 = rates.iter().fold(0.0, |a, b| a + b);
            if best.as_ref().is_none_or(|b| total > b.0) {
                best = Some((total, assemble(snap, matched, routes, rates)));
            }
            let mut k = 0;
            while k < choice.len() {
                choice[k] += 1;
                if choice[k] < options[k].len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
            if k == choice.len() {
                break;
            }
        }
    }
    let (throughput, solution) = best.expect("the empty matching is always enumerated");
    Ok(OracleResult {
        throughput,
        solution,
        matchings_checked: matchings.len(),
        lps_solved: lps,
    })
}
