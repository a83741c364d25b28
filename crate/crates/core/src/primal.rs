//! Turning prices into a feasible matching, routes and rates, and checking
//! any such solution against the joint problem's constraints.

use serde::{Deserialize, Serialize};

use crate::dual::{
    matching_subproblem, serving_demand_program, DualError, FlowPath, FlowRate, MatchedEdge,
};
use crate::graph::{ConstellationSnapshot, FlowPair};
use crate::lp::{self, LpStatus};
use crate::matching::MatchingMode;
use crate::routing::{route_flows, Route};

/// Absolute tolerance of [`verify_feasibility`].
pub const FEASIBILITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SatLink {
    pub i: usize,
    pub j: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrimalSolution {
    pub matching: Vec<MatchedEdge>,
    /// Directed links with at least one matched terminal edge, both orders.
    pub connected_links: Vec<SatLink>,
    /// One entry per flow of the snapshot, `None` path when unserved.
    pub routes: Vec<FlowPath>,
    pub served_flows: Vec<FlowPair>,
    pub rates: Vec<FlowRate>,
    pub throughput: f64,
}

impl PrimalSolution {
    pub fn matched_edges(&self) -> Vec<usize> {
        self.matching.iter().map(|m| m.edge).collect()
    }
}

/// Usable-link mask of the links carrying at least one matched edge.
pub fn connected_links(snap: &ConstellationSnapshot, matched: &[usize]) -> Vec<bool> {
    let mut usable = vec![false; snap.link_count()];
    for &k in matched {
        let p = snap.edge_pair(k);
        usable[2 * p] = true;
        usable[2 * p + 1] = true;
    }
    usable
}

/// Matched capacity per directed link.
pub fn link_capacities(snap: &ConstellationSnapshot, matched: &[usize]) -> Vec<f64> {
    let mut cap = vec![0.0; snap.link_count()];
    for &k in matched {
        let p = snap.edge_pair(k);
        let r = snap.lct_edges()[k].capacity;
        cap[2 * p] += r;
        cap[2 * p + 1] += r;
    }
    cap
}

pub fn recover_matching(
    snap: &ConstellationSnapshot,
    prices: &[f64],
    mode: MatchingMode,
) -> Result<(Vec<usize>, Vec<bool>), DualError> {
    let m = matching_subproblem(snap, prices, mode)?;
    let usable = connected_links(snap, &m.edges);
    Ok((m.edges, usable))
}

/// Price-weighted shortest routes restricted to `usable`; `None` marks a flow outside F′.
pub fn recover_routes(
    snap: &ConstellationSnapshot,
    prices: &[f64],
    usable: &[bool],
) -> Vec<Option<Route>> {
    route_flows(snap, snap.flow_pairs(), prices, Some(usable))
}

/// Maximizes total rate over routed flows under serving, demand, and
/// per-directed-link matched-capacity rows.
pub fn allocate_rates(
    snap: &ConstellationSnapshot,
    matched: &[usize],
    routes: &[Option<Route>],
) -> Result<Vec<f64>, DualError> {
    allocate_rates_with_capacity(snap, &link_capacities(snap, matched), routes)
}

/// Rate allocation against explicit per-link capacities.
pub fn allocate_rates_with_capacity(
    snap: &ConstellationSnapshot,
    cap: &[f64],
    routes: &[Option<Route>],
) -> Result<Vec<f64>, DualError> {
    let flows = snap.flow_pairs();
    let served: Vec<usize> = (0..flows.len()).filter(|&f| routes[f].is_some()).collect();
    let mut rates = vec![0.0; flows.len()];
    if served.is_empty() {
        return Ok(rates);
    }
    let pairs: Vec<FlowPair> = served.iter().map(|&f| flows[f]).collect();
    let mut program = serving_demand_program(snap, vec![1.0; served.len()], &pairs);
    let mut through: std::collections::BTreeMap<usize, Vec<(usize, f64)>> = Default::default();
    for (v, &f) in served.iter().enumerate() {
        for &l in &routes[f].as_ref().unwrap().links {
            through.entry(l).or_default().push((v, 1.0));
        }
    }
    for (l, terms) in through {
        program.add_constraint(terms, cap[l]);
    }
    let sol = lp::solve_blocks(&program)?;
    if sol.status != LpStatus::Optimal {
        return Err(DualError::RateLp(sol.status));
    }
    for (v, &f) in served.iter().enumerate() {
        rates[f] = sol.values[v];
    }
    Ok(rates)
}

pub fn assemble(
    snap: &ConstellationSnapshot,
    matched: &[usize],
    routes: Vec<Option<Route>>,
    rates: Vec<f64>,
) -> PrimalSolution {
    let edges = snap.lct_edges();
    let mut matched = matched.to_vec();
    matched.sort_unstable();
    let usable = connected_links(snap, &matched);
    let mut connected: Vec<SatLink> = (0..snap.link_count())
        .filter(|&l| usable[l])
        .map(|l| {
            let (i, j) = snap.link(l);
            SatLink { i, j }
        })
        .collect();
    connected.sort();
    let flows = snap.flow_pairs();
    PrimalSolution {
        matching: matched
            .iter()
            .map(|&k| MatchedEdge {
                edge: k,
                n: edges[k].a,
                m: edges[k].b,
            })
            .collect(),
        connected_links: connected,
        served_flows: flows
            .iter()
            .zip(&routes)
            .filter(|(_, r)| r.is_some())
            .map(|(f, _)| *f)
            .collect(),
        routes: flows
            .iter()
            .zip(routes)
            .map(|(f, r)| FlowPath {
                source: f.source,
                dest: f.dest,
                path: r.map(|r| r.nodes),
            })
            .collect(),
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
    }
}

/// Matching, routing over the matched links, then rate allocation, all driven by `prices`.
pub fn recover(
    snap: &ConstellationSnapshot,
    prices: &[f64],
    mode: MatchingMode,
) -> Result<PrimalSolution, DualError> {
    let (matched, usable) = recover_matching(snap, prices, mode)?;
    let routes = recover_routes(snap, prices, &usable);
    let rates = allocate_rates(snap, &matched, &routes)?;
    Ok(assemble(snap, &matched, routes, rates))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    /// A matched entry that is not a terminal edge of the snapshot.
    UnknownEdge,
    /// A terminal in more than one matched edge.
    MatchingDegree,
    /// Declared connected links differ from those implied by the matching.
    ConnectedLinks,
    /// A route that is not a simple path over connected links from source to destination.
    Route,
    NegativeRate,
    ServingRate,
    DemandRate,
    LinkCapacity,
    Throughput,
    /// Solution entries that do not line up with the snapshot's flows.
    Shape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: ConstraintKind,
    pub location: String,
    /// Negative by the amount of violation.
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks matching degree, routes, serving/demand rows and directed link
/// capacities, each to [`FEASIBILITY_TOL`].
pub fn verify_feasibility(snap: &ConstellationSnapshot, sol: &PrimalSolution) -> FeasibilityReport {
    let mut out = Vec::new();
    let mut flag = |constraint, location: String, slack: f64| {
        out.push(Violation {
            constraint,
            location,
            slack,
        })
    };
    let flows = snap.flow_pairs();
    let edges = snap.lct_edges();

    let mut matched = Vec::new();
    let mut degree = vec![0usize; snap.lcts().len()];
    for m in &sol.matching {
        let ok = edges
            .get(m.edge)
            .is_some_and(|e| (e.a, e.b) == (m.n, m.m) || (e.a, e.b) == (m.m, m.n));
        if !ok {
            flag(
                ConstraintKind::UnknownEdge,
                format!("edge {} ({}, {})", m.edge, m.n, m.m),
                -1.0,
            );
            continue;
        }
        matched.push(m.edge);
        degree[edges[m.edge].a] += 1;
        degree[edges[m.edge].b] += 1;
    }
    for (n, &d) in degree.iter().enumerate() {
        if d > 1 {
            flag(
                ConstraintKind::MatchingDegree,
                format!("terminal {n}"),
                1.0 - d as f64,
            );
        }
    }
    let usable = connected_links(snap, &matched);
    let mut declared: Vec<SatLink> = sol.connected_links.clone();
    declared.sort();
    let implied: Vec<SatLink> = (0..snap.link_count())
        .filter(|&l| usable[l])
        .map(|l| {
            let (i, j) = snap.link(l);
            SatLink { i, j }
        })
        .collect();
    let mut implied_sorted = implied.clone();
    implied_sorted.sort();
    if declared != implied_sorted {
        flag(
            ConstraintKind::ConnectedLinks,
            "connected_links".into(),
            -1.0,
        );
    }

    if sol.routes.len() != flows.len() || sol.rates.len() != flows.len() {
        flag(
            ConstraintKind::Shape,
            format!(
                "{} routes / {} rates for {} flows",
                sol.routes.len(),
                sol.rates.len(),
                flows.len()
            ),
            -1.0,
        );
        return FeasibilityReport { violations: out };
    }

    let cap = link_capacities(snap, &matched);
    let mut load = vec![0.0; snap.link_count()];
    let mut out_rate = vec![0.0; snap.satellite_count()];
    let mut in_rate = vec![0.0; snap.satellite_count()];
    let mut total = 0.0;
    for (f, flow) in flows.iter().enumerate() {
        let (route, rate) = (&sol.routes[f], &sol.rates[f]);
        if (route.source, route.dest) != (flow.source, flow.dest)
            || (rate.source, rate.dest) != (flow.source, flow.dest)
        {
            flag(ConstraintKind::Shape, format!("flow {f}"), -1.0);
            continue;
        }
        let q = rate.rate;
        total += q;
        if q < -FEASIBILITY_TOL {
            flag(
                ConstraintKind::NegativeRate,
                format!("flow ({}, {})", flow.source, flow.dest),
                q,
            );
        }
        out_rate[flow.source] += q;
        in_rate[flow.dest] += q;
        match &route.path {
            None => {
                if q > FEASIBILITY_TOL {
                    flag(
                        ConstraintKind::Route,
                        format!("flow ({}, {}) has rate but no path", flow.source, flow.dest),
                        -q,
                    );
                }
            }
            Some(path) => {
                let mut seen = std::collections::HashSet::new();
                let simple = path
                    .iter()
                    .all(|v| *v < snap.satellite_count() && seen.insert(*v));
                let ends = path.first() == Some(&flow.source) && path.last() == Some(&flow.dest);
                let links: Option<Vec<usize>> = path
                    .windows(2)
                    .map(|w| snap.link_id(w[0], w[1]).filter(|&l| usable[l]))
                    .collect();
                match (simple && ends, links) {
                    (true, Some(links)) => {
                        for l in links {
                            load[l] += q;
                        }
                    }
                    _ => flag(
                        ConstraintKind::Route,
                        format!("flow ({}, {}) path {:?}", flow.source, flow.dest, path),
                        -1.0,
                    ),
                }
            }
        }
    }
    for (s, node) in snap.node_features().iter().enumerate() {
        if out_rate[s] > node.serving + FEASIBILITY_TOL {
            flag(
                ConstraintKind::ServingRate,
                format!("satellite {s}"),
                node.serving - out_rate[s],
            );
        }
        if in_rate[s] > node.demand + FEASIBILITY_TOL {
            flag(
                ConstraintKind::DemandRate,
                format!("satellite {s}"),
                node.demand - in_rate[s],
            );
        }
    }
    for l in 0..snap.link_count() {
        if load[l] > cap[l] + FEASIBILITY_TOL {
            let (i, j) = snap.link(l);
            flag(
                ConstraintKind::LinkCapacity,
                format!("link ({i}, {j})"),
                cap[l] - load[l],
            );
        }
    }
    if (total - sol.throughput).abs() > FEASIBILITY_TOL {
        flag(
            ConstraintKind::Throughput,
            "throughput".into(),
            -(total - sol.throughput).abs(),
        );
    }
    FeasibilityReport { violations: out }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualityGap {
    pub g_value: f64,
    pub negative_throughput: f64,
    /// `−throughput − g(λ)`; non-negative up to rounding when the dual used an exact matching.
    pub gap: f64,
}

pub fn duality_gap(
    snap: &ConstellationSnapshot,
    prices: &[f64],
    sol: &PrimalSolution,
    mode: MatchingMode,
) -> Result<DualityGap, DualError> {
    let g = crate::dual::dual_function(snap, prices, mode)?.g_value;
    Ok(DualityGap {
        g_value: g,
        negative_throughput: -sol.throughput,
        gap: -sol.throughput - g,
    })
}
