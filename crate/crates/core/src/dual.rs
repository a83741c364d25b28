//! Lagrangian dual of the joint matching/routing/rate problem with per-link
//! congestion prices.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ConstellationSnapshot, FlowPair};
use crate::lp::{self, LinearProgram, LpError, LpStatus};
use crate::matching::{match_edges, Endpoints, Matching, MatchingError, MatchingMode};
use crate::routing::{route_flows, Route};

#[derive(Debug, Error)]
pub enum DualError {
    #[error("expected {expected} link prices, got {got}")]
    Length { expected: usize, got: usize },
    #[error("price on link ({i}, {j}) is {value}; prices must be finite and non-negative")]
    NegativePrice { i: usize, j: usize, value: f64 },
    #[error("multiplier for ({i}, {j}) is {value}, outside [0, 1]")]
    OutOfRange { i: usize, j: usize, value: f64 },
    #[error("multiplier key ({i}, {j}) is not a satellite link")]
    UnknownKey { i: usize, j: usize },
    #[error("multiplier key ({i}, {j}) appears twice")]
    DuplicateKey { i: usize, j: usize },
    #[error("multiplier for link ({i}, {j}) is missing")]
    MissingKey { i: usize, j: usize },
    #[error("multipliers JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid descent config: {0}")]
    Config(String),
    #[error(transparent)]
    Matching(#[from] MatchingError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("rate LP ended {0:?}")]
    RateLp(LpStatus),
    #[error("iteration {k}: {source}")]
    Iteration {
        k: usize,
        #[source]
        source: Box<DualError>,
    },
}

/// One `{i, j, lambda}` record of the multipliers file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiplierEntry {
    pub i: usize,
    pub j: usize,
    pub lambda: f64,
}

/// Congestion prices in `[0, 1]`, one per directed satellite link, indexed by link id.
#[derive(Debug, Clone, PartialEq)]
pub struct Multipliers {
    values: Vec<f64>,
}

impl Multipliers {
    pub fn uniform(snap: &ConstellationSnapshot, value: f64) -> Result<Self, DualError> {
        Self::from_values(snap, vec![value; snap.link_count()])
    }

    pub fn from_values(snap: &ConstellationSnapshot, values: Vec<f64>) -> Result<Self, DualError> {
        if values.len() != snap.link_count() {
            return Err(DualError::Length {
                expected: snap.link_count(),
                got: values.len(),
            });
        }
        for (l, &v) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                let (i, j) = snap.link(l);
                return Err(DualError::OutOfRange { i, j, value: v });
            }
        }
        Ok(Multipliers { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn entries(&self, snap: &ConstellationSnapshot) -> Vec<MultiplierEntry> {
        self.values
            .iter()
            .enumerate()
            .map(|(l, &lambda)| {
                let (i, j) = snap.link(l);
                MultiplierEntry { i, j, lambda }
            })
            .collect()
    }

    /// Requires exactly one entry per directed link.
    pub fn from_entries(
        snap: &ConstellationSnapshot,
        entries: &[MultiplierEntry],
    ) -> Result<Self, DualError> {
        let mut values: Vec<Option<f64>> = vec![None; snap.link_count()];
        for e in entries {
            let l = snap
                .link_id(e.i, e.j)
                .ok_or(DualError::UnknownKey { i: e.i, j: e.j })?;
            if !(0.0..=1.0).contains(&e.lambda) {
                return Err(DualError::OutOfRange {
                    i: e.i,
                    j: e.j,
                    value: e.lambda,
                });
            }
            if values[l].replace(e.lambda).is_some() {
                return Err(DualError::DuplicateKey { i: e.i, j: e.j });
            }
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(l, v)| {
                v.ok_or_else(|| {
                    let (i, j) = snap.link(l);
                    DualError::MissingKey { i, j }
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Multipliers { values })
    }

    pub fn from_json(snap: &ConstellationSnapshot, text: &str) -> Result<Self, DualError> {
        let entries: Vec<MultiplierEntry> = serde_json::from_str(text)?;
        Self::from_entries(snap, &entries)
    }

    pub fn to_json(&self, snap: &ConstellationSnapshot) -> String {
        serde_json::to_string_pretty(&self.entries(snap)).expect("multipliers serialize")
    }
}

fn check_prices(snap: &ConstellationSnapshot, prices: &[f64]) -> Result<(), DualError> {
    if prices.len() != snap.link_count() {
        return Err(DualError::Length {
            expected: snap.link_count(),
            got: prices.len(),
        });
    }
    for (l, &v) in prices.iter().enumerate() {
        if !(v >= 0.0 && v.is_finite()) {
            let (i, j) = snap.link(l);
            return Err(DualError::NegativePrice { i, j, value: v });
        }
    }
    Ok(())
}

/// `(λ_ab + λ_ba)·r` for every terminal edge.
pub fn matching_weights(snap: &ConstellationSnapshot, prices: &[f64]) -> Vec<f64> {
    snap.lct_edges()
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let p = snap.edge_pair(k);
            (prices[2 * p] + prices[2 * p + 1]) * e.capacity
        })
        .collect()
}

pub(crate) fn lct_endpoints(snap: &ConstellationSnapshot) -> Vec<Endpoints> {
    snap.lct_edges().iter().map(|e| (e.a, e.b)).collect()
}

/// Matching over terminal edges maximizing the price-weighted capacity; its
/// value is the matching part of the dual.
pub fn matching_subproblem(
    snap: &ConstellationSnapshot,
    prices: &[f64],
    mode: MatchingMode,
) -> Result<Matching, DualError> {
    check_prices(snap, prices)?;
    let weights = matching_weights(snap, prices);
    Ok(match_edges(
        mode,
        snap.lcts().len(),
        &lct_endpoints(snap),
        &weights,
    )?)
}

/// Minimum-price route per flow; `usable` restricts the links (by link id).
pub fn routing_subproblem(
    snap: &ConstellationSnapshot,
    prices: &[f64],
    usable: Option<&[bool]>,
) -> Result<Vec<Option<Route>>, DualError> {
    check_prices(snap, prices)?;
    Ok(route_flows(snap, snap.flow_pairs(), prices, usable))
}

/// Maximizes `Σ q(1 − cost)` under serving and demand caps. Flows without a
/// route or with cost ≥ 1 get zero rate. Returns the rates and the rate part of the dual.
pub fn rate_subproblem(
    snap: &ConstellationSnapshot,
    costs: &[Option<f64>],
) -> Result<(Vec<f64>, f64), DualError> {
    let flows = snap.flow_pairs();
    let active: Vec<usize> = (0..flows.len())
        .filter(|&f| costs[f].is_some_and(|c| c < 1.0))
        .collect();
    let mut rates = vec![0.0; flows.len()];
    if active.is_empty() {
        return Ok((rates, 0.0));
    }
    let objective = active.iter().map(|&f| 1.0 - costs[f].unwrap()).collect();
    let program = serving_demand_program(
        snap,
        objective,
        &active.iter().map(|&f| flows[f]).collect::<Vec<_>>(),
    );
    let sol = lp::solve_blocks(&program)?;
    if sol.status != LpStatus::Optimal {
        return Err(DualError::RateLp(sol.status));
    }
    let mut part_c = 0.0;
    for (v, &f) in active.iter().enumerate() {
        rates[f] = sol.values[v];
        part_c += sol.values[v] * (1.0 - costs[f].unwrap());
    }
    Ok((rates, part_c))
}

/// LP over one variable per flow with one serving row per source and one
/// demand row per destination.
pub(crate) fn serving_demand_program(
    snap: &ConstellationSnapshot,
    objective: Vec<f64>,
    flows: &[FlowPair],
) -> LinearProgram {
    let nodes = snap.node_features();
    let mut program = LinearProgram::new(objective);
    let mut by_source: std::collections::BTreeMap<usize, Vec<(usize, f64)>> = Default::default();
    let mut by_dest: std::collections::BTreeMap<usize, Vec<(usize, f64)>> = Default::default();
    for (v, f) in flows.iter().enumerate() {
        by_source.entry(f.source).or_default().push((v, 1.0));
        by_dest.entry(f.dest).or_default().push((v, 1.0));
    }
    for (s, terms) in by_source {
        program.add_constraint(terms, nodes[s].serving);
    }
    for (d, terms) in by_dest {
        program.add_constraint(terms, nodes[d].demand);
    }
    program
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowCost {
    pub source: usize,
    pub dest: usize,
    /// `None` when the destination is unreachable.
    pub cost: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowPath {
    pub source: usize,
    pub dest: usize,
    pub path: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowRate {
    pub source: usize,
    pub dest: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkDelta {
    pub i: usize,
    pub j: usize,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchedEdge {
    /// Index into the snapshot's terminal edge list.
    pub edge: usize,
    pub n: usize,
    pub m: usize,
}

/// Dual value, its parts, the subgradient, and the subproblem minimizers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualEval {
    pub g_value: f64,
    pub matching_part_a: f64,
    pub rate_part_c: f64,
    pub matching_mode: MatchingMode,
    pub routing_costs: Vec<FlowCost>,
    /// Ordered by link id.
    pub subgradient: Vec<LinkDelta>,
    pub arg_matching: Vec<MatchedEdge>,
    pub arg_routes: Vec<FlowPath>,
    pub arg_rates: Vec<FlowRate>,
}

impl DualEval {
    /// Subgradient as a vector indexed by link id.
    pub fn delta(&self) -> Vec<f64> {
        self.subgradient.iter().map(|d| d.delta).collect()
    }

    pub fn matched_edges(&self) -> Vec<usize> {
        self.arg_matching.iter().map(|m| m.edge).collect()
    }
}

/// Evaluates `g(λ) = −(c) − (a)` and `δ = load − matched capacity` per link.
/// Prices may exceed one.
pub fn dual_function(
    snap: &ConstellationSnapshot,
    prices: &[f64],
    mode: MatchingMode,
) -> Result<DualEval, DualError> {
    let matching = matching_subproblem(snap, prices, mode)?;
    let routes = routing_subproblem(snap, prices, None)?;
    let costs: Vec<Option<f64>> = routes.iter().map(|r| r.as_ref().map(|r| r.cost)).collect();
    let (rates, part_c) = rate_subproblem(snap, &costs)?;

    let mut delta = vec![0.0; snap.link_count()];
    for (route, &q) in routes.iter().zip(&rates) {
        if let Some(route) = route {
            if q != 0.0 {
                for &l in &route.links {
                    delta[l] += q;
                }
            }
        }
    }
    let edges = snap.lct_edges();
    for &k in &matching.edges {
        let p = snap.edge_pair(k);
        delta[2 * p] -= edges[k].capacity;
        delta[2 * p + 1] -= edges[k].capacity;
    }

    let flows = snap.flow_pairs();
    Ok(DualEval {
        g_value: -part_c - matching.value,
        matching_part_a: matching.value,
        rate_part_c: part_c,
        matching_mode: mode,
        routing_costs: flows
            .iter()
            .zip(&costs)
            .map(|(f, &cost)| FlowCost {
                source: f.source,
                dest: f.dest,
                cost,
            })
            .collect(),
        subgradient: delta
            .iter()
            .enumerate()
            .map(|(l, &d)| {
                let (i, j) = snap.link(l);
                LinkDelta { i, j, delta: d }
            })
            .collect(),
        arg_matching: matching
            .edges
            .iter()
            .map(|&k| MatchedEdge {
                edge: k,
                n: edges[k].a,
                m: edges[k].b,
            })
            .collect(),
        arg_routes: flows
            .iter()
            .zip(routes)
            .map(|(f, r)| FlowPath {
                source: f.source,
                dest: f.dest,
                path: r.map(|r| r.nodes),
            })
            .collect(),
        arg_rates: flows
            .iter()
            .zip(&rates)
            .map(|(f, &rate)| FlowRate {
                source: f.source,
                dest: f.dest,
                rate,
            })
            .collect(),
    })
}

/// `min(1, λ)` per link.
pub fn clip_multipliers(prices: &[f64]) -> Result<Vec<f64>, DualError> {
    prices
        .iter()
        .map(|&v| {
            if v >= 0.0 {
                Ok(v.min(1.0))
            } else {
                Err(DualError::NegativePrice {
                    i: 0,
                    j: 0,
                    value: v,
                })
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LaduConfig {
    pub iterations: usize,
    /// Initial step size `α0`.
    pub step_size: f64,
    /// Step decay exponent `β` in `α_k = α0 / k^β`.
    pub step_decay: f64,
    pub initial_lambda: f64,
    pub matching_mode: MatchingMode,
}

impl Default for LaduConfig {
    fn default() -> Self {
        LaduConfig {
            iterations: 100,
            step_size: 1e-3,
            step_decay: 0.7,
            initial_lambda: 1.0,
            matching_mode: MatchingMode::Greedy,
        }
    }
}

impl LaduConfig {
    pub fn validate(&self) -> Result<(), DualError> {
        if self.iterations == 0 {
            return Err(DualError::Config("iterations must be at least 1".into()));
        }
        if !(self.step_size > 0.0 && self.step_size < 1.0) {
            return Err(DualError::Config(format!(
                "step_size {} outside (0, 1)",
                self.step_size
            )));
        }
        if !(0.5..1.0).contains(&self.step_decay) {
            return Err(DualError::Config(format!(
                "step_decay {} outside [0.5, 1)",
                self.step_decay
            )));
        }
        if !(0.0..=1.0).contains(&self.initial_lambda) {
            return Err(DualError::Config(format!(
                "initial_lambda {} outside [0, 1]",
                self.initial_lambda
            )));
        }
        Ok(())
    }

    pub fn step(&self, k: usize) -> f64 {
        self.step_size / (k as f64).powf(self.step_decay)
    }
}

#[derive(Debug, Clone)]
pub struct LaduOutcome {
    /// `g(λ^k)` for k = 1..=K.
    pub dual_values: Vec<f64>,
    /// 1-based iteration of the best dual value (earliest on ties).
    pub best_iteration: usize,
    pub best_dual: f64,
    pub best_lambda: Multipliers,
    /// Last evaluated iterate `λ^K`.
    pub final_lambda: Multipliers,
}

/// Projected subgradient ascent `λ ← clip[0,1](λ + α_k δ(λ))` from a uniform start.
pub fn ladu_descent(
    snap: &ConstellationSnapshot,
    cfg: &LaduConfig,
) -> Result<LaduOutcome, DualError> {
    cfg.validate()?;
    let mut lambda = vec![cfg.initial_lambda; snap.link_count()];
    let mut dual_values = Vec::with_capacity(cfg.iterations);
    let mut best: Option<(usize, f64, Vec<f64>)> = None;
    for k in 1..=cfg.iterations {
        let eval =
            dual_function(snap, &lambda, cfg.matching_mode).map_err(|e| DualError::Iteration {
                k,
                source: Box::new(e),
            })?;
        dual_values.push(eval.g_value);
        if best.as_ref().is_none_or(|b| eval.g_value > b.1) {
            best = Some((k, eval.g_value, lambda.clone()));
        }
        if k == cfg.iterations {
            break;
        }
        let step = cfg.step(k);
        for (l, d) in lambda.iter_mut().zip(eval.subgradient.iter()) {
            *l = (*l + step * d.delta).clamp(0.0, 1.0);
        }
    }
    let (best_iteration, best_dual, best_lambda) = best.expect("at least one iteration");
    Ok(LaduOutcome {
        dual_values,
        best_iteration,
        best_dual,
        best_lambda: Multipliers {
            values: best_lambda,
        },
        final_lambda: Multipliers { values: lambda },
    })
}
