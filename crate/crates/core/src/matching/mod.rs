//! Weighted matchings over terminal edges.

mod blossom;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest edge count the enumeration matcher accepts.
pub const EXACT_ENUMERATION_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MatchingMode {
    /// Heaviest-first greedy; at least half the optimum.
    #[default]
    Greedy,
    /// Exhaustive enumeration, limited to [`EXACT_ENUMERATION_LIMIT`] edges.
    Exact,
    /// Edmonds' blossom algorithm; exact at any size.
    Blossom,
}

impl MatchingMode {
    /// True for modes that return a maximum-weight matching.
    pub fn is_exact(self) -> bool {
        matches!(self, MatchingMode::Exact | MatchingMode::Blossom)
    }
}

impl std::str::FromStr for MatchingMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "greedy" => Ok(MatchingMode::Greedy),
            "exact" => Ok(MatchingMode::Exact),
            "blossom" => Ok(MatchingMode::Blossom),
            other => Err(format!(
                "unknown matching mode '{other}' (greedy, exact, blossom)"
            )),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatchingError {
    #[error("exact enumeration supports at most {limit} edges, got {edges}")]
    TooLarge { edges: usize, limit: usize },
    #[error("edge {0} has a non-finite weight")]
    BadWeight(usize),
}

/// A set of vertex-disjoint edges (indices into the input edge list, ascending)
/// and their total weight.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Matching {
    pub edges: Vec<usize>,
    pub value: f64,
}

/// Input edge `(u, v)` with `u < v` by convention; ties break on `(u, v)`.
pub type Endpoints = (usize, usize);

fn check(weights: &[f64]) -> Result<(), MatchingError> {
    match weights.iter().position(|w| !w.is_finite()) {
        Some(k) => Err(MatchingError::BadWeight(k)),
        None => Ok(()),
    }
}

fn finish(mut edges: Vec<usize>, weights: &[f64]) -> Matching {
    edges.sort_unstable();
    let value = edges.iter().map(|&k| weights[k]).fold(0.0, |a, b| a + b);
    Matching { edges, value }
}

/// Scans edges by weight descending, ties by `(u, v)`, accepting every edge
/// whose endpoints are still free. Zero and negative weights are accepted too,
/// so the result is always maximal.
pub fn greedy_matching(
    n: usize,
    edges: &[Endpoints],
    weights: &[f64],
) -> Result<Matching, MatchingError> {
    check(weights)?;
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_by(|&x, &y| {
        weights[y]
            .total_cmp(&weights[x])
            .then(edges[x].cmp(&edges[y]))
    });
    let mut used = vec![false; n];
    let mut chosen = Vec::new();
    for k in order {
        let (u, v) = edges[k];
        if !used[u] && !used[v] {
            used[u] = true;
            used[v] = true;
            chosen.push(k);
        }
    }
    Ok(finish(chosen, weights))
}

/// Maximum-weight matching by exhaustive search. Among optimal matchings the
/// first found in include-before-exclude edge order is returned.
pub fn enumerate_matching(
    n: usize,
    edges: &[Endpoints],
    weights: &[f64],
) -> Result<Matching, MatchingError> {
    check(weights)?;
    if edges.len() > EXACT_ENUMERATION_LIMIT {
        return Err(MatchingError::TooLarge {
            edges: edges.len(),
            limit: EXACT_ENUMERATION_LIMIT,
        });
    }
    struct Search<'a> {
        edges: &'a [Endpoints],
        weights: &'a [f64],
        used: Vec<bool>,
        current: Vec<usize>,
        best: Vec<usize>,
        best_value: f64,
    }
    fn go(s: &mut Search<'_>, k: usize, value: f64) {
        if k == s.edges.len() {
            if value > s.best_value {
                s.best_value = value;
                s.best = s.current.clone();
            }
            return;
        }
        let (u, v) = s.edges[k];
        if s.weights[k] > 0.0 && !s.used[u] && !s.used[v] {
            s.used[u] = true;
            s.used[v] = true;
            s.current.push(k);
            go(s, k + 1, value + s.weights[k]);
            s.current.pop();
            s.used[u] = false;
            s.used[v] = false;
        }
        go(s, k + 1, value);
    }
    let mut s = Search {
        edges,
        weights,
        used: vec![false; n],
        current: Vec::new(),
        best: Vec::new(),
        best_value: 0.0,
    };
    go(&mut s, 0, 0.0);
    Ok(finish(s.best, weights))
}

/// Maximum-weight matching by the blossom algorithm. Weights are rounded to a
/// fixed-point grid of about 1e-12 relative to the largest weight; edges with
/// non-positive weight never help and are left out.
pub fn blossom_matching(
    n: usize,
    edges: &[Endpoints],
    weights: &[f64],
) -> Result<Matching, MatchingError> {
    check(weights)?;
    let max_w = weights.iter().copied().fold(0.0, f64::max);
    if max_w <= 0.0 {
        return Ok(Matching::default());
    }
    let scale = (1u64 << 40) as f64 / max_w;
    let mut ids = Vec::new();
    let mut input = Vec::new();
    for (k, (&(u, v), &w)) in edges.iter().zip(weights).enumerate() {
        let iw = (w * scale).round() as i64;
        if iw > 0 && u != v {
            ids.push(k);
            input.push((u, v, 2 * iw));
        }
    }
    let mates = blossom::max_weight_matching(n, &input);
    let chosen = ids
        .iter()
        .zip(&input)
        .filter(|(_, &(u, v, _))| mates[u] == Some(v))
        .map(|(&k, _)| k)
        .collect();
    Ok(finish(chosen, weights))
}

pub fn match_edges(
    mode: MatchingMode,
    n: usize,
    edges: &[Endpoints],
    weights: &[f64],
) -> Result<Matching, MatchingError> {
    match mode {
        MatchingMode::Greedy => greedy_matching(n, edges, weights),
        MatchingMode::Exact => enumerate_matching(n, edges, weights),
        MatchingMode::Blossom => blossom_matching(n, edges, weights),
    }
}
