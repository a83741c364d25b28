//! Named end-to-end solution methods with solve-phase timing.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{
    brute_force_p1, sate_pipeline, BaselineError, HeuristicMatcher, OracleLimits,
};
use crate::dual::{ladu_descent, DualError, LaduConfig, Multipliers};
use crate::graph::ConstellationSnapshot;
use crate::matching::MatchingMode;
use crate::primal::{recover, PrimalSolution};

#[derive(Debug, Error)]
pub enum MethodError {
    #[error(transparent)]
    Dual(#[from] DualError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error("unknown method '{0}' (mrate, grid, rand, sate, ladu, deepladu, oracle)")]
    Unknown(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Mrate,
    Grid,
    Rand {
        seed: u64,
    },
    /// Rate-only optimization on a heuristic topology.
    Sate {
        matcher: HeuristicMatcher,
    },
    Ladu(LaduConfig),
    /// Recovery from externally supplied multipliers.
    DeepLadu {
        lambda: Multipliers,
        matching_mode: MatchingMode,
    },
    Oracle(OracleLimits),
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Mrate => "mrate",
            Method::Grid => "grid",
            Method::Rand { .. } => "rand",
            Method::Sate { .. } => "sate",
            Method::Ladu(_) => "ladu",
            Method::DeepLadu { .. } => "deepladu",
            Method::Oracle(_) => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LaduPick {
    Best,
    Final,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaduSummary {
    pub iterations: usize,
    pub best_iteration: usize,
    pub best_dual: f64,
    pub final_dual: f64,
    /// Which iterate's recovery gave the reported throughput.
    pub picked: LaduPick,
    pub best_throughput: f64,
    pub final_throughput: f64,
    pub dual_values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct MethodOutcome {
    pub solution: PrimalSolution,
    /// Multipliers behind the solution, for price-driven methods.
    pub lambda: Option<Multipliers>,
    /// Dual value at those multipliers when it was computed.
    pub dual_value: Option<f64>,
    pub ladu: Option<LaduSummary>,
    pub solve_seconds: f64,
}

/// LaDu recovery: runs the ascent, recovers from the best-dual and final
/// iterates, and keeps the higher throughput (the best-dual one on ties).
pub fn solve_ladu(
    snap: &ConstellationSnapshot,
    cfg: &LaduConfig,
) -> Result<(PrimalSolution, Multipliers, LaduSummary), DualError> {
    let out = ladu_descent(snap, cfg)?;
    let best = recover(snap, out.best_lambda.values(), cfg.matching_mode)?;
    let fin = recover(snap, out.final_lambda.values(), cfg.matching_mode)?;
    let summary = |picked| LaduSummary {
        iterations: cfg.iterations,
        best_iteration: out.best_iteration,
        best_dual: out.best_dual,
        final_dual: *out.dual_values.last().unwrap(),
        picked,
        best_throughput: best.throughput,
        final_throughput: fin.throughput,
        dual_values: out.dual_values.clone(),
    };
    if fin.throughput > best.throughput {
        let s = summary(LaduPick::Final);
        Ok((fin, out.final_lambda, s))
    } else {
        let s = summary(LaduPick::Best);
        Ok((best, out.best_lambda, s))
    }
}

pub fn run_method(
    snap: &ConstellationSnapshot,
    method: &Method,
) -> Result<MethodOutcome, MethodError> {
    let start = Instant::now();
    let mut lambda = None;
    let mut dual_value = None;
    let mut ladu = None;
    let solution = match method {
        Method::Mrate => sate_pipeline(snap, HeuristicMatcher::Mrate, 0)?,
        Method::Grid => sate_pipeline(snap, HeuristicMatcher::Grid, 0)?,
        Method::Rand { seed } => sate_pipeline(snap, HeuristicMatcher::Random, *seed)?,
        Method::Sate { matcher } => sate_pipeline(snap, *matcher, 0)?,
        Method::Ladu(cfg) => {
            let (sol, l, summary) = solve_ladu(snap, cfg)?;
            dual_value = Some(match summary.picked {
                LaduPick::Best => summary.best_dual,
                LaduPick::Final => summary.final_dual,
            });
            lambda = Some(l);
            ladu = Some(summary);
            sol
        }
        Method::DeepLadu {
            lambda: l,
            matching_mode,
        } => {
            let sol = recover(snap, l.values(), *matching_mode)?;
            lambda = Some(l.clone());
            sol
        }
        Method::Oracle(limits) => brute_force_p1(snap, limits)?.solution,
    };
    Ok(MethodOutcome {
        solution,
        lambda,
        dual_value,
        ladu,
        solve_seconds: start.elapsed().as_secs_f64(),
    })
}
