//! Snapshot building, dual decomposition solvers and baselines for laser
//! inter-satellite link networks.

pub mod baselines;
pub mod dual;
pub mod evolve;
pub mod graph;
pub mod lp;
pub mod matching;
pub mod methods;
pub mod optics;
pub mod orbit;
pub mod primal;
pub mod report;
pub mod routing;
pub mod scenario;
#[cfg(test)]
mod testkit;
pub mod traffic;
pub mod vec3;

pub use dual::{DualEval, LaduConfig, MultiplierEntry, Multipliers};
pub use graph::{ConstellationSnapshot, FlowPair, SnapshotDocument};
pub use matching::MatchingMode;
pub use methods::{run_method, Method, MethodOutcome};
pub use primal::PrimalSolution;
pub use report::{DatasetManifest, SolveMetrics, SubgradReport};
pub use scenario::{Scenario, ScenarioConfig};
pub use vec3::Vec3;
