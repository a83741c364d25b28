//! Fixtures shared by the benchmarks.

use std::path::PathBuf;

use lislnet_core::graph::ConstellationSnapshot;
use lislnet_core::scenario::Scenario;

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

/// Desk-scenario snapshots with `satellites` satellites, drawn from `seed`.
pub fn desk_snapshots(satellites: usize, count: usize, seed: u64) -> Vec<ConstellationSnapshot> {
    let mut sc = Scenario::load(&config_path("desk.json")).expect("desk config");
    sc.config.orbital.satellites = satellites;
    sc.dataset_draws(count, seed)
        .into_iter()
        .map(|(s, epoch)| sc.snapshot(epoch, s).expect("desk snapshot"))
        .collect()
}
