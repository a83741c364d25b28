use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use lislnet_bench::{config_path, desk_snapshots};
use lislnet_core::dual::{dual_function, matching_weights, LaduConfig};
use lislnet_core::lp::{solve, LinearProgram};
use lislnet_core::matching::{match_edges, MatchingMode};
use lislnet_core::methods::solve_ladu;
use lislnet_core::routing::route_flows;
use lislnet_core::scenario::Scenario;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dual_evaluation(c: &mut Criterion) {
    let mut group = c.benchmark_group("dual_function");
    for satellites in [50, 100, 200] {
        let snap = &desk_snapshots(satellites, 1, 1)[0];
        let prices = vec![0.5; snap.link_count()];
        group.bench_with_input(BenchmarkId::new("greedy", satellites), snap, |b, s| {
            b.iter(|| dual_function(s, black_box(&prices), MatchingMode::Greedy).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("blossom", satellites), snap, |b, s| {
            b.iter(|| dual_function(s, black_box(&prices), MatchingMode::Blossom).unwrap())
        });
    }
    group.finish();
}

fn matching(c: &mut Criterion) {
    let mut group = c.benchmark_group("matching");
    let snap = &desk_snapshots(100, 1, 2)[0];
    let edges: Vec<(usize, usize)> = snap.lct_edges().iter().map(|e| (e.a, e.b)).collect();
    let w = matching_weights(snap, &vec![0.5; snap.link_count()]);
    for mode in [MatchingMode::Greedy, MatchingMode::Blossom] {
        group.bench_function(format!("{mode:?}"), |b| {
            b.iter(|| match_edges(mode, snap.lcts().len(), black_box(&edges), &w).unwrap())
        });
    }
    group.finish();
}

fn routing(c: &mut Criterion) {
    let snap = &desk_snapshots(200, 1, 3)[0];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let prices: Vec<f64> = (0..snap.link_count()).map(|_| rng.random()).collect();
    c.bench_function("route_flows/200", |b| {
        b.iter(|| route_flows(snap, snap.flow_pairs(), black_box(&prices), None))
    });
}

fn linear_programs(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (n, m) = (40, 30);
    let mut lp = LinearProgram::new((0..n).map(|_| rng.random_range(0.0..1.0)).collect());
    for _ in 0..m {
        let row: Vec<f64> = (0..n)
            .map(|_| if rng.random_bool(0.2) { 1.0 } else { 0.0 })
            .collect();
        lp.add_dense_constraint(&row, rng.random_range(1.0..10.0));
    }
    c.bench_function("simplex/40x30", |b| {
        b.iter(|| solve(black_box(&lp)).unwrap())
    });
}

fn ladu(c: &mut Criterion) {
    let sc = Scenario::load(&config_path("desk.json")).unwrap();
    let snap = &desk_snapshots(50, 1, 5)[0];
    let cfg = LaduConfig {
        iterations: 100,
        ..sc.config.solver.ladu
    };
    let mut group = c.benchmark_group("ladu");
    group.sample_size(10);
    group.bench_function("K100/50", |b| {
        b.iter(|| solve_ladu(snap, black_box(&cfg)).unwrap())
    });
    group.finish();
}

fn snapshot_build(c: &mut Criterion) {
    let mut sc = Scenario::load(&config_path("desk.json")).unwrap();
    sc.config.orbital.satellites = 200;
    let mut group = c.benchmark_group("snapshot");
    group.sample_size(10);
    group.bench_function("desk/200", |b| {
        b.iter(|| sc.snapshot(black_box(900.0), 1).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    dual_evaluation,
    matching,
    routing,
    linear_programs,
    ladu,
    snapshot_build
);
criterion_main!(benches);
