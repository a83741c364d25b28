mod common;

use common::{bellman_ford, brute_force_matching, link_arcs, random_instance, vertex_enumeration};
use lislnet_core::baselines::{grid_weights, match_grid, match_mrate};
use lislnet_core::graph::FlowPair;
use lislnet_core::lp::{solve, solve_blocks, LinearProgram, LpStatus};
use lislnet_core::matching::{
    blossom_matching, enumerate_matching, greedy_matching, match_edges, MatchingMode,
};
use lislnet_core::routing::{route_flows, shortest_path_tree};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn lp_strategy() -> impl Strategy<Value = LinearProgram> {
    (1usize..=5, 1usize..=6).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(-1.0f64..2.0, n),
            prop::collection::vec((prop::collection::vec(-1.0f64..2.0, n), -1.0f64..6.0), m),
            prop::collection::vec(prop::option::of(0.5f64..8.0), n),
            prop::collection::vec(0.2f64..1.5, n),
        )
            .prop_map(|(c, rows, ub, cap)| {
                let mut lp = LinearProgram::new(c);
                for (a, b) in rows {
                    lp.add_dense_constraint(&a, b);
                }
                for (j, u) in ub.into_iter().enumerate() {
                    if let Some(u) = u {
                        lp.set_upper_bound(j, u);
                    }
                }
                lp.add_dense_constraint(&cap, 12.0);
                lp
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn simplex_matches_vertex_enumeration(lp in lp_strategy()) {
        let sol = solve(&lp).unwrap();
        match vertex_enumeration(&lp) {
            Some(best) => {
                prop_assert_eq!(sol.status, LpStatus::Optimal);
                prop_assert!((sol.objective_value - best).abs() <= 1e-6 * (1.0 + best.abs()));
                prop_assert!(lp.certificate(&sol).holds(1e-6));
            }
            None => prop_assert_eq!(sol.status, LpStatus::Infeasible),
        }
    }

    #[test]
    fn block_solver_agrees_with_plain_simplex(lp in lp_strategy()) {
        let a = solve(&lp).unwrap();
        let b = solve_blocks(&lp).unwrap();
        prop_assert_eq!(a.status, b.status);
        if a.status == LpStatus::Optimal {
            prop_assert!((a.objective_value - b.objective_value).abs() <= 1e-7 * (1.0 + a.objective_value.abs()));
        }
    }

    #[test]
    fn exact_matchers_reach_brute_force_and_greedy_reaches_half(
        raw in prop::collection::vec((0usize..9, 0usize..9, 0.0f64..10.0), 0..14)
    ) {
        let mut edges = Vec::new();
        let mut weights = Vec::new();
        for (u, v, w) in raw {
            if u != v && !edges.contains(&(u.min(v), u.max(v))) {
                edges.push((u.min(v), u.max(v)));
                weights.push(w);
            }
        }
        let best = brute_force_matching(&edges, &weights);
        let exact = enumerate_matching(9, &edges, &weights).unwrap();
        let blossom = blossom_matching(9, &edges, &weights).unwrap();
        let greedy = greedy_matching(9, &edges, &weights).unwrap();
        prop_assert!((exact.value - best).abs() <= 1e-9);
        prop_assert!((blossom.value - best).abs() <= 1e-9);
        prop_assert!(greedy.value >= 0.5 * best - 1e-9);
        prop_assert!(greedy.value <= best + 1e-9);
        for m in [&exact, &blossom, &greedy] {
            let mut seen = [false; 9];
            for &k in &m.edges {
                let (u, v) = edges[k];
                prop_assert!(!seen[u] && !seen[v]);
                seen[u] = true;
                seen[v] = true;
            }
        }
    }
}

#[test]
fn unbounded_lp_is_reported() {
    let mut lp = LinearProgram::new(vec![1.0, 1.0]);
    lp.add_dense_constraint(&[1.0, -1.0], 1.0);
    assert_eq!(solve(&lp).unwrap().status, LpStatus::Unbounded);
}

#[test]
fn blossom_handles_odd_cycles() {
    // Triangle plus pendant: optimum takes a triangle edge and the pendant.
    let edges = [(0, 1), (1, 2), (0, 2), (2, 3)];
    let w = [5.0, 5.0, 5.0, 4.0];
    assert_eq!(blossom_matching(4, &edges, &w).unwrap().value, 9.0);
    // Two triangles joined by a bridge.
    let edges = [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (3, 5)];
    let w = [3.0, 3.0, 3.0, 1.0, 3.0, 3.0, 3.0];
    assert_eq!(blossom_matching(6, &edges, &w).unwrap().value, 7.0);
    assert_eq!(brute_force_matching(&edges, &w), 7.0);
}

#[test]
fn blossom_is_exact_on_larger_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let n = 12;
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.random_bool(0.25) {
                    edges.push((u, v));
                }
            }
        }
        edges.truncate(20);
        let w: Vec<f64> = edges.iter().map(|_| rng.random_range(0.0..10.0)).collect();
        let b = match_edges(MatchingMode::Blossom, n, &edges, &w)
            .unwrap()
            .value;
        assert!((b - brute_force_matching(&edges, &w)).abs() < 1e-9);
    }
}

#[test]
fn routes_match_bellman_ford_distances() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let snap = random_instance(&mut rng, 15, 30, 8);
        let cost: Vec<f64> = (0..snap.link_count())
            .map(|_| rng.random_range(0.0..1.0))
            .collect();
        let arcs = link_arcs(&snap, &cost, |_| true);
        for src in [0, 7, 14] {
            let tree = shortest_path_tree(&snap, src, &cost, None);
            let dist = bellman_ford(15, &arcs, src);
            for v in 0..15 {
                match (&tree[v], dist[v]) {
                    (Some(route), Some(d)) => {
                        assert!((route.cost - d).abs() < 1e-9);
                        assert_eq!(route.nodes.first(), Some(&src));
                        assert_eq!(route.nodes.last(), Some(&v));
                        let along: f64 = route.links.iter().map(|&l| cost[l]).sum();
                        assert!((along - route.cost).abs() < 1e-9);
                    }
                    (None, None) => {}
                    other => panic!("reachability disagrees at {v}: {other:?}"),
                }
            }
        }
        let routes = route_flows(&snap, snap.flow_pairs(), &cost, None);
        for (f, r) in snap.flow_pairs().iter().zip(&routes) {
            let d = bellman_ford(15, &arcs, f.source)[f.dest];
            assert_eq!(r.is_some(), d.is_some());
            if let (Some(r), Some(d)) = (r, d) {
                assert!((r.cost - d).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn heuristic_matchers_follow_their_weight_rules() {
    let snaps = common::desk_snapshots(20, 10, 13);
    for snap in &snaps {
        let edges: Vec<(usize, usize)> = snap.lct_edges().iter().map(|e| (e.a, e.b)).collect();
        let rate: Vec<f64> = snap.lct_edges().iter().map(|e| e.capacity).collect();
        let mrate = match_mrate(snap);
        let expect = greedy_matching(snap.lcts().len(), &edges, &rate).unwrap();
        assert_eq!(mrate.edges, expect.edges);

        // Alignment weights recomputed from positions and mounts.
        let sats = snap.satellites();
        let lcts = snap.lcts();
        let align: Vec<f64> = snap
            .lct_edges()
            .iter()
            .map(|e| {
                let (ta, tb) = (&lcts[e.a], &lcts[e.b]);
                let d = sats[tb.sat_id].position - sats[ta.sat_id].position;
                let u = d * (1.0 / d.norm());
                u.dot(&ta.mount_direction) - u.dot(&tb.mount_direction)
            })
            .collect();
        for (a, b) in align.iter().zip(grid_weights(snap)) {
            assert!((a - b).abs() < 1e-12);
        }
        let grid = match_grid(snap);
        assert_eq!(
            grid.edges,
            greedy_matching(snap.lcts().len(), &edges, &align)
                .unwrap()
                .edges
        );
    }
}

/// Every simple path from `src` to `dst` as (cost, hops, nodes).
fn simple_paths(
    arcs: &[(usize, usize, f64)],
    src: usize,
    dst: usize,
) -> Vec<(f64, usize, Vec<usize>)> {
    fn go(
        arcs: &[(usize, usize, f64)],
        path: &mut Vec<usize>,
        cost: f64,
        dst: usize,
        out: &mut Vec<(f64, usize, Vec<usize>)>,
    ) {
        let u = *path.last().unwrap();
        if u == dst {
            out.push((cost, path.len() - 1, path.clone()));
            return;
        }
        for &(a, b, w) in arcs {
            if a == u && !path.contains(&b) {
                path.push(b);
                go(arcs, path, cost + w, dst, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(arcs, &mut vec![src], 0.0, dst, &mut out);
    out
}

#[test]
fn ties_break_on_hops_then_node_sequence() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..60 {
        let snap = random_instance(&mut rng, 7, 12, 4);
        // Costs on a coarse grid so that equal-cost paths are common.
        let cost: Vec<f64> = (0..snap.link_count())
            .map(|_| [0.0, 0.5, 1.0][rng.random_range(0..3)])
            .collect();
        let arcs = link_arcs(&snap, &cost, |_| true);
        let all: Vec<FlowPair> = (0..7)
            .flat_map(|s| (0..7).map(move |d| FlowPair { source: s, dest: d }))
            .collect();
        let routed = route_flows(&snap, &all, &cost, None);
        for src in 0..7 {
            let tree = shortest_path_tree(&snap, src, &cost, None);
            for dst in 0..7 {
                let mut paths = simple_paths(&arcs, src, dst);
                paths.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
                let flow = &routed[7 * src + dst];
                match (&tree[dst], flow, paths.first()) {
                    (Some(r), Some(f), Some(best)) => {
                        assert_eq!(r.nodes, best.2, "tree {src}->{dst}");
                        assert_eq!(f.nodes, best.2, "flow {src}->{dst}");
                        assert_eq!(f.cost, best.0);
                    }
                    (None, None, None) => {}
                    other => panic!("reachability disagrees {src}->{dst}: {other:?}"),
                }
            }
        }
    }
}
