//! Single-path minimum-cost routing over directed satellite links.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::{ConstellationSnapshot, FlowPair};

/// A path from source to destination with its summed link cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub nodes: Vec<usize>,
    /// Directed link ids along the path.
    pub links: Vec<usize>,
    pub cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapKey {
    cost: f64,
    hops: usize,
    node: usize,
}

impl Eq for HeapKey {}

impl Ord for HeapKey {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed for a min-heap.
        other
            .cost
            .total_cmp(&self.cost)
            .then(other.hops.cmp(&self.hops))
            .then(other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Label {
    cost: f64,
    hops: usize,
    /// Previous node and the link used to reach this one.
    parent: Option<(usize, usize)>,
}

fn node_path(best: &[Option<Label>], mut node: usize) -> Vec<usize> {
    let mut path = vec![node];
    while let Some((prev, _)) = best[node].as_ref().and_then(|l| l.parent) {
        path.push(prev);
        node = prev;
    }
    path.reverse();
    path
}

/// Whether the path to `a` sorts before the path to `b`, both with the same
/// hop count.
fn lexicographically_before(best: &[Option<Label>], mut a: usize, mut b: usize) -> bool {
    let parent = |v: usize| best[v].as_ref().and_then(|l| l.parent).map(|(p, _)| p);
    if a == b {
        return false;
    }
    while parent(a) != parent(b) {
        match (parent(a), parent(b)) {
            (Some(pa), Some(pb)) => {
                a = pa;
                b = pb;
            }
            _ => break,
        }
    }
    a < b
}

/// Shortest-path tree from `source` under non-negative `link_cost`, ordered by
/// (cost, hop count, lexicographic node sequence). Links with `usable[l] == false`
/// are ignored.
pub fn shortest_path_tree(
    snap: &ConstellationSnapshot,
    source: usize,
    link_cost: &[f64],
    usable: Option<&[bool]>,
) -> Vec<Option<Route>> {
    let best = grow_tree(snap, source, link_cost, usable, None);
    (0..best.len()).map(|v| route_to(&best, v)).collect()
}

fn route_to(best: &[Option<Label>], v: usize) -> Option<Route> {
    let label = best[v].as_ref()?;
    let nodes = node_path(best, v);
    let mut links = Vec::with_capacity(nodes.len().saturating_sub(1));
    let mut at = v;
    while let Some((prev, link)) = best[at].as_ref().and_then(|l| l.parent) {
        links.push(link);
        at = prev;
    }
    links.reverse();
    Some(Route {
        nodes,
        links,
        cost: label.cost,
    })
}

/// Grows the tree until every node in `targets` is settled, or fully when
/// `targets` is `None`.
fn grow_tree(
    snap: &ConstellationSnapshot,
    source: usize,
    link_cost: &[f64],
    usable: Option<&[bool]>,
    targets: Option<&[usize]>,
) -> Vec<Option<Label>> {
    let n = snap.satellite_count();
    let mut wanted = vec![targets.is_none(); n];
    let mut remaining = n;
    if let Some(t) = targets {
        for &v in t {
            wanted[v] = true;
        }
        remaining = wanted.iter().filter(|&&w| w).count();
    }
    let mut best: Vec<Option<Label>> = (0..n).map(|_| None).collect();
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    best[source] = Some(Label {
        cost: 0.0,
        hops: 0,
        parent: None,
    });
    heap.push(HeapKey {
        cost: 0.0,
        hops: 0,
        node: source,
    });
    while let Some(HeapKey { cost, hops, node }) = heap.pop() {
        if settled[node] {
            continue;
        }
        {
            let l = best[node].as_ref().unwrap();
            if l.cost != cost || l.hops != hops {
                continue;
            }
        }
        settled[node] = true;
        if wanted[node] {
            remaining -= 1;
            if remaining == 0 {
                break;
            }
        }
        for &link in snap.out_links(node) {
            if usable.is_some_and(|u| !u[link]) {
                continue;
            }
            let (_, head) = snap.link(link);
            if settled[head] {
                continue;
            }
            let c = cost + link_cost[link];
            let h = hops + 1;
            let better = match &best[head] {
                None => true,
                Some(old) => match c.total_cmp(&old.cost).then(h.cmp(&old.hops)) {
                    Ordering::Less => true,
                    Ordering::Greater => false,
                    Ordering::Equal => match old.parent {
                        Some((prev, _)) => lexicographically_before(&best, node, prev),
                        None => false,
                    },
                },
            };
            if better {
                let push = best[head]
                    .as_ref()
                    .is_none_or(|old| old.cost != c || old.hops != h);
                best[head] = Some(Label {
                    cost: c,
                    hops: h,
                    parent: Some((node, link)),
                });
                if push {
                    heap.push(HeapKey {
                        cost: c,
                        hops: h,
                        node: head,
                    });
                }
            }
        }
    }
    best
}

/// Routes every flow independently; `None` marks an unreachable destination.
/// One tree is grown per distinct source, in parallel.
pub fn route_flows(
    snap: &ConstellationSnapshot,
    flows: &[FlowPair],
    link_cost: &[f64],
    usable: Option<&[bool]>,
) -> Vec<Option<Route>> {
    let mut pairs: Vec<(usize, usize)> = flows.iter().map(|f| (f.source, f.dest)).collect();
    pairs.sort_unstable();
    pairs.dedup();
    let groups: Vec<(usize, Vec<usize>)> = pairs
        .chunk_by(|a, b| a.0 == b.0)
        .map(|g| (g[0].0, g.iter().map(|p| p.1).collect()))
        .collect();
    let trees: Vec<(usize, Vec<Option<Label>>)> = groups
        .par_iter()
        .map(|(s, dests)| (*s, grow_tree(snap, *s, link_cost, usable, Some(dests))))
        .collect();
    flows
        .iter()
        .map(|f| {
            let idx = trees.binary_search_by_key(&f.source, |t| t.0).unwrap();
            route_to(&trees[idx].1, f.dest)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit::pair_snapshot as snapshot_with_pairs;

    fn cost_of(snap: &ConstellationSnapshot, f: impl Fn(usize, usize) -> f64) -> Vec<f64> {
        (0..snap.link_count())
            .map(|l| {
                let (a, b) = snap.link(l);
                f(a, b)
            })
            .collect()
    }

    #[test]
    fn direct_link_beats_costlier_detour() {
        let snap = snapshot_with_pairs(3, &[(0, 2), (0, 1), (1, 2)]);
        let cost = cost_of(&snap, |a, b| if (a, b) == (0, 2) { 0.1 } else { 0.15 });
        let r = route_flows(&snap, &[FlowPair { source: 0, dest: 2 }], &cost, None);
        let r = r[0].as_ref().unwrap();
        assert_eq!(r.nodes, vec![0, 2]);
        assert!((r.cost - 0.1).abs() < 1e-15);
    }

    #[test]
    fn unreachable_destination_is_flagged() {
        let snap = snapshot_with_pairs(4, &[(0, 1), (2, 3)]);
        let cost = vec![0.0; snap.link_count()];
        let r = route_flows(&snap, &[FlowPair { source: 0, dest: 3 }], &cost, None);
        assert!(r[0].is_none());
    }

    #[test]
    fn zero_costs_pick_fewest_hops_then_lexicographic() {
        // Two 2-hop paths 0-1-3 and 0-2-3, one 3-hop 0-4-5-3.
        let snap =
            snapshot_with_pairs(6, &[(0, 2), (2, 3), (0, 1), (1, 3), (0, 4), (4, 5), (5, 3)]);
        let cost = vec![0.0; snap.link_count()];
        let r = route_flows(&snap, &[FlowPair { source: 0, dest: 3 }], &cost, None);
        assert_eq!(r[0].as_ref().unwrap().nodes, vec![0, 1, 3]);
    }

    #[test]
    fn unusable_links_are_skipped() {
        let snap = snapshot_with_pairs(3, &[(0, 2), (0, 1), (1, 2)]);
        let cost = vec![0.0; snap.link_count()];
        let mut usable = vec![true; snap.link_count()];
        usable[snap.link_id(0, 2).unwrap()] = false;
        let r = route_flows(
            &snap,
            &[FlowPair { source: 0, dest: 2 }],
            &cost,
            Some(&usable),
        );
        assert_eq!(r[0].as_ref().unwrap().nodes, vec![0, 1, 2]);
        assert_eq!(
            r[0].as_ref().unwrap().links,
            vec![snap.link_id(0, 1).unwrap(), snap.link_id(1, 2).unwrap()]
        );
    }
}
