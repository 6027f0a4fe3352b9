//! Bounded-length enumeration of node-simple directed cycles and paths on
//! the receivable multigraph.
//!
//! Cycles are reported once each, rotated to start at their smallest node,
//! in a deterministic order. Parallel arcs yield distinct cycles. A hard
//! output budget guards against exponential blow-up; hitting it is
//! reported through an explicit truncation flag, never silently.

use crate::graph::{ArcId, NodeId, RMultigraph};
use crate::money::Money;

/// Default ceiling on the number of enumerated cycles or paths.
pub const DEFAULT_ENUM_BUDGET: usize = 1_000_000;

/// A node-simple directed cycle: consecutive arcs chain head-to-tail and
/// the last head equals the first tail.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cycle {
    pub arcs: Vec<ArcId>,
    pub amount: Money,
}

/// A node-simple directed path with distinct endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    pub arcs: Vec<ArcId>,
    pub amount: Money,
}

struct LocalGraph {
    /// Spanned node ids, ascending; local index = position.
    nodes: Vec<NodeId>,
    /// Out-adjacency per local node: (local head, arc), ascending by arc id.
    out: Vec<Vec<(u32, ArcId)>>,
}

impl LocalGraph {
    fn build(graph: &RMultigraph, arcs: &[ArcId]) -> LocalGraph {
        let mut nodes: Vec<NodeId> = Vec::with_capacity(arcs.len());
        for &a in arcs {
            nodes.push(graph.tail(a));
            nodes.push(graph.head(a));
        }
        nodes.sort_unstable();
        nodes.dedup();
        let local = |u: NodeId| nodes.binary_search(&u).expect("spanned node") as u32;
        let mut out: Vec<Vec<(u32, ArcId)>> = vec![Vec::new(); nodes.len()];
        let mut sorted: Vec<ArcId> = arcs.to_vec();
        sorted.sort_unstable();
        for a in sorted {
            out[local(graph.tail(a)) as usize].push((local(graph.head(a)), a));
        }
        LocalGraph { nodes, out }
    }
}

/// All node-simple directed cycles of length `2..=max_len` in the subgraph
/// induced by `arcs`. Returns the cycles plus a flag telling whether the
/// output budget truncated the enumeration.
pub fn enumerate_cycles_of(
    graph: &RMultigraph,
    arcs: &[ArcId],
    max_len: usize,
    budget: usize,
) -> (Vec<Cycle>, bool) {
    assert!(max_len >= 2, "cycle length bound must be at least 2");
    let lg = LocalGraph::build(graph, arcs);
    let n = lg.nodes.len();
    let mut cycles = Vec::new();
    let mut truncated = false;

    let mut on_path = vec![false; n];
    // (local node, next out index) per depth.
    let mut stack: Vec<(u32, usize)> = Vec::new();
    let mut arc_path: Vec<ArcId> = Vec::new();

    'roots: for root in 0..n as u32 {
        stack.clear();
        arc_path.clear();
        stack.push((root, 0));
        on_path[root as usize] = true;
        while let Some((u, pos)) = stack.last_mut() {
            let u = *u;
            let adj = &lg.out[u as usize];
            if *pos >= adj.len() {
                on_path[u as usize] = false;
                stack.pop();
                arc_path.pop();
                continue;
            }
            let (h, a) = adj[*pos];
            *pos += 1;
            if h < root {
                continue;
            }
            if h == root {
                if cycles.len() == budget {
                    truncated = true;
                    break 'roots;
                }
                let mut cyc = arc_path.clone();
                cyc.push(a);
                let amount = cyc.iter().map(|&x| graph.amount(x)).sum();
                cycles.push(Cycle { arcs: cyc, amount });
                continue;
            }
            if !on_path[h as usize] && arc_path.len() + 1 < max_len {
                on_path[h as usize] = true;
                arc_path.push(a);
                stack.push((h, 0));
            }
        }
        on_path[root as usize] = false;
    }
    if truncated {
        for &(u, _) in &stack {
            on_path[u as usize] = false;
        }
    }
    cycles.sort_unstable_by(|a, b| a.arcs.cmp(&b.arcs));
    (cycles, truncated)
}

pub fn enumerate_cycles(graph: &RMultigraph, max_len: usize, budget: usize) -> (Vec<Cycle>, bool) {
    enumerate_cycles_of(graph, &graph.all_arcs(), max_len, budget)
}

/// All node-simple paths of length `1..=max_len` starting at a node of
/// `sources` and ending at a node of `targets` distinct from the start.
/// Walks may pass through other source or target nodes.
pub fn enumerate_paths_of(
    graph: &RMultigraph,
    arcs: &[ArcId],
    sources: &[NodeId],
    targets: &[NodeId],
    max_len: usize,
    budget: usize,
) -> (Vec<Path>, bool) {
    assert!(max_len >= 1, "path length bound must be at least 1");
    let lg = LocalGraph::build(graph, arcs);
    let n = lg.nodes.len();
    let mut is_target = vec![false; n];
    for t in targets {
        if let Ok(i) = lg.nodes.binary_search(t) {
            is_target[i] = true;
        }
    }
    let mut start_locals: Vec<u32> = sources
        .iter()
        .filter_map(|s| lg.nodes.binary_search(s).ok().map(|i| i as u32))
        .collect();
    start_locals.sort_unstable();
    start_locals.dedup();

    let mut paths = Vec::new();
    let mut truncated = false;
    let mut on_path = vec![false; n];
    let mut stack: Vec<(u32, usize)> = Vec::new();
    let mut arc_path: Vec<ArcId> = Vec::new();

    'starts: for &start in &start_locals {
        stack.clear();
        arc_path.clear();
        stack.push((start, 0));
        on_path[start as usize] = true;
        while let Some((u, pos)) = stack.last_mut() {
            let u = *u;
            let adj = &lg.out[u as usize];
            if *pos >= adj.len() {
                on_path[u as usize] = false;
                stack.pop();
                arc_path.pop();
                continue;
            }
            let (h, a) = adj[*pos];
            *pos += 1;
            if on_path[h as usize] {
                continue;
            }
            if is_target[h as usize] {
                if paths.len() == budget {
                    truncated = true;
                    break 'starts;
                }
                let mut p = arc_path.clone();
                p.push(a);
                let amount = p.iter().map(|&x| graph.amount(x)).sum();
                paths.push(Path { arcs: p, amount });
            }
            if arc_path.len() + 1 < max_len {
                on_path[h as usize] = true;
                arc_path.push(a);
                stack.push((h, 0));
            }
        }
        on_path[start as usize] = false;
    }
    if truncated {
        for &(u, _) in &stack {
            on_path[u as usize] = false;
        }
    }
    paths.sort_unstable_by(|a, b| a.arcs.cmp(&b.arcs));
    (paths, truncated)
}

pub fn enumerate_paths(
    graph: &RMultigraph,
    sources: &[NodeId],
    targets: &[NodeId],
    max_len: usize,
    budget: usize,
) -> (Vec<Path>, bool) {
    enumerate_paths_of(graph, &graph.all_arcs(), sources, targets, max_len, budget)
}

/// Nodes spanned by an arc list, ascending.
pub fn spanned_nodes(graph: &RMultigraph, arcs: &[ArcId]) -> Vec<NodeId> {
    let mut nodes: Vec<NodeId> = arcs
        .iter()
        .flat_map(|&a| [graph.tail(a), graph.head(a)])
        .collect();
    nodes.sort_unstable();
    nodes.dedup();
    nodes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::money::Cap;
    use crate::rng::Rng;
    use crate::testutil::{fig2_day1, small_graph};
    use std::collections::BTreeSet;

    /// Independent oracle: a subset of arcs forms one node-simple cycle iff
    /// every spanned node has in-degree and out-degree exactly 1 within the
    /// subset and the subset is (weakly) connected.
    fn oracle_cycles(g: &RMultigraph, max_len: usize) -> BTreeSet<Vec<ArcId>> {
        let arcs = g.all_arcs();
        let m = arcs.len();
        assert!(m <= 16, "oracle is exponential");
        let mut found = BTreeSet::new();
        'mask: for mask in 1u32..(1 << m) {
            let subset: Vec<ArcId> = (0..m)
                .filter(|&i| mask & (1 << i) != 0)
                .map(|i| arcs[i])
                .collect();
            if subset.len() > max_len {
                continue;
            }
            let mut next: std::collections::HashMap<NodeId, ArcId> = Default::default();
            let mut indeg: std::collections::HashMap<NodeId, u32> = Default::default();
            for &a in &subset {
                if next.insert(g.tail(a), a).is_some() {
                    continue 'mask;
                }
                *indeg.entry(g.head(a)).or_insert(0) += 1;
            }
            if indeg.values().any(|&d| d != 1) || indeg.len() != subset.len() {
                continue;
            }
            // Walk from the smallest node; must traverse every arc exactly
            // once and return to the start (rules out disjoint unions).
            let start = *next.keys().min().unwrap();
            let mut seq = Vec::new();
            let mut cur = start;
            for _ in 0..subset.len() {
                let Some(&a) = next.get(&cur) else {
                    continue 'mask;
                };
                seq.push(a);
                cur = g.head(a);
            }
            let mut walked = seq.clone();
            walked.sort_unstable();
            let mut expected = subset.clone();
            expected.sort_unstable();
            if cur != start || walked != expected {
                continue;
            }
            found.insert(seq);
        }
        found
    }

    /// Independent oracle for source-target simple paths.
    fn oracle_paths(
        g: &RMultigraph,
        sources: &[NodeId],
        targets: &[NodeId],
        max_len: usize,
    ) -> BTreeSet<Vec<ArcId>> {
        let arcs = g.all_arcs();
        let m = arcs.len();
        assert!(m <= 16);
        let mut found = BTreeSet::new();
        'mask: for mask in 1u32..(1 << m) {
            let subset: Vec<ArcId> = (0..m)
                .filter(|&i| mask & (1 << i) != 0)
                .map(|i| arcs[i])
                .collect();
            if subset.len() > max_len {
                continue;
            }
            let mut next: std::collections::HashMap<NodeId, ArcId> = Default::default();
            let mut indeg: std::collections::HashMap<NodeId, u32> = Default::default();
            for &a in &subset {
                if next.insert(g.tail(a), a).is_some() {
                    continue 'mask;
                }
                let d = indeg.entry(g.head(a)).or_insert(0);
                *d += 1;
                if *d > 1 {
                    continue 'mask;
                }
            }
            let starts: Vec<NodeId> = next
                .keys()
                .filter(|u| !indeg.contains_key(u))
                .copied()
                .collect();
            if starts.len() != 1 {
                continue;
            }
            let start = starts[0];
            if !sources.contains(&start) {
                continue;
            }
            let mut seq = Vec::new();
            let mut cur = start;
            while let Some(&a) = next.get(&cur) {
                seq.push(a);
                cur = g.head(a);
            }
            if seq.len() != subset.len() {
                continue; // disconnected leftovers
            }
            if cur == start || !targets.contains(&cur) {
                continue;
            }
            found.insert(seq);
        }
        found
    }

    #[test]
    fn parallel_arcs_make_distinct_two_cycles() {
        let g = small_graph(
            &[("u", 0, -10, Cap::Infinite), ("v", 0, -10, Cap::Infinite)],
            &[("a1", "u", "v", 5), ("a2", "u", "v", 7), ("b", "v", "u", 3)],
        );
        let (cycles, truncated) = enumerate_cycles(&g, 15, DEFAULT_ENUM_BUDGET);
        assert!(!truncated);
        assert_eq!(cycles.len(), 2);
        assert_eq!(cycles[0].amount, 8);
        assert_eq!(cycles[1].amount, 10);
    }

    #[test]
    fn length_bound_excludes_triangle() {
        let g = small_graph(
            &[
                ("u", 0, -10, Cap::Infinite),
                ("v", 0, -10, Cap::Infinite),
                ("w", 0, -10, Cap::Infinite),
            ],
            &[("a", "u", "v", 5), ("b", "v", "w", 5), ("c", "w", "u", 5)],
        );
        let (cycles, _) = enumerate_cycles(&g, 2, DEFAULT_ENUM_BUDGET);
        assert!(cycles.is_empty());
        let (cycles, _) = enumerate_cycles(&g, 3, DEFAULT_ENUM_BUDGET);
        assert_eq!(cycles.len(), 1);
    }

    #[test]
    fn fig2_day1_cycles_match_oracle_and_contain_known_rings() {
        let g = fig2_day1();
        let (cycles, truncated) = enumerate_cycles(&g, 15, DEFAULT_ENUM_BUDGET);
        assert!(!truncated);
        let got: BTreeSet<Vec<ArcId>> = cycles.iter().map(|c| c.arcs.clone()).collect();
        assert_eq!(got, oracle_cycles(&g, 15));
        // The four A->B->D->E->A combinations over the parallel arcs.
        let ring_count = cycles
            .iter()
            .filter(|c| {
                c.arcs.len() == 4
                    && c.arcs.iter().any(|&a| g.arc_ext_id(a) == "R-DE")
                    && c.arcs.iter().any(|&a| g.arc_ext_id(a) == "R-EA")
            })
            .count();
        assert_eq!(ring_count, 4);
        // The four A->B->D->A combinations.
        let tri_count = cycles
            .iter()
            .filter(|c| c.arcs.len() == 3 && c.arcs.iter().any(|&a| g.arc_ext_id(a) == "R-DA"))
            .count();
        assert_eq!(tri_count, 4);
    }

    #[test]
    fn budget_truncates_with_flag() {
        let g = fig2_day1();
        let (cycles, truncated) = enumerate_cycles(&g, 15, 3);
        assert!(truncated);
        assert_eq!(cycles.len(), 3);
    }

    #[test]
    fn fig2_paths_from_e_to_b() {
        let g = fig2_day1();
        let e = g.node_id_of("E").unwrap();
        let b = g.node_id_of("B").unwrap();
        let (paths, _) = enumerate_paths(&g, &[e], &[b], 15, DEFAULT_ENUM_BUDGET);
        let dashed: Vec<ArcId> = ["R-EC", "R-CB"]
            .iter()
            .map(|id| g.arc_id_of(id).unwrap())
            .collect();
        assert!(paths.iter().any(|p| p.arcs == dashed));
        let oracle = oracle_paths(&g, &[e], &[b], 15);
        let got: BTreeSet<Vec<ArcId>> = paths.iter().map(|p| p.arcs.clone()).collect();
        assert_eq!(got, oracle);
    }

    #[test]
    fn path_endpoints_must_differ() {
        let g = small_graph(
            &[
                ("u", 0, -10, Cap::Infinite),
                ("v", 0, -10, Cap::Infinite),
                ("w", 0, -10, Cap::Infinite),
            ],
            &[("a", "u", "v", 5), ("b", "v", "w", 5), ("c", "w", "u", 5)],
        );
        let u = g.node_id_of("u").unwrap();
        let (paths, _) = enumerate_paths(&g, &[u], &[u], 15, DEFAULT_ENUM_BUDGET);
        assert!(paths.is_empty());
    }

    #[test]
    fn disconnected_source_target_gives_nothing() {
        let g = small_graph(
            &[
                ("u", 0, -10, Cap::Infinite),
                ("v", 0, -10, Cap::Infinite),
                ("x", 0, -10, Cap::Infinite),
                ("y", 0, -10, Cap::Infinite),
            ],
            &[("a", "u", "v", 5), ("c", "x", "y", 5)],
        );
        let u = g.node_id_of("u").unwrap();
        let y = g.node_id_of("y").unwrap();
        let (paths, _) = enumerate_paths(&g, &[u], &[y], 15, DEFAULT_ENUM_BUDGET);
        assert!(paths.is_empty());
    }

    fn random_multigraph(rng: &mut Rng, max_nodes: usize, max_arcs: usize) -> RMultigraph {
        let n = rng.range_i64(2, max_nodes as i64) as usize;
        let m = rng.range_i64(1, max_arcs as i64) as usize;
        let names: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
        let accounts: Vec<(&str, i64, i64, Cap)> = names
            .iter()
            .map(|s| (s.as_str(), 0i64, -1000i64, Cap::Infinite))
            .collect();
        let mut arcs = Vec::new();
        let arc_names: Vec<String> = (0..m).map(|i| format!("a{i}")).collect();
        for name in arc_names.iter() {
            let t = rng.below(n as u64) as usize;
            let mut h = rng.below(n as u64) as usize;
            while h == t {
                h = rng.below(n as u64) as usize;
            }
            let w = rng.range_i64(1, 50);
            arcs.push((name.as_str(), names[t].as_str(), names[h].as_str(), w));
        }
        small_graph(&accounts, &arcs)
    }

    #[test]
    fn random_graphs_match_brute_force_enumeration() {
        let mut rng = Rng::new(0xC1C1E5);
        for round in 0..60 {
            let g = random_multigraph(&mut rng, 8, 14);
            let max_len = rng.range_i64(2, 8) as usize;
            let (cycles, truncated) = enumerate_cycles(&g, max_len, DEFAULT_ENUM_BUDGET);
            assert!(!truncated);
            let got: BTreeSet<Vec<ArcId>> = cycles.iter().map(|c| c.arcs.clone()).collect();
            assert_eq!(got.len(), cycles.len(), "duplicate cycles in round {round}");
            assert_eq!(got, oracle_cycles(&g, max_len), "round {round}");
            for c in &cycles {
                assert!(c.arcs.len() <= max_len);
                // Chains head-to-tail and closes.
                for w in c.arcs.windows(2) {
                    assert_eq!(g.head(w[0]), g.tail(w[1]));
                }
                assert_eq!(g.head(*c.arcs.last().unwrap()), g.tail(c.arcs[0]));
                // Starts at its smallest node.
                let min_node = c.arcs.iter().map(|&a| g.tail(a)).min().unwrap();
                assert_eq!(g.tail(c.arcs[0]), min_node);
            }

            // Paths between two random node sets.
            let nodes: Vec<NodeId> = g.node_ids().collect();
            let pick = |rng: &mut Rng| {
                let k = rng.range_i64(1, 3) as usize;
                (0..k)
                    .map(|_| nodes[rng.below(nodes.len() as u64) as usize])
                    .collect::<Vec<_>>()
            };
            let (sources, targets) = (pick(&mut rng), pick(&mut rng));
            let (paths, truncated) =
                enumerate_paths(&g, &sources, &targets, max_len, DEFAULT_ENUM_BUDGET);
            assert!(!truncated);
            let got: BTreeSet<Vec<ArcId>> = paths.iter().map(|p| p.arcs.clone()).collect();
            assert_eq!(got.len(), paths.len());
            assert_eq!(
                got,
                oracle_paths(&g, &sources, &targets, max_len),
                "paths round {round}"
            );
        }
    }
}
