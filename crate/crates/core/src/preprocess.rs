//! Safe filtering before solving: iterative removal of nodes that cannot
//! appear in any feasible settlement, and weakly-connected-component
//! splitting. Every feasible settlement of the input graph survives
//! preprocessing untouched.

use crate::graph::{ArcId, NodeId, RMultigraph};
use crate::money::Money;

/// Arc sets, each inducing one weakly connected subgraph. Components
/// partition the surviving arcs and are ordered by their smallest node id.
#[derive(Clone, Debug, Default)]
pub struct ComponentSplit {
    pub components: Vec<Vec<ArcId>>,
}

/// Maximal subset of `arcs` in which every spanned node has at least one
/// incoming and one outgoing arc, computed by peeling nodes with in- or
/// out-degree zero to a fixpoint. Order-independent.
pub fn d_core_11_of(graph: &RMultigraph, arcs: &[ArcId]) -> Vec<ArcId> {
    let n = graph.node_count();
    let mut indeg = vec![0u32; n];
    let mut outdeg = vec![0u32; n];
    let mut alive = vec![false; graph.arc_count()];
    for &a in arcs {
        alive[a.idx()] = true;
        outdeg[graph.tail(a).idx()] += 1;
        indeg[graph.head(a).idx()] += 1;
    }
    let mut dead_node = vec![false; n];
    let mut queue: Vec<NodeId> = Vec::new();
    for &a in arcs {
        for u in [graph.tail(a), graph.head(a)] {
            if !dead_node[u.idx()] && (indeg[u.idx()] == 0 || outdeg[u.idx()] == 0) {
                dead_node[u.idx()] = true;
                queue.push(u);
            }
        }
    }
    while let Some(u) = queue.pop() {
        for &a in graph.out_arcs(u).iter().chain(graph.in_arcs(u)) {
            if !alive[a.idx()] {
                continue;
            }
            alive[a.idx()] = false;
            outdeg[graph.tail(a).idx()] -= 1;
            indeg[graph.head(a).idx()] -= 1;
            for v in [graph.tail(a), graph.head(a)] {
                if !dead_node[v.idx()] && (indeg[v.idx()] == 0 || outdeg[v.idx()] == 0) {
                    dead_node[v.idx()] = true;
                    queue.push(v);
                }
            }
        }
    }
    let mut kept: Vec<ArcId> = arcs.iter().copied().filter(|a| alive[a.idx()]).collect();
    kept.sort_unstable();
    kept
}

/// Core extraction over the whole graph.
pub fn d_core_11(graph: &RMultigraph) -> Vec<ArcId> {
    d_core_11_of(graph, &graph.all_arcs())
}

/// Nodes that provably appear in no feasible settlement of the subgraph
/// induced by `arcs`, judged from the attainable net-flow range of each
/// spanned node: `[min_in - sum_out, sum_in - min_out]`. A node whose whole
/// range misses its balance interval can never be spanned.
///
/// Expects every spanned node to have both an incoming and an outgoing arc
/// (run after [`d_core_11_of`]).
pub fn balance_bound_filter(graph: &RMultigraph, arcs: &[ArcId]) -> Vec<NodeId> {
    let n = graph.node_count();
    let mut min_in = vec![Money::MAX; n];
    let mut min_out = vec![Money::MAX; n];
    let mut sum_in = vec![0 as Money; n];
    let mut sum_out = vec![0 as Money; n];
    let mut spanned = vec![false; n];
    for &a in arcs {
        let w = graph.amount(a);
        let t = graph.tail(a).idx();
        let h = graph.head(a).idx();
        spanned[t] = true;
        spanned[h] = true;
        sum_out[t] += w;
        min_out[t] = min_out[t].min(w);
        sum_in[h] += w;
        min_in[h] = min_in[h].min(w);
    }
    let mut removed = Vec::new();
    for i in 0..n {
        if !spanned[i] {
            continue;
        }
        let u = NodeId(i as u32);
        debug_assert!(
            min_in[i] != Money::MAX && min_out[i] != Money::MAX,
            "balance_bound_filter expects a (1,1)-core"
        );
        let attainable_max = sum_in[i] - min_out[i];
        let attainable_min = min_in[i] - sum_out[i];
        // Strict comparisons: at equality the boundary value itself is
        // attainable and feasible, so the node must be kept.
        let dead_low = attainable_max < graph.floor_margin(u);
        let dead_high = match graph.cap_margin(u).finite() {
            Some(hi) => attainable_min > hi,
            None => false,
        };
        if dead_low || dead_high {
            removed.push(u);
        }
    }
    removed
}

/// Joint fixpoint of core peeling and balance-bound filtering: the arc set
/// all solvers actually run on.
pub fn preprocess(graph: &RMultigraph) -> Vec<ArcId> {
    preprocess_arcs(graph, &graph.all_arcs())
}

pub fn preprocess_arcs(graph: &RMultigraph, arcs: &[ArcId]) -> Vec<ArcId> {
    let mut current = d_core_11_of(graph, arcs);
    loop {
        let doomed = balance_bound_filter(graph, &current);
        if doomed.is_empty() {
            return current;
        }
        let mut dead = vec![false; graph.node_count()];
        for u in doomed {
            dead[u.idx()] = true;
        }
        current.retain(|&a| !dead[graph.tail(a).idx()] && !dead[graph.head(a).idx()]);
        current = d_core_11_of(graph, &current);
    }
}

/// Partition of `arcs` by undirected reachability.
pub fn split_components_of(graph: &RMultigraph, arcs: &[ArcId]) -> ComponentSplit {
    let n = graph.node_count();
    let mut parent: Vec<u32> = (0..n as u32).collect();
    fn find(parent: &mut [u32], mut x: u32) -> u32 {
        while parent[x as usize] != x {
            parent[x as usize] = parent[parent[x as usize] as usize];
            x = parent[x as usize];
        }
        x
    }
    for &a in arcs {
        let r1 = find(&mut parent, graph.tail(a).0);
        let r2 = find(&mut parent, graph.head(a).0);
        if r1 != r2 {
            parent[r1.max(r2) as usize] = r1.min(r2);
        }
    }
    let mut by_root: std::collections::BTreeMap<u32, Vec<ArcId>> =
        std::collections::BTreeMap::new();
    for &a in arcs {
        let root = find(&mut parent, graph.tail(a).0);
        by_root.entry(root).or_default().push(a);
    }
    let mut components: Vec<Vec<ArcId>> = by_root.into_values().collect();
    for c in &mut components {
        c.sort_unstable();
    }
    ComponentSplit { components }
}

pub fn split_components(graph: &RMultigraph) -> ComponentSplit {
    split_components_of(graph, &graph.all_arcs())
}
