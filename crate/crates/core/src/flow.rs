//! Flow relaxation of the settlement problem.
//!
//! Parallel receivable arcs are collapsed into per-node-pair bundles; two
//! dummy nodes absorb the floor/cap margins as capacities; receivable
//! bundles carry cost -1 per unit. The optimal circulation cost, negated,
//! upper-bounds every feasible settlement, and forcing or removing arcs
//! turns the same construction into the branch-and-bound bound.
//!
//! The circulation solver reduces lower bounds and negative costs to
//! imbalances, then routes them with successive shortest paths under node
//! potentials. It is exact on integer data; [`certify_optimal`] checks any
//! result against the no-negative-residual-cycle certificate.

use std::collections::BTreeMap;

use crate::graph::{ArcId, NodeId, RMultigraph};
use crate::money::{Cap, Money};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowArcKind {
    /// Collapsed receivable bundle between two real nodes.
    Bundle,
    /// Dummy arc from the source dummy into a real node (floor margin).
    SourceDummy,
    /// Dummy arc from a real node into the sink dummy (cap margin).
    SinkDummy,
    /// Closing arc from the sink dummy back to the source dummy.
    Return,
}

#[derive(Clone, Debug)]
pub struct FlowArc {
    pub tail: usize,
    pub head: usize,
    /// Cost per unit of flow.
    pub cost: i64,
    pub lower: Money,
    pub upper: Cap,
    pub kind: FlowArcKind,
}

/// A min-cost circulation instance. `source_dummy`/`sink_dummy` are the two
/// synthetic nodes; all supplies are zero.
#[derive(Clone, Debug)]
pub struct FlowNetwork {
    pub node_count: usize,
    pub source_dummy: usize,
    pub sink_dummy: usize,
    pub arcs: Vec<FlowArc>,
    pub supplies: Vec<Money>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowStatus {
    Optimal,
    Infeasible,
}

#[derive(Clone, Debug)]
pub struct FlowResult {
    pub status: FlowStatus,
    /// Flow per network arc, aligned with [`FlowNetwork::arcs`].
    pub flow: Vec<Money>,
    pub cost: i64,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum FlowError {
    #[error("account {id}: corrupt state (balance below floor or above cap)")]
    CorruptAccount { id: String },
    #[error("removed and forced arc sets overlap")]
    OverlappingSets,
    #[error("arc set contains an id outside the graph")]
    UnknownArc,
}

/// Builds the flow relaxation of the whole graph with `removed` arcs
/// deleted and `forced` arcs pinned to full flow (as bundle lower bounds).
pub fn build_rflow_graph(
    graph: &RMultigraph,
    removed: &[ArcId],
    forced: &[ArcId],
) -> Result<FlowNetwork, FlowError> {
    for u in graph.node_ids() {
        let a = graph.account(u);
        if a.bl_a < a.floor || !a.cap.admits(a.bl_r) {
            return Err(FlowError::CorruptAccount { id: a.id.clone() });
        }
    }
    let in_range = |s: &[ArcId]| s.iter().all(|a| a.idx() < graph.arc_count());
    if !in_range(removed) || !in_range(forced) {
        return Err(FlowError::UnknownArc);
    }
    let mut is_removed = vec![false; graph.arc_count()];
    for &a in removed {
        is_removed[a.idx()] = true;
    }
    let mut is_forced = vec![false; graph.arc_count()];
    for &a in forced {
        if is_removed[a.idx()] {
            return Err(FlowError::OverlappingSets);
        }
        is_forced[a.idx()] = true;
    }
    let active: Vec<ArcId> = graph.arc_ids().filter(|a| !is_removed[a.idx()]).collect();
    Ok(build_network(graph, &active, &is_forced))
}

/// Network over exactly the nodes spanned by `arcs` (plus the two dummies).
/// Floor margins are clamped at zero so graphs with internally raised
/// floors (`floor > bl_a`) still yield a valid, weaker relaxation.
pub(crate) fn build_network(
    graph: &RMultigraph,
    arcs: &[ArcId],
    is_forced: &[bool],
) -> FlowNetwork {
    let mut bundles: BTreeMap<(NodeId, NodeId), (Money, Money)> = BTreeMap::new();
    for &a in arcs {
        let entry = bundles
            .entry((graph.tail(a), graph.head(a)))
            .or_insert((0, 0));
        entry.0 += graph.amount(a);
        if is_forced[a.idx()] {
            entry.1 += graph.amount(a);
        }
    }
    let mut spanned: Vec<NodeId> = bundles.keys().flat_map(|&(t, h)| [t, h]).collect();
    spanned.sort_unstable();
    spanned.dedup();
    let local = |u: NodeId| spanned.binary_search(&u).expect("spanned");

    let n = spanned.len();
    let source_dummy = n;
    let sink_dummy = n + 1;
    let mut net_arcs = Vec::with_capacity(bundles.len() + 2 * n + 1);
    for (&(t, h), &(upper, lower)) in &bundles {
        net_arcs.push(FlowArc {
            tail: local(t),
            head: local(h),
            cost: -1,
            lower,
            upper: Cap::Finite(upper),
            kind: FlowArcKind::Bundle,
        });
    }
    for &u in &spanned {
        net_arcs.push(FlowArc {
            tail: source_dummy,
            head: local(u),
            cost: 0,
            lower: 0,
            upper: Cap::Finite((-graph.floor_margin(u)).max(0)),
            kind: FlowArcKind::SourceDummy,
        });
        net_arcs.push(FlowArc {
            tail: local(u),
            head: sink_dummy,
            cost: 0,
            lower: 0,
            upper: graph.cap_margin(u),
            kind: FlowArcKind::SinkDummy,
        });
    }
    net_arcs.push(FlowArc {
        tail: sink_dummy,
        head: source_dummy,
        cost: 0,
        lower: 0,
        upper: Cap::Infinite,
        kind: FlowArcKind::Return,
    });
    FlowNetwork {
        node_count: n + 2,
        source_dummy,
        sink_dummy,
        arcs: net_arcs,
        supplies: vec![0; n + 2],
    }
}

struct ResArc {
    to: u32,
    rev: u32,
    cap: Money,
    cost: i64,
}

struct Residual {
    heads: Vec<Vec<u32>>,
    arcs: Vec<ResArc>,
}

impl Residual {
    fn new(n: usize) -> Residual {
        Residual {
            heads: vec![Vec::new(); n],
            arcs: Vec::new(),
        }
    }

    fn add(&mut self, from: usize, to: usize, cap: Money, cost: i64) -> usize {
        let fwd = self.arcs.len();
        self.arcs.push(ResArc {
            to: to as u32,
            rev: (fwd + 1) as u32,
            cap,
            cost,
        });
        self.arcs.push(ResArc {
            to: from as u32,
            rev: fwd as u32,
            cap: 0,
            cost: -cost,
        });
        self.heads[from].push(fwd as u32);
        self.heads[to].push((fwd + 1) as u32);
        fwd
    }
}

/// Exact minimum-cost circulation respecting per-arc bounds, or
/// `Infeasible` when the lower bounds admit no circulation.
pub fn min_cost_flow(net: &FlowNetwork) -> FlowResult {
    let n = net.node_count;
    // Substitute a provably non-binding finite bound for infinite uppers:
    // no arc can carry more than all finite bundle and source-dummy
    // capacity plus all lower bounds combined.
    let mut inf_bound: Money = 1;
    for a in &net.arcs {
        match a.upper {
            Cap::Finite(u) => inf_bound += u.max(0),
            Cap::Infinite => inf_bound += a.lower.max(0),
        }
    }

    let super_source = n;
    let super_sink = n + 1;
    let mut res = Residual::new(n + 2);
    let mut excess: Vec<Money> = net.supplies.clone();
    excess.resize(n + 2, 0);

    // Base flow = lower bound plus full saturation of negative-cost arcs;
    // the residual then has only nonnegative costs.
    let mut base = vec![0 as Money; net.arcs.len()];
    let mut fwd_idx = vec![0usize; net.arcs.len()];
    for (i, a) in net.arcs.iter().enumerate() {
        let upper = a.upper.finite().unwrap_or(inf_bound);
        if a.lower > upper {
            return FlowResult {
                status: FlowStatus::Infeasible,
                flow: vec![0; net.arcs.len()],
                cost: 0,
            };
        }
        let headroom = upper - a.lower;
        let sat = if a.cost < 0 { headroom } else { 0 };
        base[i] = a.lower + sat;
        excess[a.tail] -= base[i];
        excess[a.head] += base[i];
        // Forward residual can raise flow up to the upper bound; reverse
        // residual can lower it back down to the lower bound.
        let fwd = res.add(a.tail, a.head, headroom - sat, a.cost);
        fwd_idx[i] = fwd;
        res.arcs[fwd + 1].cap = sat;
    }
    let mut required: Money = 0;
    let node_excess: Vec<Money> = excess[..n].to_vec();
    for (v, &e) in node_excess.iter().enumerate() {
        if e > 0 {
            res.add(super_source, v, e, 0);
            required += e;
        } else if e < 0 {
            res.add(v, super_sink, -e, 0);
        }
    }

    // Successive shortest paths with potentials; every residual cost is
    // nonnegative from the start, so Dijkstra applies throughout.
    let mut potential = vec![0i64; n + 2];
    let mut routed: Money = 0;
    while routed < required {
        let (dist, parent) = dijkstra(&res, super_source, &potential);
        let Some(d_sink) = dist[super_sink] else {
            return FlowResult {
                status: FlowStatus::Infeasible,
                flow: vec![0; net.arcs.len()],
                cost: 0,
            };
        };
        // Walk the path, find the bottleneck, apply.
        let mut bottleneck = Money::MAX;
        let mut v = super_sink;
        while v != super_source {
            let e = parent[v].expect("path");
            bottleneck = bottleneck.min(res.arcs[e].cap);
            v = res.arcs[res.arcs[e].rev as usize].to as usize;
        }
        let mut v = super_sink;
        while v != super_source {
            let e = parent[v].expect("path");
            res.arcs[e].cap -= bottleneck;
            let rev = res.arcs[e].rev as usize;
            res.arcs[rev].cap += bottleneck;
            v = res.arcs[rev].to as usize;
        }
        routed += bottleneck;
        for v in 0..n + 2 {
            potential[v] += dist[v].unwrap_or(d_sink).min(d_sink);
        }
    }

    // Flow above the lower bound equals the reverse residual capacity,
    // minus the part that encodes saturation headroom already in `base`.
    let mut flow = vec![0 as Money; net.arcs.len()];
    let mut cost: i64 = 0;
    for (i, a) in net.arcs.iter().enumerate() {
        let rev_cap = res.arcs[fwd_idx[i] + 1].cap;
        flow[i] = a.lower + rev_cap;
        cost += a.cost * flow[i];
    }
    FlowResult {
        status: FlowStatus::Optimal,
        flow,
        cost,
    }
}

fn dijkstra(
    res: &Residual,
    start: usize,
    potential: &[i64],
) -> (Vec<Option<i64>>, Vec<Option<usize>>) {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;
    let n = res.heads.len();
    let mut dist: Vec<Option<i64>> = vec![None; n];
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[start] = Some(0);
    heap.push(Reverse((0i64, start)));
    while let Some(Reverse((d, u))) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for &ei in &res.heads[u] {
            let arc = &res.arcs[ei as usize];
            if arc.cap <= 0 {
                continue;
            }
            let v = arc.to as usize;
            let rc = arc.cost + potential[u] - potential[v];
            debug_assert!(rc >= 0, "negative reduced cost");
            let nd = d + rc;
            if dist[v].is_none_or(|old| nd < old) {
                dist[v] = Some(nd);
                parent[v] = Some(ei as usize);
                heap.push(Reverse((nd, v)));
            }
        }
    }
    (dist, parent)
}

/// Verifies the optimality certificate of a flow result: bounds respected,
/// conservation exact at every node, and no negative-cost cycle in the
/// residual graph. Independent of the solver's internals.
pub fn certify_optimal(net: &FlowNetwork, result: &FlowResult) -> Result<(), String> {
    if result.status != FlowStatus::Optimal {
        return Err("result is not optimal".into());
    }
    let mut inf_bound: Money = 1;
    for a in &net.arcs {
        match a.upper {
            Cap::Finite(u) => inf_bound += u.max(0),
            Cap::Infinite => inf_bound += a.lower.max(0),
        }
    }
    let mut net_in = vec![0 as Money; net.node_count];
    for (i, a) in net.arcs.iter().enumerate() {
        let f = result.flow[i];
        if f < a.lower || !a.upper.admits(f) {
            return Err(format!("arc {i} flow {f} outside bounds"));
        }
        net_in[a.head] += f;
        net_in[a.tail] -= f;
    }
    for (v, &b) in net.supplies.iter().enumerate() {
        if net_in[v] != b {
            return Err(format!("conservation violated at node {v}"));
        }
    }
    // Residual arcs: forward where flow can rise, backward where it can fall.
    let mut res_arcs: Vec<(usize, usize, i64)> = Vec::new();
    for (i, a) in net.arcs.iter().enumerate() {
        let f = result.flow[i];
        let upper = a.upper.finite().unwrap_or(inf_bound);
        if f < upper {
            res_arcs.push((a.tail, a.head, a.cost));
        }
        if f > a.lower {
            res_arcs.push((a.head, a.tail, -a.cost));
        }
    }
    // Bellman-Ford from a virtual origin connected to every node.
    let n = net.node_count;
    let mut dist = vec![0i64; n];
    for round in 0..n {
        let mut changed = false;
        for &(u, v, c) in &res_arcs {
            if dist[u] + c < dist[v] {
                dist[v] = dist[u] + c;
                changed = true;
            }
        }
        if !changed {
            return Ok(());
        }
        if round == n - 1 {
            return Err("negative-cost residual cycle".into());
        }
    }
    Ok(())
}

/// Upper bound on any feasible settlement of the subgraph induced by
/// `arcs` (already excluding branch-excluded arcs), with `is_forced`
/// marking arcs pinned to full flow. `None` means the forced set admits no
/// relaxed solution at all and the caller can prune.
pub(crate) fn upper_bound_on(
    graph: &RMultigraph,
    arcs: &[ArcId],
    is_forced: &[bool],
) -> Option<Money> {
    let net = build_network(graph, arcs, is_forced);
    let result = min_cost_flow(&net);
    match result.status {
        FlowStatus::Optimal => Some(-result.cost),
        FlowStatus::Infeasible => None,
    }
}

/// Spec-level entry point over the whole graph: value of the relaxation
/// with `removed` deleted and `forced` pinned, or `None` when infeasible.
pub fn settlement_upper_bound(
    graph: &RMultigraph,
    removed: &[ArcId],
    forced: &[ArcId],
) -> Result<Option<Money>, FlowError> {
    let net = build_rflow_graph(graph, removed, forced)?;
    let result = min_cost_flow(&net);
    Ok(match result.status {
        FlowStatus::Optimal => Some(-result.cost),
        FlowStatus::Infeasible => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::money::Cap;
    use crate::testutil::{fig2_day1, small_graph};

    #[test]
    fn no_arcs_gives_zero_bound() {
        let g = small_graph(&[("u", 0, 0, Cap::Finite(10))], &[]);
        let net = build_rflow_graph(&g, &[], &[]).unwrap();
        let r = min_cost_flow(&net);
        assert_eq!(r.status, FlowStatus::Optimal);
        assert_eq!(r.cost, 0);
        assert_eq!(settlement_upper_bound(&g, &[], &[]).unwrap(), Some(0));
    }

    #[test]
    fn parallel_arcs_collapse_into_one_bundle() {
        let g = small_graph(
            &[("u", 0, -100, Cap::Infinite), ("v", 0, -100, Cap::Infinite)],
            &[("a", "u", "v", 30), ("b", "u", "v", 20)],
        );
        let net = build_rflow_graph(&g, &[], &[]).unwrap();
        let bundles: Vec<&FlowArc> = net
            .arcs
            .iter()
            .filter(|a| a.kind == FlowArcKind::Bundle)
            .collect();
        assert_eq!(bundles.len(), 1);
        assert_eq!(bundles[0].upper, Cap::Finite(50));
        assert_eq!(bundles[0].lower, 0);

        let forced = [g.arc_id_of("a").unwrap()];
        let net = build_rflow_graph(&g, &[], &forced).unwrap();
        let bundle = net
            .arcs
            .iter()
            .find(|a| a.kind == FlowArcKind::Bundle)
            .unwrap();
        assert_eq!(bundle.lower, 30);
        assert_eq!(bundle.upper, Cap::Finite(50));
    }

    #[test]
    fn zero_lower_bounds_are_always_feasible() {
        let g = fig2_day1();
        let net = build_rflow_graph(&g, &[], &[]).unwrap();
        let r = min_cost_flow(&net);
        assert_eq!(r.status, FlowStatus::Optimal);
        assert!(r.cost <= 0);
        certify_optimal(&net, &r).unwrap();
    }

    #[test]
    fn unsupportable_forced_flow_is_infeasible() {
        // u must push 30 but can only draw 10 through the source dummy and
        // has no other inflow.
        let g = small_graph(
            &[("u", 0, -10, Cap::Finite(100)), ("v", 0, 0, Cap::Finite(0))],
            &[("a", "u", "v", 30)],
        );
        let forced = [g.arc_id_of("a").unwrap()];
        let net = build_rflow_graph(&g, &[], &forced).unwrap();
        let r = min_cost_flow(&net);
        assert_eq!(r.status, FlowStatus::Infeasible);
        assert_eq!(settlement_upper_bound(&g, &[], &forced).unwrap(), None);
    }

    #[test]
    fn fig2_day1_bound_dominates_known_optimum() {
        let g = fig2_day1();
        let ub = settlement_upper_bound(&g, &[], &[]).unwrap().unwrap();
        assert!(ub >= 5600, "relaxation bound {ub} below known optimum");
    }

    #[test]
    fn solving_twice_is_deterministic() {
        let g = fig2_day1();
        let net = build_rflow_graph(&g, &[], &[]).unwrap();
        let r1 = min_cost_flow(&net);
        let r2 = min_cost_flow(&net);
        assert_eq!(r1.cost, r2.cost);
        assert_eq!(r1.flow, r2.flow);
    }

    #[test]
    fn overlapping_sets_are_rejected() {
        let g = small_graph(
            &[("u", 0, -10, Cap::Infinite), ("v", 0, -10, Cap::Infinite)],
            &[("a", "u", "v", 30)],
        );
        let a = [g.arc_id_of("a").unwrap()];
        assert_eq!(
            build_rflow_graph(&g, &a, &a).unwrap_err(),
            FlowError::OverlappingSets
        );
    }

    #[test]
    fn forced_arcs_feasible_circulation_certified() {
        // Forcing one side of a feasible 2-cycle still admits a circulation.
        let g = small_graph(
            &[
                ("u", 50, 0, Cap::Finite(100)),
                ("v", 50, 0, Cap::Finite(100)),
            ],
            &[("a", "u", "v", 40), ("b", "v", "u", 35)],
        );
        let forced = [g.arc_id_of("a").unwrap()];
        let net = build_rflow_graph(&g, &[], &forced).unwrap();
        let r = min_cost_flow(&net);
        assert_eq!(r.status, FlowStatus::Optimal);
        certify_optimal(&net, &r).unwrap();
        assert!(-r.cost >= 75);
    }
}
