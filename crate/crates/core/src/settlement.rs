//! Settlements: arc subsets with their objective value, feasibility
//! checking against the per-node balance bounds and the in/out-degree
//! requirement, and applying a settlement to the account book.

use std::collections::HashMap;

use crate::graph::{AccountBook, ArcId, NodeId, RMultigraph};
use crate::money::Money;

/// A subset of receivables selected for settlement. Arc ids are kept
/// sorted and deduplicated; `total` is the exact sum of their amounts.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Settlement {
    arc_ids: Vec<ArcId>,
    total: Money,
}

impl Settlement {
    pub fn empty() -> Settlement {
        Settlement::default()
    }

    pub fn from_arcs(graph: &RMultigraph, arcs: impl IntoIterator<Item = ArcId>) -> Settlement {
        let mut ids: Vec<ArcId> = arcs.into_iter().collect();
        ids.sort_unstable();
        ids.dedup();
        assert!(
            ids.last().is_none_or(|a| a.idx() < graph.arc_count()),
            "arc id out of range for graph"
        );
        let total = ids.iter().map(|&a| graph.amount(a)).sum();
        Settlement {
            arc_ids: ids,
            total,
        }
    }

    pub fn arc_ids(&self) -> &[ArcId] {
        &self.arc_ids
    }

    pub fn total(&self) -> Money {
        self.total
    }

    pub fn len(&self) -> usize {
        self.arc_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arc_ids.is_empty()
    }

    pub fn contains(&self, a: ArcId) -> bool {
        self.arc_ids.binary_search(&a).is_ok()
    }

    /// Tie-break order between equal-total settlements: lexicographically
    /// smaller sorted arc-id sequence wins.
    pub fn lex_before(&self, other: &Settlement) -> bool {
        self.arc_ids < other.arc_ids
    }
}

/// Which side of the per-node requirements a violation is on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// Net flow drops the actual balance below the floor.
    FloorSide,
    /// Net flow lifts the receivable balance above the cap.
    CapSide,
    /// Spanned node has no selected incoming arc.
    NoIncoming,
    /// Spanned node has no selected outgoing arc.
    NoOutgoing,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub node: NodeId,
    pub kind: ViolationKind,
    /// Signed slack: negative by exactly the amount the bound is missed.
    /// Zero for degree violations.
    pub margin: Money,
}

/// Outcome of a feasibility check: ok, or the full list of violations.
#[derive(Clone, Debug, Default)]
pub struct Feasibility {
    pub violations: Vec<Violation>,
}

impl Feasibility {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Per-node aggregate flow of a candidate arc set.
#[derive(Clone, Copy, Debug, Default)]
pub struct NodeFlow {
    pub in_sum: Money,
    pub out_sum: Money,
    pub in_count: u32,
    pub out_count: u32,
}

impl NodeFlow {
    pub fn net(&self) -> Money {
        self.in_sum - self.out_sum
    }
}

/// Aggregates in/out amounts and degrees per node spanned by `arcs`.
/// The iterator must not repeat arcs.
pub fn node_flows(
    graph: &RMultigraph,
    arcs: impl IntoIterator<Item = ArcId>,
) -> HashMap<NodeId, NodeFlow> {
    let mut flows: HashMap<NodeId, NodeFlow> = HashMap::new();
    for a in arcs {
        let w = graph.amount(a);
        let tail = flows.entry(graph.tail(a)).or_default();
        tail.out_sum += w;
        tail.out_count += 1;
        let head = flows.entry(graph.head(a)).or_default();
        head.in_sum += w;
        head.in_count += 1;
    }
    flows
}

/// Checks a candidate settlement: every spanned node must keep its net flow
/// within `[floor - bl_a, cap - bl_r]` and have at least one selected
/// incoming and one selected outgoing arc. All violations are reported, not
/// just the first.
pub fn check_feasible(graph: &RMultigraph, candidate: &Settlement) -> Feasibility {
    let flows = node_flows(graph, candidate.arc_ids().iter().copied());
    let mut spanned: Vec<(NodeId, NodeFlow)> = flows.into_iter().collect();
    spanned.sort_unstable_by_key(|(u, _)| *u);
    let mut violations = Vec::new();
    for (u, f) in spanned {
        let net = f.net();
        let lo = graph.floor_margin(u);
        if net < lo {
            violations.push(Violation {
                node: u,
                kind: ViolationKind::FloorSide,
                margin: net - lo,
            });
        }
        if let Some(hi) = graph.cap_margin(u).finite() {
            if net > hi {
                violations.push(Violation {
                    node: u,
                    kind: ViolationKind::CapSide,
                    margin: hi - net,
                });
            }
        }
        if f.in_count == 0 {
            violations.push(Violation {
                node: u,
                kind: ViolationKind::NoIncoming,
                margin: 0,
            });
        }
        if f.out_count == 0 {
            violations.push(Violation {
                node: u,
                kind: ViolationKind::NoOutgoing,
                margin: 0,
            });
        }
    }
    Feasibility { violations }
}

/// Exact objective value of a candidate: the sum of selected amounts, each
/// arc counted once.
pub fn objective_value(graph: &RMultigraph, candidate: &Settlement) -> Money {
    candidate.arc_ids().iter().map(|&a| graph.amount(a)).sum()
}

#[derive(Debug, thiserror::Error)]
pub enum ApplyError {
    #[error("settlement is infeasible ({} violations)", violations.len())]
    Infeasible { violations: Vec<Violation> },
    #[error("account {id} not present in the book")]
    AccountMissing { id: String },
}

/// Applies a feasible settlement to the account book: for every spanned
/// node both balances move by `net = in - out`; everything else is
/// untouched. The `bl_a - bl_r` difference of every account is invariant.
pub fn apply_settlement(
    book: &mut AccountBook,
    graph: &RMultigraph,
    candidate: &Settlement,
) -> Result<(), ApplyError> {
    let verdict = check_feasible(graph, candidate);
    if !verdict.is_ok() {
        return Err(ApplyError::Infeasible {
            violations: verdict.violations,
        });
    }
    let flows = node_flows(graph, candidate.arc_ids().iter().copied());
    // Validate all accounts exist before mutating any.
    for u in flows.keys() {
        let id = graph.node_ext_id(*u);
        if book.get(id).is_none() {
            return Err(ApplyError::AccountMissing { id: id.to_string() });
        }
    }
    for (u, f) in flows {
        let delta = f.net();
        let account = book.get_mut(graph.node_ext_id(u)).expect("checked above");
        account.bl_r += delta;
        account.bl_a += delta;
    }
    Ok(())
}
