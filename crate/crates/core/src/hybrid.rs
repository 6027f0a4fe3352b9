//! Component-wise solver dispatch: exact branch-and-bound on small weakly
//! connected components, beam (optionally path-refined) on large ones.
//! Components share no nodes, so the union of per-component settlements is
//! feasible as a whole.

use crate::beam::{settle_beam_on, BeamParams};
use crate::exact::{settle_bb_on, BbOptions, SolveError, Visit};
use crate::graph::{ArcId, RMultigraph};
use crate::pathsel::{settle_path_on, PathParams, PathVariant};
use crate::preprocess::{preprocess, split_components_of};
use crate::settlement::Settlement;

#[derive(Clone, Debug)]
pub struct HybridParams {
    /// Components with at most this many arcs are solved exactly.
    pub h: usize,
    pub k: usize,
    pub k_p: usize,
    pub max_cycle_len: usize,
    pub max_path_len: usize,
    pub cycle_budget: usize,
    pub path_budget: usize,
    pub node_budget: u64,
    pub visit: Visit,
    pub use_paths: bool,
    pub path_variant: PathVariant,
}

impl Default for HybridParams {
    fn default() -> Self {
        HybridParams {
            h: 20,
            k: 1000,
            k_p: 1000,
            max_cycle_len: 15,
            max_path_len: 15,
            cycle_budget: crate::enumerate::DEFAULT_ENUM_BUDGET,
            path_budget: crate::enumerate::DEFAULT_ENUM_BUDGET,
            node_budget: 10_000_000,
            visit: Visit::Dfs,
            use_paths: false,
            path_variant: PathVariant::Greedy,
        }
    }
}

#[derive(Clone, Debug)]
pub struct HybridOutcome {
    pub settlement: Settlement,
    /// Components where the exact solver ran out of budget and the beam
    /// heuristic answered instead.
    pub exact_fallbacks: Vec<usize>,
    /// True when any enumeration hit its budget.
    pub truncated: bool,
}

/// Preprocesses, splits into weakly connected components, solves each with
/// the solver its size calls for, and returns the union.
pub fn settle_h(graph: &RMultigraph, params: &HybridParams) -> HybridOutcome {
    let kept = preprocess(graph);
    let split = split_components_of(graph, &kept);
    let mut arcs: Vec<ArcId> = Vec::new();
    let mut exact_fallbacks = Vec::new();
    let mut truncated = false;
    for (ci, comp) in split.components.iter().enumerate() {
        if comp.len() <= params.h {
            let opts = BbOptions {
                visit: params.visit,
                node_budget: params.node_budget,
                max_cycle_len: params.max_cycle_len,
                cycle_budget: params.cycle_budget,
            };
            match settle_bb_on(graph, comp, &opts) {
                Ok(s) => {
                    arcs.extend_from_slice(s.arc_ids());
                    continue;
                }
                Err(SolveError::NodeBudgetExceeded { .. }) => exact_fallbacks.push(ci),
                Err(e) => unreachable!("unexpected exact-solver error: {e}"),
            }
        }
        if params.use_paths {
            let out = settle_path_on(
                graph,
                comp,
                &PathParams {
                    k: params.k,
                    k_p: params.k_p,
                    max_cycle_len: params.max_cycle_len,
                    max_path_len: params.max_path_len,
                    cycle_budget: params.cycle_budget,
                    path_budget: params.path_budget,
                    variant: params.path_variant,
                },
            );
            truncated |= out.truncated;
            arcs.extend_from_slice(out.settlement.arc_ids());
        } else {
            let out = settle_beam_on(
                graph,
                comp,
                &BeamParams {
                    k: params.k,
                    max_cycle_len: params.max_cycle_len,
                    cycle_budget: params.cycle_budget,
                },
            );
            truncated |= out.truncated;
            arcs.extend_from_slice(out.settlement.arc_ids());
        }
    }
    let settlement = Settlement::from_arcs(graph, arcs);
    debug_assert!(crate::settlement::check_feasible(graph, &settlement).is_ok());
    HybridOutcome {
        settlement,
        exact_fallbacks,
        truncated,
    }
}
