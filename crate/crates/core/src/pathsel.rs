//! Path refinement of a cycle solution: for every ordered pair of
//! committed cycles, enumerate connecting paths and add the ones that fit
//! the remaining balance margins. Interior path nodes gain exactly one
//! incoming and one outgoing arc and endpoints sit on committed cycles, so
//! the degree constraint survives by construction.

use crate::beam::{run_beam, BeamOutcome, BeamParams, BudgetState};
use crate::enumerate::{enumerate_paths_of, spanned_nodes, DEFAULT_ENUM_BUDGET};
use crate::graph::{ArcId, RMultigraph};
use crate::preprocess::preprocess;
use crate::settlement::Settlement;

/// How the per-pair path subset is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathVariant {
    /// Paths one by one in non-increasing amount order.
    Greedy,
    /// The beam engine run over the path set.
    Beam,
}

#[derive(Clone, Debug)]
pub struct PathParams {
    pub k: usize,
    pub k_p: usize,
    pub max_cycle_len: usize,
    pub max_path_len: usize,
    pub cycle_budget: usize,
    pub path_budget: usize,
    pub variant: PathVariant,
}

impl Default for PathParams {
    fn default() -> Self {
        PathParams {
            k: 1000,
            k_p: 1000,
            max_cycle_len: 15,
            max_path_len: 15,
            cycle_budget: DEFAULT_ENUM_BUDGET,
            path_budget: DEFAULT_ENUM_BUDGET,
            variant: PathVariant::Greedy,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PathOutcome {
    pub settlement: Settlement,
    pub truncated: bool,
}

/// Cycle solution plus path augmentation on the whole graph, one
/// weakly connected component at a time (paths cannot cross components).
pub fn settle_path(graph: &RMultigraph, params: &PathParams) -> PathOutcome {
    let kept = preprocess(graph);
    let split = crate::preprocess::split_components_of(graph, &kept);
    let mut arcs: Vec<ArcId> = Vec::new();
    let mut truncated = false;
    for comp in &split.components {
        let out = settle_path_on(graph, comp, params);
        arcs.extend_from_slice(out.settlement.arc_ids());
        truncated |= out.truncated;
    }
    PathOutcome {
        settlement: Settlement::from_arcs(graph, arcs),
        truncated,
    }
}

/// Path-refined solve restricted to `arcs` (a preprocessed component).
pub fn settle_path_on(graph: &RMultigraph, arcs: &[ArcId], params: &PathParams) -> PathOutcome {
    let beam_params = BeamParams {
        k: params.k,
        max_cycle_len: params.max_cycle_len,
        cycle_budget: params.cycle_budget,
    };
    let BeamOutcome {
        settlement,
        cycles,
        truncated,
    } = crate::beam::settle_beam_on(graph, arcs, &beam_params);
    let mut state = BudgetState::new();
    state.commit(graph, settlement.arc_ids());
    let mut truncated = truncated;

    // Ordered pairs (i, j), i != j, heaviest combined cycle amount first;
    // margins accumulate across pairs.
    let mut pair_order: Vec<(usize, usize)> = (0..cycles.len())
        .flat_map(|i| (0..cycles.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j)
        .collect();
    pair_order
        .sort_by_key(|&(i, j)| (std::cmp::Reverse(cycles[i].amount + cycles[j].amount), i, j));

    for (i, j) in pair_order {
        let sources = spanned_nodes(graph, &cycles[i].arcs);
        let targets = spanned_nodes(graph, &cycles[j].arcs);
        let (paths, trunc) = enumerate_paths_of(
            graph,
            arcs,
            &sources,
            &targets,
            params.max_path_len,
            params.path_budget,
        );
        truncated |= trunc;
        if paths.is_empty() {
            continue;
        }
        match params.variant {
            PathVariant::Greedy => {
                let mut order: Vec<usize> = (0..paths.len()).collect();
                order.sort_by_key(|&p| (std::cmp::Reverse(paths[p].amount), p));
                for p in order {
                    if state.admissible_with(graph, &paths[p].arcs) {
                        state.commit(graph, &paths[p].arcs);
                    }
                }
            }
            PathVariant::Beam => {
                run_beam(graph, &paths, params.k_p, &mut state);
            }
        }
    }
    let settlement = state.settlement(graph);
    debug_assert!(crate::settlement::check_feasible(graph, &settlement).is_ok());
    PathOutcome {
        settlement,
        truncated,
    }
}
