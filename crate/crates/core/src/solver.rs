//! One dispatch point from an algorithm name to a solver run, shared by
//! the simulation loop and the CLI.

use crate::baseline::rfb;
use crate::beam::{settle_beam, BeamParams};
use crate::exact::{settle_bb, settle_bb_lb, BbOptions, SolveError};
use crate::graph::RMultigraph;
use crate::hybrid::{settle_h, HybridParams};
use crate::ordering::{redefine_floors, select_and_order, OrderedSettlement};
use crate::pathsel::{settle_path, PathParams, PathVariant};
use crate::settlement::Settlement;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algo {
    Bb,
    BbLb,
    Beam,
    PathGreedy,
    PathBeam,
    Hybrid,
    HybridPath,
    Rfb,
    RedefineFloors,
    SelectAndOrder,
}

impl Algo {
    pub fn parse(s: &str) -> Option<Algo> {
        Some(match s {
            "bb" => Algo::Bb,
            "bb-lb" => Algo::BbLb,
            "beam" => Algo::Beam,
            "path-g" => Algo::PathGreedy,
            "path-s" => Algo::PathBeam,
            "h" => Algo::Hybrid,
            "h-path" => Algo::HybridPath,
            "rfb" => Algo::Rfb,
            "redefine-floors" => Algo::RedefineFloors,
            "select-and-order" => Algo::SelectAndOrder,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Algo::Bb => "bb",
            Algo::BbLb => "bb-lb",
            Algo::Beam => "beam",
            Algo::PathGreedy => "path-g",
            Algo::PathBeam => "path-s",
            Algo::Hybrid => "h",
            Algo::HybridPath => "h-path",
            Algo::Rfb => "rfb",
            Algo::RedefineFloors => "redefine-floors",
            Algo::SelectAndOrder => "select-and-order",
        }
    }

    pub const ALL: [Algo; 10] = [
        Algo::Bb,
        Algo::BbLb,
        Algo::Beam,
        Algo::PathGreedy,
        Algo::PathBeam,
        Algo::Hybrid,
        Algo::HybridPath,
        Algo::Rfb,
        Algo::RedefineFloors,
        Algo::SelectAndOrder,
    ];
}

#[derive(Clone, Debug)]
pub struct SolverOutput {
    pub settlement: Settlement,
    /// Execution order, for the two sequencing algorithms.
    pub ordered: Option<OrderedSettlement>,
    pub truncated: bool,
    pub exact_fallbacks: usize,
}

impl SolverOutput {
    fn plain(settlement: Settlement) -> SolverOutput {
        SolverOutput {
            settlement,
            ordered: None,
            truncated: false,
            exact_fallbacks: 0,
        }
    }
}

/// Runs `algo` on `graph` with the shared parameter set.
pub fn run_solver(
    graph: &RMultigraph,
    algo: Algo,
    params: &HybridParams,
) -> Result<SolverOutput, SolveError> {
    Ok(match algo {
        Algo::Bb => {
            let opts = BbOptions {
                visit: params.visit,
                node_budget: params.node_budget,
                max_cycle_len: params.max_cycle_len,
                cycle_budget: params.cycle_budget,
            };
            SolverOutput::plain(settle_bb(graph, &opts)?)
        }
        Algo::BbLb => SolverOutput::plain(settle_bb_lb(
            graph,
            &[],
            &[],
            params.max_cycle_len,
            params.cycle_budget,
        )),
        Algo::Beam => {
            let out = settle_beam(
                graph,
                &BeamParams {
                    k: params.k,
                    max_cycle_len: params.max_cycle_len,
                    cycle_budget: params.cycle_budget,
                },
            );
            SolverOutput {
                settlement: out.settlement,
                ordered: None,
                truncated: out.truncated,
                exact_fallbacks: 0,
            }
        }
        Algo::PathGreedy | Algo::PathBeam => {
            let out = settle_path(
                graph,
                &PathParams {
                    k: params.k,
                    k_p: params.k_p,
                    max_cycle_len: params.max_cycle_len,
                    max_path_len: params.max_path_len,
                    cycle_budget: params.cycle_budget,
                    path_budget: params.path_budget,
                    variant: if algo == Algo::PathGreedy {
                        PathVariant::Greedy
                    } else {
                        PathVariant::Beam
                    },
                },
            );
            SolverOutput {
                settlement: out.settlement,
                ordered: None,
                truncated: out.truncated,
                exact_fallbacks: 0,
            }
        }
        Algo::Hybrid | Algo::HybridPath => {
            let mut p = params.clone();
            p.use_paths = algo == Algo::HybridPath;
            let out = settle_h(graph, &p);
            SolverOutput {
                settlement: out.settlement,
                ordered: None,
                truncated: out.truncated,
                exact_fallbacks: out.exact_fallbacks.len(),
            }
        }
        Algo::Rfb => SolverOutput::plain(rfb(graph)),
        Algo::RedefineFloors => {
            let ordered = redefine_floors(graph, params);
            SolverOutput {
                settlement: ordered.settlement(graph),
                ordered: Some(ordered),
                truncated: false,
                exact_fallbacks: 0,
            }
        }
        Algo::SelectAndOrder => {
            let out = select_and_order(graph);
            SolverOutput {
                settlement: out.ordered.settlement(graph),
                ordered: Some(out.ordered),
                truncated: false,
                exact_fallbacks: 0,
            }
        }
    })
}
