//! Receivable-settlement optimization engine.
//!
//! Given a multigraph of pending receivables over customer accounts with
//! balance/floor/cap attributes, the engine selects a maximum-amount
//! feasible subset to settle (exact branch-and-bound, cycle-based
//! heuristics, and a hybrid of the two), emits violation-free transfer
//! orderings, and simulates the daily operation of the service.
//!
//! Modules:
//!
//! - [`graph`] / [`settlement`]: domain model, feasibility, objective,
//!   balance application
//! - [`preprocess`]: safe node/arc filtering and component splitting
//! - [`enumerate`]: bounded simple-cycle and path enumeration
//! - [`flow`]: flow-network relaxation used as a branch-and-bound bound
//! - [`exact`]: branch-and-bound solver, its cycle-cover lower bound, and a
//!   brute-force oracle
//! - [`beam`] / [`pathsel`] / [`hybrid`]: heuristic solvers
//! - [`ordering`]: violation-free transfer sequencing
//! - [`baseline`]: removal-based reference heuristic
//! - [`sim`]: daily lifecycle simulation and synthetic data
//! - [`verify`]: randomized self-check suites
//! - [`io`]: instance file formats shared with the CLI

pub mod baseline;
pub mod beam;
pub mod date;
pub mod enumerate;
pub mod exact;
pub mod flow;
pub mod graph;
pub mod hybrid;
pub mod io;
pub mod money;
pub mod ordering;
pub mod pathsel;
pub mod preprocess;
pub mod rng;
pub mod settlement;
pub mod sim;
pub mod solver;
pub mod verify;

#[cfg(test)]
pub(crate) mod testutil;

pub use date::Date;
pub use graph::{
    build_graph, AccountBook, ArcId, BuildError, CustomerAccount, NodeId, RMultigraph, Receivable,
};
pub use money::{Cap, Money};
pub use settlement::{apply_settlement, check_feasible, objective_value, Settlement};
