//! Randomized self-check suites: seeded small-instance generation and the
//! exact-solver-versus-oracle equivalence run backing `verify` in the CLI.

use crate::date::Date;
use crate::exact::{brute_force_optimal, settle_bb, BbOptions};
use crate::graph::{build_graph, AccountBook, CustomerAccount, Receivable};
use crate::money::{Cap, Money};
use crate::rng::Rng;

/// A random small instance with mixed slack and binding attributes. Amounts
/// are small integers so that margin interactions actually bite.
pub fn random_instance(
    rng: &mut Rng,
    max_nodes: usize,
    max_arcs: usize,
) -> (AccountBook, Vec<Receivable>) {
    let n = rng.range_i64(2, max_nodes as i64) as usize;
    let m = rng.range_i64(1, max_arcs as i64) as usize;
    let mut accounts = Vec::with_capacity(n);
    for i in 0..n {
        let bl_r = rng.range_i64(0, 20);
        let bl_a = bl_r + rng.range_i64(-10, 10);
        let floor = bl_a - rng.range_i64(0, 40);
        let cap = if rng.chance(0.25) {
            Cap::Infinite
        } else {
            Cap::Finite(bl_r + rng.range_i64(0, 40))
        };
        accounts.push(CustomerAccount {
            id: format!("n{i}"),
            bl_r,
            bl_a,
            cap,
            floor,
        });
    }
    let mut receivables = Vec::with_capacity(m);
    for i in 0..m {
        let debtor = rng.below(n as u64) as usize;
        let mut creditor = rng.below(n as u64) as usize;
        while creditor == debtor {
            creditor = rng.below(n as u64) as usize;
        }
        receivables.push(Receivable {
            id: format!("a{i}"),
            debtor: format!("n{debtor}"),
            creditor: format!("n{creditor}"),
            amount: rng.range_i64(1, 30),
            indate: Date(0),
            duedate: Date(30),
            life_days: 30,
        });
    }
    let book = AccountBook::from_accounts(accounts).expect("generated accounts are valid");
    (book, receivables)
}

/// Like [`random_instance`] but with exact node/arc counts and uniform
/// endpoints: the density profile of a real receivable day (arcs on the
/// order of nodes), used for medium-sized heuristic tests.
pub fn random_sparse_instance(
    rng: &mut Rng,
    nodes: usize,
    arcs: usize,
) -> (AccountBook, Vec<Receivable>) {
    assert!(nodes >= 2);
    let mut accounts = Vec::with_capacity(nodes);
    for i in 0..nodes {
        let bl_r = rng.range_i64(0, 20);
        let bl_a = bl_r + rng.range_i64(-10, 10);
        let floor = bl_a - rng.range_i64(0, 40);
        let cap = if rng.chance(0.25) {
            Cap::Infinite
        } else {
            Cap::Finite(bl_r + rng.range_i64(0, 40))
        };
        accounts.push(CustomerAccount {
            id: format!("n{i}"),
            bl_r,
            bl_a,
            cap,
            floor,
        });
    }
    let mut receivables = Vec::with_capacity(arcs);
    for i in 0..arcs {
        let debtor = rng.below(nodes as u64) as usize;
        let mut creditor = rng.below(nodes as u64) as usize;
        while creditor == debtor {
            creditor = rng.below(nodes as u64) as usize;
        }
        receivables.push(Receivable {
            id: format!("a{i}"),
            debtor: format!("n{debtor}"),
            creditor: format!("n{creditor}"),
            amount: rng.range_i64(1, 30),
            indate: Date(0),
            duedate: Date(30),
            life_days: 30,
        });
    }
    let book = AccountBook::from_accounts(accounts).expect("generated accounts are valid");
    (book, receivables)
}

/// Random instance where customers hold real cash (deposits above the
/// receivable balance) and floors are at or below zero: the regime in
/// which the floor-redefinition sequencer actually settles rounds.
pub fn random_cash_rich_instance(
    rng: &mut Rng,
    max_nodes: usize,
    max_arcs: usize,
) -> (AccountBook, Vec<Receivable>) {
    let n = rng.range_i64(2, max_nodes as i64) as usize;
    let m = rng.range_i64(1, max_arcs as i64) as usize;
    let mut accounts = Vec::with_capacity(n);
    for i in 0..n {
        let bl_r = rng.range_i64(0, 20);
        let bl_a = bl_r + rng.range_i64(0, 150);
        let floor = -rng.range_i64(0, 30);
        let cap = if rng.chance(0.3) {
            Cap::Infinite
        } else {
            Cap::Finite(bl_r + rng.range_i64(10, 60))
        };
        accounts.push(CustomerAccount {
            id: format!("n{i}"),
            bl_r,
            bl_a,
            cap,
            floor,
        });
    }
    let mut receivables = Vec::with_capacity(m);
    for i in 0..m {
        let debtor = rng.below(n as u64) as usize;
        let mut creditor = rng.below(n as u64) as usize;
        while creditor == debtor {
            creditor = rng.below(n as u64) as usize;
        }
        receivables.push(Receivable {
            id: format!("a{i}"),
            debtor: format!("n{debtor}"),
            creditor: format!("n{creditor}"),
            amount: rng.range_i64(1, 40),
            indate: Date(0),
            duedate: Date(30),
            life_days: 30,
        });
    }
    let book = AccountBook::from_accounts(accounts).expect("generated accounts are valid");
    (book, receivables)
}

/// One instance where the exact solver and the oracle disagreed.
#[derive(Clone, Debug)]
pub struct OracleMismatch {
    pub instance: usize,
    pub exact_total: Money,
    pub oracle_total: Money,
}

#[derive(Clone, Debug, Default)]
pub struct OracleSuiteReport {
    pub instances: usize,
    pub mismatches: Vec<OracleMismatch>,
}

impl OracleSuiteReport {
    pub fn all_passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Runs `instances` seeded random instances and compares the
/// branch-and-bound total against the exhaustive oracle on each.
pub fn oracle_equivalence_suite(
    seed: u64,
    instances: usize,
    max_nodes: usize,
    max_arcs: usize,
) -> OracleSuiteReport {
    assert!(max_arcs <= 20, "oracle guard");
    let mut rng = Rng::new(seed);
    let mut report = OracleSuiteReport {
        instances,
        ..Default::default()
    };
    for i in 0..instances {
        let (book, recs) = random_instance(&mut rng, max_nodes, max_arcs);
        let graph = build_graph(&book, &recs, Date(0)).expect("generated instance builds");
        let oracle = brute_force_optimal(&graph).expect("within oracle guard");
        let exact = settle_bb(&graph, &BbOptions::default()).expect("within node budget");
        if exact.total() != oracle.total() {
            report.mismatches.push(OracleMismatch {
                instance: i,
                exact_total: exact.total(),
                oracle_total: oracle.total(),
            });
        }
    }
    report
}
