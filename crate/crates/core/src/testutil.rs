//! Shared fixtures for unit tests: the five-customer worked instance used
//! throughout the module tests, plus small-graph construction helpers.

use crate::date::Date;
use crate::graph::{build_graph, AccountBook, CustomerAccount, RMultigraph, Receivable};
use crate::money::{Cap, Money};
use crate::settlement::Settlement;

/// The six arcs forming the known day-1 optimum (total 5600).
pub const FIG2_DAY1_OPTIMAL: [&str; 6] = ["R-AB1", "R-AB2", "R-BD1", "R-BD2", "R-DE", "R-EA"];

pub fn acct(id: &str, bl: Money, floor: Money, cap: Cap) -> CustomerAccount {
    CustomerAccount {
        id: id.to_string(),
        bl_r: bl,
        bl_a: bl,
        cap,
        floor,
    }
}

pub fn fig2_day1_book() -> AccountBook {
    AccountBook::from_accounts([
        acct("A", 1000, -1000, Cap::Finite(3000)),
        acct("B", 0, -500, Cap::Finite(4000)),
        acct("C", 100, 0, Cap::Finite(1500)),
        acct("D", 100, -500, Cap::Finite(3000)),
        acct("E", 0, -200, Cap::Finite(600)),
    ])
    .unwrap()
}

pub fn fig2_day1_receivables() -> Vec<Receivable> {
    let rec = |id: &str, debtor: &str, creditor: &str, amount: Money| Receivable {
        id: id.to_string(),
        debtor: debtor.to_string(),
        creditor: creditor.to_string(),
        amount,
        indate: Date(0),
        duedate: Date(30),
        life_days: 30,
    };
    vec![
        rec("R-AB1", "A", "B", 700),
        rec("R-AB2", "A", "B", 600),
        rec("R-BD1", "B", "D", 700),
        rec("R-BD2", "B", "D", 1000),
        rec("R-DE", "D", "E", 1600),
        rec("R-EA", "E", "A", 1000),
        rec("R-EC", "E", "C", 900),
        rec("R-CB", "C", "B", 1100),
        rec("R-DA", "D", "A", 2600),
    ]
}

/// Day-1 instance: 5 accounts, 9 arcs, optimum 5600.
pub fn fig2_day1() -> RMultigraph {
    build_graph(&fig2_day1_book(), &fig2_day1_receivables(), Date(0)).unwrap()
}

/// Day-2 instance: the three unsettled day-1 arcs plus two new ones, with
/// day-1 closing balances. Its optimum is the empty settlement.
pub fn fig2_day2() -> RMultigraph {
    let book = AccountBook::from_accounts([
        acct("A", 700, -1000, Cap::Finite(3000)),
        acct("B", -400, -500, Cap::Finite(4000)),
        acct("C", 100, 0, Cap::Finite(1500)),
        acct("D", 200, -500, Cap::Finite(3000)),
        acct("E", 600, -200, Cap::Finite(600)),
    ])
    .unwrap();
    let rec = |id: &str, debtor: &str, creditor: &str, amount: Money| Receivable {
        id: id.to_string(),
        debtor: debtor.to_string(),
        creditor: creditor.to_string(),
        amount,
        indate: Date(1),
        duedate: Date(30),
        life_days: 30,
    };
    let recs = vec![
        rec("R-EC", "E", "C", 900),
        rec("R-CB", "C", "B", 1100),
        rec("R-DA", "D", "A", 2600),
        rec("R-AE", "A", "E", 1000),
        rec("R-CA", "C", "A", 50),
    ];
    build_graph(&book, &recs, Date(1)).unwrap()
}

/// Builds a graph from `(id, balance, floor, cap)` accounts and
/// `(id, debtor, creditor, amount)` arcs, all valid today.
pub fn small_graph(
    accounts: &[(&str, Money, Money, Cap)],
    arcs: &[(&str, &str, &str, Money)],
) -> RMultigraph {
    let book = AccountBook::from_accounts(
        accounts
            .iter()
            .map(|&(id, bl, floor, cap)| acct(id, bl, floor, cap))
            .collect::<Vec<_>>(),
    )
    .unwrap();
    let recs: Vec<Receivable> = arcs
        .iter()
        .map(|&(id, debtor, creditor, amount)| Receivable {
            id: id.to_string(),
            debtor: debtor.to_string(),
            creditor: creditor.to_string(),
            amount,
            indate: Date(0),
            duedate: Date(30),
            life_days: 30,
        })
        .collect();
    build_graph(&book, &recs, Date(0)).unwrap()
}

/// Settlement from external arc ids.
pub fn settlement_of(graph: &RMultigraph, ids: &[&str]) -> Settlement {
    Settlement::from_arcs(
        graph,
        ids.iter().map(|id| {
            graph
                .arc_id_of(id)
                .unwrap_or_else(|| panic!("no arc {id} in graph"))
        }),
    )
}
