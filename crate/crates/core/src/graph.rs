//! Domain model: customer accounts, receivables, and the receivable
//! multigraph the solvers operate on.
//!
//! The multigraph is immutable once built. Nodes carry the four account
//! attributes (`bl_r`, `bl_a`, `cap`, `floor`); arcs carry amounts. Parallel
//! and antiparallel arcs are permitted, self-loops are not.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::date::Date;
use crate::money::{Cap, Money, MAX_ABS_MONEY};

/// Index of a node (customer) inside one [`RMultigraph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

/// Index of an arc (receivable) inside one [`RMultigraph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArcId(pub u32);

impl NodeId {
    #[inline]
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl ArcId {
    #[inline]
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

/// A customer account with its settlement attributes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CustomerAccount {
    pub id: String,
    /// Receivable balance: net amount settled through the service so far.
    pub bl_r: Money,
    /// Actual balance: receivable balance plus external deposits/withdrawals.
    pub bl_a: Money,
    /// Upper bound on the receivable balance.
    pub cap: Cap,
    /// Lower bound on the actual balance.
    pub floor: Money,
}

/// Keyed collection of accounts; the mutable master record the simulation
/// rolls forward day by day.
#[derive(Clone, Debug, Default)]
pub struct AccountBook {
    accounts: Vec<CustomerAccount>,
    by_id: HashMap<String, usize>,
}

impl AccountBook {
    pub fn new() -> AccountBook {
        AccountBook::default()
    }

    pub fn insert(&mut self, account: CustomerAccount) -> Result<(), BuildError> {
        if account.bl_a.abs() > MAX_ABS_MONEY
            || account.bl_r.abs() > MAX_ABS_MONEY
            || account.floor.abs() > MAX_ABS_MONEY
            || matches!(account.cap, Cap::Finite(c) if c.abs() > MAX_ABS_MONEY)
        {
            return Err(BuildError::ValueOutOfRange {
                what: format!("account {}", account.id),
            });
        }
        if let Cap::Finite(c) = account.cap {
            if account.bl_r > c {
                return Err(BuildError::ReceivableBalanceAboveCap {
                    account: account.id.clone(),
                });
            }
        }
        if account.bl_a < account.floor {
            return Err(BuildError::BalanceBelowFloor {
                account: account.id.clone(),
            });
        }
        if self.by_id.contains_key(&account.id) {
            return Err(BuildError::DuplicateAccount {
                id: account.id.clone(),
            });
        }
        self.by_id.insert(account.id.clone(), self.accounts.len());
        self.accounts.push(account);
        Ok(())
    }

    pub fn from_accounts(
        accounts: impl IntoIterator<Item = CustomerAccount>,
    ) -> Result<AccountBook, BuildError> {
        let mut book = AccountBook::new();
        for a in accounts {
            book.insert(a)?;
        }
        Ok(book)
    }

    pub fn get(&self, id: &str) -> Option<&CustomerAccount> {
        self.by_id.get(id).map(|&i| &self.accounts[i])
    }

    pub fn get_mut(&mut self, id: &str) -> Option<&mut CustomerAccount> {
        self.by_id.get(id).copied().map(|i| &mut self.accounts[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = &CustomerAccount> {
        self.accounts.iter()
    }

    pub fn len(&self) -> usize {
        self.accounts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accounts.is_empty()
    }

    /// Sum of actual balances, the quantity settlements must conserve.
    pub fn total_actual_balance(&self) -> Money {
        self.accounts.iter().map(|a| a.bl_a).sum()
    }
}

/// An identified receivable: `debtor` owes `creditor` `amount`, submitted on
/// `indate`, payable until `duedate`, kept in the system at most `life_days`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Receivable {
    pub id: String,
    pub debtor: String,
    pub creditor: String,
    pub amount: Money,
    pub indate: Date,
    pub duedate: Date,
    pub life_days: u32,
}

impl Receivable {
    /// Last day the service may try to settle this receivable.
    pub fn window_end(&self) -> Date {
        self.duedate
            .min(self.indate.add_days(self.life_days as i32))
    }

    /// True when the settlement window contains `day`.
    pub fn valid_at(&self, day: Date) -> bool {
        self.indate <= day && day <= self.window_end()
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum BuildError {
    #[error("receivable {receivable}: unknown account {account}")]
    UnknownAccount { receivable: String, account: String },
    #[error("duplicate receivable id {id}")]
    DuplicateReceivable { id: String },
    #[error("duplicate account id {id}")]
    DuplicateAccount { id: String },
    #[error("receivable {receivable}: debtor equals creditor")]
    SelfLoop { receivable: String },
    #[error("receivable {receivable}: amount must be positive")]
    NonPositiveAmount { receivable: String },
    #[error("receivable {receivable}: indate after duedate")]
    BadWindow { receivable: String },
    #[error("{what}: value exceeds supported money range")]
    ValueOutOfRange { what: String },
    #[error("account {account}: receivable balance above cap")]
    ReceivableBalanceAboveCap { account: String },
    #[error("account {account}: actual balance below floor")]
    BalanceBelowFloor { account: String },
}

#[derive(Clone, Debug)]
pub(crate) struct ArcData {
    pub ext_id: String,
    pub tail: NodeId,
    pub head: NodeId,
    pub amount: Money,
}

/// Immutable directed weighted multigraph of valid receivables.
#[derive(Clone, Debug)]
pub struct RMultigraph {
    nodes: Vec<CustomerAccount>,
    arcs: Vec<ArcData>,
    out_adj: Vec<Vec<ArcId>>,
    in_adj: Vec<Vec<ArcId>>,
    node_by_ext: HashMap<String, NodeId>,
    arc_by_ext: HashMap<String, ArcId>,
}

/// Builds the multigraph of receivables valid at `today`: exactly those `R`
/// with `today` in `[indate, min(indate + life, duedate)]`. Accounts with no
/// incident valid arc are retained as isolated nodes.
pub fn build_graph(
    book: &AccountBook,
    receivables: &[Receivable],
    today: Date,
) -> Result<RMultigraph, BuildError> {
    let nodes: Vec<CustomerAccount> = book.iter().cloned().collect();
    let node_by_ext: HashMap<String, NodeId> = nodes
        .iter()
        .enumerate()
        .map(|(i, a)| (a.id.clone(), NodeId(i as u32)))
        .collect();

    let mut arcs = Vec::new();
    let mut arc_by_ext = HashMap::new();
    for r in receivables {
        validate_receivable(r)?;
        if !r.valid_at(today) {
            continue;
        }
        let tail = *node_by_ext
            .get(&r.debtor)
            .ok_or_else(|| BuildError::UnknownAccount {
                receivable: r.id.clone(),
                account: r.debtor.clone(),
            })?;
        let head = *node_by_ext
            .get(&r.creditor)
            .ok_or_else(|| BuildError::UnknownAccount {
                receivable: r.id.clone(),
                account: r.creditor.clone(),
            })?;
        let id = ArcId(arcs.len() as u32);
        if arc_by_ext.insert(r.id.clone(), id).is_some() {
            return Err(BuildError::DuplicateReceivable { id: r.id.clone() });
        }
        arcs.push(ArcData {
            ext_id: r.id.clone(),
            tail,
            head,
            amount: r.amount,
        });
    }
    Ok(RMultigraph::assemble(nodes, arcs, node_by_ext, arc_by_ext))
}

pub(crate) fn validate_receivable(r: &Receivable) -> Result<(), BuildError> {
    if r.debtor == r.creditor {
        return Err(BuildError::SelfLoop {
            receivable: r.id.clone(),
        });
    }
    if r.amount <= 0 {
        return Err(BuildError::NonPositiveAmount {
            receivable: r.id.clone(),
        });
    }
    if r.amount > MAX_ABS_MONEY {
        return Err(BuildError::ValueOutOfRange {
            what: format!("receivable {}", r.id),
        });
    }
    if r.indate > r.duedate {
        return Err(BuildError::BadWindow {
            receivable: r.id.clone(),
        });
    }
    Ok(())
}

impl RMultigraph {
    fn assemble(
        nodes: Vec<CustomerAccount>,
        arcs: Vec<ArcData>,
        node_by_ext: HashMap<String, NodeId>,
        arc_by_ext: HashMap<String, ArcId>,
    ) -> RMultigraph {
        let mut out_adj = vec![Vec::new(); nodes.len()];
        let mut in_adj = vec![Vec::new(); nodes.len()];
        for (i, a) in arcs.iter().enumerate() {
            out_adj[a.tail.idx()].push(ArcId(i as u32));
            in_adj[a.head.idx()].push(ArcId(i as u32));
        }
        RMultigraph {
            nodes,
            arcs,
            out_adj,
            in_adj,
            node_by_ext,
            arc_by_ext,
        }
    }

    /// A copy of this graph restricted to `arcs` (renumbered 0..k in slice
    /// order), optionally with replaced node attributes (same node order).
    /// Used by solver layers that re-solve on shrinking graphs with
    /// modified attributes; external arc ids are preserved.
    pub(crate) fn restricted(
        &self,
        arcs: &[ArcId],
        accounts: Option<Vec<CustomerAccount>>,
    ) -> RMultigraph {
        let nodes = match accounts {
            Some(a) => {
                assert_eq!(a.len(), self.nodes.len());
                a
            }
            None => self.nodes.clone(),
        };
        let arc_data: Vec<ArcData> = arcs.iter().map(|&a| self.arcs[a.idx()].clone()).collect();
        let arc_by_ext = arc_data
            .iter()
            .enumerate()
            .map(|(i, a)| (a.ext_id.clone(), ArcId(i as u32)))
            .collect();
        RMultigraph::assemble(nodes, arc_data, self.node_by_ext.clone(), arc_by_ext)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    pub fn arc_ids(&self) -> impl Iterator<Item = ArcId> {
        (0..self.arcs.len() as u32).map(ArcId)
    }

    pub fn all_arcs(&self) -> Vec<ArcId> {
        self.arc_ids().collect()
    }

    pub fn account(&self, u: NodeId) -> &CustomerAccount {
        &self.nodes[u.idx()]
    }

    pub fn tail(&self, a: ArcId) -> NodeId {
        self.arcs[a.idx()].tail
    }

    pub fn head(&self, a: ArcId) -> NodeId {
        self.arcs[a.idx()].head
    }

    pub fn amount(&self, a: ArcId) -> Money {
        self.arcs[a.idx()].amount
    }

    pub fn arc_ext_id(&self, a: ArcId) -> &str {
        &self.arcs[a.idx()].ext_id
    }

    pub fn node_ext_id(&self, u: NodeId) -> &str {
        &self.nodes[u.idx()].id
    }

    pub fn out_arcs(&self, u: NodeId) -> &[ArcId] {
        &self.out_adj[u.idx()]
    }

    pub fn in_arcs(&self, u: NodeId) -> &[ArcId] {
        &self.in_adj[u.idx()]
    }

    pub fn node_id_of(&self, ext: &str) -> Option<NodeId> {
        self.node_by_ext.get(ext).copied()
    }

    pub fn arc_id_of(&self, ext: &str) -> Option<ArcId> {
        self.arc_by_ext.get(ext).copied()
    }

    /// Lower end of the admissible net-flow interval at `u`: `floor - bl_a`.
    pub fn floor_margin(&self, u: NodeId) -> Money {
        let n = &self.nodes[u.idx()];
        n.floor - n.bl_a
    }

    /// Upper end of the admissible net-flow interval at `u`: `cap - bl_r`.
    pub fn cap_margin(&self, u: NodeId) -> Cap {
        let n = &self.nodes[u.idx()];
        n.cap.minus(n.bl_r)
    }

    /// True when a net flow of `net` at `u` keeps both balance bounds.
    pub fn net_within_bounds(&self, u: NodeId, net: Money) -> bool {
        net >= self.floor_margin(u) && self.cap_margin(u).admits(net)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn acct(id: &str, bl: Money, floor: Money, cap: Cap) -> CustomerAccount {
        CustomerAccount {
            id: id.to_string(),
            bl_r: bl,
            bl_a: bl,
            cap,
            floor,
        }
    }

    fn rec(id: &str, debtor: &str, creditor: &str, amount: Money) -> Receivable {
        Receivable {
            id: id.to_string(),
            debtor: debtor.to_string(),
            creditor: creditor.to_string(),
            amount,
            indate: Date(0),
            duedate: Date(100),
            life_days: 100,
        }
    }

    #[test]
    fn validity_window_boundaries() {
        // indate day 1, life 5, duedate day 20: valid through day 6 only.
        let r = Receivable {
            id: "r".into(),
            debtor: "u".into(),
            creditor: "v".into(),
            amount: 10,
            indate: Date(1),
            duedate: Date(20),
            life_days: 5,
        };
        assert!(r.valid_at(Date(6)));
        assert!(!r.valid_at(Date(7)));
        assert!(!r.valid_at(Date(0)));
        // duedate earlier than indate+life wins.
        let r2 = Receivable {
            duedate: Date(3),
            ..r.clone()
        };
        assert!(r2.valid_at(Date(3)));
        assert!(!r2.valid_at(Date(4)));
    }

    #[test]
    fn build_keeps_only_valid_arcs_and_all_accounts() {
        let book = AccountBook::from_accounts([
            acct("u", 0, -100, Cap::Infinite),
            acct("v", 0, -100, Cap::Infinite),
            acct("w", 0, -100, Cap::Infinite),
        ])
        .unwrap();
        let mut r1 = rec("r1", "u", "v", 10);
        r1.indate = Date(5);
        let r2 = rec("r2", "v", "u", 20);
        let g = build_graph(&book, &[r1, r2], Date(0)).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.arc_count(), 1);
        assert_eq!(g.arc_ext_id(ArcId(0)), "r2");
    }

    #[test]
    fn build_rejects_bad_inputs() {
        let book = AccountBook::from_accounts([
            acct("u", 0, 0, Cap::Infinite),
            acct("v", 0, 0, Cap::Infinite),
        ])
        .unwrap();
        let unknown = rec("r1", "u", "zz", 10);
        assert!(matches!(
            build_graph(&book, &[unknown], Date(0)),
            Err(BuildError::UnknownAccount { .. })
        ));
        let dup = [rec("r1", "u", "v", 10), rec("r1", "v", "u", 20)];
        assert!(matches!(
            build_graph(&book, &dup, Date(0)),
            Err(BuildError::DuplicateReceivable { .. })
        ));
        let selfloop = rec("r1", "u", "u", 10);
        assert!(matches!(
            build_graph(&book, &[selfloop], Date(0)),
            Err(BuildError::SelfLoop { .. })
        ));
        let nonpos = rec("r1", "u", "v", 0);
        assert!(matches!(
            build_graph(&book, &[nonpos], Date(0)),
            Err(BuildError::NonPositiveAmount { .. })
        ));
    }

    #[test]
    fn account_invariants_enforced() {
        let mut bad = acct("u", 10, 0, Cap::Finite(5));
        assert!(matches!(
            AccountBook::from_accounts([bad.clone()]),
            Err(BuildError::ReceivableBalanceAboveCap { .. })
        ));
        bad = acct("u", 0, 5, Cap::Infinite);
        bad.bl_a = 0;
        assert!(matches!(
            AccountBook::from_accounts([bad]),
            Err(BuildError::BalanceBelowFloor { .. })
        ));
    }
}
