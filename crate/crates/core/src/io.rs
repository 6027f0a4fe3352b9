//! Instance file formats: a self-describing JSON document for whole
//! instances, and the two CSV layouts for accounts and receivables.
//!
//! CSV columns:
//! `id,debtor,creditor,amount_minor,indate,duedate,life_days` (receivables)
//! `id,bl_r_minor,bl_a_minor,cap_minor,floor_minor` (accounts; an empty
//! `cap_minor` field means an unbounded cap). Dates are ISO-8601.

use serde::{Deserialize, Serialize};

use crate::date::Date;
use crate::graph::{AccountBook, BuildError, CustomerAccount, Receivable};
use crate::money::{Cap, Money};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AccountRow {
    pub id: String,
    pub bl_r_minor: Money,
    pub bl_a_minor: Money,
    /// Absent means the cap is unbounded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap_minor: Option<Money>,
    pub floor_minor: Money,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReceivableRow {
    pub id: String,
    pub debtor: String,
    pub creditor: String,
    pub amount_minor: Money,
    pub indate: Date,
    pub duedate: Date,
    pub life_days: u32,
}

/// A whole problem instance in one document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceFile {
    pub today: Date,
    pub accounts: Vec<AccountRow>,
    pub receivables: Vec<ReceivableRow>,
}

impl From<&CustomerAccount> for AccountRow {
    fn from(a: &CustomerAccount) -> AccountRow {
        AccountRow {
            id: a.id.clone(),
            bl_r_minor: a.bl_r,
            bl_a_minor: a.bl_a,
            cap_minor: a.cap.finite(),
            floor_minor: a.floor,
        }
    }
}

impl From<&AccountRow> for CustomerAccount {
    fn from(r: &AccountRow) -> CustomerAccount {
        CustomerAccount {
            id: r.id.clone(),
            bl_r: r.bl_r_minor,
            bl_a: r.bl_a_minor,
            cap: match r.cap_minor {
                Some(c) => Cap::Finite(c),
                None => Cap::Infinite,
            },
            floor: r.floor_minor,
        }
    }
}

impl From<&Receivable> for ReceivableRow {
    fn from(r: &Receivable) -> ReceivableRow {
        ReceivableRow {
            id: r.id.clone(),
            debtor: r.debtor.clone(),
            creditor: r.creditor.clone(),
            amount_minor: r.amount,
            indate: r.indate,
            duedate: r.duedate,
            life_days: r.life_days,
        }
    }
}

impl From<&ReceivableRow> for Receivable {
    fn from(r: &ReceivableRow) -> Receivable {
        Receivable {
            id: r.id.clone(),
            debtor: r.debtor.clone(),
            creditor: r.creditor.clone(),
            amount: r.amount_minor,
            indate: r.indate,
            duedate: r.duedate,
            life_days: r.life_days,
        }
    }
}

impl InstanceFile {
    pub fn into_parts(&self) -> Result<(AccountBook, Vec<Receivable>), BuildError> {
        let book = AccountBook::from_accounts(self.accounts.iter().map(CustomerAccount::from))?;
        let recs = self.receivables.iter().map(Receivable::from).collect();
        Ok((book, recs))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub fn parse_instance_json(text: &str) -> Result<InstanceFile, FormatError> {
    Ok(serde_json::from_str(text)?)
}

pub fn instance_to_json(instance: &InstanceFile) -> String {
    serde_json::to_string_pretty(instance).expect("instance serializes")
}

const ACCOUNT_HEADER: &str = "id,bl_r_minor,bl_a_minor,cap_minor,floor_minor";
const RECEIVABLE_HEADER: &str = "id,debtor,creditor,amount_minor,indate,duedate,life_days";

fn csv_fields(line: &str) -> Vec<&str> {
    line.split(',').map(str::trim).collect()
}

fn err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Csv {
        line,
        message: message.into(),
    }
}

pub fn parse_accounts_csv(text: &str) -> Result<Vec<AccountRow>, FormatError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == ACCOUNT_HEADER => {}
        _ => return Err(err(1, format!("expected header {ACCOUNT_HEADER:?}"))),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let f = csv_fields(line);
        if f.len() != 5 {
            return Err(err(lineno, format!("expected 5 fields, found {}", f.len())));
        }
        let money = |s: &str, what: &str| -> Result<Money, FormatError> {
            s.parse()
                .map_err(|_| err(lineno, format!("bad {what} {s:?}")))
        };
        rows.push(AccountRow {
            id: f[0].to_string(),
            bl_r_minor: money(f[1], "bl_r_minor")?,
            bl_a_minor: money(f[2], "bl_a_minor")?,
            cap_minor: if f[3].is_empty() {
                None
            } else {
                Some(money(f[3], "cap_minor")?)
            },
            floor_minor: money(f[4], "floor_minor")?,
        });
    }
    Ok(rows)
}

pub fn parse_receivables_csv(text: &str) -> Result<Vec<ReceivableRow>, FormatError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == RECEIVABLE_HEADER => {}
        _ => return Err(err(1, format!("expected header {RECEIVABLE_HEADER:?}"))),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let f = csv_fields(line);
        if f.len() != 7 {
            return Err(err(lineno, format!("expected 7 fields, found {}", f.len())));
        }
        let date = |s: &str, what: &str| -> Result<Date, FormatError> {
            s.parse()
                .map_err(|_| err(lineno, format!("bad {what} {s:?}")))
        };
        rows.push(ReceivableRow {
            id: f[0].to_string(),
            debtor: f[1].to_string(),
            creditor: f[2].to_string(),
            amount_minor: f[3]
                .parse()
                .map_err(|_| err(lineno, format!("bad amount_minor {:?}", f[3])))?,
            indate: date(f[4], "indate")?,
            duedate: date(f[5], "duedate")?,
            life_days: f[6]
                .parse()
                .map_err(|_| err(lineno, format!("bad life_days {:?}", f[6])))?,
        });
    }
    Ok(rows)
}

pub fn accounts_to_csv(rows: &[AccountRow]) -> String {
    let mut out = String::from(ACCOUNT_HEADER);
    out.push('\n');
    for r in rows {
        let cap = r.cap_minor.map(|c| c.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.id, r.bl_r_minor, r.bl_a_minor, cap, r.floor_minor
        ));
    }
    out
}

pub fn receivables_to_csv(rows: &[ReceivableRow]) -> String {
    let mut out = String::from(RECEIVABLE_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.id, r.debtor, r.creditor, r.amount_minor, r.indate, r.duedate, r.life_days
        ));
    }
    out
}
