//! Monetary amounts in minor currency units.
//!
//! All engine arithmetic is exact signed 64-bit integer arithmetic over
//! minor units (cents). Caps can be unbounded, which is kept as a
//! distinguished variant rather than a large magic number so that margin
//! arithmetic never overflows.

use serde::{Deserialize, Serialize};

/// Amount in minor currency units (cents).
pub type Money = i64;

/// Largest absolute value accepted for a single amount or balance at
/// ingestion. Keeps every sum the engine ever forms (over at most a few
/// million arcs) comfortably inside `i64`.
pub const MAX_ABS_MONEY: Money = 1 << 40;

/// Upper bound on a receivable balance: a finite margin or no bound at all.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cap {
    Finite(Money),
    Infinite,
}

impl Cap {
    pub fn is_infinite(self) -> bool {
        matches!(self, Cap::Infinite)
    }

    pub fn finite(self) -> Option<Money> {
        match self {
            Cap::Finite(v) => Some(v),
            Cap::Infinite => None,
        }
    }

    /// `self - rhs`, saturating into `Infinite` when unbounded.
    pub fn minus(self, rhs: Money) -> Cap {
        match self {
            Cap::Finite(v) => Cap::Finite(v - rhs),
            Cap::Infinite => Cap::Infinite,
        }
    }

    /// True when `value <= self`.
    pub fn admits(self, value: Money) -> bool {
        match self {
            Cap::Finite(v) => value <= v,
            Cap::Infinite => true,
        }
    }
}

/// Parses a major-unit decimal amount ("123", "123.4", "-0.05") into minor
/// units, scaling by 100 exactly. More than two decimal places, or anything
/// that does not scale exactly, is rejected.
pub fn parse_decimal_major(s: &str) -> Result<Money, MoneyParseError> {
    let s = s.trim();
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, s.strip_prefix('+').unwrap_or(s)),
    };
    if body.is_empty() {
        return Err(MoneyParseError::Empty);
    }
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if frac_part.len() > 2 {
        return Err(MoneyParseError::TooManyDecimals(s.to_string()));
    }
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(MoneyParseError::Empty);
    }
    let digits = |p: &str| p.chars().all(|c| c.is_ascii_digit());
    if !digits(int_part) || !digits(frac_part) {
        return Err(MoneyParseError::Malformed(s.to_string()));
    }
    let int_val: Money = if int_part.is_empty() {
        0
    } else {
        int_part
            .parse()
            .map_err(|_| MoneyParseError::OutOfRange(s.to_string()))?
    };
    let mut frac_val: Money = if frac_part.is_empty() {
        0
    } else {
        frac_part
            .parse()
            .map_err(|_| MoneyParseError::OutOfRange(s.to_string()))?
    };
    if frac_part.len() == 1 {
        frac_val *= 10;
    }
    let minor = int_val
        .checked_mul(100)
        .and_then(|v| v.checked_add(frac_val))
        .ok_or_else(|| MoneyParseError::OutOfRange(s.to_string()))?;
    if minor > MAX_ABS_MONEY {
        return Err(MoneyParseError::OutOfRange(s.to_string()));
    }
    Ok(sign * minor)
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MoneyParseError {
    #[error("empty amount")]
    Empty,
    #[error("amount {0:?} has more than two decimal places")]
    TooManyDecimals(String),
    #[error("amount {0:?} is not a decimal number")]
    Malformed(String),
    #[error("amount {0:?} out of range")]
    OutOfRange(String),
}
