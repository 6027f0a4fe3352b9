//! Machine-readable run reports.

use serde::{Deserialize, Serialize};
use settle_core::Money;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Parameters {
    pub algo: String,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "Lp")]
    pub lp: usize,
    #[serde(rename = "H")]
    pub h: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "Kp")]
    pub kp: usize,
    pub budget_nodes: u64,
    pub budget_cycles: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cap: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DayReport {
    pub date: String,
    pub algorithm: String,
    pub arc_ids: Vec<String>,
    /// Execution timestamps parallel to `arc_ids`, present for the
    /// ordering algorithms.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamps: Option<Vec<u32>>,
    pub total_minor: Money,
    pub runtime_ms: u64,
    pub truncated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub parameters: Parameters,
    pub days: Vec<DayReport>,
    pub total_minor: Money,
}

impl Report {
    pub fn new(parameters: Parameters, days: Vec<DayReport>) -> Report {
        let total_minor = days.iter().map(|d| d.total_minor).sum();
        Report {
            parameters,
            days,
            total_minor,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
