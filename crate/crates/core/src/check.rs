//! Pass/fail records for theorem-backed inequalities.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    NotApplicable,
}

impl Outcome {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }

    pub fn is_fail(self) -> bool {
        self == Outcome::Fail
    }
}

/// One asserted inequality. `anchor` is the inequality in formula form, so a
/// failing record says exactly which statement broke. `lhs`/`rhs` are for
/// display; the outcome itself is decided in exact integer arithmetic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub anchor: String,
    pub lhs: f64,
    pub rhs: f64,
    pub outcome: Outcome,
}

impl CheckRecord {
    pub fn new(name: &str, anchor: &str, lhs: f64, rhs: f64, ok: bool) -> Self {
        CheckRecord {
            name: name.to_string(),
            anchor: anchor.to_string(),
            lhs,
            rhs,
            outcome: Outcome::from_bool(ok),
        }
    }

    pub fn not_applicable(name: &str, anchor: &str, lhs: f64, rhs: f64) -> Self {
        CheckRecord {
            name: name.to_string(),
            anchor: anchor.to_string(),
            lhs,
            rhs,
            outcome: Outcome::NotApplicable,
        }
    }

    pub fn passed(&self) -> bool {
        self.outcome == Outcome::Pass
    }
}

pub fn any_failed(records: &[CheckRecord]) -> bool {
    records.iter().any(|r| r.outcome.is_fail())
}
