use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::{CanonicalMechanism, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Holds with equality up to the boundary tolerance; counts as satisfied.
    Boundary,
}

impl Status {
    pub fn satisfied(self) -> bool {
        !matches!(self, Status::Fail)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    Scalar(f64),
    Point(Point),
    Masses(BTreeMap<String, f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionItem {
    pub id: String,
    /// Part of the necessary battery (as opposed to the sufficiency additions).
    pub necessary: bool,
    pub status: Status,
    /// The quantity compared against zero (a margin, a minimum, or a residual).
    pub value: f64,
    pub witness: Option<Witness>,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    NecessaryFailed,
    NecessaryPassedOnly,
    SufficientPassed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub mechanism: CanonicalMechanism,
    pub items: Vec<ConditionItem>,
    pub verdict: Verdict,
    /// `|μ(X)|`, a check on quadrature consistency.
    pub total_mass_residual: f64,
}

impl ConditionReport {
    pub fn new(mechanism: CanonicalMechanism, items: Vec<ConditionItem>, total_mass_residual: f64) -> Self {
        let verdict = verdict_of(&items);
        ConditionReport {
            mechanism,
            items,
            verdict,
            total_mass_residual,
        }
    }

    pub fn item(&self, id: &str) -> Option<&ConditionItem> {
        self.items.iter().find(|i| i.id == id)
    }

    pub fn failed_ids(&self) -> Vec<&str> {
        self.items
            .iter()
            .filter(|i| !i.status.satisfied())
            .map(|i| i.id.as_str())
            .collect()
    }
}

pub fn verdict_of(items: &[ConditionItem]) -> Verdict {
    if items.iter().any(|i| i.necessary && !i.status.satisfied()) {
        Verdict::NecessaryFailed
    } else if items.iter().any(|i| !i.status.satisfied()) {
        Verdict::NecessaryPassedOnly
    } else {
        Verdict::SufficientPassed
    }
}
