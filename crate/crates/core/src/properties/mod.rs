//! Certification of mechanism properties.
//!
//! Accounting checks (feasibility, WBB, BB, IR) inspect one reward vector.
//! Propagation incentive compatibility is checked by brute force: every agent
//! withholds every nonempty subset of its out-edges and the mechanism is rerun
//! on the counterfactual graph. Time efficiency delays an agent's propagation
//! past later events and reruns the scheme.

mod accounting;
mod pic;
mod suite;
mod timing;

use serde::Serialize;

use crate::network::AgentId;

pub use accounting::{accounting_of, check_accounting, check_conservation, AccountingReport};
pub use pic::{check_pic, PicError, PicOptions};
pub use suite::{run_property_suite, SuiteEntry, SuiteError, SuiteOptions, SuiteReport, SuiteRow};
pub use timing::{check_time_efficiency, TimeEfficiencyOptions};

/// Relative tolerance (times the budget) for every accounting comparison.
pub const ACCOUNTING_TOLERANCE: f64 = 1e-9;
/// Minimum strict loss (times the budget) demanded by strong PIC.
pub const STRICT_GAP: f64 = 1e-12;
/// Largest out-degree enumerated exhaustively by the PIC checker.
pub const DEFAULT_ENUMERATION_CAP: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Feasibility,
    #[serde(rename = "wbb")]
    WeakBudgetBalance,
    #[serde(rename = "bb")]
    BudgetBalance,
    #[serde(rename = "ir")]
    IndividualRationality,
    #[serde(rename = "pic")]
    PropagationIc,
    #[serde(rename = "spic")]
    StrongPropagationIc,
    TimeEfficiency,
    Conservation,
}

impl Property {
    pub fn name(self) -> &'static str {
        match self {
            Property::Feasibility => "feasibility",
            Property::WeakBudgetBalance => "wbb",
            Property::BudgetBalance => "bb",
            Property::IndividualRationality => "ir",
            Property::PropagationIc => "pic",
            Property::StrongPropagationIc => "spic",
            Property::TimeEfficiency => "time_efficiency",
            Property::Conservation => "conservation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Vacuous,
}

/// One counterexample. `hidden` holds the withheld edges for PIC checks;
/// `deviation` describes any other perturbation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agent: Option<AgentId>,
    pub deviation: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub hidden: Vec<(AgentId, AgentId)>,
    pub reward_before: f64,
    pub reward_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub property: Property,
    pub verdict: Verdict,
    pub instances_checked: usize,
    pub tolerance: f64,
    pub violations: Vec<Violation>,
}

impl PropertyReport {
    pub fn new(property: Property, instances_checked: usize, tolerance: f64, violations: Vec<Violation>) -> Self {
        let verdict = if !violations.is_empty() {
            Verdict::Fail
        } else if instances_checked == 0 {
            Verdict::Vacuous
        } else {
            Verdict::Pass
        };
        PropertyReport {
            property,
            verdict,
            instances_checked,
            tolerance,
            violations,
        }
    }

    /// Pass or vacuous.
    pub fn holds(&self) -> bool {
        self.verdict != Verdict::Fail
    }
}
