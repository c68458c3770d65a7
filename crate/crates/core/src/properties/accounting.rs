use serde::Serialize;

use super::{Property, PropertyReport, Violation, ACCOUNTING_TOLERANCE};
use crate::mechanisms::{Ledger, MechanismConfig, MechanismError, RewardVector, TraceEvent};
use crate::network::Network;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccountingReport {
    pub feasibility: PropertyReport,
    pub wbb: PropertyReport,
    pub bb: PropertyReport,
    pub ir: PropertyReport,
}

impl AccountingReport {
    pub fn into_reports(self) -> Vec<PropertyReport> {
        vec![self.feasibility, self.wbb, self.bb, self.ir]
    }
}

pub fn check_accounting(net: &Network, cfg: &MechanismConfig) -> Result<AccountingReport, MechanismError> {
    cfg.run(net).map(|rv| accounting_of(&rv))
}

/// Feasibility, WBB, BB and IR of an already computed reward vector.
pub fn accounting_of(rv: &RewardVector) -> AccountingReport {
    let budget = rv.budget();
    let tol = ACCOUNTING_TOLERANCE * budget;
    let total = rv.total_rewards() + rv.sponsor_remainder;
    let remainder = rv.sponsor_remainder;

    let sponsor_violation = |what: &str, expected: f64, got: f64| Violation {
        agent: None,
        deviation: what.to_owned(),
        hidden: Vec::new(),
        reward_before: expected,
        reward_after: got,
    };

    let mut feasibility = Vec::new();
    if (total - budget).abs() > tol {
        feasibility.push(sponsor_violation("sum of rewards and remainder", budget, total));
    }
    let mut wbb = Vec::new();
    if remainder < -tol {
        wbb.push(sponsor_violation("sponsor remainder", 0.0, remainder));
    }
    let mut bb = Vec::new();
    if remainder.abs() > tol {
        bb.push(sponsor_violation("sponsor remainder", 0.0, remainder));
    }
    let ir: Vec<Violation> = rv
        .rewards
        .iter()
        .filter(|(_, &r)| r < -tol)
        .map(|(a, &r)| Violation {
            agent: Some(a.clone()),
            deviation: "negative reward".into(),
            hidden: Vec::new(),
            reward_before: 0.0,
            reward_after: r,
        })
        .collect();

    AccountingReport {
        feasibility: PropertyReport::new(Property::Feasibility, 1, ACCOUNTING_TOLERANCE, feasibility),
        wbb: PropertyReport::new(Property::WeakBudgetBalance, 1, ACCOUNTING_TOLERANCE, wbb),
        bb: PropertyReport::new(Property::BudgetBalance, 1, ACCOUNTING_TOLERANCE, bb),
        ir: PropertyReport::new(
            Property::IndividualRationality,
            rv.rewards.len(),
            ACCOUNTING_TOLERANCE,
            ir,
        ),
    }
}

/// Replays the transfer log of `rv` and checks that value is neither created
/// nor destroyed: once the sponsor's seed payments are in, the ledger total
/// equals the budget after every single transfer, and the replayed ledger
/// reproduces the published rewards.
pub fn check_conservation(rv: &RewardVector) -> PropertyReport {
    let budget = rv.budget();
    let tol = ACCOUNTING_TOLERANCE * budget;
    let mut ledger = Ledger::new();
    let mut violations = Vec::new();
    let mut instances = 0;
    let mut seeded = false;

    for (step, event) in rv.trace.iter().enumerate() {
        ledger.apply(event);
        if !matches!(event, TraceEvent::Init { .. }) {
            seeded = true;
        }
        if seeded && event.transfer().is_some() {
            instances += 1;
            let total = ledger.total();
            if (total - budget).abs() > tol {
                violations.push(Violation {
                    agent: None,
                    deviation: format!("ledger total after trace event {step}"),
                    hidden: Vec::new(),
                    reward_before: budget,
                    reward_after: total,
                });
            }
        }
    }

    for (agent, &reward) in &rv.rewards {
        instances += 1;
        let replayed = ledger.get(agent).total();
        if (replayed - reward).abs() > tol {
            violations.push(Violation {
                agent: Some(agent.clone()),
                deviation: "replayed reward".into(),
                hidden: Vec::new(),
                reward_before: reward,
                reward_after: replayed,
            });
        }
    }
    let closing = ledger.total() + rv.sponsor_remainder;
    instances += 1;
    if (closing - budget).abs() > tol {
        violations.push(Violation {
            agent: None,
            deviation: "replayed total plus remainder".into(),
            hidden: Vec::new(),
            reward_before: budget,
            reward_after: closing,
        });
    }
    PropertyReport::new(Property::Conservation, instances, ACCOUNTING_TOLERANCE, violations)
}
