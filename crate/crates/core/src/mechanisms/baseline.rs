//! Naive mechanisms kept as counterexamples: a fixed per-agent reward (runs
//! over budget) and an even split (punishes propagation).

use std::collections::BTreeMap;

use super::{FixedRewardConfig, Ledger, MechanismConfig, MechanismError, RewardVector, TraceEvent, UniformConfig};
use crate::network::{compute_layering, Network};

/// Every reachable agent gets `reward`; the sponsor absorbs the difference,
/// which goes negative once `n * reward > budget`.
pub fn baseline_fixed_reward(net: &Network, cfg: &FixedRewardConfig) -> RewardVector {
    let lay = compute_layering(net);
    let mut rewards = BTreeMap::new();
    let mut trace = Vec::new();
    for (l, members) in lay.layers().iter().enumerate() {
        for agent in members {
            rewards.insert(agent.clone(), cfg.reward());
            trace.push(TraceEvent::Allocate {
                layer: l + 1,
                agent: agent.clone(),
                amount: cfg.reward(),
            });
        }
    }
    let n = rewards.len() as f64;
    RewardVector {
        config: MechanismConfig::Fixed(*cfg),
        rewards,
        sponsor_remainder: cfg.budget() - n * cfg.reward(),
        layers: Vec::new(),
        ledger: Ledger::default(),
        trace,
    }
}

/// `budget / n` to each of the `n` reachable agents.
pub fn baseline_uniform(net: &Network, cfg: &UniformConfig) -> Result<RewardVector, MechanismError> {
    let lay = compute_layering(net);
    let n = lay.agent_count();
    if n == 0 {
        return Err(MechanismError::EmptyNetwork);
    }
    let share = cfg.budget() / n as f64;
    let mut rewards = BTreeMap::new();
    let mut trace = Vec::new();
    for (l, members) in lay.layers().iter().enumerate() {
        for agent in members {
            rewards.insert(agent.clone(), share);
            trace.push(TraceEvent::Allocate {
                layer: l + 1,
                agent: agent.clone(),
                amount: share,
            });
        }
    }
    Ok(RewardVector {
        config: MechanismConfig::Uniform(*cfg),
        rewards,
        sponsor_remainder: 0.0,
        layers: Vec::new(),
        ledger: Ledger::default(),
        trace,
    })
}
