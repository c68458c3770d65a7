//! Starter mechanism: geometric layer budgets split by a weight of `n_i`.

use std::collections::BTreeMap;

use super::{LayerAccount, Ledger, MechanismConfig, RewardVector, StarterConfig, TraceEvent};
use crate::network::{compute_layering, Network};

/// `beta^(l-1) * (1 - beta) * budget`.
pub fn starter_layer_budget(l: usize, cfg: &StarterConfig) -> f64 {
    assert!(l >= 1, "layers are 1-based");
    cfg.beta().powi(l as i32 - 1) * (1.0 - cfg.beta()) * cfg.budget()
}

/// Runs the starter mechanism.
///
/// A layer whose weights sum to zero (nobody in it propagated under
/// `f(n) = n`) returns its budget to the sponsor.
pub fn run_starter(net: &Network, cfg: &StarterConfig) -> RewardVector {
    let lay = compute_layering(net);
    let mut rewards = BTreeMap::new();
    let mut layers = Vec::with_capacity(lay.max_depth());
    let mut trace = Vec::new();
    let mut assigned_to_layers = 0.0;
    let mut reverted_total = 0.0;

    for l in 1..=lay.max_depth() {
        let members = lay.layer(l);
        let layer_budget = starter_layer_budget(l, cfg);
        let weights: Vec<f64> = members
            .iter()
            .map(|a| cfg.split().apply(lay.informed_count(a)))
            .collect();
        let denom: f64 = weights.iter().sum();
        let incoming = cfg.budget() * cfg.beta().powi(l as i32 - 1);

        let mut reverted = 0.0;
        if denom > 0.0 {
            for (agent, w) in members.iter().zip(&weights) {
                let amount = w / denom * layer_budget;
                rewards.insert(agent.clone(), amount);
                trace.push(TraceEvent::Allocate {
                    layer: l,
                    agent: agent.clone(),
                    amount,
                });
            }
        } else {
            for agent in members {
                rewards.insert(agent.clone(), 0.0);
            }
            reverted = layer_budget;
            reverted_total += layer_budget;
            trace.push(TraceEvent::Revert {
                layer: l,
                amount: layer_budget,
            });
        }
        assigned_to_layers += layer_budget;
        layers.push(LayerAccount {
            layer: l,
            agents: members.to_vec(),
            incoming,
            retained: layer_budget - reverted,
            passed_down: incoming - layer_budget,
            reverted,
            single_agent: members.len() == 1,
        });
    }

    RewardVector {
        config: MechanismConfig::Starter(*cfg),
        rewards,
        sponsor_remainder: (cfg.budget() - assigned_to_layers) + reverted_total,
        layers,
        ledger: Ledger::default(),
        trace,
    }
}
