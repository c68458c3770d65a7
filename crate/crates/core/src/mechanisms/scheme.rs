//! Budget distribution scheme.
//!
//! The sponsor splits the budget evenly over the first layer. Layers are then
//! processed top-down. Whenever an agent informs a child, every co-layer
//! agent gives up a fraction `alpha` of its current base reward `V_b`; a
//! share `beta` of that goes to the propagating agent's bonus `V_h` and the
//! rest becomes the child's starting base reward `b'`.
//!
//! An agent alone in its layer has nobody to tax. It taxes earlier leaf
//! agents instead or, failing that, the parents of the nearest ancestor with
//! several parents, damped by `m * 2^q`. Both reach back into layers that
//! were already processed, so rewards are read from the ledger only once
//! every layer is done.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    ChildOrdering, LayerAccount, Ledger, MechanismConfig, MechanismError, RewardVector, SchemeConfig, TraceEvent,
    Transfer,
};
use crate::network::context::{single_layer_context, ContextError, SingleLayerContext};
use crate::network::{compute_layering, AgentId, Layering, Network};

/// Full scheme execution: the reward vector plus a ledger snapshot after
/// initialization (`snapshots[0]`) and after each layer `l` (`snapshots[l]`).
#[derive(Debug, Clone)]
pub struct SchemeRun {
    pub rewards: RewardVector,
    pub snapshots: Vec<Ledger>,
}

pub fn run_scheme(net: &Network, cfg: &SchemeConfig) -> Result<RewardVector, MechanismError> {
    execute_scheme(net, cfg).map(|run| run.rewards)
}

pub fn execute_scheme(net: &Network, cfg: &SchemeConfig) -> Result<SchemeRun, MechanismError> {
    let lay = compute_layering(net);
    let first = lay.layer(1);
    if first.len() < 2 {
        return Err(MechanismError::SchemeRequiresTwoFirstLayerAgents { found: first.len() });
    }

    let mut ledger = Ledger::new();
    let mut trace = Vec::new();
    let seed = cfg.budget() / first.len() as f64;
    for agent in first {
        ledger.entry(agent).base = seed;
        trace.push(TraceEvent::Init {
            agent: agent.clone(),
            amount: seed,
        });
    }
    // Everyone reachable gets a ledger entry, even if it never receives value.
    for agent in lay.agents() {
        ledger.entry(agent);
    }

    let mut snapshots = vec![ledger.clone()];
    let mut layers = Vec::with_capacity(lay.max_depth());
    for l in 1..=lay.max_depth() {
        let members = lay.layer(l);
        let incoming: f64 = members.iter().map(|a| ledger.base(a)).sum();
        let single = members.len() == 1;
        if single {
            let transfers = distribute_single_agent_layer(&mut ledger, &lay, &members[0], cfg)?;
            trace.extend(transfers);
        } else {
            let transfers = distribute_adjacent_layers(&mut ledger, &lay, l, cfg);
            trace.extend(transfers.into_iter().map(TraceEvent::Transfer));
        }
        layers.push(LayerAccount {
            layer: l,
            agents: members.to_vec(),
            incoming,
            retained: members.iter().map(|a| ledger.get(a).total()).sum(),
            passed_down: lay
                .layer(l + 1)
                .iter()
                .map(|a| ledger.base(a))
                .fold(0.0, |acc, b| acc + b),
            reverted: 0.0,
            single_agent: single,
        });
        snapshots.push(ledger.clone());
    }

    let rewards: BTreeMap<AgentId, f64> = lay.agents().map(|a| (a.clone(), ledger.get(a).total())).collect();
    Ok(SchemeRun {
        rewards: RewardVector {
            config: MechanismConfig::Scheme(*cfg),
            rewards,
            sponsor_remainder: 0.0,
            layers,
            ledger,
            trace,
        },
        snapshots,
    })
}

fn ordered_children(lay: &Layering, l: usize, ordering: ChildOrdering) -> Vec<AgentId> {
    let mut children: Vec<AgentId> = lay.layer(l + 1).to_vec();
    match ordering {
        ChildOrdering::Arrival => {
            children.sort_by(|a, b| {
                let ta = lay.kept_parents(a)[0].t;
                let tb = lay.kept_parents(b)[0].t;
                ta.total_cmp(&tb).then_with(|| a.cmp(b))
            });
        }
        ChildOrdering::Identifier => {}
        ChildOrdering::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (l as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            children.shuffle(&mut rng);
        }
    }
    children
}

fn ordered_parents(lay: &Layering, child: &AgentId, ordering: ChildOrdering) -> Vec<AgentId> {
    let mut parents: Vec<AgentId> = lay.kept_parents(child).iter().map(|e| e.from.clone()).collect();
    if ordering == ChildOrdering::Identifier {
        parents.sort();
    }
    parents
}

/// Processes the children of multi-agent layer `l`.
///
/// For each child `j` and each kept parent `p` of `j`, every other agent
/// `i` of the layer pays `alpha * V_b(i)`: `p` gains `alpha * beta` of it as
/// bonus and `j` gains `alpha * (1 - beta)` as base reward.
pub fn distribute_adjacent_layers(ledger: &mut Ledger, lay: &Layering, l: usize, cfg: &SchemeConfig) -> Vec<Transfer> {
    let (alpha, beta) = (cfg.alpha(), cfg.beta());
    let members = lay.layer(l);
    let mut out = Vec::new();
    for child in ordered_children(lay, l, cfg.ordering()) {
        for parent in ordered_parents(lay, &child, cfg.ordering()) {
            for payer in members.iter().filter(|a| **a != parent) {
                let before = ledger.base(payer);
                let after = before * (1.0 - alpha);
                let parent_gain = alpha * beta * before;
                let child_gain = alpha * (1.0 - beta) * before;
                ledger.entry(payer).base = after;
                ledger.entry(&parent).bonus += parent_gain;
                ledger.entry(&child).base += child_gain;
                out.push(Transfer {
                    layer: l,
                    child: child.clone(),
                    parent: parent.clone(),
                    payer: payer.clone(),
                    payer_loss: before - after,
                    parent_gain,
                    child_gain,
                });
            }
        }
    }
    out
}

/// Processes the children of `agent`, which is alone in its layer.
///
/// The leaf set or anchor ancestor is resolved once for the whole layer.
pub fn distribute_single_agent_layer(
    ledger: &mut Ledger,
    lay: &Layering,
    agent: &AgentId,
    cfg: &SchemeConfig,
) -> Result<Vec<TraceEvent>, MechanismError> {
    let l = match lay.depth(agent) {
        Some(d) if d > 0 && lay.layer(d).len() == 1 => d,
        _ => return Err(ContextError::NotSingleAgentLayer(agent.clone()).into()),
    };
    let children = ordered_children(lay, l, cfg.ordering());
    if children.is_empty() {
        return Ok(Vec::new());
    }
    let (alpha, beta) = (cfg.alpha(), cfg.beta());
    let mut out = Vec::new();

    match single_layer_context(lay, agent)? {
        SingleLayerContext::Leaves(leaves) => {
            for child in &children {
                for leaf in &leaves {
                    let before = ledger.base(leaf);
                    let after = before * (1.0 - alpha);
                    let parent_gain = alpha * beta * before;
                    let child_gain = alpha * (1.0 - beta) * before;
                    ledger.entry(leaf).base = after;
                    ledger.entry(agent).bonus += parent_gain;
                    ledger.entry(child).base += child_gain;
                    out.push(TraceEvent::LeafTransfer(Transfer {
                        layer: l,
                        child: child.clone(),
                        parent: agent.clone(),
                        payer: leaf.clone(),
                        payer_loss: before - after,
                        parent_gain,
                        child_gain,
                    }));
                }
            }
        }
        ctx @ SingleLayerContext::Ancestor { .. } => {
            let SingleLayerContext::Ancestor { ref anchor, .. } = ctx else {
                unreachable!()
            };
            let rate = alpha / ctx.divisor().expect("ancestor context has a divisor");
            let payers = ordered_parents(lay, anchor, cfg.ordering());
            for child in &children {
                for payer in &payers {
                    let before = ledger.base(payer);
                    let after = before * (1.0 - rate);
                    let parent_gain = rate * before * beta;
                    let child_gain = rate * before * (1.0 - beta);
                    ledger.entry(payer).base = after;
                    ledger.entry(agent).bonus += parent_gain;
                    ledger.entry(child).base += child_gain;
                    out.push(TraceEvent::AncestorTransfer(Transfer {
                        layer: l,
                        child: child.clone(),
                        parent: agent.clone(),
                        payer: payer.clone(),
                        payer_loss: before - after,
                        parent_gain,
                        child_gain,
                    }));
                }
            }
        }
    }
    Ok(out)
}

/// What a layer keeps and what it hands to the next layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerTotals {
    pub retained: f64,
    pub passed_down: f64,
}

impl LayerTotals {
    pub fn max_abs_diff(&self, other: &LayerTotals) -> f64 {
        (self.retained - other.retained)
            .abs()
            .max((self.passed_down - other.passed_down).abs())
    }
}

/// Closed-form totals of multi-agent layer `l`, given the ledger before the
/// layer was processed:
///
/// ```text
/// retained    = beta * sum b'_i + (1 - beta) * sum (1 - alpha)^{n_-i} b'_i
/// passed_down = (1 - beta) * sum [1 - (1 - alpha)^{n_-i}] b'_i
/// ```
///
/// `n_-i` is the number of kept edges leaving the other agents of the layer.
pub fn scheme_layer_total(lay: &Layering, l: usize, cfg: &SchemeConfig, before: &Ledger) -> LayerTotals {
    let (alpha, beta) = (cfg.alpha(), cfg.beta());
    let members = lay.layer(l);
    let informed: usize = members.iter().map(|a| lay.informed_count(a)).sum();
    let mut seeded = 0.0;
    let mut surviving = 0.0;
    for agent in members {
        let b = before.base(agent);
        let others = informed - lay.informed_count(agent);
        seeded += b;
        surviving += (1.0 - alpha).powi(others as i32) * b;
    }
    LayerTotals {
        retained: beta * seeded + (1.0 - beta) * surviving,
        passed_down: (1.0 - beta) * (seeded - surviving),
    }
}

/// The same totals as measured from the ledger right after layer `l`.
pub fn measured_layer_total(lay: &Layering, l: usize, after: &Ledger) -> LayerTotals {
    LayerTotals {
        retained: lay.layer(l).iter().map(|a| after.get(a).total()).sum(),
        passed_down: lay
            .layer(l + 1)
            .iter()
            .map(|a| after.base(a))
            .fold(0.0, |acc, b| acc + b),
    }
}
