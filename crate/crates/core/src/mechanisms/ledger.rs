//! Per-agent ledgers and the transfer log.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::network::AgentId;

/// Base reward `V_b` and propagation bonus `V_h` of one agent.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct AgentLedger {
    pub base: f64,
    pub bonus: f64,
}

impl AgentLedger {
    pub fn total(&self) -> f64 {
        self.base + self.bonus
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Ledger(BTreeMap<AgentId, AgentLedger>);

impl Ledger {
    pub fn new() -> Self {
        Ledger::default()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, id: &AgentId) -> AgentLedger {
        self.0.get(id).copied().unwrap_or_default()
    }

    pub fn entry(&mut self, id: &AgentId) -> &mut AgentLedger {
        self.0.entry(id.clone()).or_default()
    }

    pub fn base(&self, id: &AgentId) -> f64 {
        self.get(id).base
    }

    pub fn bonus(&self, id: &AgentId) -> f64 {
        self.get(id).bonus
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AgentId, &AgentLedger)> {
        self.0.iter()
    }

    /// `sum (V_b + V_h)` over every agent.
    pub fn total(&self) -> f64 {
        self.0.values().map(AgentLedger::total).sum()
    }

    /// Applies one logged event.
    pub fn apply(&mut self, event: &TraceEvent) {
        match event {
            TraceEvent::Init { agent, amount } => self.entry(agent).base += amount,
            TraceEvent::Transfer(t) | TraceEvent::LeafTransfer(t) | TraceEvent::AncestorTransfer(t) => {
                self.entry(&t.payer).base -= t.payer_loss;
                self.entry(&t.parent).bonus += t.parent_gain;
                self.entry(&t.child).base += t.child_gain;
            }
            TraceEvent::Allocate { agent, amount, .. } => self.entry(agent).base += amount,
            TraceEvent::Revert { .. } => {}
        }
    }
}

/// One taxation step: `payer` loses `payer_loss`, which is split between
/// the propagating `parent` (as bonus) and the newly informed `child`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transfer {
    pub layer: usize,
    pub child: AgentId,
    pub parent: AgentId,
    pub payer: AgentId,
    pub payer_loss: f64,
    pub parent_gain: f64,
    pub child_gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    /// Sponsor seeds a first-layer agent.
    Init { agent: AgentId, amount: f64 },
    /// Co-layer taxation between two adjacent layers.
    Transfer(Transfer),
    /// Single-agent layer taxing an earlier leaf.
    LeafTransfer(Transfer),
    /// Single-agent layer taxing the parents of its anchor ancestor.
    AncestorTransfer(Transfer),
    /// Direct payment (starter and baselines).
    Allocate { layer: usize, agent: AgentId, amount: f64 },
    /// Layer budget returned to the sponsor.
    Revert { layer: usize, amount: f64 },
}

impl TraceEvent {
    pub fn transfer(&self) -> Option<&Transfer> {
        match self {
            TraceEvent::Transfer(t) | TraceEvent::LeafTransfer(t) | TraceEvent::AncestorTransfer(t) => Some(t),
            _ => None,
        }
    }
}
