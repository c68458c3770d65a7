//! BFS layering and the kept (layer-respecting) edge structure.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use super::{AgentId, Network, PropagationEvent};
use crate::mechanisms::MechanismConfig;

/// Depth labels, layer sets and kept edges of a network.
///
/// An edge `(u, v)` is kept iff both ends are reachable and
/// `depth(v) == depth(u) + 1`. Only kept edges carry rewards.
#[derive(Debug, Clone, PartialEq)]
pub struct Layering {
    sponsor: AgentId,
    depth: BTreeMap<AgentId, usize>,
    layers: Vec<Vec<AgentId>>,
    kept: Vec<PropagationEvent>,
    children: BTreeMap<AgentId, Vec<PropagationEvent>>,
    parents: BTreeMap<AgentId, Vec<PropagationEvent>>,
    dropped_edges: Vec<PropagationEvent>,
    unreachable: Vec<AgentId>,
}

impl Layering {
    pub fn sponsor(&self) -> &AgentId {
        &self.sponsor
    }

    /// Depth of `id`; the sponsor has depth 0, unreachable agents `None`.
    pub fn depth(&self, id: &AgentId) -> Option<usize> {
        if *id == self.sponsor {
            Some(0)
        } else {
            self.depth.get(id).copied()
        }
    }

    pub fn depths(&self) -> &BTreeMap<AgentId, usize> {
        &self.depth
    }

    /// Number of non-empty layers (`l_max`).
    pub fn max_depth(&self) -> usize {
        self.layers.len()
    }

    /// Layer `l`, 1-based. Empty slice past `l_max`.
    pub fn layer(&self, l: usize) -> &[AgentId] {
        if l == 0 {
            return &[];
        }
        self.layers.get(l - 1).map(Vec::as_slice).unwrap_or_default()
    }

    pub fn layers(&self) -> &[Vec<AgentId>] {
        &self.layers
    }

    /// Reachable non-sponsor agents, by layer then id.
    pub fn agents(&self) -> impl Iterator<Item = &AgentId> {
        self.layers.iter().flatten()
    }

    pub fn agent_count(&self) -> usize {
        self.depth.len()
    }

    /// Kept edges sorted by `(t, from, to)`.
    pub fn kept_edges(&self) -> &[PropagationEvent] {
        &self.kept
    }

    pub fn dropped_edges(&self) -> &[PropagationEvent] {
        &self.dropped_edges
    }

    pub fn unreachable(&self) -> &[AgentId] {
        &self.unreachable
    }

    /// Kept out-edges of `id`, by arrival.
    pub fn kept_children(&self, id: &AgentId) -> &[PropagationEvent] {
        self.children.get(id).map(Vec::as_slice).unwrap_or_default()
    }

    /// Kept in-edges of `id`, by arrival.
    pub fn kept_parents(&self, id: &AgentId) -> &[PropagationEvent] {
        self.parents.get(id).map(Vec::as_slice).unwrap_or_default()
    }

    /// `n_i`: agents informed by `id` through kept edges.
    pub fn informed_count(&self, id: &AgentId) -> usize {
        self.kept_children(id).len()
    }

    pub fn is_kept(&self, from: &AgentId, to: &AgentId) -> bool {
        self.children.get(from).is_some_and(|c| c.iter().any(|e| e.to == *to))
    }

    /// Kept edges as `(from, to)` pairs, for structural comparison.
    pub fn kept_pairs(&self) -> BTreeSet<(AgentId, AgentId)> {
        self.kept.iter().map(PropagationEvent::key).collect()
    }
}

/// BFS layering of `net`. Pure and independent of edge list order.
pub fn compute_layering(net: &Network) -> Layering {
    let sponsor = net.sponsor().clone();
    let mut adj: BTreeMap<&AgentId, BTreeSet<&AgentId>> = BTreeMap::new();
    for e in net.edges() {
        adj.entry(&e.from).or_default().insert(&e.to);
    }

    let mut depth: BTreeMap<AgentId, usize> = BTreeMap::new();
    let mut queue = VecDeque::from([(&sponsor, 0usize)]);
    while let Some((u, d)) = queue.pop_front() {
        for &v in adj.get(u).into_iter().flatten() {
            if *v != sponsor && !depth.contains_key(v) {
                depth.insert(v.clone(), d + 1);
                queue.push_back((v, d + 1));
            }
        }
    }

    let max = depth.values().copied().max().unwrap_or(0);
    let mut layers = vec![Vec::new(); max];
    for (id, &d) in &depth {
        layers[d - 1].push(id.clone());
    }

    let depth_of = |id: &AgentId| {
        if *id == sponsor {
            Some(0)
        } else {
            depth.get(id).copied()
        }
    };

    let mut sorted: Vec<PropagationEvent> = net.edges().to_vec();
    sorted.sort_by(|a, b| a.arrival_cmp(b));
    let mut kept = Vec::new();
    let mut dropped_edges = Vec::new();
    for e in sorted {
        match (depth_of(&e.from), depth_of(&e.to)) {
            (Some(du), Some(dv)) if dv == du + 1 => kept.push(e),
            _ => dropped_edges.push(e),
        }
    }

    let mut children: BTreeMap<AgentId, Vec<PropagationEvent>> = BTreeMap::new();
    let mut parents: BTreeMap<AgentId, Vec<PropagationEvent>> = BTreeMap::new();
    for e in &kept {
        children.entry(e.from.clone()).or_default().push(e.clone());
        parents.entry(e.to.clone()).or_default().push(e.clone());
    }

    let unreachable = net
        .agents()
        .iter()
        .filter(|a| !depth.contains_key(*a))
        .cloned()
        .collect();

    Layering {
        sponsor,
        depth,
        layers,
        kept,
        children,
        parents,
        dropped_edges,
        unreachable,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("network has no agents besides the sponsor")]
    EmptyNetwork,
    #[error("the budget distribution scheme needs at least two agents in the first layer (found {found})")]
    SchemeRequiresTwoFirstLayerAgents { found: usize },
}

/// Outcome of a successful validation: the input is usable, possibly with
/// parts of it ignored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.warnings.is_empty()
    }
}

/// Checks that `net` is a valid input for the mechanism described by `cfg`.
pub fn validate_network(net: &Network, cfg: &MechanismConfig) -> Result<ValidationReport, ValidationError> {
    if net.agents().is_empty() {
        return Err(ValidationError::EmptyNetwork);
    }
    let lay = compute_layering(net);
    if matches!(cfg, MechanismConfig::Scheme(_)) && lay.layer(1).len() < 2 {
        return Err(ValidationError::SchemeRequiresTwoFirstLayerAgents {
            found: lay.layer(1).len(),
        });
    }
    let warnings = lay
        .unreachable()
        .iter()
        .map(|a| format!("{a} unreachable, dropped"))
        .collect();
    Ok(ValidationReport { warnings })
}
