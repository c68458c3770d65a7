//! Sponsor-rooted propagation networks.
//!
//! A [`Network`] is the game instance: a sponsor, the agents that may be
//! informed, and the timestamped propagation events between them. Layering
//! (BFS depth, kept edges) lives in [`layering`]; the single-agent-layer
//! lookups used by the scheme live in [`context`].

pub mod context;
pub mod layering;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use context::{single_layer_context, SingleLayerContext};
pub use layering::{compute_layering, validate_network, Layering, ValidationReport};

/// Opaque agent identifier. Ordering is lexicographic and is used for every
/// deterministic tie-break in the crate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(String);

impl AgentId {
    pub fn new(id: impl Into<String>) -> Self {
        AgentId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AgentId {
    fn from(s: &str) -> Self {
        AgentId(s.to_owned())
    }
}

impl From<String> for AgentId {
    fn from(s: String) -> Self {
        AgentId(s)
    }
}

/// A directed propagation `from -> to` that happened at time `t`.
///
/// Only the relative order of timestamps carries meaning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationEvent {
    pub from: AgentId,
    pub to: AgentId,
    pub t: f64,
}

impl PropagationEvent {
    pub fn new(from: impl Into<AgentId>, to: impl Into<AgentId>, t: f64) -> Self {
        PropagationEvent {
            from: from.into(),
            to: to.into(),
            t,
        }
    }

    /// Total order on `(t, from, to)`.
    pub fn arrival_cmp(&self, other: &Self) -> Ordering {
        self.t
            .total_cmp(&other.t)
            .then_with(|| self.from.cmp(&other.from))
            .then_with(|| self.to.cmp(&other.to))
    }

    pub fn key(&self) -> (AgentId, AgentId) {
        (self.from.clone(), self.to.clone())
    }
}

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("self-loop on agent {0}")]
    SelfLoop(AgentId),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(AgentId, AgentId),
    #[error("edge {from} -> {to} has non-finite timestamp")]
    NonFiniteTimestamp { from: AgentId, to: AgentId },
    #[error("edge references unknown agent {0}")]
    UnknownAgent(AgentId),
    #[error("edge {from} -> {to} is not owned by {owner}")]
    EdgeNotOwned { owner: AgentId, from: AgentId, to: AgentId },
    #[error("edge {0} -> {1} is not in the network")]
    EdgeNotFound(AgentId, AgentId),
    #[error("malformed network file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Sponsor-rooted directed graph with per-edge arrival timestamps.
///
/// `agents` never contains the sponsor. Edges are stored in input order; every
/// consumer that needs an order sorts by [`PropagationEvent::arrival_cmp`].
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    sponsor: AgentId,
    agents: BTreeSet<AgentId>,
    edges: Vec<PropagationEvent>,
}

impl Network {
    pub fn new(
        sponsor: impl Into<AgentId>,
        agents: impl IntoIterator<Item = AgentId>,
        edges: Vec<PropagationEvent>,
    ) -> Result<Self, NetworkError> {
        let sponsor = sponsor.into();
        let agents: BTreeSet<AgentId> = agents.into_iter().filter(|a| *a != sponsor).collect();
        let mut seen = BTreeSet::new();
        for e in &edges {
            if e.from == e.to {
                return Err(NetworkError::SelfLoop(e.from.clone()));
            }
            if !e.t.is_finite() {
                return Err(NetworkError::NonFiniteTimestamp {
                    from: e.from.clone(),
                    to: e.to.clone(),
                });
            }
            for end in [&e.from, &e.to] {
                if *end != sponsor && !agents.contains(end) {
                    return Err(NetworkError::UnknownAgent(end.clone()));
                }
            }
            if !seen.insert(e.key()) {
                return Err(NetworkError::DuplicateEdge(e.from.clone(), e.to.clone()));
            }
        }
        Ok(Network { sponsor, agents, edges })
    }

    /// Builds a network from `(from, to)` pairs; agents are inferred and the
    /// list position becomes the timestamp.
    pub fn from_pairs(sponsor: &str, pairs: &[(&str, &str)]) -> Result<Self, NetworkError> {
        let agents: BTreeSet<AgentId> = pairs
            .iter()
            .flat_map(|(a, b)| [AgentId::from(*a), AgentId::from(*b)])
            .collect();
        let edges = pairs
            .iter()
            .enumerate()
            .map(|(i, (a, b))| PropagationEvent::new(*a, *b, i as f64))
            .collect();
        Network::new(sponsor, agents, edges)
    }

    pub fn sponsor(&self) -> &AgentId {
        &self.sponsor
    }

    pub fn agents(&self) -> &BTreeSet<AgentId> {
        &self.agents
    }

    pub fn edges(&self) -> &[PropagationEvent] {
        &self.edges
    }

    /// Out-edges of `owner`, sorted by arrival.
    pub fn out_edges(&self, owner: &AgentId) -> Vec<&PropagationEvent> {
        let mut out: Vec<_> = self.edges.iter().filter(|e| e.from == *owner).collect();
        out.sort_by(|a, b| a.arrival_cmp(b));
        out
    }

    /// Same graph with every timestamp passed through `f`.
    pub fn retimed(&self, f: impl Fn(&PropagationEvent) -> f64) -> Result<Self, NetworkError> {
        let edges = self
            .edges
            .iter()
            .map(|e| PropagationEvent { t: f(e), ..e.clone() })
            .collect();
        Network::new(self.sponsor.clone(), self.agents.iter().cloned(), edges)
    }

    /// Agents reachable from the sponsor over all edges (sponsor excluded).
    pub fn reachable(&self) -> BTreeSet<AgentId> {
        let mut adj: BTreeMap<&AgentId, Vec<&AgentId>> = BTreeMap::new();
        for e in &self.edges {
            adj.entry(&e.from).or_default().push(&e.to);
        }
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([&self.sponsor]);
        while let Some(u) = queue.pop_front() {
            for &v in adj.get(u).map(Vec::as_slice).unwrap_or_default() {
                if *v != self.sponsor && seen.insert(v.clone()) {
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    /// Counterfactual graph where `owner` withholds the edges in `hidden`.
    ///
    /// The result keeps only sponsor-reachable agents and the edges among
    /// them. `owner`'s own reachability never depends on its out-edges.
    pub fn hide_edges(&self, owner: &AgentId, hidden: &BTreeSet<(AgentId, AgentId)>) -> Result<Network, NetworkError> {
        for (from, to) in hidden {
            if from != owner {
                return Err(NetworkError::EdgeNotOwned {
                    owner: owner.clone(),
                    from: from.clone(),
                    to: to.clone(),
                });
            }
            if !self.edges.iter().any(|e| e.from == *from && e.to == *to) {
                return Err(NetworkError::EdgeNotFound(from.clone(), to.clone()));
            }
        }
        if hidden.is_empty() {
            return Ok(self.clone());
        }
        let remaining: Vec<PropagationEvent> = self
            .edges
            .iter()
            .filter(|e| !hidden.contains(&e.key()))
            .cloned()
            .collect();
        let pruned = Network {
            sponsor: self.sponsor.clone(),
            agents: self.agents.clone(),
            edges: remaining,
        };
        let keep = pruned.reachable();
        let edges = pruned
            .edges
            .into_iter()
            .filter(|e| {
                (e.from == self.sponsor || keep.contains(&e.from)) && (e.to == self.sponsor || keep.contains(&e.to))
            })
            .collect();
        Ok(Network {
            sponsor: self.sponsor.clone(),
            agents: keep,
            edges,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, NetworkError> {
        let file: NetworkFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self, NetworkError> {
        let text = std::fs::read_to_string(path)?;
        Network::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let mut out =
            serde_json::to_string_pretty(&NetworkFile::from(self)).expect("network serialization is infallible");
        out.push('\n');
        out
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct NetworkFile {
    sponsor: AgentId,
    #[serde(default)]
    agents: Vec<AgentId>,
    #[serde(default)]
    edges: Vec<EdgeRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeRecord {
    from: AgentId,
    to: AgentId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t: Option<f64>,
}

impl TryFrom<NetworkFile> for Network {
    type Error = NetworkError;

    fn try_from(file: NetworkFile) -> Result<Self, Self::Error> {
        // Missing timestamps fall back to list position.
        let edges = file
            .edges
            .into_iter()
            .enumerate()
            .map(|(i, e)| PropagationEvent {
                from: e.from,
                to: e.to,
                t: e.t.unwrap_or(i as f64),
            })
            .collect();
        Network::new(file.sponsor, file.agents, edges)
    }
}

impl From<&Network> for NetworkFile {
    fn from(net: &Network) -> Self {
        NetworkFile {
            sponsor: net.sponsor.clone(),
            agents: net.agents.iter().cloned().collect(),
            edges: net
                .edges
                .iter()
                .map(|e| EdgeRecord {
                    from: e.from.clone(),
                    to: e.to.clone(),
                    t: Some(e.t),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
pub(crate) fn edge_set(pairs: &[(&str, &str)]) -> BTreeSet<(AgentId, AgentId)> {
    pairs
        .iter()
        .map(|(a, b)| (AgentId::from(*a), AgentId::from(*b)))
        .collect()
}
