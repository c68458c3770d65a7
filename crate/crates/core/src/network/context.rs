//! Where a single-agent layer draws its propagation rewards from.

use thiserror::Error;

use super::{AgentId, Layering};

/// Funding source for the children of an agent that is alone in its layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SingleLayerContext {
    /// Leaf agents in earlier layers (no kept children), excluding ancestors.
    Leaves(Vec<AgentId>),
    /// No such leaves: the nearest agent on the ancestor chain with more than
    /// one kept parent, its parent count, and the damping exponent.
    Ancestor {
        anchor: AgentId,
        parent_count: usize,
        hops: u32,
    },
}

impl SingleLayerContext {
    /// `m * 2^q` for the ancestor case.
    pub fn divisor(&self) -> Option<f64> {
        match self {
            SingleLayerContext::Leaves(_) => None,
            SingleLayerContext::Ancestor { parent_count, hops, .. } => {
                Some(*parent_count as f64 * 2f64.powi(*hops as i32))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContextError {
    #[error("{0} is not alone in its layer")]
    NotSingleAgentLayer(AgentId),
    #[error("no ancestor of {0} has more than one kept parent")]
    NoAncestorFound(AgentId),
}

/// Resolves the funding source for `agent`, which must be alone in its layer.
///
/// `hops` counts `agent` itself, so an anchor equal to `agent` gives 1.
pub fn single_layer_context(lay: &Layering, agent: &AgentId) -> Result<SingleLayerContext, ContextError> {
    let depth = match lay.depth(agent) {
        Some(d) if d > 0 && lay.layer(d).len() == 1 => d,
        _ => return Err(ContextError::NotSingleAgentLayer(agent.clone())),
    };

    let leaves: Vec<AgentId> = (1..depth)
        .flat_map(|l| lay.layer(l))
        .filter(|a| lay.informed_count(a) == 0)
        .cloned()
        .collect();
    if !leaves.is_empty() {
        return Ok(SingleLayerContext::Leaves(leaves));
    }

    let mut current = agent.clone();
    loop {
        let parents = lay.kept_parents(&current);
        match parents {
            [] => return Err(ContextError::NoAncestorFound(agent.clone())),
            [only] => {
                if only.from == *lay.sponsor() {
                    return Err(ContextError::NoAncestorFound(agent.clone()));
                }
                current = only.from.clone();
            }
            many => {
                let hops = depth - lay.depth(&current).expect("ancestor is reachable") + 1;
                return Ok(SingleLayerContext::Ancestor {
                    anchor: current,
                    parent_count: many.len(),
                    hops: hops as u32,
                });
            }
        }
    }
}
