use std::collections::BTreeSet;

use rayon::prelude::*;
use thiserror::Error;

use super::{Property, PropertyReport, Violation, ACCOUNTING_TOLERANCE, DEFAULT_ENUMERATION_CAP, STRICT_GAP};
use crate::mechanisms::{MechanismConfig, MechanismError};
use crate::network::{compute_layering, AgentId, Network, NetworkError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PicOptions {
    /// Also demand a strict loss whenever the withheld edges change the
    /// kept-edge graph.
    pub strict: bool,
    pub enumeration_cap: usize,
}

impl Default for PicOptions {
    fn default() -> Self {
        PicOptions {
            strict: false,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

#[derive(Debug, Error)]
pub enum PicError {
    #[error("agent {agent} has {degree} out-edges, above the enumeration cap of {cap}")]
    EnumerationCapExceeded { agent: AgentId, degree: usize, cap: usize },
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// One unilateral deviation: `agent` withholds the out-edges selected by
/// `mask` (bit `k` is the `k`-th out-edge in arrival order).
#[derive(Debug, Clone)]
pub(crate) struct Deviation {
    pub agent: AgentId,
    pub mask: u32,
    pub hidden: Vec<(AgentId, AgentId)>,
    pub reward_truthful: f64,
    pub reward_deviating: f64,
    pub alters_layering: bool,
}

/// Every `(agent, nonempty out-edge subset)` pair, ordered by agent id then
/// subset bitmask.
pub(crate) fn enumerate_deviations(
    net: &Network,
    cfg: &MechanismConfig,
    cap: usize,
) -> Result<Vec<Deviation>, PicError> {
    let lay = compute_layering(net);
    let truthful = cfg.run(net)?;
    let kept = lay.kept_pairs();

    let mut agents: Vec<AgentId> = lay.agents().cloned().collect();
    agents.sort();
    for agent in &agents {
        let degree = net.out_edges(agent).len();
        if degree > cap {
            return Err(PicError::EnumerationCapExceeded {
                agent: agent.clone(),
                degree,
                cap,
            });
        }
    }

    let per_agent: Vec<Vec<Deviation>> = agents
        .par_iter()
        .map(|agent| {
            let out: Vec<(AgentId, AgentId)> = net.out_edges(agent).into_iter().map(|e| e.key()).collect();
            let before = truthful.reward(agent);
            let mut devs = Vec::with_capacity((1usize << out.len()).saturating_sub(1));
            for mask in 1u32..(1u32 << out.len()) {
                let hidden: BTreeSet<(AgentId, AgentId)> = out
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask & (1 << k) != 0)
                    .map(|(_, e)| e.clone())
                    .collect();
                let counterfactual = net.hide_edges(agent, &hidden)?;
                let after = cfg.run(&counterfactual)?.reward(agent);
                let alters_layering = compute_layering(&counterfactual).kept_pairs() != kept;
                devs.push(Deviation {
                    agent: agent.clone(),
                    mask,
                    hidden: hidden.into_iter().collect(),
                    reward_truthful: before,
                    reward_deviating: after,
                    alters_layering,
                });
            }
            Ok(devs)
        })
        .collect::<Result<_, PicError>>()?;
    Ok(per_agent.into_iter().flatten().collect())
}

pub(crate) fn pic_report(devs: &[Deviation], budget: f64, strict: bool) -> PropertyReport {
    let weak_tol = ACCOUNTING_TOLERANCE * budget;
    let gap = STRICT_GAP * budget;
    let violations = devs
        .iter()
        .filter(|d| {
            let gained = d.reward_deviating > d.reward_truthful + weak_tol;
            let not_strict = strict && d.alters_layering && d.reward_truthful - d.reward_deviating < gap;
            gained || not_strict
        })
        .map(|d| Violation {
            agent: Some(d.agent.clone()),
            deviation: format!("hide mask {:#b}", d.mask),
            hidden: d.hidden.clone(),
            reward_before: d.reward_truthful,
            reward_after: d.reward_deviating,
        })
        .collect();
    let property = if strict {
        Property::StrongPropagationIc
    } else {
        Property::PropagationIc
    };
    let tolerance = if strict { STRICT_GAP } else { ACCOUNTING_TOLERANCE };
    PropertyReport::new(property, devs.len(), tolerance, violations)
}

/// Exhaustive unilateral edge-hiding check.
///
/// Weak PIC: no agent gains more than `1e-9 * budget` by withholding any
/// nonempty subset of its out-edges. Strict mode additionally requires a loss
/// of at least `1e-12 * budget` whenever the withheld edges change the
/// kept-edge graph; withholding only non-kept edges cannot change anything.
pub fn check_pic(net: &Network, cfg: &MechanismConfig, opts: PicOptions) -> Result<PropertyReport, PicError> {
    let devs = enumerate_deviations(net, cfg, opts.enumeration_cap)?;
    Ok(pic_report(&devs, cfg.budget(), opts.strict))
}
