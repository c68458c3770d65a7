use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Property, PropertyReport, Violation, ACCOUNTING_TOLERANCE};
use crate::mechanisms::{run_scheme, MechanismError, SchemeConfig};
use crate::network::{compute_layering, AgentId, Network};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeEfficiencyOptions {
    pub perturbations: usize,
    pub seed: u64,
}

impl Default for TimeEfficiencyOptions {
    fn default() -> Self {
        TimeEfficiencyOptions {
            perturbations: 32,
            seed: 0,
        }
    }
}

/// Delays all out-edges of `agent` by the same positive shift.
fn delayed(net: &Network, agent: &AgentId, shift: f64) -> Network {
    net.retimed(|e| if e.from == *agent { e.t + shift } else { e.t })
        .expect("shifting finite timestamps keeps them finite")
}

/// Picks a shift that moves `agent`'s earliest out-edge strictly between two
/// later distinct event times (or past the last one).
fn sample_shift(net: &Network, agent: &AgentId, rng: &mut ChaCha8Rng) -> f64 {
    let earliest = net
        .out_edges(agent)
        .first()
        .map(|e| e.t)
        .expect("sampled agents have out-edges");
    let mut times: Vec<f64> = net.edges().iter().map(|e| e.t).filter(|&t| t > earliest).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    if times.is_empty() {
        return 1.0;
    }
    let k = rng.gen_range(0..times.len());
    let target = match times.get(k + 1) {
        Some(next) => 0.5 * (times[k] + next),
        None => times[k] + 1.0,
    };
    target - earliest
}

/// Strictly increasing random map over the distinct timestamps of `net`.
fn random_monotone_retiming(net: &Network, rng: &mut ChaCha8Rng) -> Network {
    let mut times: Vec<f64> = net.edges().iter().map(|e| e.t).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mut acc = rng.gen_range(-100.0..100.0);
    let mapped: Vec<f64> = times
        .iter()
        .map(|_| {
            acc += rng.gen_range(0.01..10.0);
            acc
        })
        .collect();
    net.retimed(|e| {
        let idx = times.binary_search_by(|t| t.total_cmp(&e.t)).expect("time is present");
        mapped[idx]
    })
    .expect("mapped timestamps are finite")
}

/// Time efficiency of the scheme on `net`.
///
/// For `perturbations` sampled agents, all of the agent's out-edges are
/// delayed past later events; its reward must not rise by more than
/// `1e-9 * budget`. Two global re-timings (`t -> 2t + 1` and a random
/// strictly increasing map) must leave the reward vector bit-identical.
pub fn check_time_efficiency(
    net: &Network,
    cfg: &SchemeConfig,
    opts: TimeEfficiencyOptions,
) -> Result<PropertyReport, MechanismError> {
    let tol = ACCOUNTING_TOLERANCE * cfg.budget();
    let baseline = run_scheme(net, cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut violations = Vec::new();
    let mut instances = 0;

    let lay = compute_layering(net);
    let candidates: Vec<AgentId> = lay.agents().filter(|a| !net.out_edges(a).is_empty()).cloned().collect();

    if !candidates.is_empty() {
        for _ in 0..opts.perturbations {
            let agent = candidates.choose(&mut rng).expect("non-empty").clone();
            let shift = sample_shift(net, &agent, &mut rng);
            let after = run_scheme(&delayed(net, &agent, shift), cfg)?.reward(&agent);
            let before = baseline.reward(&agent);
            instances += 1;
            if after > before + tol {
                violations.push(Violation {
                    agent: Some(agent),
                    deviation: format!("delay out-edges by {shift}"),
                    hidden: Vec::new(),
                    reward_before: before,
                    reward_after: after,
                });
            }
        }
    }

    let affine = net
        .retimed(|e| 2.0 * e.t + 1.0)
        .expect("affine map keeps timestamps finite");
    for (label, retimed) in [
        ("retime t -> 2t + 1", affine),
        ("random monotone retiming", random_monotone_retiming(net, &mut rng)),
    ] {
        instances += 1;
        let rv = run_scheme(&retimed, cfg)?;
        if rv.rewards != baseline.rewards {
            let (agent, after) = rv
                .rewards
                .iter()
                .find(|(a, r)| baseline.rewards.get(*a) != Some(*r))
                .map(|(a, r)| (a.clone(), *r))
                .unwrap_or((AgentId::from("?"), f64::NAN));
            violations.push(Violation {
                reward_before: baseline.reward(&agent),
                agent: Some(agent),
                deviation: label.into(),
                hidden: Vec::new(),
                reward_after: after,
            });
        }
    }

    Ok(PropertyReport::new(
        Property::TimeEfficiency,
        instances,
        ACCOUNTING_TOLERANCE,
        violations,
    ))
}
