//! Reward mechanisms: the layered starter, the budget distribution scheme,
//! and the two baselines used as counterexamples.

pub mod baseline;
pub mod ledger;
pub mod scheme;
pub mod starter;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::context::ContextError;
use crate::network::{AgentId, Network};

pub use baseline::{baseline_fixed_reward, baseline_uniform};
pub use ledger::{AgentLedger, Ledger, TraceEvent, Transfer};
pub use scheme::{
    distribute_adjacent_layers, distribute_single_agent_layer, execute_scheme, measured_layer_total, run_scheme,
    scheme_layer_total, LayerTotals, SchemeRun,
};
pub use starter::{run_starter, starter_layer_budget};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("alpha must lie in (0, 1), got {0}")]
    Alpha(f64),
    #[error("beta must lie in (0, 1), got {0}")]
    Beta(f64),
    #[error("budget must be positive and finite, got {0}")]
    Budget(f64),
    #[error("fixed reward must be positive and finite, got {0}")]
    Reward(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MechanismError {
    #[error("the budget distribution scheme needs at least two agents in the first layer (found {found})")]
    SchemeRequiresTwoFirstLayerAgents { found: usize },
    #[error("network has no reachable agents")]
    EmptyNetwork,
    #[error(transparent)]
    Context(#[from] ContextError),
}

fn open_unit(x: f64) -> bool {
    x > 0.0 && x < 1.0
}

fn check_budget(budget: f64) -> Result<(), ConfigError> {
    if budget > 0.0 && budget.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::Budget(budget))
    }
}

/// Weight function used by the starter to split a layer's budget by `n_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitFn {
    /// `n -> n`
    Identity,
    /// `n -> n + 1`
    #[default]
    Shifted,
    /// `n -> 2^n`
    #[serde(rename = "exp")]
    Exponential,
}

impl SplitFn {
    pub fn apply(self, n: usize) -> f64 {
        match self {
            SplitFn::Identity => n as f64,
            SplitFn::Shifted => n as f64 + 1.0,
            SplitFn::Exponential => 2f64.powi(n as i32),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SplitFn::Identity => "identity",
            SplitFn::Shifted => "shifted",
            SplitFn::Exponential => "exp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StarterConfig {
    beta: f64,
    f: SplitFn,
    budget: f64,
}

impl StarterConfig {
    pub fn new(beta: f64, f: SplitFn, budget: f64) -> Result<Self, ConfigError> {
        if !open_unit(beta) {
            return Err(ConfigError::Beta(beta));
        }
        check_budget(budget)?;
        Ok(StarterConfig { beta, f, budget })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn split(&self) -> SplitFn {
        self.f
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }
}

/// Order in which the children of a layer are processed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(tag = "ordering", rename_all = "lowercase")]
pub enum ChildOrdering {
    /// Earliest kept in-edge first; ties by child id.
    #[default]
    Arrival,
    /// Child id; parents by id as well.
    #[serde(rename = "id")]
    Identifier,
    /// Seeded shuffle of the children of each layer.
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchemeConfig {
    alpha: f64,
    beta: f64,
    budget: f64,
    #[serde(flatten)]
    ordering: ChildOrdering,
}

impl SchemeConfig {
    pub fn new(alpha: f64, beta: f64, budget: f64) -> Result<Self, ConfigError> {
        if !open_unit(alpha) {
            return Err(ConfigError::Alpha(alpha));
        }
        if !open_unit(beta) {
            return Err(ConfigError::Beta(beta));
        }
        check_budget(budget)?;
        Ok(SchemeConfig {
            alpha,
            beta,
            budget,
            ordering: ChildOrdering::Arrival,
        })
    }

    pub fn with_ordering(mut self, ordering: ChildOrdering) -> Self {
        self.ordering = ordering;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn ordering(&self) -> ChildOrdering {
        self.ordering
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedRewardConfig {
    reward: f64,
    budget: f64,
}

impl FixedRewardConfig {
    pub fn new(reward: f64, budget: f64) -> Result<Self, ConfigError> {
        if !(reward > 0.0 && reward.is_finite()) {
            return Err(ConfigError::Reward(reward));
        }
        check_budget(budget)?;
        Ok(FixedRewardConfig { reward, budget })
    }

    pub fn reward(&self) -> f64 {
        self.reward
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniformConfig {
    budget: f64,
}

impl UniformConfig {
    pub fn new(budget: f64) -> Result<Self, ConfigError> {
        check_budget(budget)?;
        Ok(UniformConfig { budget })
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }
}

/// A mechanism together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mechanism", content = "config", rename_all = "lowercase")]
pub enum MechanismConfig {
    Starter(StarterConfig),
    Scheme(SchemeConfig),
    Fixed(FixedRewardConfig),
    Uniform(UniformConfig),
}

impl MechanismConfig {
    pub fn name(&self) -> &'static str {
        match self {
            MechanismConfig::Starter(_) => "starter",
            MechanismConfig::Scheme(_) => "scheme",
            MechanismConfig::Fixed(_) => "fixed",
            MechanismConfig::Uniform(_) => "uniform",
        }
    }

    pub fn budget(&self) -> f64 {
        match self {
            MechanismConfig::Starter(c) => c.budget(),
            MechanismConfig::Scheme(c) => c.budget(),
            MechanismConfig::Fixed(c) => c.budget(),
            MechanismConfig::Uniform(c) => c.budget(),
        }
    }

    /// Baselines exist to be refuted; they are not expected to satisfy the
    /// propagation properties.
    pub fn is_baseline(&self) -> bool {
        matches!(self, MechanismConfig::Fixed(_) | MechanismConfig::Uniform(_))
    }

    pub fn run(&self, net: &Network) -> Result<RewardVector, MechanismError> {
        match self {
            MechanismConfig::Starter(c) => Ok(run_starter(net, c)),
            MechanismConfig::Scheme(c) => run_scheme(net, c),
            MechanismConfig::Fixed(c) => Ok(baseline_fixed_reward(net, c)),
            MechanismConfig::Uniform(c) => baseline_uniform(net, c),
        }
    }
}

/// Per-layer budget accounting.
///
/// For the scheme, `incoming` is `sum b'_i` of the layer, `retained` is
/// `sum (V_b + V_h)` of its members right after the layer is processed and
/// `passed_down` is `sum b'_j` of the next layer at that point. For the
/// starter, `incoming` is the budget not yet assigned to shallower layers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerAccount {
    pub layer: usize,
    pub agents: Vec<AgentId>,
    pub incoming: f64,
    pub retained: f64,
    pub passed_down: f64,
    #[serde(skip_serializing_if = "is_zero")]
    pub reverted: f64,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub single_agent: bool,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

/// Final assignment `r_S, r_1..r_n` plus its audit trail.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RewardVector {
    #[serde(flatten)]
    pub config: MechanismConfig,
    pub rewards: BTreeMap<AgentId, f64>,
    pub sponsor_remainder: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub layers: Vec<LayerAccount>,
    #[serde(skip_serializing_if = "Ledger::is_empty")]
    pub ledger: Ledger,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceEvent>,
}

impl RewardVector {
    pub fn reward(&self, agent: &AgentId) -> f64 {
        self.rewards.get(agent).copied().unwrap_or(0.0)
    }

    pub fn total_rewards(&self) -> f64 {
        self.rewards.values().sum()
    }

    pub fn budget(&self) -> f64 {
        self.config.budget()
    }

    /// Drops the ledger and transfer log, keeping rewards and layer totals.
    pub fn without_audit(mut self) -> Self {
        self.ledger = Ledger::default();
        self.trace.clear();
        self
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("reward serialization is infallible");
        out.push('\n');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_bounds() {
        assert_eq!(SchemeConfig::new(0.0, 0.2, 1.0), Err(ConfigError::Alpha(0.0)));
        assert_eq!(SchemeConfig::new(0.2, 1.0, 1.0), Err(ConfigError::Beta(1.0)));
        assert_eq!(SchemeConfig::new(0.2, 0.2, -1.0), Err(ConfigError::Budget(-1.0)));
        assert!(StarterConfig::new(f64::NAN, SplitFn::Identity, 1.0).is_err());
        assert!(FixedRewardConfig::new(0.0, 1.0).is_err());
        assert!(UniformConfig::new(f64::INFINITY).is_err());
    }

    #[test]
    fn split_functions() {
        assert_eq!(SplitFn::Identity.apply(3), 3.0);
        assert_eq!(SplitFn::Shifted.apply(0), 1.0);
        assert_eq!(SplitFn::Exponential.apply(4), 16.0);
    }

    #[test]
    fn config_json_shape() {
        let cfg = MechanismConfig::Scheme(SchemeConfig::new(0.2, 0.2, 30.0).unwrap());
        let v = serde_json::to_value(cfg).unwrap();
        assert_eq!(
            v,
            serde_json::json!({"mechanism":"scheme","config":{"alpha":0.2,"beta":0.2,"budget":30.0,"ordering":"arrival"}})
        );
        let cfg = MechanismConfig::Scheme(
            SchemeConfig::new(0.2, 0.2, 30.0)
                .unwrap()
                .with_ordering(ChildOrdering::Random { seed: 7 }),
        );
        let v = serde_json::to_value(cfg).unwrap();
        assert_eq!(v["config"]["ordering"], "random");
        assert_eq!(v["config"]["seed"], 7);
        let cfg = MechanismConfig::Starter(StarterConfig::new(0.5, SplitFn::Exponential, 10.0).unwrap());
        assert_eq!(serde_json::to_value(cfg).unwrap()["config"]["f"], "exp");
    }
}
