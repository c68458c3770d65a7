//! Budget-constrained reward mechanisms for information propagation.
//!
//! A sponsor with budget `B` seeds a piece of information; agents forward it
//! along timestamped edges. [`network`] layers the propagation graph by BFS
//! distance, [`mechanisms`] turns the layered graph into rewards, and
//! [`properties`] certifies budget balance, individual rationality,
//! propagation incentive compatibility and time efficiency by exhaustive or
//! sampled counterfactuals. [`generators`] supplies fixtures and random graph
//! families, and [`cli`] wires everything into the `infoprop` binary.

pub mod cli;
pub mod generators;
pub mod mechanisms;
pub mod network;
pub mod properties;
