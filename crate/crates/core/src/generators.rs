//! Fixture networks and seeded random graph families.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::network::{AgentId, Network, PropagationEvent};

pub const FIXTURES: [&str; 3] = ["example1", "example2", "figure3"];

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("unknown fixture {0:?} (expected one of example1, example2, figure3)")]
    UnknownFixture(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
}

/// Built-in fixtures; timestamps follow listing order.
pub fn fixture(name: &str) -> Result<Network, GeneratorError> {
    let pairs: &[(&str, &str)] = match name {
        "example1" => &[
            ("S", "A"),
            ("S", "B"),
            ("A", "C"),
            ("A", "D"),
            ("B", "F"),
            ("B", "G"),
            ("B", "H"),
            ("C", "I"),
        ],
        "example2" => &[("S", "A"), ("S", "B"), ("S", "C"), ("A", "D"), ("B", "E")],
        "figure3" => &[
            ("S", "A"),
            ("S", "B"),
            ("S", "D"),
            ("A", "C"),
            ("B", "C"),
            ("D", "C"),
            ("C", "E"),
        ],
        other => return Err(GeneratorError::UnknownFixture(other.to_owned())),
    };
    Ok(Network::from_pairs("S", pairs).expect("fixtures are well formed"))
}

#[derive(Debug, Clone, PartialEq)]
pub enum GraphFamily {
    /// `S -> {A, B}` followed by a chain of `length` agents starting at `A`.
    Chain { length: usize },
    /// `S -> {A, B}` and `A` informing `width` leaves.
    Star { width: usize },
    /// Layers of the given widths. Every agent gets one kept parent with spare
    /// capacity; each agent then adds, with probability `extra_edge_prob`, one
    /// more edge to the next, same or an earlier layer.
    LayeredRandom {
        widths: Vec<usize>,
        max_out_degree: usize,
        extra_edge_prob: f64,
        seed: u64,
    },
    /// `S` informs `width` agents that all inform one agent `X`, plus `leaves`
    /// first-layer agents that inform nobody. `X` heads a chain of `tail`
    /// agents, so every layer after the first is a singleton.
    SingleChainTail { width: usize, tail: usize, leaves: usize },
}

impl GraphFamily {
    pub fn name(&self) -> &'static str {
        match self {
            GraphFamily::Chain { .. } => "chain",
            GraphFamily::Star { .. } => "star",
            GraphFamily::LayeredRandom { .. } => "layered-random",
            GraphFamily::SingleChainTail { .. } => "single-chain-tail",
        }
    }
}

/// Spreadsheet-style labels `A, B, .., Z, AA, AB, ..` with `S` left out.
fn agent_names() -> impl Iterator<Item = AgentId> {
    (0usize..).filter_map(|mut i| {
        let mut label = Vec::new();
        loop {
            label.push(b'A' + (i % 26) as u8);
            if i < 26 {
                break;
            }
            i = i / 26 - 1;
        }
        label.reverse();
        let label = String::from_utf8(label).expect("ascii");
        (label != "S").then(|| AgentId::new(label))
    })
}

fn invalid(msg: impl Into<String>) -> GeneratorError {
    GeneratorError::InvalidParameters(msg.into())
}

fn build(edges: Vec<PropagationEvent>) -> Network {
    let agents: BTreeSet<AgentId> = edges.iter().flat_map(|e| [e.from.clone(), e.to.clone()]).collect();
    Network::new("S", agents, edges).expect("generated networks are well formed")
}

fn from_pairs(pairs: &[(AgentId, AgentId)]) -> Network {
    build(
        pairs
            .iter()
            .enumerate()
            .map(|(t, (from, to))| PropagationEvent::new(from.clone(), to.clone(), t as f64))
            .collect(),
    )
}

pub fn gen_graph(family: &GraphFamily) -> Result<Network, GeneratorError> {
    let s = AgentId::from("S");
    let mut names = agent_names();
    let mut next = || names.next().expect("infinite");
    match family {
        GraphFamily::Chain { length } => {
            if *length == 0 {
                return Err(invalid("chain length must be at least 1"));
            }
            let a = next();
            let b = next();
            let mut pairs = vec![(s.clone(), a.clone()), (s, b)];
            let mut prev = a;
            for _ in 1..*length {
                let cur = next();
                pairs.push((prev, cur.clone()));
                prev = cur;
            }
            Ok(from_pairs(&pairs))
        }
        GraphFamily::Star { width } => {
            if *width == 0 {
                return Err(invalid("star width must be at least 1"));
            }
            let a = next();
            let b = next();
            let mut pairs = vec![(s.clone(), a.clone()), (s, b)];
            pairs.extend((0..*width).map(|_| (a.clone(), next())));
            Ok(from_pairs(&pairs))
        }
        GraphFamily::SingleChainTail { width, tail, leaves } => {
            if *width == 0 || width + leaves < 2 {
                return Err(invalid("single-chain-tail needs width >= 1 and width + leaves >= 2"));
            }
            let parents: Vec<AgentId> = (0..*width).map(|_| next()).collect();
            let idle: Vec<AgentId> = (0..*leaves).map(|_| next()).collect();
            let x = next();
            let mut pairs: Vec<(AgentId, AgentId)> =
                parents.iter().chain(&idle).map(|a| (s.clone(), a.clone())).collect();
            pairs.extend(parents.iter().map(|p| (p.clone(), x.clone())));
            let mut prev = x;
            for _ in 0..*tail {
                let cur = next();
                pairs.push((prev, cur.clone()));
                prev = cur;
            }
            Ok(from_pairs(&pairs))
        }
        GraphFamily::LayeredRandom {
            widths,
            max_out_degree,
            extra_edge_prob,
            seed,
        } => {
            if widths.first().is_none_or(|&w| w < 2) {
                return Err(invalid("layered-random needs at least two first-layer agents"));
            }
            if widths.contains(&0) {
                return Err(invalid("layer widths must be positive"));
            }
            if *max_out_degree == 0 && widths.len() > 1 {
                return Err(invalid("max out-degree must be positive"));
            }
            if !(0.0..=1.0).contains(extra_edge_prob) {
                return Err(invalid("extra edge probability must lie in [0, 1]"));
            }
            if let Some(w) = widths.windows(2).find(|w| w[1] > w[0] * max_out_degree) {
                return Err(invalid(format!(
                    "a layer of {} cannot feed {} agents with out-degree {max_out_degree}",
                    w[0], w[1]
                )));
            }

            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let layers: Vec<Vec<AgentId>> = widths.iter().map(|&w| (0..w).map(|_| next()).collect()).collect();
            let mut degree: Vec<Vec<usize>> = widths.iter().map(|&w| vec![0; w]).collect();
            // (from layer, from index, to layer, to index)
            let mut links: Vec<(usize, usize, usize, usize)> = Vec::new();
            let mut present = BTreeSet::new();

            for l in 1..layers.len() {
                for j in 0..layers[l].len() {
                    let open: Vec<usize> = (0..layers[l - 1].len())
                        .filter(|&i| degree[l - 1][i] < *max_out_degree)
                        .collect();
                    // The width check leaves enough capacity, but a greedy
                    // choice could still strand late children; prefer parents
                    // that keep the rest feasible.
                    let remaining = layers[l].len() - j;
                    let spare: usize = open.iter().map(|&i| max_out_degree - degree[l - 1][i]).sum();
                    let i = if spare > remaining {
                        *open.choose(&mut rng).expect("capacity checked")
                    } else {
                        *open
                            .iter()
                            .max_by_key(|&&i| max_out_degree - degree[l - 1][i])
                            .expect("capacity checked")
                    };
                    degree[l - 1][i] += 1;
                    present.insert((l - 1, i, l, j));
                    links.push((l - 1, i, l, j));
                }
            }

            let slots: Vec<(usize, usize)> = widths
                .iter()
                .enumerate()
                .flat_map(|(l, &w)| (0..w).map(move |i| (l, i)))
                .collect();
            for &(l, i) in &slots {
                if degree[l][i] >= *max_out_degree || !rng.gen_bool(*extra_edge_prob) {
                    continue;
                }
                let targets: Vec<(usize, usize)> = slots
                    .iter()
                    .copied()
                    .filter(|&(tl, tj)| tl <= l + 1 && (tl, tj) != (l, i) && !present.contains(&(l, i, tl, tj)))
                    .collect();
                if let Some(&(tl, tj)) = targets.choose(&mut rng) {
                    degree[l][i] += 1;
                    present.insert((l, i, tl, tj));
                    links.push((l, i, tl, tj));
                }
            }

            let mut edges: Vec<PropagationEvent> = layers[0]
                .iter()
                .map(|a| PropagationEvent::new(s.clone(), a.clone(), rng.gen::<f64>()))
                .collect();
            edges.extend(links.into_iter().map(|(fl, fi, tl, ti)| {
                PropagationEvent::new(
                    layers[fl][fi].clone(),
                    layers[tl][ti].clone(),
                    (fl + 1) as f64 + rng.gen::<f64>(),
                )
            }));
            edges.sort_by(|a, b| a.arrival_cmp(b));
            Ok(build(edges))
        }
    }
}

/// Draws a family whose networks have at most `max_agents` nodes (sponsor
/// included) and agent out-degree at most `max_out_degree`.
pub fn random_family(
    rng: &mut impl Rng,
    max_agents: usize,
    max_out_degree: usize,
) -> Result<GraphFamily, GeneratorError> {
    if max_agents < 4 || max_out_degree < 1 {
        return Err(invalid("need max_agents >= 4 and max_out_degree >= 1"));
    }
    let room = max_agents - 1;
    Ok(match rng.gen_range(0..4) {
        0 => GraphFamily::Chain {
            length: rng.gen_range(1..=room - 1),
        },
        1 => GraphFamily::Star {
            width: rng.gen_range(1..=(room - 2).min(max_out_degree)),
        },
        2 => {
            let width = rng.gen_range(1..=(room - 1).min(max_out_degree));
            let min_leaves = usize::from(width < 2);
            let leaves = rng
                .gen_range(min_leaves..=(room - 1 - width).min(max_out_degree.saturating_sub(width).max(min_leaves)));
            let tail = rng.gen_range(0..=room - 1 - width - leaves);
            GraphFamily::SingleChainTail { width, tail, leaves }
        }
        _ => {
            let mut widths = vec![rng.gen_range(2..=room.min(max_out_degree.max(2)))];
            let mut used = widths[0];
            while used < room && rng.gen_bool(0.75) {
                let prev = *widths.last().expect("non-empty");
                let w = rng.gen_range(1..=(room - used).min(prev * max_out_degree));
                widths.push(w);
                used += w;
            }
            GraphFamily::LayeredRandom {
                widths,
                max_out_degree,
                extra_edge_prob: rng.gen_range(0.0..0.6),
                seed: rng.gen(),
            }
        }
    })
}

/// `count` named networks drawn from all families, deterministic in `seed`.
pub fn corpus(
    count: usize,
    max_agents: usize,
    max_out_degree: usize,
    seed: u64,
) -> Result<Vec<(String, Network)>, GeneratorError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let family = random_family(&mut rng, max_agents, max_out_degree)?;
            Ok((format!("{}-{k}", family.name()), gen_graph(&family)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{compute_layering, single_layer_context, SingleLayerContext};

    #[test]
    fn names_skip_the_sponsor() {
        let names: Vec<String> = agent_names().take(30).map(|a| a.as_str().to_owned()).collect();
        assert!(!names.contains(&"S".to_owned()));
        assert_eq!(names[17], "R");
        assert_eq!(names[18], "T");
        assert_eq!(names[25], "AA");
    }

    #[test]
    fn fixtures_have_expected_layers() {
        let lay = compute_layering(&fixture("figure3").unwrap());
        assert_eq!(lay.layer(1), ["A", "B", "D"].map(AgentId::from));
        assert_eq!(lay.layer(2), ["C"].map(AgentId::from));
        assert_eq!(lay.layer(3), ["E"].map(AgentId::from));
        let ex2 = fixture("example2").unwrap();
        assert_eq!(ex2.agents().len(), 5);
        assert_eq!(ex2.edges().len(), 5);
        assert!(matches!(fixture("figure9"), Err(GeneratorError::UnknownFixture(_))));
    }

    #[test]
    fn chain_of_three() {
        let net = gen_graph(&GraphFamily::Chain { length: 3 }).unwrap();
        let pairs: Vec<_> = net.edges().iter().map(|e| (e.from.as_str(), e.to.as_str())).collect();
        assert_eq!(pairs, [("S", "A"), ("S", "B"), ("A", "C"), ("C", "D")]);
        assert!(gen_graph(&GraphFamily::Chain { length: 0 }).is_err());
    }

    #[test]
    fn single_chain_tail_reaches_second_hop() {
        let net = gen_graph(&GraphFamily::SingleChainTail {
            width: 3,
            tail: 2,
            leaves: 0,
        })
        .unwrap();
        let lay = compute_layering(&net);
        let x = &lay.layer(2)[0];
        let t1 = &lay.layer(3)[0];
        assert_eq!(
            single_layer_context(&lay, t1).unwrap(),
            SingleLayerContext::Ancestor {
                anchor: x.clone(),
                parent_count: 3,
                hops: 2
            }
        );
    }

    #[test]
    fn layered_random_is_deterministic() {
        let fam = GraphFamily::LayeredRandom {
            widths: vec![3, 2, 2],
            max_out_degree: 3,
            extra_edge_prob: 0.3,
            seed: 7,
        };
        let a = gen_graph(&fam).unwrap();
        assert_eq!(a, gen_graph(&fam).unwrap());
        let lay = compute_layering(&a);
        assert_eq!(lay.layers().iter().map(Vec::len).collect::<Vec<_>>(), [3, 2, 2]);
    }

    #[test]
    fn corpus_respects_bounds() {
        for (_, net) in corpus(300, 8, 4, 1).unwrap() {
            assert!(net.agents().len() < 8);
            assert!(net.agents().iter().all(|a| net.out_edges(a).len() <= 4));
            let lay = compute_layering(&net);
            assert!(lay.unreachable().is_empty());
            assert!(lay.layer(1).len() >= 2);
        }
    }
}
