//! Cluster-head election: weighted class probabilities, the rotating
//! threshold, DEEC's residual-energy probabilities and the per-node
//! rotation bookkeeping that implements the "not yet elected" set.

use crate::engine::NetworkState;
use crate::error::{Error, Result};
use crate::model::{Node, NodeClass};
use crate::rng::SimRng;

/// Rotation state of one node.
///
/// A node is eligible (a member of the not-yet-elected set) exactly when its
/// cooldown has run out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElectionBookkeeping {
    pub eligible: bool,
    pub rounds_until_eligible: u64,
    /// Probability used at the node's last election.
    pub last_probability: f64,
}

impl Default for ElectionBookkeeping {
    fn default() -> Self {
        ElectionBookkeeping {
            eligible: true,
            rounds_until_eligible: 0,
            last_probability: 0.0,
        }
    }
}

impl ElectionBookkeeping {
    /// Marks the node as elected with probability `p` in round index `r`;
    /// it rejoins the eligible set at the start of its next epoch.
    pub fn mark_elected(&mut self, p: f64, r: u64) {
        self.rounds_until_eligible = cooldown_rounds(p, r);
        self.eligible = false;
        self.last_probability = p;
    }

    fn tick(&mut self) {
        self.rounds_until_eligible = self.rounds_until_eligible.saturating_sub(1);
        self.eligible = self.rounds_until_eligible == 0;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassProbabilities {
    pub p_nrm: f64,
    pub p_int: f64,
    pub p_adv: f64,
}

impl ClassProbabilities {
    pub fn for_class(&self, class: NodeClass) -> f64 {
        match class {
            NodeClass::Normal => self.p_nrm,
            NodeClass::Intermediate => self.p_int,
            NodeClass::Advanced => self.p_adv,
        }
    }
}

/// Per-class election probabilities weighted by initial energy.
///
/// The denominator `1 + alpha*m + beta*x_int` keeps the population-weighted
/// mean at `p_opt`, so the expected number of cluster heads per round stays
/// `N * p_opt`. With `x_int = 0` this is the two-class SEP weighting.
/// Values above 1 are possible for extreme `alpha`; [`threshold`] clamps.
pub fn weighted_probabilities(
    p_opt: f64,
    alpha: f64,
    m: f64,
    beta: f64,
    x_int: f64,
) -> Result<ClassProbabilities> {
    if m + x_int > 1.0 + 1e-12 || m < 0.0 || x_int < 0.0 {
        return Err(Error::InvalidFraction {
            advanced: m,
            intermediate: x_int,
        });
    }
    let denom = 1.0 + alpha * m + beta * x_int;
    Ok(ClassProbabilities {
        p_nrm: p_opt / denom,
        p_int: p_opt * (1.0 + beta) / denom,
        p_adv: p_opt * (1.0 + alpha) / denom,
    })
}

/// Number of rounds in one rotation epoch for probability `p`.
pub fn epoch_length(p: f64) -> u64 {
    ((1.0 / p).ceil() as u64).max(1)
}

/// Cooldown assigned on election in round index `r`: the rounds left until
/// the next epoch boundary, so a node serves at most once per epoch and the
/// whole population becomes eligible again when the epoch restarts.
pub fn cooldown_rounds(p: f64, r: u64) -> u64 {
    let len = epoch_length(p);
    len - r % len
}

/// Election threshold for round index `r` (0-based).
pub fn threshold(p: f64, r: u64, eligible: bool) -> f64 {
    if !eligible || p <= 0.0 {
        return 0.0;
    }
    let phase = (r % epoch_length(p)) as f64;
    let denom = 1.0 - p * phase;
    if denom <= 0.0 {
        return 1.0;
    }
    (p / denom).clamp(0.0, 1.0)
}

/// Mean residual energy over every deployed node; dead nodes count as zero.
pub fn average_energy(state: &NetworkState) -> f64 {
    let n = state.nodes.len();
    if n == 0 {
        return 0.0;
    }
    state
        .nodes
        .iter()
        .map(|node| node.residual_energy)
        .sum::<f64>()
        / n as f64
}

/// DEEC probability: the node's class probability scaled by its residual
/// energy relative to the network average, capped at 1.
pub fn deec_probability(node: &Node, avg: f64, class_ref: &ClassProbabilities) -> Result<f64> {
    // also rejects NaN
    if avg.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::DegenerateNetwork(avg));
    }
    let p = class_ref.for_class(node.class) * node.residual_energy / avg;
    Ok(p.clamp(0.0, 1.0))
}

/// One uniform draw per alive node in id order; a node is elected when its
/// draw falls below its threshold. `per_node_p` is indexed by node id.
pub fn draw_cluster_heads(
    state: &mut NetworkState,
    per_node_p: &[f64],
    rng: &mut SimRng,
) -> Vec<usize> {
    debug_assert_eq!(per_node_p.len(), state.nodes.len());
    let r = state.round;
    let mut heads = Vec::new();
    for node in state.nodes.iter_mut().filter(|n| n.alive) {
        let p = per_node_p[node.id];
        let t = threshold(p, r, node.election.eligible);
        if rng.uniform() < t {
            node.election.mark_elected(p, r);
            heads.push(node.id);
        }
    }
    heads
}

/// Advances every node's cooldown by one round.
pub fn tick_bookkeeping(state: &mut NetworkState) {
    for node in &mut state.nodes {
        node.election.tick();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Point;
    use crate::rng::rng_stream;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    fn state_with(energies: &[f64]) -> NetworkState {
        let nodes = energies
            .iter()
            .enumerate()
            .map(|(i, &e)| {
                let mut n = Node::new(i, Point::new(i as f64, 0.0), NodeClass::Normal, 0.5);
                n.residual_energy = e;
                n.alive = e > 0.0;
                n
            })
            .collect();
        NetworkState::from_nodes(nodes, Point::new(50.0, 50.0))
    }

    #[test]
    fn two_class_probabilities() {
        let p = weighted_probabilities(0.1, 1.0, 0.1, 0.0, 0.0).unwrap();
        assert!((p.p_nrm - 0.1 / 1.1).abs() < 1e-15);
        assert!((p.p_adv - 0.2 / 1.1).abs() < 1e-15);
        assert!((p.p_nrm - 0.090909).abs() < 1e-6);
        assert!((p.p_adv - 0.181818).abs() < 1e-6);
    }

    #[test]
    fn homogeneous_probabilities() {
        for m in [0.0, 0.1, 0.5, 1.0] {
            let p = weighted_probabilities(0.1, 0.0, m, 0.0, 0.0).unwrap();
            assert_eq!(p.p_nrm, 0.1);
            assert_eq!(p.p_adv, 0.1);
        }
    }

    #[test]
    fn three_class_probabilities() {
        let p = weighted_probabilities(0.1, 1.0, 0.1, 0.3, 0.2).unwrap();
        assert!((p.p_nrm - 0.1 / 1.16).abs() < 1e-15);
        assert!((p.p_nrm - 0.086207).abs() < 1e-6);
        assert!((p.p_int - 0.112069).abs() < 1e-6);
        assert!((p.p_adv - 0.172414).abs() < 1e-6);
    }

    #[test]
    fn fractions_over_one_rejected() {
        assert!(matches!(
            weighted_probabilities(0.1, 1.0, 0.7, 0.3, 0.4),
            Err(Error::InvalidFraction { .. })
        ));
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(threshold(0.1, 0, true), 0.1);
        assert_eq!(threshold(0.1, 20, true), 0.1);
        assert_eq!(threshold(0.1, 9, true), 1.0);
        assert_eq!(threshold(0.1, 19, true), 1.0);
        assert_eq!(threshold(0.1, 9, false), 0.0);
        assert_eq!(threshold(0.37, 1, false), 0.0);
        // 1/p = 5.5: epoch of 6 rounds
        let p = 0.2 / 1.1;
        assert!(rel(threshold(p, 4, true), p / (1.0 - 4.0 * p)) < 1e-12);
        assert_eq!(threshold(p, 5, true), 1.0);
        assert_eq!(threshold(p, 6, true), p);
    }

    #[test]
    fn average_energy_examples() {
        assert_eq!(average_energy(&state_with(&[0.5; 100])), 0.5);
        let mut e = vec![0.4; 50];
        e.extend(vec![0.0; 50]);
        assert!(rel(average_energy(&state_with(&e)), 0.2) < 1e-12);
        assert_eq!(average_energy(&state_with(&[0.77])), 0.77);
    }

    #[test]
    fn deec_examples() {
        let homo = weighted_probabilities(0.1, 0.0, 0.0, 0.0, 0.0).unwrap();
        let node = Node::new(0, Point::new(0.0, 0.0), NodeClass::Normal, 0.5);
        assert_eq!(deec_probability(&node, 0.5, &homo).unwrap(), 0.1);

        let mut dead = node.clone();
        dead.residual_energy = 0.0;
        assert_eq!(deec_probability(&dead, 0.5, &homo).unwrap(), 0.0);

        let het = weighted_probabilities(0.1, 1.0, 0.1, 0.0, 0.0).unwrap();
        let mut rich = node.clone();
        rich.residual_energy = 1.0;
        assert!(rel(deec_probability(&rich, 0.5, &het).unwrap(), 0.2 / 1.1) < 1e-12);

        let mut adv = rich.clone();
        adv.class = NodeClass::Advanced;
        adv.residual_energy = 0.5;
        assert!(rel(deec_probability(&adv, 0.5, &het).unwrap(), 0.2 / 1.1) < 1e-12);

        assert!(matches!(
            deec_probability(&node, 0.0, &homo),
            Err(Error::DegenerateNetwork(_))
        ));
    }

    #[test]
    fn certain_and_impossible_election() {
        let mut state = state_with(&[0.5; 10]);
        state.round = 9;
        let mut rng = rng_stream(0);
        let heads = draw_cluster_heads(&mut state, &[0.1; 10], &mut rng);
        assert_eq!(heads, (0..10).collect::<Vec<_>>());
        // all now ineligible
        let heads = draw_cluster_heads(&mut state, &[0.1; 10], &mut rng);
        assert!(heads.is_empty());
    }

    #[test]
    fn dead_nodes_never_drawn() {
        let mut state = state_with(&[0.5, 0.0, 0.5]);
        state.round = 9;
        let heads = draw_cluster_heads(&mut state, &[0.1; 3], &mut rng_stream(1));
        assert_eq!(heads, vec![0, 2]);
    }

    #[test]
    fn tick_examples() {
        let mut state = state_with(&[0.5; 3]);
        state.nodes[0].election.rounds_until_eligible = 1;
        state.nodes[0].election.eligible = false;
        tick_bookkeeping(&mut state);
        assert_eq!(state.nodes[0].election.rounds_until_eligible, 0);
        assert!(state.nodes[0].election.eligible);
        assert!(state.nodes[1].election.eligible);

        state.nodes[2].election.mark_elected(0.1, 0);
        assert_eq!(state.nodes[2].election.rounds_until_eligible, 10);
        let mut ineligible = 0;
        for _ in 0..20 {
            tick_bookkeeping(&mut state);
            if !state.nodes[2].election.eligible {
                ineligible += 1;
            } else {
                break;
            }
        }
        assert_eq!(ineligible, 9);

        // elected late in the epoch: eligible again as soon as the next one starts
        state.nodes[1].election.mark_elected(0.1, 27);
        assert_eq!(state.nodes[1].election.rounds_until_eligible, 3);
        assert_eq!(crate::election::cooldown_rounds(0.2 / 1.1, 6), 6);
    }

    /// Brute-force oracle: unbounded energy, p = 0.1, 100 nodes. Over each
    /// 10-round epoch every node must be elected exactly once.
    #[test]
    fn one_election_per_epoch() {
        let mut state = state_with(&[1e9; 100]);
        let mut rng = rng_stream(5);
        let p = vec![0.1; 100];
        for _epoch in 0..3 {
            let mut count = [0u32; 100];
            for _ in 0..10 {
                for id in draw_cluster_heads(&mut state, &p, &mut rng) {
                    count[id] += 1;
                }
                tick_bookkeeping(&mut state);
                state.round += 1;
            }
            assert!(count.iter().all(|&c| c == 1), "{count:?}");
        }
    }

    #[test]
    fn expected_ch_count_near_target() {
        let mut state = state_with(&[1e9; 100]);
        let mut rng = rng_stream(11);
        let p = vec![0.1; 100];
        let rounds = 2000;
        let mut total = 0usize;
        for _ in 0..rounds {
            total += draw_cluster_heads(&mut state, &p, &mut rng).len();
            tick_bookkeeping(&mut state);
            state.round += 1;
        }
        let mean = total as f64 / rounds as f64;
        assert!((mean - 10.0).abs() <= 1.5, "mean {mean}");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn normalization(alpha in 0.0f64..5.0, m in 0.0f64..0.5, beta in 0.0f64..2.0, x in 0.0f64..0.5, p_opt in 0.01f64..1.0) {
                let p = weighted_probabilities(p_opt, alpha, m, beta, x).unwrap();
                let mean = (1.0 - m - x) * p.p_nrm + x * p.p_int + m * p.p_adv;
                prop_assert!(rel(mean, p_opt) < 1e-9);
            }

            #[test]
            fn threshold_in_unit_interval(p in 0.001f64..1.0, r in 0u64..100_000) {
                let t = threshold(p, r, true);
                prop_assert!((0.0..=1.0).contains(&t));
                if r % epoch_length(p) == 0 {
                    prop_assert_eq!(t, p);
                }
            }

            #[test]
            fn deec_linear_in_energy(e in 0.0f64..2.0, avg in 0.01f64..2.0) {
                let cp = weighted_probabilities(0.1, 1.0, 0.1, 0.0, 0.0).unwrap();
                let mut n = Node::new(0, Point::new(0.0, 0.0), NodeClass::Normal, 2.0);
                n.residual_energy = e;
                let p = deec_probability(&n, avg, &cp).unwrap();
                let raw = cp.p_nrm * e / avg;
                prop_assert!((p - raw.min(1.0)).abs() <= 1e-15);
            }
        }
    }
}
