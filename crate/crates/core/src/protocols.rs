//! Per-round behavior of LEACH, SEP, ESEP, DEEC and HSEP.
//!
//! A round is: elect primary cluster heads, (HSEP) elect secondaries from the
//! primaries and route every other primary to its nearest secondary,
//! associate members to their nearest primary, then charge every radio and
//! aggregation event. Control traffic (advertisements, joins, TDMA
//! schedules) is free.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::election::{
    average_energy, deec_probability, draw_cluster_heads, tick_bookkeeping, weighted_probabilities,
};
use crate::engine::NetworkState;
use crate::error::{Error, Result};
use crate::model::{
    aggregation_energy, charge, distance, rx_energy, tx_energy, NodeClass, SimConfig,
};
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Protocol {
    Leach,
    Sep,
    Esep,
    Deec,
    Hsep,
}

impl Protocol {
    pub const ALL: [Protocol; 5] = [
        Protocol::Leach,
        Protocol::Sep,
        Protocol::Esep,
        Protocol::Deec,
        Protocol::Hsep,
    ];

    /// Lower-case name used in file names and on the command line.
    pub fn name(&self) -> &'static str {
        match self {
            Protocol::Leach => "leach",
            Protocol::Sep => "sep",
            Protocol::Esep => "esep",
            Protocol::Deec => "deec",
            Protocol::Hsep => "hsep",
        }
    }

    /// Whether the protocol deploys intermediate-energy nodes.
    pub fn uses_intermediate(&self) -> bool {
        matches!(self, Protocol::Esep)
    }

    /// The config the protocol actually runs on: intermediate nodes exist
    /// only in ESEP networks.
    pub fn effective_config(&self, config: &SimConfig) -> SimConfig {
        let mut c = config.clone();
        if !self.uses_intermediate() {
            c.intermediate_fraction = 0.0;
        }
        c
    }

    pub fn validate(&self, config: &SimConfig) -> Result<()> {
        if self.uses_intermediate()
            && config.intermediate_fraction.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater)
        {
            return Err(Error::config(
                "intermediate_fraction",
                "ESEP requires intermediate_fraction > 0",
            ));
        }
        Ok(())
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Protocol::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownProtocol(s.to_string()))
    }
}

/// Everything that happened in one round.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RoundOutcome {
    /// 1-based round number.
    pub round: u64,
    pub primary_chs: Vec<usize>,
    /// Empty unless HSEP.
    pub secondary_chs: Vec<usize>,
    /// Member id to primary cluster head id.
    pub membership: BTreeMap<usize, usize>,
    /// HSEP: primary id to the secondary it forwards to. Secondaries are absent.
    pub relays: BTreeMap<usize, usize>,
    pub packets_to_bs: u64,
    pub energy_spent: f64,
    pub deaths: Vec<usize>,
    pub alive_after: usize,
}

impl RoundOutcome {
    /// Nodes that uplinked to the base station this round.
    pub fn uplink_chs(&self) -> &[usize] {
        if self.secondary_chs.is_empty() {
            &self.primary_chs
        } else {
            &self.secondary_chs
        }
    }
}

/// Elects this round's primary cluster heads.
pub fn elect(
    protocol: Protocol,
    state: &mut NetworkState,
    config: &SimConfig,
    rng: &mut SimRng,
) -> Result<Vec<usize>> {
    let probs = election_probabilities(protocol, state, config)?;
    Ok(draw_cluster_heads(state, &probs, rng))
}

/// Per-node election probability under `protocol`, indexed by node id.
/// Dead nodes get 0.
pub fn election_probabilities(
    protocol: Protocol,
    state: &NetworkState,
    config: &SimConfig,
) -> Result<Vec<f64>> {
    let two_class =
        || weighted_probabilities(config.p_opt, config.alpha, config.m, config.beta, 0.0);
    let probs = match protocol {
        Protocol::Leach => state
            .nodes
            .iter()
            .map(|n| if n.alive { config.p_opt } else { 0.0 })
            .collect(),
        Protocol::Sep | Protocol::Hsep => {
            let cp = two_class()?;
            state
                .nodes
                .iter()
                .map(|n| if n.alive { cp.for_class(n.class) } else { 0.0 })
                .collect()
        }
        Protocol::Esep => {
            let cp = weighted_probabilities(
                config.p_opt,
                config.alpha,
                config.m,
                config.beta,
                config.intermediate_fraction,
            )?;
            state
                .nodes
                .iter()
                .map(|n| if n.alive { cp.for_class(n.class) } else { 0.0 })
                .collect()
        }
        Protocol::Deec => {
            let cp = weighted_probabilities(
                config.p_opt,
                config.alpha,
                config.m,
                config.beta,
                config.intermediate_fraction,
            )?;
            let avg = average_energy(state);
            state
                .nodes
                .iter()
                .map(|n| {
                    if n.alive {
                        deec_probability(n, avg, &cp)
                    } else {
                        Ok(0.0)
                    }
                })
                .collect::<Result<_>>()?
        }
    };
    Ok(probs)
}

/// Assigns every alive non-head node to its nearest cluster head.
/// Ties go to the lowest head id.
pub fn associate_members(state: &NetworkState, chs: &[usize]) -> BTreeMap<usize, usize> {
    let mut heads = chs.to_vec();
    heads.sort_unstable();
    let head_set: BTreeSet<usize> = heads.iter().copied().collect();
    let mut map = BTreeMap::new();
    if heads.is_empty() {
        return map;
    }
    for node in state
        .nodes
        .iter()
        .filter(|n| n.alive && !head_set.contains(&n.id))
    {
        if let Some(ch) = nearest(state, node.position, &heads) {
            map.insert(node.id, ch);
        }
    }
    map
}

fn nearest(state: &NetworkState, from: crate::model::Point, candidates: &[usize]) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for &c in candidates {
        let d = distance(from, state.nodes[c].position);
        match best {
            Some((bd, bid)) if d > bd || (d == bd && c > bid) => {}
            _ => best = Some((d, c)),
        }
    }
    best.map(|(_, id)| id)
}

/// Draws secondary heads from the primaries, one draw per primary in id
/// order. If none is drawn, the primary nearest the base station is used.
pub fn elect_secondary(
    primary_chs: &[usize],
    state: &NetworkState,
    p_h: f64,
    rng: &mut SimRng,
) -> Vec<usize> {
    let mut primaries = primary_chs.to_vec();
    primaries.sort_unstable();
    let mut secondaries: Vec<usize> = primaries
        .iter()
        .copied()
        .filter(|_| rng.uniform() < p_h)
        .collect();
    if secondaries.is_empty() {
        if let Some(id) = nearest(state, state.bs_position, &primaries) {
            secondaries.push(id);
        }
    }
    secondaries
}

/// Class of every node, chosen by a seeded shuffle of node ids: the first
/// `floor(m*N)` shuffled ids are advanced, the next `floor(x*N)` intermediate.
pub fn assign_classes(config: &SimConfig, rng: &mut SimRng) -> Vec<NodeClass> {
    let n = config.n_nodes;
    let mut ids: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut ids);
    let n_adv = count_of(config.m, n);
    let n_int = count_of(config.intermediate_fraction, n).min(n - n_adv);
    let mut classes = vec![NodeClass::Normal; n];
    for &id in &ids[..n_adv] {
        classes[id] = NodeClass::Advanced;
    }
    for &id in &ids[n_adv..n_adv + n_int] {
        classes[id] = NodeClass::Intermediate;
    }
    classes
}

// floor with slack for products such as 0.29 * 100 = 28.999999999999996
fn count_of(fraction: f64, n: usize) -> usize {
    ((fraction * n as f64 + 1e-9).floor() as usize).min(n)
}

pub fn initial_energy(class: NodeClass, config: &SimConfig) -> f64 {
    let e0 = config.energy.e0;
    match class {
        NodeClass::Normal => e0,
        NodeClass::Intermediate => (1.0 + config.beta) * e0,
        NodeClass::Advanced => (1.0 + config.alpha) * e0,
    }
}

/// Executes one full round of `protocol` and advances the round counter.
pub fn run_round(
    protocol: Protocol,
    state: &mut NetworkState,
    config: &SimConfig,
    rng: &mut SimRng,
) -> Result<RoundOutcome> {
    if state.alive_count() == 0 {
        return Err(Error::Invariant(
            "run_round called on a dead network".into(),
        ));
    }
    let primaries = elect(protocol, state, config, rng)?;
    let secondaries = if protocol == Protocol::Hsep && !primaries.is_empty() {
        Some(elect_secondary(&primaries, state, config.p_h, rng))
    } else {
        None
    };
    let outcome = dispatch_round(state, config, primaries, secondaries)?;
    tick_bookkeeping(state);
    state.round += 1;
    Ok(outcome)
}

/// Data transfer and energy charging for already-elected heads.
///
/// With `secondaries = None` every primary uplinks straight to the base
/// station. With `Some`, primaries that are not secondaries forward to their
/// nearest secondary and only secondaries uplink. Does not touch the round
/// counter or the election bookkeeping.
pub fn dispatch_round(
    state: &mut NetworkState,
    config: &SimConfig,
    mut primaries: Vec<usize>,
    secondaries: Option<Vec<usize>>,
) -> Result<RoundOutcome> {
    primaries.sort_unstable();
    let alive_before: Vec<usize> = state
        .nodes
        .iter()
        .filter(|n| n.alive)
        .map(|n| n.id)
        .collect();
    let bits = config.energy.packet_bits;
    let params = config.energy;
    let bs = state.bs_position;

    let mut outcome = RoundOutcome {
        round: state.round + 1,
        ..RoundOutcome::default()
    };

    if primaries.is_empty() {
        outcome.alive_after = alive_before.len();
        return Ok(outcome);
    }
    if let Some(id) = primaries.iter().find(|&&id| !state.nodes[id].alive) {
        return Err(Error::Invariant(format!("dead node {id} elected")));
    }

    let mut secondaries = secondaries.unwrap_or_default();
    secondaries.sort_unstable();
    if secondaries
        .iter()
        .any(|s| primaries.binary_search(s).is_err())
    {
        return Err(Error::Invariant("secondary head is not a primary".into()));
    }
    let relays: BTreeMap<usize, usize> = if secondaries.is_empty() {
        BTreeMap::new()
    } else {
        primaries
            .iter()
            .filter(|p| secondaries.binary_search(p).is_err())
            .filter_map(|&p| nearest(state, state.nodes[p].position, &secondaries).map(|s| (p, s)))
            .collect()
    };
    let membership = associate_members(state, &primaries);

    let mut members_of: BTreeMap<usize, usize> = primaries.iter().map(|&p| (p, 0)).collect();
    for &ch in membership.values() {
        *members_of.entry(ch).or_default() += 1;
    }
    let mut relayed_to: BTreeMap<usize, usize> = BTreeMap::new();
    for &s in relays.values() {
        *relayed_to.entry(s).or_default() += 1;
    }

    // Costs are fixed from start-of-round state, then applied in id order.
    let mut costs: Vec<(usize, f64)> = Vec::new();
    for (&member, &ch) in &membership {
        let d = distance(state.nodes[member].position, state.nodes[ch].position);
        costs.push((member, tx_energy(&params, bits, d)));
    }
    for &ch in &primaries {
        let members = members_of[&ch];
        let mut cost = members as f64 * rx_energy(&params, bits)
            + aggregation_energy(&params, bits, members + 1)?;
        let pos = state.nodes[ch].position;
        cost += match relays.get(&ch) {
            Some(&s) => tx_energy(&params, bits, distance(pos, state.nodes[s].position)),
            None => tx_energy(&params, bits, distance(pos, bs)),
        };
        if let Some(&incoming) = relayed_to.get(&ch) {
            cost += incoming as f64 * rx_energy(&params, bits)
                + aggregation_energy(&params, bits, incoming)?;
        }
        costs.push((ch, cost));
    }

    let mut spent = 0.0;
    for (id, cost) in costs {
        spent += charge(&mut state.nodes[id], cost);
    }

    outcome.deaths = alive_before
        .iter()
        .copied()
        .filter(|&id| !state.nodes[id].alive)
        .collect();
    outcome.alive_after = alive_before.len() - outcome.deaths.len();
    outcome.packets_to_bs = if secondaries.is_empty() {
        primaries.len() as u64
    } else {
        secondaries.len() as u64
    };
    outcome.energy_spent = spent;
    outcome.primary_chs = primaries;
    outcome.secondary_chs = secondaries;
    outcome.membership = membership;
    outcome.relays = relays;
    Ok(outcome)
}
