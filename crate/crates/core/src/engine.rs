//! Run lifecycle: network construction, the round loop and raw metrics.

use crate::error::{Error, Result};
use crate::model::{Node, Point, SimConfig};
use crate::protocols::{assign_classes, initial_energy, run_round, Protocol, RoundOutcome};
pub use crate::rng::{rng_stream, SimRng};

/// Mutable state of one run. Dead nodes stay in `nodes`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub nodes: Vec<Node>,
    /// Number of completed rounds.
    pub round: u64,
    pub bs_position: Point,
    pub total_initial_energy: f64,
}

impl NetworkState {
    pub fn from_nodes(nodes: Vec<Node>, bs_position: Point) -> Self {
        let total_initial_energy = nodes.iter().map(|n| n.initial_energy).sum();
        NetworkState {
            nodes,
            round: 0,
            bs_position,
            total_initial_energy,
        }
    }

    pub fn alive_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.alive).count()
    }

    pub fn residual_total(&self) -> f64 {
        self.nodes.iter().map(|n| n.residual_energy).sum()
    }
}

/// Places nodes and assigns classes from the config's seed.
pub fn init_network(config: &SimConfig) -> Result<NetworkState> {
    let mut rng = rng_stream(config.seed);
    init_network_with(config, &mut rng)
}

fn init_network_with(config: &SimConfig, rng: &mut SimRng) -> Result<NetworkState> {
    config.validate()?;
    let positions: Vec<Point> = (0..config.n_nodes)
        .map(|_| {
            let x = rng.uniform() * config.field_width;
            let y = rng.uniform() * config.field_height;
            Point::new(x, y)
        })
        .collect();
    let classes = assign_classes(config, rng);
    let nodes = positions
        .into_iter()
        .zip(classes)
        .enumerate()
        .map(|(id, (pos, class))| Node::new(id, pos, class, initial_energy(class, config)))
        .collect();
    Ok(NetworkState::from_nodes(nodes, config.bs_position))
}

/// One row of the per-round time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow {
    pub round: u64,
    pub alive: usize,
    pub dead: usize,
    pub primary_chs: usize,
    pub secondary_chs: usize,
    pub packets_cum: u64,
    pub energy_total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsSeries {
    pub protocol: Protocol,
    pub config: SimConfig,
    pub n_nodes: usize,
    pub rows: Vec<SeriesRow>,
}

impl MetricsSeries {
    pub fn seed(&self) -> u64 {
        self.config.seed
    }
}

/// A run that can be stepped one round at a time.
#[derive(Debug, Clone)]
pub struct Simulation {
    protocol: Protocol,
    config: SimConfig,
    state: NetworkState,
    rng: SimRng,
    packets_cum: u64,
}

impl Simulation {
    pub fn new(config: &SimConfig, protocol: Protocol) -> Result<Self> {
        let config = protocol.effective_config(config);
        protocol.validate(&config)?;
        let mut rng = rng_stream(config.seed);
        let state = init_network_with(&config, &mut rng)?;
        Ok(Simulation {
            protocol,
            config,
            state,
            rng,
            packets_cum: 0,
        })
    }

    pub fn state(&self) -> &NetworkState {
        &self.state
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn protocol(&self) -> Protocol {
        self.protocol
    }

    pub fn is_finished(&self) -> bool {
        self.state.round >= self.config.max_rounds || self.state.alive_count() == 0
    }

    /// Runs one round, or returns `None` once the run is over.
    pub fn step(&mut self) -> Result<Option<(RoundOutcome, SeriesRow)>> {
        if self.is_finished() {
            return Ok(None);
        }
        let energy_before = self.state.residual_total();
        let alive_before = self.state.alive_count();
        let outcome = run_round(self.protocol, &mut self.state, &self.config, &mut self.rng)?;
        let row = self.record(&outcome, energy_before, alive_before)?;
        Ok(Some((outcome, row)))
    }

    fn record(
        &mut self,
        outcome: &RoundOutcome,
        energy_before: f64,
        alive_before: usize,
    ) -> Result<SeriesRow> {
        let alive = self.state.alive_count();
        let energy_total = self.state.residual_total();
        if alive > alive_before || alive != outcome.alive_after {
            return Err(Error::Invariant(format!(
                "alive count {alive_before} -> {alive} (outcome says {})",
                outcome.alive_after
            )));
        }
        let decrease = energy_before - energy_total;
        let tol = 1e-9 * outcome.energy_spent.abs().max(1e-12) + 1e-12 * energy_before;
        if (decrease - outcome.energy_spent).abs() > tol {
            return Err(Error::Invariant(format!(
                "energy ledger mismatch in round {}: decrease {decrease}, charged {}",
                outcome.round, outcome.energy_spent
            )));
        }
        self.packets_cum += outcome.packets_to_bs;
        Ok(SeriesRow {
            round: outcome.round,
            alive,
            dead: self.state.nodes.len() - alive,
            primary_chs: outcome.primary_chs.len(),
            secondary_chs: outcome.secondary_chs.len(),
            packets_cum: self.packets_cum,
            energy_total,
        })
    }
}

/// Runs `protocol` until every node is dead or `max_rounds` is reached.
pub fn simulate(config: &SimConfig, protocol: Protocol) -> Result<MetricsSeries> {
    let mut sim = Simulation::new(config, protocol)?;
    let mut rows = Vec::new();
    while let Some((_, row)) = sim.step()? {
        rows.push(row);
    }
    Ok(MetricsSeries {
        protocol,
        n_nodes: sim.state.nodes.len(),
        config: sim.config,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NodeClass;

    #[test]
    fn init_is_deterministic() {
        let c = SimConfig {
            seed: 42,
            ..SimConfig::default()
        };
        assert_eq!(init_network(&c).unwrap(), init_network(&c).unwrap());
        let other = SimConfig {
            seed: 43,
            ..c.clone()
        };
        assert_ne!(
            init_network(&c).unwrap().nodes,
            init_network(&other).unwrap().nodes
        );
    }

    #[test]
    fn single_node_network() {
        let c = SimConfig {
            n_nodes: 1,
            m: 0.0,
            intermediate_fraction: 0.0,
            ..SimConfig::default()
        };
        let s = init_network(&c).unwrap();
        assert_eq!(s.nodes.len(), 1);
        assert_eq!(s.nodes[0].class, NodeClass::Normal);
        let p = s.nodes[0].position;
        assert!((0.0..100.0).contains(&p.x) && (0.0..100.0).contains(&p.y));
    }

    #[test]
    fn two_class_total_energy() {
        let c = SimConfig {
            intermediate_fraction: 0.0,
            ..SimConfig::default()
        };
        let s = init_network(&c).unwrap();
        assert!((s.total_initial_energy - 100.0 * 0.5 * (0.9 + 0.1 * 2.0)).abs() < 1e-9);
        assert!((s.total_initial_energy - 55.0).abs() < 1e-9);
        assert_eq!(s.round, 0);
    }

    #[test]
    fn placement_independent_of_class_mix() {
        let a = init_network(&SimConfig {
            seed: 5,
            ..SimConfig::default()
        })
        .unwrap();
        let b = init_network(&SimConfig {
            seed: 5,
            intermediate_fraction: 0.0,
            ..SimConfig::default()
        })
        .unwrap();
        let pa: Vec<Point> = a.nodes.iter().map(|n| n.position).collect();
        let pb: Vec<Point> = b.nodes.iter().map(|n| n.position).collect();
        assert_eq!(pa, pb);
    }

    #[test]
    fn invalid_config_rejected() {
        let c = SimConfig {
            p_opt: 0.0,
            ..SimConfig::default()
        };
        assert!(matches!(init_network(&c), Err(Error::InvalidConfig { .. })));
        let c = SimConfig {
            intermediate_fraction: 0.0,
            ..SimConfig::default()
        };
        assert!(Simulation::new(&c, Protocol::Esep).is_err());
    }

    #[test]
    fn zero_max_rounds_gives_empty_series() {
        let c = SimConfig {
            max_rounds: 0,
            ..SimConfig::default()
        };
        let s = simulate(&c, Protocol::Leach).unwrap();
        assert!(s.rows.is_empty());
    }

    #[test]
    fn unbounded_energy_no_deaths() {
        let mut c = SimConfig {
            max_rounds: 10_000,
            seed: 3,
            ..SimConfig::default()
        };
        c.energy.e0 = 1e9;
        let s = simulate(&c, Protocol::Leach).unwrap();
        assert_eq!(s.rows.len(), 10_000);
        assert!(s.rows.iter().all(|r| r.alive == 100 && r.dead == 0));
    }

    #[test]
    fn default_leach_dies_out() {
        for seed in [0, 1, 2] {
            let c = SimConfig {
                seed,
                ..SimConfig::default()
            };
            let s = simulate(&c, Protocol::Leach).unwrap();
            let last = s.rows.last().unwrap();
            assert_eq!(last.alive, 0);
            assert!(last.round < 10_000);
        }
    }

    #[test]
    fn series_rows_are_monotone() {
        for p in Protocol::ALL {
            let s = simulate(
                &SimConfig {
                    seed: 9,
                    ..SimConfig::default()
                },
                p,
            )
            .unwrap();
            for w in s.rows.windows(2) {
                assert!(w[1].alive <= w[0].alive);
                assert!(w[1].packets_cum >= w[0].packets_cum);
                assert!(w[1].energy_total <= w[0].energy_total);
                assert_eq!(w[1].round, w[0].round + 1);
            }
            assert!(s.rows.iter().all(|r| r.alive + r.dead == 100));
        }
    }
}
