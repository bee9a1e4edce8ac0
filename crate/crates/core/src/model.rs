//! Domain types, geometry and the first-order radio energy model.
//!
//! Every protocol charges energy through the same three primitives:
//! [`tx_energy`], [`rx_energy`] and [`aggregation_energy`]. The transmit cost
//! switches from the free-space (d²) to the multipath (d⁴) amplifier term at
//! the crossover distance `d0 = sqrt(eps_fs / eps_mp)`.

use std::fmt;

use crate::election::ElectionBookkeeping;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Euclidean distance in meters.
pub fn distance(a: Point, b: Point) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeClass {
    Normal,
    Intermediate,
    Advanced,
}

impl NodeClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            NodeClass::Normal => "normal",
            NodeClass::Intermediate => "intermediate",
            NodeClass::Advanced => "advanced",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: usize,
    pub position: Point,
    pub class: NodeClass,
    pub initial_energy: f64,
    pub residual_energy: f64,
    pub alive: bool,
    pub election: ElectionBookkeeping,
}

impl Node {
    pub fn new(id: usize, position: Point, class: NodeClass, initial_energy: f64) -> Self {
        Node {
            id,
            position,
            class,
            initial_energy,
            residual_energy: initial_energy,
            alive: initial_energy > 0.0,
            election: ElectionBookkeeping::default(),
        }
    }
}

/// Deducts `cost` joules from `node`, clamping at zero.
///
/// Returns the energy actually removed. The node is marked dead once its
/// residual energy reaches zero.
pub fn charge(node: &mut Node, cost: f64) -> f64 {
    debug_assert!(cost >= 0.0, "negative charge {cost}");
    let applied = cost.min(node.residual_energy).max(0.0);
    node.residual_energy -= applied;
    if node.residual_energy <= 0.0 {
        node.residual_energy = 0.0;
        node.alive = false;
    }
    applied
}

/// First-order radio model constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParams {
    /// Electronics energy per bit, tx and rx (J/bit).
    pub e_elec: f64,
    /// Data aggregation energy per bit per signal (J/bit/signal).
    pub e_da: f64,
    /// Free-space amplifier (J/bit/m²).
    pub eps_fs: f64,
    /// Multipath amplifier (J/bit/m⁴).
    pub eps_mp: f64,
    /// Packet length in bits.
    pub packet_bits: u64,
    /// Initial energy of a normal node (J).
    pub e0: f64,
}

impl Default for EnergyParams {
    fn default() -> Self {
        EnergyParams {
            e_elec: 50e-9,
            e_da: 5e-9,
            eps_fs: 10e-12,
            eps_mp: 0.0013e-12,
            packet_bits: 4000,
            e0: 0.5,
        }
    }
}

impl EnergyParams {
    pub fn validate(&self) -> Result<()> {
        for (key, value) in [
            ("e_elec", self.e_elec),
            ("e_da", self.e_da),
            ("eps_fs", self.eps_fs),
            ("eps_mp", self.eps_mp),
            ("e0", self.e0),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(
                    key,
                    format!("must be finite and > 0, got {value}"),
                ));
            }
        }
        if self.packet_bits == 0 {
            return Err(Error::config("packet_bits", "must be > 0"));
        }
        let d0 = crossover_distance(self);
        if !(d0.is_finite() && d0 > 0.0) {
            return Err(Error::config(
                "eps_mp",
                format!("crossover distance {d0} is not finite"),
            ));
        }
        Ok(())
    }
}

pub fn crossover_distance(params: &EnergyParams) -> f64 {
    (params.eps_fs / params.eps_mp).sqrt()
}

/// Energy to transmit `bits` over `d` meters.
pub fn tx_energy(params: &EnergyParams, bits: u64, d: f64) -> f64 {
    let k = bits as f64;
    let d0 = crossover_distance(params);
    let amp = if d < d0 {
        params.eps_fs * d * d
    } else {
        params.eps_mp * d * d * d * d
    };
    k * params.e_elec + k * amp
}

pub fn rx_energy(params: &EnergyParams, bits: u64) -> f64 {
    bits as f64 * params.e_elec
}

/// Energy to fuse `n_signals` received signals of `bits` each.
pub fn aggregation_energy(params: &EnergyParams, bits: u64, n_signals: usize) -> Result<f64> {
    if n_signals == 0 {
        return Err(Error::NoSignals);
    }
    Ok(params.e_da * bits as f64 * n_signals as f64)
}

/// Every tunable of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n_nodes: usize,
    pub field_width: f64,
    pub field_height: f64,
    pub bs_position: Point,
    pub energy: EnergyParams,
    pub p_opt: f64,
    /// Extra energy factor of advanced nodes.
    pub alpha: f64,
    /// Fraction of advanced nodes.
    pub m: f64,
    /// Extra energy factor of intermediate nodes (ESEP only).
    pub beta: f64,
    /// Fraction of intermediate nodes (ESEP only).
    pub intermediate_fraction: f64,
    /// Secondary cluster-head probability (HSEP only).
    pub p_h: f64,
    pub max_rounds: u64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_nodes: 100,
            field_width: 100.0,
            field_height: 100.0,
            bs_position: Point::new(50.0, 50.0),
            energy: EnergyParams::default(),
            p_opt: 0.1,
            alpha: 1.0,
            m: 0.1,
            beta: 0.3,
            intermediate_fraction: 0.2,
            p_h: 0.5,
            max_rounds: 10_000,
            seed: 0,
        }
    }
}

/// A scalar config value, as read from a config file or a flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConfigValue {
    Int(i64),
    Float(f64),
}

impl ConfigValue {
    fn as_f64(self) -> f64 {
        match self {
            ConfigValue::Int(v) => v as f64,
            ConfigValue::Float(v) => v,
        }
    }

    fn as_u64(self, key: &str) -> Result<u64> {
        match self {
            ConfigValue::Int(v) if v >= 0 => Ok(v as u64),
            ConfigValue::Float(v) if v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64 => {
                Ok(v as u64)
            }
            other => Err(Error::config(
                key,
                format!("expected a non-negative integer, got {other:?}"),
            )),
        }
    }
}

impl SimConfig {
    /// Keys accepted by [`SimConfig::set`], in documentation order.
    pub const KEYS: &'static [&'static str] = &[
        "n_nodes",
        "field_width",
        "field_height",
        "bs_x",
        "bs_y",
        "e_elec",
        "e_da",
        "eps_fs",
        "eps_mp",
        "packet_bits",
        "e0",
        "p_opt",
        "alpha",
        "m",
        "beta",
        "intermediate_fraction",
        "p_h",
        "max_rounds",
        "seed",
    ];

    /// Sets one scalar by key. Range checks happen in [`SimConfig::validate`].
    pub fn set(&mut self, key: &str, value: ConfigValue) -> Result<()> {
        let f = value.as_f64();
        match key {
            "n_nodes" => self.n_nodes = value.as_u64(key)? as usize,
            "field_width" => self.field_width = f,
            "field_height" => self.field_height = f,
            "bs_x" => self.bs_position.x = f,
            "bs_y" => self.bs_position.y = f,
            "e_elec" => self.energy.e_elec = f,
            "e_da" => self.energy.e_da = f,
            "eps_fs" => self.energy.eps_fs = f,
            "eps_mp" => self.energy.eps_mp = f,
            "packet_bits" => self.energy.packet_bits = value.as_u64(key)?,
            "e0" => self.energy.e0 = f,
            "p_opt" => self.p_opt = f,
            "alpha" => self.alpha = f,
            "m" => self.m = f,
            "beta" => self.beta = f,
            "intermediate_fraction" => self.intermediate_fraction = f,
            "p_h" => self.p_h = f,
            "max_rounds" => self.max_rounds = value.as_u64(key)?,
            "seed" => self.seed = value.as_u64(key)?,
            _ => {
                return Err(Error::config(
                    key,
                    format!("unknown key (valid: {})", Self::KEYS.join(", ")),
                ))
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_nodes == 0 {
            return Err(Error::config("n_nodes", "must be at least 1"));
        }
        for (key, v) in [
            ("field_width", self.field_width),
            ("field_height", self.field_height),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(
                    key,
                    format!("must be finite and > 0, got {v}"),
                ));
            }
        }
        if !self.bs_position.is_finite() {
            return Err(Error::config(
                "bs_x",
                "base station position must be finite",
            ));
        }
        self.energy.validate()?;
        check_range("p_opt", self.p_opt, |v| v > 0.0 && v <= 1.0, "(0, 1]")?;
        check_range("m", self.m, |v| (0.0..=1.0).contains(&v), "[0, 1]")?;
        check_range(
            "intermediate_fraction",
            self.intermediate_fraction,
            |v| (0.0..=1.0).contains(&v),
            "[0, 1]",
        )?;
        check_range("p_h", self.p_h, |v| v > 0.0 && v <= 1.0, "(0, 1]")?;
        check_range("alpha", self.alpha, |v| v >= 0.0, "[0, inf)")?;
        check_range("beta", self.beta, |v| v >= 0.0, "[0, inf)")?;
        if self.m + self.intermediate_fraction > 1.0 + 1e-12 {
            return Err(Error::config(
                "intermediate_fraction",
                format!(
                    "m + intermediate_fraction must be <= 1, got {} + {}",
                    self.m, self.intermediate_fraction
                ),
            ));
        }
        Ok(())
    }
}

fn check_range(key: &str, v: f64, ok: impl Fn(f64) -> bool, range: &str) -> Result<()> {
    if v.is_finite() && ok(v) {
        Ok(())
    } else {
        Err(Error::config(key, format!("must be in {range}, got {v}")))
    }
}
