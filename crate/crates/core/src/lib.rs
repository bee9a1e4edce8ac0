//! Seed-deterministic, round-based simulator for cluster-based routing in
//! heterogeneous wireless sensor networks.
//!
//! Five protocols share one first-order radio energy model: LEACH, SEP,
//! ESEP, DEEC and the two-tier HSEP. A run is a pure function of its
//! [`SimConfig`] (seed included) and [`Protocol`].
//!
//! ```
//! use wsnsim::{simulate, summarize, Protocol, SimConfig};
//!
//! let config = SimConfig { seed: 7, max_rounds: 200, ..SimConfig::default() };
//! let series = simulate(&config, Protocol::Sep).unwrap();
//! let summary = summarize(&series).unwrap();
//! assert_eq!(series.rows.len(), 200);
//! assert!(summary.total_packets > 0);
//! ```

pub mod cli;
pub mod election;
pub mod engine;
pub mod error;
pub mod model;
pub mod protocols;
pub mod report;
pub mod rng;

pub use engine::{init_network, simulate, MetricsSeries, NetworkState, SeriesRow, Simulation};
pub use error::{Error, Result};
pub use model::{EnergyParams, Node, NodeClass, Point, SimConfig};
pub use protocols::{run_round, Protocol, RoundOutcome};
pub use report::{compare, emit_csv, summarize, ComparisonTable, Summary};
pub use rng::{rng_stream, SimRng};
