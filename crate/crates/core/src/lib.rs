//! Simulation and optimization engine for wireless powered pinching-antenna
//! networks (WPPAN).
//!
//! A single dielectric waveguide carries `N` pinching antennas that can be
//! switched on and off per timeslot. Users first harvest RF energy during a
//! set of downlink slots (non-linear harvester) and then spend it on TDMA
//! uplink transmission. The crate covers the whole pipeline:
//!
//! * [`scenario`]: configuration, geometry and reproducible random draws,
//! * [`channel`]: free-space, in-waveguide and combined channels,
//! * [`harvest`]: the sigmoid energy-harvesting model,
//! * [`activation`]: the Search / Greedy / Naive activation strategies,
//! * [`allocator`]: the max-min timeslot allocation solver and its oracles,
//! * [`miso`]: the fixed-antenna MISO benchmark,
//! * [`experiments`]: Monte Carlo trials, sweeps, histograms and output files.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod activation;
pub mod allocator;
pub mod channel;
pub mod error;
pub mod experiments;
pub mod harvest;
pub mod miso;
mod numeric;
pub mod scenario;
pub mod selftest;

pub use activation::{ActivationPlan, Mode};
pub use allocator::{AllocationProblem, Schedule, SolverConfig, SolverMethod, SolverStats};
pub use channel::{ActivationVector, ChannelKind, ChannelVector};
pub use error::{Error, Result};
pub use experiments::{Strategy, SweepAxis, SweepTable, TrialResult};
pub use harvest::{EhParams, HarvestMatrix};
pub use scenario::{Position, ScenarioRealization, SystemConfig};
