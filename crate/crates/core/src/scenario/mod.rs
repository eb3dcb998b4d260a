//! Configuration, geometry and reproducible scenario generation.

mod config;
mod rng;

pub use config::{AlgorithmOptions, MisoBeamforming, NaiveCriterion, SystemConfig};
pub use rng::{substream, StreamPurpose};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{self, ChannelVector};
use crate::error::Result;

/// Point in the room's coordinate frame, meters. Users live on `z = 0`,
/// the waveguide runs along `y = 0` at `z = d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// Pinching-antenna sites: a uniform grid over `[-D_x/2, D_x/2]` that
/// includes both endpoints, or the center for a single antenna.
pub fn antenna_positions(config: &SystemConfig) -> Vec<Position> {
    let n = config.num_antennas;
    let half = config.room_x / 2.0;
    if n == 1 {
        return vec![Position::new(0.0, 0.0, config.height)];
    }
    let step = config.room_x / (n - 1) as f64;
    (0..n)
        .map(|i| {
            // Pin the last site to the endpoint exactly.
            let x = if i == n - 1 { half } else { -half + step * i as f64 };
            Position::new(x, 0.0, config.height)
        })
        .collect()
}

/// Waveguide feed point, where the base station attaches: `(-D_x/2, 0, d)`.
pub fn feed_position(config: &SystemConfig) -> Position {
    Position::new(-config.room_x / 2.0, 0.0, config.height)
}

/// One Monte Carlo draw of the network.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioRealization {
    pub trial: u64,
    pub user_positions: Vec<Position>,
    pub antenna_positions: Vec<Position>,
    pub feed_position: Position,
    /// Faded free-space channels `h_{m,1}`, one per user.
    pub device_channels: Vec<ChannelVector>,
    /// Deterministic in-waveguide channel `h_2`.
    pub waveguide_channel: ChannelVector,
    /// Combined channels `h_m = h_{m,1} ⊙ h_2`.
    pub channels: Vec<ChannelVector>,
}

impl ScenarioRealization {
    pub fn num_users(&self) -> usize {
        self.user_positions.len()
    }

    pub fn num_antennas(&self) -> usize {
        self.antenna_positions.len()
    }
}

/// Draw user `m` of trial `trial`. Every user owns an independent substream,
/// so changing `M` leaves the first users of a trial untouched.
pub fn sample_user(config: &SystemConfig, trial: u64, user: usize) -> Position {
    let mut rng = substream(config.rng_seed, trial, user, StreamPurpose::UserPosition);
    let x = rng.gen_range(-0.5..=0.5) * config.room_x;
    let y = rng.gen_range(-0.5..=0.5) * config.room_y;
    Position::new(x, y, 0.0)
}

/// Sample the realization for `(config.rng_seed, trial)`. Pure: the same
/// inputs always give a bit-identical result.
pub fn sample_scenario(config: &SystemConfig, trial: u64) -> Result<ScenarioRealization> {
    config.validate()?;
    let antennas = antenna_positions(config);
    let feed = feed_position(config);
    let waveguide = channel::waveguide_channel(
        &feed,
        &antennas,
        config.waveguide_loss,
        config.carrier_freq,
        config.refractive_index,
    )?;

    let mut users = Vec::with_capacity(config.num_users);
    let mut device = Vec::with_capacity(config.num_users);
    let mut combined = Vec::with_capacity(config.num_users);
    for m in 0..config.num_users {
        let user = sample_user(config, trial, m);
        let los = channel::device_channel(&user, &antennas, config.carrier_freq)?;
        let mut rng = substream(config.rng_seed, trial, m, StreamPurpose::WppanFading);
        let faded = channel::apply_rician(&los, config.rician_k, &mut rng);
        combined.push(channel::combined_channel(&faded, &waveguide)?);
        device.push(faded);
        users.push(user);
    }

    Ok(ScenarioRealization {
        trial,
        user_positions: users,
        antenna_positions: antennas,
        feed_position: feed,
        device_channels: device,
        waveguide_channel: waveguide,
        channels: combined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg_with(n: usize, m: usize) -> SystemConfig {
        SystemConfig {
            num_antennas: n,
            num_users: m,
            ..SystemConfig::reference_scenario()
        }
    }

    #[test]
    fn single_antenna_is_centered() {
        assert_eq!(antenna_positions(&cfg_with(1, 1)), vec![Position::new(0.0, 0.0, 3.0)]);
    }

    #[test]
    fn two_antennas_sit_on_the_endpoints() {
        assert_eq!(
            antenna_positions(&cfg_with(2, 1)),
            vec![Position::new(-5.0, 0.0, 3.0), Position::new(5.0, 0.0, 3.0)]
        );
    }

    #[test]
    fn four_antennas_inclusive_grid() {
        let xs: Vec<f64> = antenna_positions(&cfg_with(4, 1)).iter().map(|p| p.x).collect();
        let expected = [-5.0, -5.0 / 3.0, 5.0 / 3.0, 5.0];
        for (x, e) in xs.iter().zip(expected) {
            assert!((x - e).abs() < 1e-12, "{xs:?}");
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let cfg = cfg_with(4, 3);
        assert_eq!(sample_scenario(&cfg, 7).unwrap(), sample_scenario(&cfg, 7).unwrap());
        assert_ne!(
            sample_scenario(&cfg, 7).unwrap().user_positions,
            sample_scenario(&cfg, 8).unwrap().user_positions
        );
    }

    #[test]
    fn adding_users_keeps_existing_draws() {
        let small = sample_scenario(&cfg_with(4, 2), 3).unwrap();
        let large = sample_scenario(&cfg_with(4, 5), 3).unwrap();
        assert_eq!(small.user_positions[..], large.user_positions[..2]);
        assert_eq!(small.device_channels[..], large.device_channels[..2]);
    }

    #[test]
    fn user_x_is_uniform_with_zero_mean() {
        let cfg = cfg_with(1, 1000);
        let s = sample_scenario(&cfg, 0).unwrap();
        let mean = s.user_positions.iter().map(|p| p.x).sum::<f64>() / 1000.0;
        let bound = 3.0 * (10.0 / 12f64.sqrt()) / 1000f64.sqrt();
        assert!(mean.abs() < bound, "mean {mean} bound {bound}");
        assert!(s.user_positions.iter().all(|p| p.x.abs() <= 5.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn geometric_invariants_hold(seed in any::<u64>(), trial in 0u64..1000, n in 1usize..9, m in 1usize..6) {
            let mut cfg = cfg_with(n, m);
            cfg.rng_seed = seed;
            let s = sample_scenario(&cfg, trial).unwrap();
            prop_assert_eq!(s.feed_position, Position::new(-5.0, 0.0, 3.0));
            for p in &s.user_positions {
                prop_assert!(p.x.abs() <= 5.0 && p.y.abs() <= 5.0 && p.z == 0.0);
            }
            for w in s.antenna_positions.windows(2) {
                prop_assert!(w[0].x < w[1].x);
            }
            for p in &s.antenna_positions {
                prop_assert!(p.x.abs() <= 5.0 && p.y == 0.0 && p.z == 3.0);
            }
            prop_assert_eq!(s.channels.len(), m);
            prop_assert!(s.channels.iter().all(|h| h.len() == n && h.is_finite()));
        }
    }
}
