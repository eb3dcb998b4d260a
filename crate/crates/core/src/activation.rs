//! Antenna-activation strategies: exhaustive power-set downlink (Search),
//! per-user best subsets (Greedy) and single-antenna scans (Naive).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::{gain_of_mask, ActivationVector, ChannelVector};
use crate::error::{Error, Result};

/// Largest `N` for which subset enumeration fits a `u64` mask comfortably.
const HARD_MAX_ANTENNAS: usize = 63;

/// Relative tolerance under which two gains count as tied.
const TIE_RTOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Search,
    Greedy,
    Naive,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Search, Mode::Greedy, Mode::Naive];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Search => "search",
            Mode::Greedy => "greedy",
            Mode::Naive => "naive",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "search" => Ok(Mode::Search),
            "greedy" => Ok(Mode::Greedy),
            "naive" => Ok(Mode::Naive),
            other => Err(Error::InvalidConfig(format!("unknown activation mode `{other}`"))),
        }
    }
}

/// Downlink slot patterns plus one uplink pattern per user.
#[derive(Clone, Debug, PartialEq)]
pub struct ActivationPlan {
    pub mode: Mode,
    pub downlink_slots: Vec<ActivationVector>,
    pub uplink_vectors: Vec<ActivationVector>,
}

impl ActivationPlan {
    /// `|Q|`.
    pub fn slot_count(&self) -> usize {
        self.downlink_slots.len()
    }
}

fn check_enumerable(n: usize, max: usize) -> Result<()> {
    let max = max.min(HARD_MAX_ANTENNAS);
    if n == 0 {
        return Err(Error::EmptyInput("antenna set"));
    }
    if n > max {
        return Err(Error::EnumerationTooLarge { n, max });
    }
    Ok(())
}

/// All `2^N - 1` non-empty patterns in binary-counting order (antenna `n`
/// is bit `n`).
pub fn enumerate_subsets(n: usize, max_antennas: usize) -> Result<Vec<ActivationVector>> {
    check_enumerable(n, max_antennas)?;
    (1..1u64 << n)
        .map(|mask| ActivationVector::from_mask(mask, n))
        .collect()
}

/// Pattern maximizing `|g(h, b)|^2` over every non-empty `b`. Ties go to the
/// pattern with fewer active antennas, then to the lower canonical index.
pub fn best_activation(h: &ChannelVector, max_antennas: usize) -> Result<ActivationVector> {
    let n = h.len();
    check_enumerable(n, max_antennas)?;
    let mut best_mask = 1u64;
    let mut best_gain = gain_of_mask(&h.entries, 1).norm_sqr();
    let mut best_count = 1u32;
    for mask in 2..1u64 << n {
        let gain = gain_of_mask(&h.entries, mask).norm_sqr();
        let count = mask.count_ones();
        let tol = TIE_RTOL * best_gain.max(gain);
        if gain > best_gain + tol || ((gain - best_gain).abs() <= tol && count < best_count) {
            best_mask = mask;
            best_gain = gain;
            best_count = count;
        }
    }
    ActivationVector::from_mask(best_mask, n)
}

/// One-hot pattern at the strongest entry of `h`; ties go to the lowest index.
pub fn best_one_hot(h: &ChannelVector) -> Result<ActivationVector> {
    if h.is_empty() {
        return Err(Error::EmptyInput("channel vector"));
    }
    let mut best = 0;
    let mut best_mag = h.entries[0].norm();
    for (n, z) in h.entries.iter().enumerate().skip(1) {
        if z.norm() > best_mag {
            best = n;
            best_mag = z.norm();
        }
    }
    Ok(ActivationVector::one_hot(h.len(), best))
}

/// Build the plan for `mode`. `channels` are the combined channels; the Naive
/// scan runs on them as well (see [`naive_plan`] for other scan criteria).
pub fn build_plan(mode: Mode, channels: &[ChannelVector], max_antennas: usize) -> Result<ActivationPlan> {
    let n = channels
        .first()
        .map(ChannelVector::len)
        .ok_or(Error::EmptyInput("user channels"))?;
    if let Some(bad) = channels.iter().find(|h| h.len() != n) {
        return Err(Error::LengthMismatch {
            expected: n,
            found: bad.len(),
        });
    }
    match mode {
        Mode::Search => {
            let downlink_slots = enumerate_subsets(n, max_antennas)?;
            let uplink_vectors = channels
                .iter()
                .map(|h| best_activation(h, max_antennas))
                .collect::<Result<Vec<_>>>()?;
            Ok(ActivationPlan {
                mode,
                downlink_slots,
                uplink_vectors,
            })
        }
        Mode::Greedy => {
            let uplink_vectors = channels
                .iter()
                .map(|h| best_activation(h, max_antennas))
                .collect::<Result<Vec<_>>>()?;
            Ok(ActivationPlan {
                mode,
                downlink_slots: uplink_vectors.clone(),
                uplink_vectors,
            })
        }
        Mode::Naive => naive_plan(channels),
    }
}

/// Naive plan scanning `scan_channels` (combined or free-space) for each
/// user's strongest single antenna; downlink slot `m` repeats user `m`'s
/// uplink pattern.
pub fn naive_plan(scan_channels: &[ChannelVector]) -> Result<ActivationPlan> {
    if scan_channels.is_empty() {
        return Err(Error::EmptyInput("user channels"));
    }
    let uplink_vectors = scan_channels.iter().map(best_one_hot).collect::<Result<Vec<_>>>()?;
    Ok(ActivationPlan {
        mode: Mode::Naive,
        downlink_slots: uplink_vectors.clone(),
        uplink_vectors,
    })
}
