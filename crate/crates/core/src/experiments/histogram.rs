use serde::{Deserialize, Serialize};

use super::TrialResult;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Link {
    Downlink,
    Uplink,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistogramWeighting {
    /// One count per used slot.
    #[default]
    PerSlot,
    /// Each used slot weighted by its duration.
    DurationWeighted,
}

/// Normalized distribution of the active-antenna count over `1..=N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AntennaHistogram {
    pub link: Link,
    pub weighting: HistogramWeighting,
    /// `probabilities[k - 1]` is the mass at `k` active antennas.
    pub probabilities: Vec<f64>,
    /// Number of slots that contributed.
    pub slots: usize,
}

impl AntennaHistogram {
    pub fn mean(&self) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(i, p)| (i + 1) as f64 * p)
            .sum()
    }

    /// Most likely count (smallest on ties).
    pub fn mode(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probabilities.iter().enumerate() {
            if p > self.probabilities[best] {
                best = i;
            }
        }
        best + 1
    }

    /// True when the mass rises to a single peak and then falls.
    pub fn is_unimodal(&self) -> bool {
        let p = &self.probabilities;
        let peak = self.mode() - 1;
        p[..=peak].windows(2).all(|w| w[0] <= w[1]) && p[peak..].windows(2).all(|w| w[0] >= w[1])
    }
}

/// Histogram of active-antenna counts over the used slots of `results`.
pub fn antenna_histogram(
    results: &[TrialResult],
    link: Link,
    weighting: HistogramWeighting,
) -> Result<AntennaHistogram> {
    let n = results
        .iter()
        .map(|r| r.num_antennas)
        .max()
        .ok_or(Error::EmptyInput("trial results"))?;
    let mut mass = vec![0.0; n];
    let mut slots = 0;
    for r in results {
        let (counts, durations) = match link {
            Link::Downlink => (&r.downlink_counts, &r.downlink_durations),
            Link::Uplink => (&r.uplink_counts, &r.uplink_durations),
        };
        for (&c, &t) in counts.iter().zip(durations) {
            if c == 0 || c > n {
                return Err(Error::InvalidProblem(format!("active count {c} outside 1..={n}")));
            }
            mass[c - 1] += match weighting {
                HistogramWeighting::PerSlot => 1.0,
                HistogramWeighting::DurationWeighted => t,
            };
            slots += 1;
        }
    }
    let total: f64 = mass.iter().sum();
    if slots == 0 || !(total > 0.0) {
        return Err(Error::EmptyInput("used slots"));
    }
    Ok(AntennaHistogram {
        link,
        weighting,
        probabilities: mass.iter().map(|m| m / total).collect(),
        slots,
    })
}
