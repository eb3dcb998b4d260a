use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{mean_and_stderr, run_trials, Strategy, TrialResult};
use crate::error::{Error, Result};
use crate::scenario::SystemConfig;

/// Parameter varied along a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Transmit power in dBm.
    P0Dbm,
    /// Number of users `M`.
    Users,
    /// Waveguide loss in dB/m.
    Kappa,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::P0Dbm => "p0_dbm",
            SweepAxis::Users => "users",
            SweepAxis::Kappa => "kappa",
        }
    }

    /// Copy of `base` with the axis parameter set to `value`.
    pub fn apply(self, base: &SystemConfig, value: f64) -> Result<SystemConfig> {
        let mut cfg = base.clone();
        match self {
            SweepAxis::P0Dbm => cfg.set_p0_dbm(value),
            SweepAxis::Users => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "user count must be a positive integer, got {value}"
                    )));
                }
                cfg.num_users = value as usize;
            }
            SweepAxis::Kappa => cfg.waveguide_loss = value,
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "p0_dbm" | "p0" => Ok(SweepAxis::P0Dbm),
            "users" | "m" => Ok(SweepAxis::Users),
            "kappa" => Ok(SweepAxis::Kappa),
            _ => Err(Error::InvalidConfig(format!(
                "unknown sweep axis {s:?} (expected p0_dbm, users or kappa)"
            ))),
        }
    }
}

/// Aggregate of one mode at one grid point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeStats {
    pub mean: f64,
    pub std_err: f64,
    pub completed: usize,
    pub failed: usize,
}

impl ModeStats {
    /// Statistics over the non-failed results.
    pub fn from_results<'a>(results: impl IntoIterator<Item = &'a TrialResult>) -> Self {
        let mut ok = Vec::new();
        let mut failed = 0;
        for r in results {
            if r.failed() {
                failed += 1;
            } else {
                ok.push(r.min_rate);
            }
        }
        let (mean, std_err) = mean_and_stderr(&ok);
        ModeStats {
            mean,
            std_err,
            completed: ok.len(),
            failed,
        }
    }
}

/// Mean min-rate per grid point and mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
    pub modes: Vec<Strategy>,
    pub trials: u64,
    /// `stats[i][j]`: grid point `i`, mode `j`.
    pub stats: Vec<Vec<ModeStats>>,
}

impl SweepTable {
    /// Aggregate raw results indexed `[grid point][trial][mode]`.
    pub fn from_results(axis: SweepAxis, grid: &[f64], modes: &[Strategy], results: &[Vec<Vec<TrialResult>>]) -> Self {
        let stats = results
            .iter()
            .map(|point| {
                (0..modes.len())
                    .map(|j| ModeStats::from_results(point.iter().map(|t| &t[j])))
                    .collect()
            })
            .collect();
        SweepTable {
            axis,
            grid: grid.to_vec(),
            modes: modes.to_vec(),
            trials: results.first().map_or(0, |p| p.len() as u64),
            stats,
        }
    }

    pub fn total_failures(&self) -> usize {
        self.stats.iter().flatten().map(|s| s.failed).sum()
    }

    pub fn column(&self, mode: Strategy) -> Option<Vec<ModeStats>> {
        let j = self.modes.iter().position(|&m| m == mode)?;
        Some(self.stats.iter().map(|row| row[j]).collect())
    }
}

fn check(grid: &[f64], modes: &[Strategy]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::EmptyInput("sweep grid"));
    }
    if modes.is_empty() {
        return Err(Error::EmptyInput("mode list"));
    }
    if let Some(v) = grid.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig(format!("non-finite grid value {v}")));
    }
    Ok(())
}

/// Raw paired results, indexed `[grid point][trial][mode]`.
pub fn sweep_results(
    base: &SystemConfig,
    axis: SweepAxis,
    grid: &[f64],
    modes: &[Strategy],
    num_trials: u64,
) -> Result<Vec<Vec<Vec<TrialResult>>>> {
    check(grid, modes)?;
    grid.iter()
        .map(|&v| run_trials(&axis.apply(base, v)?, modes, num_trials))
        .collect()
}

/// Monte Carlo sweep over `grid`, every point using trials `0..num_trials`.
pub fn sweep(
    base: &SystemConfig,
    axis: SweepAxis,
    grid: &[f64],
    modes: &[Strategy],
    num_trials: u64,
) -> Result<SweepTable> {
    let results = sweep_results(base, axis, grid, modes, num_trials)?;
    Ok(SweepTable::from_results(axis, grid, modes, &results))
}
