//! Monte Carlo harness: paired trials, parameter sweeps, antenna-count
//! histograms and flat-file output.

mod emit;
mod histogram;
mod sweep;

pub use emit::{emit, parse_csv, write_trials_csv, OutputFormat};
pub use histogram::{antenna_histogram, AntennaHistogram, HistogramWeighting, Link};
pub use sweep::{sweep, sweep_results, ModeStats, SweepAxis, SweepTable};

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activation::{build_plan, naive_plan, ActivationPlan, Mode};
use crate::allocator::{self, AllocationProblem, Schedule, SolverStats};
use crate::channel::{effective_gain, ChannelVector};
use crate::error::{Error, Result};
use crate::harvest::harvest_matrix;
use crate::miso;
use crate::scenario::{sample_scenario, NaiveCriterion, ScenarioRealization, SystemConfig};

/// Durations at or below this fraction of the frame count as unused slots.
pub const USED_SLOT_FRACTION: f64 = 1e-6;

/// Environment variable capping the worker pool size.
pub const THREADS_ENV: &str = "WPPAN_THREADS";

/// Transmission scheme evaluated in one trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Search,
    Greedy,
    Naive,
    Miso,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::Search, Strategy::Greedy, Strategy::Naive, Strategy::Miso];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Search => "search",
            Strategy::Greedy => "greedy",
            Strategy::Naive => "naive",
            Strategy::Miso => "miso",
        }
    }

    /// The pinching-antenna mode, or `None` for the MISO benchmark.
    pub fn mode(self) -> Option<Mode> {
        match self {
            Strategy::Search => Some(Mode::Search),
            Strategy::Greedy => Some(Mode::Greedy),
            Strategy::Naive => Some(Mode::Naive),
            Strategy::Miso => None,
        }
    }
}

impl From<Mode> for Strategy {
    fn from(mode: Mode) -> Self {
        match mode {
            Mode::Search => Strategy::Search,
            Mode::Greedy => Strategy::Greedy,
            Mode::Naive => Strategy::Naive,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown mode {s:?} (expected search, greedy, naive or miso)")))
    }
}

/// Parse a comma-separated list of strategies.
pub fn parse_strategies(list: &str) -> Result<Vec<Strategy>> {
    let modes = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<Vec<Strategy>>>()?;
    if modes.is_empty() {
        return Err(Error::InvalidConfig("empty mode list".into()));
    }
    Ok(modes)
}

/// Outcome of one strategy on one realization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: u64,
    pub mode: Strategy,
    pub num_antennas: usize,
    pub min_rate: f64,
    pub rates: Vec<f64>,
    /// Active antennas of each used downlink slot, in plan order.
    pub downlink_counts: Vec<usize>,
    /// Durations of the same used downlink slots.
    pub downlink_durations: Vec<f64>,
    /// Active antennas of each user's uplink slot (used slots only).
    pub uplink_counts: Vec<usize>,
    pub uplink_durations: Vec<f64>,
    pub stats: SolverStats,
    /// Solver error message when the trial did not converge; the other fields
    /// then describe the best iterate found.
    pub failure: Option<String>,
}

impl TrialResult {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }
}

fn solve_flagged(problem: &AllocationProblem, config: &SystemConfig) -> Result<(Schedule, Option<String>)> {
    match allocator::solve(problem, &config.solver) {
        Ok(s) => Ok((s, None)),
        Err(Error::NonConvergence {
            iterations,
            residual,
            best,
        }) => Ok((
            *best,
            Some(format!(
                "no convergence after {iterations} iterations (residual {residual:.3e})"
            )),
        )),
        Err(e) => Err(e),
    }
}

fn used(durations: &[f64], counts: impl Iterator<Item = usize>, threshold: f64) -> (Vec<usize>, Vec<f64>) {
    durations
        .iter()
        .zip(counts)
        .filter(|(&t, _)| t > threshold)
        .map(|(&t, c)| (c, t))
        .unzip()
}

fn assemble(
    trial: u64,
    mode: Strategy,
    config: &SystemConfig,
    schedule: Schedule,
    failure: Option<String>,
    downlink_counts: impl Iterator<Item = usize>,
    uplink_counts: impl Iterator<Item = usize>,
) -> TrialResult {
    let threshold = USED_SLOT_FRACTION * config.frame_duration;
    let (downlink_counts, downlink_durations) = used(&schedule.tau_d, downlink_counts, threshold);
    let (uplink_counts, uplink_durations) = used(&schedule.tau_u, uplink_counts, threshold);
    TrialResult {
        trial,
        mode,
        num_antennas: config.num_antennas,
        min_rate: schedule.min_rate,
        rates: schedule.rates,
        downlink_counts,
        downlink_durations,
        uplink_counts,
        uplink_durations,
        stats: schedule.stats,
        failure,
    }
}

/// Activation plan used by `mode` on this realization, honoring the
/// configured Naive scan criterion.
pub fn plan_for(config: &SystemConfig, scenario: &ScenarioRealization, mode: Mode) -> Result<ActivationPlan> {
    if mode == Mode::Naive && config.options.naive_criterion == NaiveCriterion::FreeSpace {
        return naive_plan(&scenario.device_channels);
    }
    build_plan(mode, &scenario.channels, config.options.max_search_antennas)
}

/// Allocation problem for a pinching-antenna mode.
pub fn wppan_problem(
    config: &SystemConfig,
    channels: &[ChannelVector],
    plan: &ActivationPlan,
) -> Result<AllocationProblem> {
    let harvest = harvest_matrix(channels, plan, config.transmit_power, &config.eh)?;
    let gains = channels
        .iter()
        .zip(&plan.uplink_vectors)
        .map(|(h, b)| Ok(config.rho() * effective_gain(h, b)?.norm_sqr()))
        .collect::<Result<Vec<_>>>()?;
    AllocationProblem::new(harvest, gains, config.frame_duration)
}

/// Run `mode` on an already sampled realization.
pub fn run_on(config: &SystemConfig, scenario: &ScenarioRealization, mode: Strategy) -> Result<TrialResult> {
    let trial = scenario.trial;
    match mode.mode() {
        Some(m) => {
            let plan = plan_for(config, scenario, m)?;
            let problem = wppan_problem(config, &scenario.channels, &plan)?;
            let (schedule, failure) = solve_flagged(&problem, config)?;
            Ok(assemble(
                trial,
                mode,
                config,
                schedule,
                failure,
                plan.downlink_slots.iter().map(|b| b.active_count()),
                plan.uplink_vectors.iter().map(|b| b.active_count()),
            ))
        }
        None => {
            let channels = miso::miso_channels(config, scenario)?;
            let problem = miso::miso_problem(&channels, config)?;
            let (schedule, failure) = solve_flagged(&problem, config)?;
            let n = config.num_antennas;
            let slots = problem.num_slots();
            Ok(assemble(
                trial,
                mode,
                config,
                schedule,
                failure,
                std::iter::repeat_n(n, slots),
                std::iter::repeat_n(n, config.num_users),
            ))
        }
    }
}

/// Sample trial `trial` and run `mode` on it. Every mode sees the same
/// realization for a given `(config.rng_seed, trial)`.
pub fn run_trial(config: &SystemConfig, trial: u64, mode: Strategy) -> Result<TrialResult> {
    config.validate()?;
    let scenario = sample_scenario(config, trial)?;
    run_on(config, &scenario, mode)
}

/// Run several modes on one shared realization, in the order given.
pub fn run_paired(config: &SystemConfig, trial: u64, modes: &[Strategy]) -> Result<Vec<TrialResult>> {
    config.validate()?;
    let scenario = sample_scenario(config, trial)?;
    modes.iter().map(|&m| run_on(config, &scenario, m)).collect()
}

/// Worker count: available parallelism, capped by `WPPAN_THREADS` if set.
pub fn worker_count() -> usize {
    let available = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    match std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
    {
        Some(cap) if cap > 0 => cap.min(available),
        _ => available,
    }
}

/// Run `f` on every trial in `trials` across the worker pool; results come
/// back in trial order.
pub fn par_trials<T, F>(trials: std::ops::Range<u64>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    pool.install(|| trials.into_par_iter().map(&f).collect())
}

/// `run_paired` over trials `0..num_trials`, indexed `[trial][mode]`.
pub fn run_trials(config: &SystemConfig, modes: &[Strategy], num_trials: u64) -> Result<Vec<Vec<TrialResult>>> {
    config.validate()?;
    par_trials(0..num_trials, |t| run_paired(config, t, modes))
}

/// Mean and standard error of the mean; `(mean, 0)` for a single value.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}
