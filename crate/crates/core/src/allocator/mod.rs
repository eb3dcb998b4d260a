//! Max-min timeslot allocation for a fixed activation plan.
//!
//! Given harvested powers `Phi[m][q]` and uplink gains `Psi_m = rho |g_m^u|^2`,
//! choose downlink durations `tau_d` and uplink durations `tau_u` with
//! `sum tau_d + sum tau_u <= T` to maximize `min_m R_m`, where
//!
//! ```text
//! R_m = tau_u[m] * log2(1 + Psi_m * E_m / tau_u[m]),   E_m = sum_q tau_d[q] Phi[m][q].
//! ```
//!
//! Every `R_m` is jointly concave and positively homogeneous of degree one in
//! `(tau_d, tau_u)`. Two solvers are provided: an interior-point method on the
//! low-dimensional dual ([`SolverMethod::InteriorPoint`], the default) and
//! projected supergradient ascent on the simplex
//! ([`SolverMethod::Supergradient`]). [`grid_oracle`] and
//! [`concavity_probe`] are independent validation tools.

mod concavity;
mod dual;
mod oracle;
pub(crate) mod rate;
mod supergradient;

pub use concavity::{
    concavity_probe, hessian_eigenvalue_derived, hessian_eigenvalue_printed, midpoint_concavity_gap, ConcavityReport,
    ProbeSample,
};
pub use oracle::{grid_oracle, ORACLE_MAX_DIMS};
pub use rate::user_rate;
pub use supergradient::project_capped_simplex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harvest::HarvestMatrix;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    #[default]
    InteriorPoint,
    Supergradient,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub method: SolverMethod,
    /// Supergradient: stop once the best value improves by less than this
    /// (relative) over `window` iterations.
    pub rel_tol: f64,
    /// Iteration budget (Newton steps, or supergradient steps).
    pub max_iters: usize,
    pub window: usize,
    /// Slack allowed on `sum tau <= T` after projection.
    pub projection_tol: f64,
    /// Interior point: relative duality gap at which the solve stops.
    pub gap_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: SolverMethod::InteriorPoint,
            rel_tol: 1e-4,
            max_iters: 50_000,
            window: 200,
            projection_tol: 1e-12,
            gap_tol: 1e-10,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.rel_tol > 0.0
            && self.rel_tol < 1.0
            && self.max_iters > 0
            && self.window > 0
            && self.projection_tol >= 0.0
            && self.gap_tol > 0.0
            && self.gap_tol < 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid solver settings {self:?}")))
        }
    }
}

/// One instance of the timeslot program.
#[derive(Clone, Debug, PartialEq)]
pub struct AllocationProblem {
    pub harvest: HarvestMatrix,
    /// `Psi_m = rho |g_m^u|^2`.
    pub uplink_gains: Vec<f64>,
    /// Frame length `T`.
    pub frame: f64,
}

impl AllocationProblem {
    pub fn new(harvest: HarvestMatrix, uplink_gains: Vec<f64>, frame: f64) -> Result<Self> {
        if uplink_gains.len() != harvest.num_users() {
            return Err(Error::LengthMismatch {
                expected: harvest.num_users(),
                found: uplink_gains.len(),
            });
        }
        if uplink_gains.iter().any(|&g| !(g.is_finite() && g >= 0.0)) {
            return Err(Error::InvalidProblem("uplink gains must be finite and >= 0".into()));
        }
        if !(frame.is_finite() && frame > 0.0) {
            return Err(Error::InvalidProblem("frame duration must be positive".into()));
        }
        Ok(Self {
            harvest,
            uplink_gains,
            frame,
        })
    }

    pub fn num_users(&self) -> usize {
        self.uplink_gains.len()
    }

    pub fn num_slots(&self) -> usize {
        self.harvest.num_slots()
    }

    /// `M + |Q|`.
    pub fn num_variables(&self) -> usize {
        self.num_users() + self.num_slots()
    }

    /// Rate of every user under the given durations.
    pub fn rates(&self, tau_d: &[f64], tau_u: &[f64]) -> Vec<f64> {
        (0..self.num_users())
            .map(|m| user_rate(tau_u[m], self.uplink_gains[m], self.harvest.energy(m, tau_d)))
            .collect()
    }

    pub fn min_rate(&self, tau_d: &[f64], tau_u: &[f64]) -> f64 {
        self.rates(tau_d, tau_u).into_iter().fold(f64::INFINITY, f64::min)
    }

    /// True when some user can never transmit (no uplink gain or no harvest
    /// in any slot), which pins the optimum at `v = 0`.
    pub fn is_degenerate(&self) -> bool {
        (0..self.num_users()).any(|m| self.uplink_gains[m] == 0.0 || self.harvest.row(m).iter().all(|&p| p == 0.0))
    }

    /// `Psi_m Phi[m][q]`: SNR-energy delivered to user `m` per unit of
    /// downlink time in slot `q`.
    pub(crate) fn snr_energy_matrix(&self) -> Vec<Vec<f64>> {
        (0..self.num_users())
            .map(|m| self.harvest.row(m).iter().map(|p| p * self.uplink_gains[m]).collect())
            .collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub method: SolverMethod,
    pub iterations: usize,
    /// Last accepted step length.
    pub final_step: f64,
    /// `max(0, sum tau - T)` plus the magnitude of any negative duration.
    pub feasibility_residual: f64,
    /// Certified upper bound on the optimal min-rate, when the method has one.
    pub upper_bound: Option<f64>,
}

/// Optimized durations and the rates they achieve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub tau_d: Vec<f64>,
    pub tau_u: Vec<f64>,
    pub rates: Vec<f64>,
    pub min_rate: f64,
    pub stats: SolverStats,
}

impl Schedule {
    /// All-zero schedule for problems whose optimum is `v = 0`.
    pub fn zero(problem: &AllocationProblem, method: SolverMethod) -> Self {
        Self {
            tau_d: vec![0.0; problem.num_slots()],
            tau_u: vec![0.0; problem.num_users()],
            rates: vec![0.0; problem.num_users()],
            min_rate: 0.0,
            stats: SolverStats {
                method,
                upper_bound: Some(0.0),
                ..SolverStats::default()
            },
        }
    }

    pub(crate) fn from_durations(
        problem: &AllocationProblem,
        tau_d: Vec<f64>,
        tau_u: Vec<f64>,
        stats: SolverStats,
    ) -> Self {
        let rates = problem.rates(&tau_d, &tau_u);
        let min_rate = rates.iter().copied().fold(f64::INFINITY, f64::min);
        let mut schedule = Self {
            tau_d,
            tau_u,
            rates,
            min_rate,
            stats,
        };
        schedule.stats.feasibility_residual = schedule.feasibility_residual(problem.frame);
        schedule
    }

    pub fn total_time(&self) -> f64 {
        self.tau_d.iter().chain(&self.tau_u).sum()
    }

    /// Violation of `sum tau <= T` and `tau >= 0`.
    pub fn feasibility_residual(&self, frame: f64) -> f64 {
        let negative: f64 = self.tau_d.iter().chain(&self.tau_u).map(|&t| (-t).max(0.0)).sum();
        (self.total_time() - frame).max(0.0) + negative
    }
}

/// Solve the max-min program with the method selected in `cfg`.
pub fn solve(problem: &AllocationProblem, cfg: &SolverConfig) -> Result<Schedule> {
    if problem.is_degenerate() {
        return Ok(Schedule::zero(problem, cfg.method));
    }
    match cfg.method {
        SolverMethod::InteriorPoint => dual::solve(problem, cfg),
        SolverMethod::Supergradient => supergradient::solve(problem, cfg, None),
    }
}

/// Projected supergradient ascent using Polyak steps toward `target`, a known
/// upper bound on the optimal min-rate.
pub fn solve_supergradient_with_target(
    problem: &AllocationProblem,
    cfg: &SolverConfig,
    target: f64,
) -> Result<Schedule> {
    if problem.is_degenerate() {
        return Ok(Schedule::zero(problem, SolverMethod::Supergradient));
    }
    supergradient::solve(problem, cfg, Some(target))
}
