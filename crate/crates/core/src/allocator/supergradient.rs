//! Projected supergradient ascent on `F(tau) = min_m R_m(tau)` over
//! `{tau >= 0, sum tau <= T}`.

use super::rate::rate_partials;
use super::{AllocationProblem, Schedule, SolverConfig, SolverMethod, SolverStats};
use crate::error::{Error, Result};

/// Euclidean projection onto `{x >= 0, sum x <= cap}`.
pub fn project_capped_simplex(x: &mut [f64], cap: f64) {
    for v in x.iter_mut() {
        *v = v.max(0.0);
    }
    if x.iter().sum::<f64>() <= cap {
        return;
    }
    // Onto the face sum x = cap: x_i = max(x_i - theta, 0).
    let mut sorted: Vec<f64> = x.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        cumsum += v;
        let candidate = (cumsum - cap) / (k + 1) as f64;
        if v - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    for v in x.iter_mut() {
        *v = (*v - theta).max(0.0);
    }
}

/// Supergradient of `R_m` with respect to `(tau_d, tau_u)`, written into
/// `out`. Uses one-sided limits at `tau_u = 0`.
fn supergradient(problem: &AllocationProblem, x: &[f64], m: usize, out: &mut [f64]) {
    let slots = problem.num_slots();
    let (tau_d, tau_u) = x.split_at(slots);
    let psi = problem.uplink_gains[m];
    let row = problem.harvest.row(m);
    let c = psi * problem.harvest.energy(m, tau_d);
    out.iter_mut().for_each(|g| *g = 0.0);
    let t = tau_u[m];
    if t > 0.0 {
        let (d_c, d_tau) = rate_partials(t, c);
        for q in 0..slots {
            out[q] = d_c * psi * row[q];
        }
        out[slots + m] = d_tau;
    } else if c > 0.0 {
        // d/dtau_u is +inf here: move along tau_u alone.
        out[slots + m] = 1.0;
    } else {
        // Both energy and airtime are zero; grow them together.
        let norm = row.iter().map(|p| p * p).sum::<f64>().sqrt();
        for q in 0..slots {
            out[q] = if norm > 0.0 { row[q] / norm } else { 0.0 };
        }
        out[slots + m] = 1.0;
    }
}

/// Index of the user attaining the minimum rate (lowest index on ties).
fn bottleneck(rates: &[f64]) -> usize {
    let mut best = 0;
    for (m, &r) in rates.iter().enumerate() {
        if r < rates[best] {
            best = m;
        }
    }
    best
}

pub(super) fn solve(problem: &AllocationProblem, cfg: &SolverConfig, target: Option<f64>) -> Result<Schedule> {
    let slots = problem.num_slots();
    let users = problem.num_users();
    let n = slots + users;
    let frame = problem.frame;

    let mut x = vec![frame / n as f64; n];
    let mut g = vec![0.0; n];
    let eval = |x: &[f64]| problem.rates(&x[..slots], &x[slots..]);

    let mut rates = eval(&x);
    let mut best_x = x.clone();
    let mut best_v = rates.iter().copied().fold(f64::INFINITY, f64::min);
    let mut history = vec![best_v];
    let base_step = frame / (n as f64).sqrt();
    let mut final_step = 0.0;

    for k in 0..cfg.max_iters {
        let m = bottleneck(&rates);
        let v = rates[m];
        supergradient(problem, &x, m, &mut g);
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            break;
        }
        let step = match target {
            Some(u) if u > v => (u - v) / norm,
            _ => base_step / ((k + 1) as f64).sqrt(),
        };
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi += step * gi / norm;
        }
        project_capped_simplex(&mut x, frame);
        final_step = step;

        rates = eval(&x);
        let value = rates.iter().copied().fold(f64::INFINITY, f64::min);
        if value > best_v {
            best_v = value;
            best_x.copy_from_slice(&x);
        }
        history.push(best_v);
        if history.len() > cfg.window {
            let old = history[history.len() - 1 - cfg.window];
            if best_v > 0.0 && best_v - old <= cfg.rel_tol * best_v {
                return Ok(finish(problem, best_x, k + 1, final_step, cfg));
            }
        }
    }

    let iterations = history.len() - 1;
    let best = finish(problem, best_x, iterations, final_step, cfg);
    if iterations < cfg.max_iters {
        // Stalled on a zero supergradient: the iterate is optimal.
        return Ok(best);
    }
    Err(Error::NonConvergence {
        iterations,
        residual: best.stats.feasibility_residual,
        best: Box::new(best),
    })
}

fn finish(
    problem: &AllocationProblem,
    mut x: Vec<f64>,
    iterations: usize,
    final_step: f64,
    cfg: &SolverConfig,
) -> Schedule {
    let slots = problem.num_slots();
    let sum: f64 = x.iter().sum();
    if sum > problem.frame + cfg.projection_tol {
        project_capped_simplex(&mut x, problem.frame);
    }
    let tau_u = x.split_off(slots);
    let stats = SolverStats {
        method: SolverMethod::Supergradient,
        iterations,
        final_step,
        feasibility_residual: 0.0,
        upper_bound: None,
    };
    Schedule::from_durations(problem, x, tau_u, stats)
}
