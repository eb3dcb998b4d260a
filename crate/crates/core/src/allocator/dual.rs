//! Interior-point solver working on the dual of the unit-rate time problem.
//!
//! Because every rate is positively homogeneous of degree one, the optimal
//! min-rate for a frame `T` is `T / G`, where `G` is the least total time in
//! which every user can reach unit rate:
//!
//! ```text
//! G = min_{tau_d >= 0}  sum_q tau_d[q] + sum_m t(c_m),   c_m = sum_q a[m][q] tau_d[q],
//! ```
//!
//! with `a[m][q] = Psi_m Phi[m][q]` and `t(c)` the unit-rate uplink time. Its
//! Lagrange dual has one variable per user,
//!
//! ```text
//! max_{y > 0}  sum_m h(y_m)   s.t.  a_q . y <= 1  for every slot q,
//! h(y) = min_c t(c) + y c,
//! ```
//!
//! so the log-barrier Newton iteration lives in `R^M` no matter how many
//! downlink slots there are. On the central path the primal durations are
//! recovered as `tau_d[q] = mu / (1 - a_q . y)`, which reproduces the dual's
//! energies exactly and yields a feasible schedule together with the
//! certified duality gap `|Q| mu`.

use nalgebra::{DMatrix, DVector};

use super::rate::{dual_curvature, dual_point, unit_rate_time};
use super::{AllocationProblem, Schedule, SolverConfig, SolverMethod, SolverStats};
use crate::error::{Error, Result};

const MU_SHRINK: f64 = 0.1;
const ARMIJO: f64 = 0.25;
const MAX_BACKTRACK: usize = 80;
/// Centering stops once a Newton step would move every dual variable and
/// every slack by less than this fraction of itself.
const CENTERING_TOL: f64 = 1e-13;
const NOISE_FLOOR: f64 = 1e-10;
const MAX_CENTERING_STEPS: usize = 200;
/// Columns below this fraction of the largest duration are dropped when
/// polishing.
const POLISH_SHARE: f64 = 1e-4;

struct Barrier {
    /// Columns of `a` that carry any energy, stored column-major.
    cols: Vec<Vec<f64>>,
    users: usize,
}

struct Eval {
    value: f64,
    grad: DVector<f64>,
    neg_hess: DMatrix<f64>,
}

impl Barrier {
    fn slacks(&self, y: &[f64]) -> Option<Vec<f64>> {
        if y.iter().any(|&v| !(v > 0.0)) {
            return None;
        }
        let mut out = Vec::with_capacity(self.cols.len());
        for col in &self.cols {
            let s = 1.0 - col.iter().zip(y).map(|(a, v)| a * v).sum::<f64>();
            if !(s > 0.0) {
                return None;
            }
            out.push(s);
        }
        Some(out)
    }

    /// Largest relative change of any `y_i` or slack under the step `dir`.
    fn relative_move(&self, y: &[f64], dir: &[f64]) -> f64 {
        let slacks = match self.slacks(y) {
            Some(s) => s,
            None => return f64::INFINITY,
        };
        let in_y = y.iter().zip(dir).map(|(v, d)| (d / v).abs()).fold(0.0, f64::max);
        let in_slack = self
            .cols
            .iter()
            .zip(&slacks)
            .map(|(col, s)| (col.iter().zip(dir).map(|(a, d)| a * d).sum::<f64>() / s).abs())
            .fold(0.0, f64::max);
        in_y.max(in_slack)
    }

    fn dual_value(y: &[f64]) -> f64 {
        y.iter()
            .map(|&v| {
                let (_, c, t) = dual_point(v);
                t + v * c
            })
            .sum()
    }

    fn value(&self, y: &[f64], mu: f64) -> Option<f64> {
        let slacks = self.slacks(y)?;
        Some(Self::dual_value(y) + mu * slacks.iter().map(|s| s.ln()).sum::<f64>())
    }

    fn eval(&self, y: &[f64], mu: f64) -> Option<Eval> {
        let slacks = self.slacks(y)?;
        let m = self.users;
        let mut value = 0.0;
        let mut grad = DVector::zeros(m);
        let mut neg_hess = DMatrix::zeros(m, m);
        for (i, &v) in y.iter().enumerate() {
            let (s, c, t) = dual_point(v);
            value += t + v * c;
            grad[i] = c;
            neg_hess[(i, i)] = -dual_curvature(v, s);
        }
        for (col, &s) in self.cols.iter().zip(&slacks) {
            value += mu * s.ln();
            let w = mu / s;
            let w2 = mu / (s * s);
            for i in 0..m {
                if col[i] == 0.0 {
                    continue;
                }
                grad[i] -= w * col[i];
                for j in 0..=i {
                    neg_hess[(i, j)] += w2 * col[i] * col[j];
                }
            }
        }
        for i in 0..m {
            for j in 0..i {
                neg_hess[(j, i)] = neg_hess[(i, j)];
            }
        }
        Some(Eval { value, grad, neg_hess })
    }

    /// Total time of the durations `tau` (over kept columns) together with
    /// each user's unit-rate uplink time.
    fn evaluate(&self, tau: Vec<f64>) -> Option<(Vec<f64>, Vec<f64>, f64)> {
        let mut times = Vec::with_capacity(self.users);
        for i in 0..self.users {
            let c: f64 = self.cols.iter().zip(&tau).map(|(col, t)| col[i] * t).sum();
            let t = unit_rate_time(c);
            if !t.is_finite() {
                return None;
            }
            times.push(t);
        }
        let total = tau.iter().sum::<f64>() + times.iter().sum::<f64>();
        Some((tau, times, total))
    }

    /// Primal point implied by the barrier multipliers at `(y, mu)`:
    /// `tau_d[q] = mu / slack_q`.
    fn primal(&self, y: &[f64], mu: f64) -> Option<(Vec<f64>, Vec<f64>, f64)> {
        let slacks = self.slacks(y)?;
        self.evaluate(slacks.iter().map(|s| mu / s).collect())
    }

    /// Refinement of a barrier primal point. The barrier durations are
    /// limited by the rounding of near-zero slacks, so instead the columns
    /// carrying a visible share of `tau` are kept and their durations solved
    /// for the energies `c(y)` that are optimal for the dual point.
    fn polish(&self, y: &[f64], tau: &[f64]) -> Option<(Vec<f64>, Vec<f64>, f64)> {
        let peak = tau.iter().copied().fold(0.0, f64::max);
        let active: Vec<usize> = (0..tau.len()).filter(|&q| tau[q] >= POLISH_SHARE * peak).collect();
        if active.is_empty() {
            return None;
        }
        let a = DMatrix::from_fn(self.users, active.len(), |i, j| self.cols[active[j]][i]);
        let target = DVector::from_iterator(self.users, y.iter().map(|&v| dual_point(v).1));
        let solved = a.svd(true, true).solve(&target, 1e-14).ok()?;
        if solved.iter().any(|t| !(*t >= 0.0)) {
            return None;
        }
        let mut full = vec![0.0; tau.len()];
        for (&q, &t) in active.iter().zip(solved.iter()) {
            full[q] = t;
        }
        self.evaluate(full)
    }
}

pub(super) fn solve(problem: &AllocationProblem, cfg: &SolverConfig) -> Result<Schedule> {
    let a = problem.snr_energy_matrix();
    let users = problem.num_users();
    let slots = problem.num_slots();
    let kept: Vec<usize> = (0..slots).filter(|&q| (0..users).any(|m| a[m][q] > 0.0)).collect();
    let barrier = Barrier {
        cols: kept.iter().map(|&q| (0..users).map(|m| a[m][q]).collect()).collect(),
        users,
    };

    // Strictly feasible start: every constraint has slack >= 1/2.
    let mut y: Vec<f64> = (0..users)
        .map(|m| {
            let peak = a[m].iter().copied().fold(0.0, f64::max);
            0.5 / (users as f64 * peak)
        })
        .collect();

    let n_cols = barrier.cols.len() as f64;
    let mut mu = (Barrier::dual_value(&y) / n_cols).max(f64::MIN_POSITIVE);
    let mut iterations = 0usize;
    let mut final_step = 0.0;
    let mut best: Option<(Vec<f64>, Vec<f64>, f64, f64)> = None;
    let mut best_dual = f64::NEG_INFINITY;

    loop {
        // Centering by damped Newton ascent.
        let mut least_move = f64::INFINITY;
        let mut stalls = 0;
        for _ in 0..MAX_CENTERING_STEPS {
            if iterations >= cfg.max_iters {
                return Err(non_convergence(problem, &kept, best, iterations));
            }
            let ev = barrier
                .eval(&y, mu)
                .expect("iterates stay strictly inside the barrier domain");
            let chol = match ev.neg_hess.clone().cholesky() {
                Some(c) => c,
                None => return Err(non_convergence(problem, &kept, best, iterations)),
            };
            let dir = chol.solve(&ev.grad);
            let decrement = ev.grad.dot(&dir);
            iterations += 1;
            let moved = barrier.relative_move(&y, dir.as_slice());
            // Converged, or Newton has stopped contracting at the rounding floor.
            if decrement <= NOISE_FLOOR * (1.0 + ev.value.abs()) && moved > 0.5 * least_move {
                stalls += 1;
            }
            least_move = least_move.min(moved);
            let stalled = stalls >= 3;
            if !(decrement > 0.0) || moved <= CENTERING_TOL || stalled {
                if decrement > 0.0 {
                    let trial: Vec<f64> = y.iter().zip(dir.iter()).map(|(v, d)| v + d).collect();
                    if barrier.slacks(&trial).is_some() {
                        y = trial;
                    }
                }
                break;
            }
            let mut step = 1.0;
            let mut accepted = false;
            for _ in 0..MAX_BACKTRACK {
                let trial: Vec<f64> = y.iter().zip(dir.iter()).map(|(v, d)| v + step * d).collect();
                if let Some(val) = barrier.value(&trial, mu) {
                    // Below `NOISE_FLOOR` the objective cannot resolve the
                    // predicted ascent; full steps are then taken on trust.
                    let noisy = step == 1.0 && decrement <= NOISE_FLOOR * (1.0 + ev.value.abs());
                    if noisy || val >= ev.value + ARMIJO * step * decrement {
                        if trial == y {
                            // The step is below the resolution of `y`.
                            break;
                        }
                        y = trial;
                        accepted = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !accepted {
                // Rounding floor reached: no representable ascent left.
                break;
            }
            final_step = step;
        }

        // Every interior `y` certifies a lower bound; keep the best of each.
        best_dual = best_dual.max(Barrier::dual_value(&y));
        if let Some(raw) = barrier.primal(&y, mu) {
            let polished = barrier.polish(&y, &raw.0);
            for (tau, times, total) in std::iter::once(raw).chain(polished) {
                if best.as_ref().is_none_or(|b| total < b.2) {
                    best = Some((tau, times, total, best_dual));
                }
            }
        }
        if let Some(b) = best.as_mut() {
            b.3 = best_dual;
            if b.2 - best_dual <= cfg.gap_tol * b.2 {
                break;
            }
        }
        mu *= MU_SHRINK;
        if mu < f64::MIN_POSITIVE {
            return Err(non_convergence(problem, &kept, best, iterations));
        }
    }

    let (tau, times, total, dual) = best.expect("loop exits only with a primal point");
    let stats = SolverStats {
        method: SolverMethod::InteriorPoint,
        iterations,
        final_step,
        feasibility_residual: 0.0,
        upper_bound: Some(problem.frame / dual.max(f64::MIN_POSITIVE)),
    };
    Ok(scale_to_frame(problem, &kept, &tau, &times, total, stats))
}

fn scale_to_frame(
    problem: &AllocationProblem,
    kept: &[usize],
    tau: &[f64],
    times: &[f64],
    total: f64,
    stats: SolverStats,
) -> Schedule {
    let scale = problem.frame / total;
    let mut tau_d = vec![0.0; problem.num_slots()];
    for (&q, &t) in kept.iter().zip(tau) {
        tau_d[q] = t * scale;
    }
    let mut tau_u: Vec<f64> = times.iter().map(|t| t * scale).collect();
    // Absorb rounding so that the frame constraint holds to the last ulp.
    let sum: f64 = tau_d.iter().chain(&tau_u).sum();
    if sum > problem.frame {
        let fix = problem.frame / sum;
        tau_d.iter_mut().chain(tau_u.iter_mut()).for_each(|t| *t *= fix);
    }
    Schedule::from_durations(problem, tau_d, tau_u, stats)
}

fn non_convergence(
    problem: &AllocationProblem,
    kept: &[usize],
    best: Option<(Vec<f64>, Vec<f64>, f64, f64)>,
    iterations: usize,
) -> Error {
    let (schedule, residual) = match best {
        Some((tau, times, total, dual)) => {
            let stats = SolverStats {
                method: SolverMethod::InteriorPoint,
                iterations,
                upper_bound: Some(problem.frame / dual.max(f64::MIN_POSITIVE)),
                ..SolverStats::default()
            };
            (
                scale_to_frame(problem, kept, &tau, &times, total, stats),
                (total - dual) / total,
            )
        }
        None => (Schedule::zero(problem, SolverMethod::InteriorPoint), f64::INFINITY),
    };
    Error::NonConvergence {
        iterations,
        residual,
        best: Box::new(schedule),
    }
}
