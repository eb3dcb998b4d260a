//! Brute-force reference for small allocation problems.
//!
//! Downlink durations run over the lattice `{i * r * T : i >= 0, sum i <= 1/r}`.
//! For each lattice point the remaining time is split among the uplink
//! slots by bisection on the common rate, which is exact up to floating
//! point for that downlink choice. Every evaluated point is feasible, so the
//! result is a lower bound on the optimum, and halving `r` only adds points.

use super::{user_rate, AllocationProblem};
use crate::error::{Error, Result};

/// Cost guard: at most this many duration variables (`M + |Q|`).
pub const ORACLE_MAX_DIMS: usize = 4;

/// Iteration cap of both one-dimensional searches.
const BISECTION_STEPS: usize = 64;

/// Best min-rate over the downlink lattice with spacing `resolution * T`.
pub fn grid_oracle(problem: &AllocationProblem, resolution: f64) -> Result<f64> {
    let dims = problem.num_variables();
    if dims > ORACLE_MAX_DIMS {
        return Err(Error::OracleTooLarge {
            dims,
            max: ORACLE_MAX_DIMS,
        });
    }
    if !(resolution > 0.0 && resolution <= 1.0) {
        return Err(Error::InvalidProblem(format!(
            "grid resolution {resolution} not in (0, 1]"
        )));
    }
    let steps = (1.0 / resolution).round().max(1.0) as usize;
    let frame = problem.frame;
    let slots = problem.num_slots();
    let mut counts = vec![0usize; slots];
    let mut best = 0.0f64;
    let mut tau_d = vec![0.0; slots];
    let mut snr_energy = vec![0.0; problem.num_users()];
    visit(&mut counts, 0, steps, &mut |counts| {
        let used: usize = counts.iter().sum();
        for (t, &i) in tau_d.iter_mut().zip(counts) {
            *t = frame * i as f64 / steps as f64;
        }
        let remaining = frame * (steps - used) as f64 / steps as f64;
        for (m, c) in snr_energy.iter_mut().enumerate() {
            *c = problem.uplink_gains[m] * problem.harvest.energy(m, &tau_d);
        }
        // Giving every user the whole airtime bounds this point from above.
        let bound = snr_energy
            .iter()
            .map(|&c| user_rate(remaining, 1.0, c))
            .fold(f64::INFINITY, f64::min);
        if bound > best {
            best = best.max(best_uplink_split(&snr_energy, remaining));
        }
    });
    Ok(best)
}

/// Enumerate every `counts` with `sum counts <= budget`.
fn visit(counts: &mut [usize], pos: usize, budget: usize, f: &mut impl FnMut(&[usize])) {
    if pos == counts.len() {
        f(counts);
        return;
    }
    for i in 0..=budget {
        counts[pos] = i;
        visit(counts, pos + 1, budget - i, f);
    }
    counts[pos] = 0;
}

/// Largest `v` such that uplink slots with total length `airtime` give every
/// user rate `>= v`, for fixed SNR-energies `c_m`.
fn best_uplink_split(snr_energy: &[f64], airtime: f64) -> f64 {
    if airtime <= 0.0 || snr_energy.iter().any(|&c| c <= 0.0) {
        return 0.0;
    }
    let rate = |tau: f64, c: f64| user_rate(tau, 1.0, c);
    if snr_energy.len() == 1 {
        return rate(airtime, snr_energy[0]);
    }
    let mut lo = 0.0;
    let mut hi = snr_energy
        .iter()
        .map(|&c| rate(airtime, c))
        .fold(f64::INFINITY, f64::min);
    for _ in 0..BISECTION_STEPS {
        let v = 0.5 * (lo + hi);
        let mut need = 0.0;
        for &c in snr_energy {
            need += airtime_for_rate(c, v, airtime);
            if need > airtime {
                break;
            }
        }
        if need <= airtime {
            lo = v;
        } else {
            hi = v;
        }
    }
    lo
}

/// Smallest `tau` in `[0, cap]` with `tau log2(1 + c / tau) >= v`; infinite
/// when even `cap` is not enough. Newton's method safeguarded by bisection
/// on `tau ln(1 + c / tau) - v ln 2`, which is increasing and concave.
fn airtime_for_rate(c: f64, v: f64, cap: f64) -> f64 {
    if user_rate(cap, 1.0, c) < v {
        return f64::INFINITY;
    }
    let target = v * std::f64::consts::LN_2;
    let f = |tau: f64| tau * (c / tau).ln_1p() - target;
    // On `(0, cap]`, `ln(1 + c / tau) >= ln(1 + c / cap)` bounds the root.
    let mut lo = 0.0;
    let mut hi = cap.min(target / (c / cap).ln_1p());
    let mut tau = hi;
    for _ in 0..BISECTION_STEPS {
        let ft = f(tau);
        if ft >= 0.0 {
            hi = tau;
        } else {
            lo = tau;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        let slope = (c / tau).ln_1p() - c / (tau + c);
        let next = tau - ft / slope;
        tau = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harvest::HarvestMatrix;

    #[test]
    fn guard_rejects_large_problems() {
        let p = AllocationProblem::new(
            HarvestMatrix::from_rows(vec![vec![1.0; 3]; 2]).unwrap(),
            vec![1.0; 2],
            1.0,
        )
        .unwrap();
        assert!(matches!(
            grid_oracle(&p, 0.1),
            Err(Error::OracleTooLarge { dims: 5, .. })
        ));
    }

    #[test]
    fn zero_gain_gives_zero() {
        let p = AllocationProblem::new(HarvestMatrix::from_rows(vec![vec![1.0]]).unwrap(), vec![0.0], 1.0).unwrap();
        assert_eq!(grid_oracle(&p, 1e-2).unwrap(), 0.0);
    }

    #[test]
    fn one_dimensional_optimum_matches_fine_scan() {
        // M = 1, |Q| = 1: v(t) = (1 - t) log2(1 + c t / (1 - t)).
        let c = 40.0;
        let p = AllocationProblem::new(HarvestMatrix::from_rows(vec![vec![c]]).unwrap(), vec![1.0], 1.0).unwrap();
        let fine = (1..100_000)
            .map(|i| {
                let t = i as f64 * 1e-5;
                (1.0 - t) * (1.0 + c * t / (1.0 - t)).log2()
            })
            .fold(0.0, f64::max);
        let oracle = grid_oracle(&p, 1.0 / 4096.0).unwrap();
        assert!((oracle - fine).abs() < 1e-5 * fine, "{oracle} vs {fine}");
    }

    #[test]
    fn dyadic_refinement_never_decreases() {
        let p = AllocationProblem::new(
            HarvestMatrix::from_rows(vec![vec![2.0, 0.5], vec![0.3, 3.0]]).unwrap(),
            vec![1.5, 0.8],
            1.0,
        )
        .unwrap();
        let mut prev = 0.0;
        for k in 2..8 {
            let v = grid_oracle(&p, 1.0 / (1u32 << k) as f64).unwrap();
            assert!(v >= prev, "resolution 2^-{k}: {v} < {prev}");
            prev = v;
        }
    }
}
