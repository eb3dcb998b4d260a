//! Numerical checks that the per-user rate is concave in the durations.
//!
//! With `varpi = sum_q tau_q Phi_q` the rate reduces to the two-variable
//! function `w(varpi, tau) = tau log2(1 + Psi varpi / tau)`, a perspective of
//! a concave function. Its Hessian is
//!
//! ```text
//! Psi^2 / ((tau + Psi varpi)^2 ln 2) * [[-tau, varpi], [varpi, -varpi^2 / tau]]
//! ```
//!
//! with eigenvalues `0` and `-Psi^2 (varpi^2 + tau^2) / (tau (tau + Psi varpi)^2 ln 2)`.
//! The probe compares a finite-difference Hessian against that expression and
//! also evaluates the variant with prefactor `Psi^4 / (Psi^2 varpi + tau)^2`,
//! which agrees with it only at `Psi = 1`.

use std::f64::consts::LN_2;

use serde::Serialize;

use super::rate::rate_partials;
use super::{user_rate, AllocationProblem};

/// Central-difference step applied to the analytic gradient.
pub const FD_STEP: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeSample {
    pub varpi: f64,
    pub tau: f64,
    /// Eigenvalues of the symmetrized finite-difference Hessian, descending.
    pub fd_eigenvalues: [f64; 2],
    /// Closed-form non-zero eigenvalue from differentiating `w` directly.
    pub lambda1_derived: f64,
    /// The `Psi^4 / (Psi^2 varpi + tau)^2` variant of the same eigenvalue.
    pub lambda1_printed: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcavityReport {
    pub psi: f64,
    pub samples: Vec<ProbeSample>,
    /// Largest eigenvalue seen over all samples; `<= ~0` means NSD.
    pub max_eigenvalue: f64,
    /// Largest relative gap between the finite-difference and derived
    /// non-zero eigenvalue.
    pub max_rel_err_derived: f64,
    /// Same, for the printed variant.
    pub max_rel_err_printed: f64,
}

pub fn hessian_eigenvalue_derived(psi: f64, varpi: f64, tau: f64) -> f64 {
    -psi * psi * (varpi * varpi + tau * tau) / (tau * (tau + psi * varpi).powi(2) * LN_2)
}

pub fn hessian_eigenvalue_printed(psi: f64, varpi: f64, tau: f64) -> f64 {
    -psi.powi(4) * (varpi * varpi + tau * tau) / (tau * (psi * psi * varpi + tau).powi(2) * LN_2)
}

fn gradient(psi: f64, varpi: f64, tau: f64) -> [f64; 2] {
    let (d_c, d_tau) = rate_partials(tau, psi * varpi);
    [d_c * psi, d_tau]
}

fn sym_eigenvalues(h: [[f64; 2]; 2]) -> [f64; 2] {
    let mean = 0.5 * (h[0][0] + h[1][1]);
    let off = 0.5 * (h[0][1] + h[1][0]);
    let radius = (0.25 * (h[0][0] - h[1][1]).powi(2) + off * off).sqrt();
    [mean + radius, mean - radius]
}

/// Finite-difference Hessian of `w` at each `(varpi, tau)` sample; both
/// coordinates must be positive and larger than [`FD_STEP`].
pub fn concavity_probe(psi: f64, samples: &[(f64, f64)]) -> ConcavityReport {
    let h = FD_STEP;
    let mut out = Vec::with_capacity(samples.len());
    let mut max_eigenvalue = f64::NEG_INFINITY;
    let mut max_rel_err_derived = 0.0f64;
    let mut max_rel_err_printed = 0.0f64;
    for &(varpi, tau) in samples {
        let gp0 = gradient(psi, varpi + h, tau);
        let gm0 = gradient(psi, varpi - h, tau);
        let gp1 = gradient(psi, varpi, tau + h);
        let gm1 = gradient(psi, varpi, tau - h);
        let hess = [
            [(gp0[0] - gm0[0]) / (2.0 * h), (gp0[1] - gm0[1]) / (2.0 * h)],
            [(gp1[0] - gm1[0]) / (2.0 * h), (gp1[1] - gm1[1]) / (2.0 * h)],
        ];
        let eig = sym_eigenvalues(hess);
        let derived = hessian_eigenvalue_derived(psi, varpi, tau);
        let printed = hessian_eigenvalue_printed(psi, varpi, tau);
        max_eigenvalue = max_eigenvalue.max(eig[0]);
        max_rel_err_derived = max_rel_err_derived.max(((eig[1] - derived) / derived).abs());
        max_rel_err_printed = max_rel_err_printed.max(((eig[1] - printed) / derived).abs());
        out.push(ProbeSample {
            varpi,
            tau,
            fd_eigenvalues: eig,
            lambda1_derived: derived,
            lambda1_printed: printed,
        });
    }
    ConcavityReport {
        psi,
        samples: out,
        max_eigenvalue,
        max_rel_err_derived,
        max_rel_err_printed,
    }
}

/// `min_m [R_m((x + y) / 2) - (R_m(x) + R_m(y)) / 2]` for duration vectors
/// laid out as `(tau_d, tau_u)`. Non-negative for concave rates.
pub fn midpoint_concavity_gap(problem: &AllocationProblem, x: &[f64], y: &[f64]) -> f64 {
    let slots = problem.num_slots();
    let mid: Vec<f64> = x.iter().zip(y).map(|(a, b)| 0.5 * (a + b)).collect();
    let rate = |v: &[f64], m: usize| {
        user_rate(
            v[slots + m],
            problem.uplink_gains[m],
            problem.harvest.energy(m, &v[..slots]),
        )
    };
    (0..problem.num_users())
        .map(|m| rate(&mid, m) - 0.5 * (rate(x, m) + rate(y, m)))
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_arguments_unit_gain() {
        for &tau in &[0.1, 0.5, 2.0] {
            let expected = -1.0 / (2.0 * tau * LN_2);
            assert!((hessian_eigenvalue_derived(1.0, tau, tau) - expected).abs() < 1e-14 / tau);
            assert!((hessian_eigenvalue_printed(1.0, tau, tau) - expected).abs() < 1e-14 / tau);
        }
    }

    #[test]
    fn variants_disagree_away_from_unit_gain() {
        let (d, p) = (
            hessian_eigenvalue_derived(3.0, 0.4, 0.7),
            hessian_eigenvalue_printed(3.0, 0.4, 0.7),
        );
        assert!(((d - p) / d).abs() > 0.1);
    }

    #[test]
    fn probe_matches_derived_eigenvalue() {
        let report = concavity_probe(2.5, &[(0.3, 0.6), (1.0, 0.2), (0.05, 0.9)]);
        assert!(report.max_eigenvalue <= 1e-6, "{report:?}");
        assert!(report.max_rel_err_derived < 1e-6, "{report:?}");
    }

    #[test]
    fn rate_is_positively_homogeneous() {
        let (psi, varpi, tau) = (1.7, 0.3, 0.45);
        let w = |s: f64| user_rate(s * tau, psi, s * varpi);
        for alpha in [0.1, 2.0, 13.0] {
            assert!((w(alpha) - alpha * w(1.0)).abs() < 1e-14 * alpha);
        }
    }
}
