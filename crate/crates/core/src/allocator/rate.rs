//! Uplink rate function and the scalar functions derived from it.
//!
//! Throughout, `c = Psi * E` is the user's SNR-energy (SNR times seconds).

use std::f64::consts::LN_2;

use crate::numeric::{ln1p_minus_frac, log2_1p, x_minus_ln1p};

/// `tau_u log2(1 + Psi E / tau_u)`, extended by continuity to `0` at
/// `tau_u = 0`.
pub fn user_rate(tau_u: f64, psi: f64, energy: f64) -> f64 {
    let c = psi * energy;
    if tau_u <= 0.0 || c <= 0.0 {
        return 0.0;
    }
    tau_u * log2_1p(c / tau_u)
}

/// Partial derivatives of `tau log2(1 + c / tau)` with respect to `c` and
/// `tau`, both at `tau > 0`.
pub(crate) fn rate_partials(tau: f64, c: f64) -> (f64, f64) {
    let s = c / tau;
    let d_c = 1.0 / ((1.0 + s) * LN_2);
    let d_tau = ln1p_minus_frac(s) / LN_2;
    (d_c, d_tau)
}

/// Shortest uplink time giving unit rate, `min { t : t log2(1 + c/t) >= 1 }`.
/// Infinite when `c <= ln 2`, the supremum of the rate over all `t`.
pub(crate) fn unit_rate_time(c: f64) -> f64 {
    if !(c > LN_2) {
        return f64::INFINITY;
    }
    // SNR s solves s ln2 = c ln(1 + s); F is convex with F(0) = 0, F'(0) < 0.
    let delta = LN_2 - c;
    let f = |s: f64| {
        if s < 1.0 {
            s * delta + c * x_minus_ln1p(s)
        } else {
            s * LN_2 - c * s.ln_1p()
        }
    };
    let df = |s: f64| LN_2 - c / (1.0 + s);
    let guess = if -delta < 0.1 * c {
        3.0 * -delta / c
    } else {
        c * log2_1p(c)
    };
    let s = convex_root_from_right(f, df, guess);
    c / s
}

/// Given a dual price `y > 0` on SNR-energy, the minimizer of
/// `unit_rate_time(c) + y c`. Returns `(s, c, t)`: the SNR at the optimum,
/// the optimal `c` and `unit_rate_time(c)`.
pub(crate) fn dual_point(y: f64) -> (f64, f64, f64) {
    // Stationarity: (1 + s) ln(1 + s) - s = 1 / y.
    let r = 1.0 / y;
    let g = |s: f64| s * s.ln_1p() - x_minus_ln1p(s) - r;
    let dg = |s: f64| s.ln_1p();
    let guess = (2.0 * r).sqrt().max(r / (1.0 + r).ln()) * 1.5;
    let s = convex_root_from_right(g, dg, guess);
    let l = s.ln_1p();
    let c = s * LN_2 / l;
    let t = LN_2 / l;
    (s, c, t)
}

/// Second derivative of `h(y) = min_c unit_rate_time(c) + y c`.
pub(crate) fn dual_curvature(y: f64, s: f64) -> f64 {
    let l = s.ln_1p();
    -LN_2 * ln1p_minus_frac(s) / (y * y * l * l * l)
}

/// Positive root of a convex, eventually increasing `f` with `f(0) <= 0`,
/// approached by Newton's method from the right (monotone convergence).
fn convex_root_from_right(f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64, guess: f64) -> f64 {
    let mut hi = if guess.is_finite() && guess > 0.0 { guess } else { 1.0 };
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    let mut s = hi;
    for _ in 0..200 {
        let fs = f(s);
        if fs <= 0.0 {
            break;
        }
        let slope = df(s);
        let next = s - fs / slope;
        if !(next > 0.0 && next < s) {
            // Converged to rounding or the tangent overshot past zero.
            if next <= 0.0 {
                s *= 0.5;
                continue;
            }
            break;
        }
        if (s - next) <= 1e-16 * s {
            s = next;
            break;
        }
        s = next;
    }
    s
}
