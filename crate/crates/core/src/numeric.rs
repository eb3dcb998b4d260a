//! Small numerical helpers shared across modules.

use std::f64::consts::LN_2;

pub(crate) fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// `x - ln(1 + x)` without cancellation for small `x`.
pub(crate) fn x_minus_ln1p(x: f64) -> f64 {
    if x.abs() < 0.05 {
        // x^2/2 - x^3/3 + x^4/4 - ...
        let mut term = x * x;
        let mut sum = 0.0;
        for k in 2..20 {
            let contrib = term / k as f64;
            sum += if k % 2 == 0 { contrib } else { -contrib };
            term *= x;
        }
        sum
    } else {
        x - x.ln_1p()
    }
}

/// `ln(1 + x) - x / (1 + x)`, accurate for small `x`.
pub(crate) fn ln1p_minus_frac(x: f64) -> f64 {
    x * x / (1.0 + x) - x_minus_ln1p(x)
}

/// `log2(1 + x)`.
#[inline]
pub(crate) fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / LN_2
}
