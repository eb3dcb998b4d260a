//! Non-linear (sigmoid) energy harvesting and the per-slot harvest matrix.

use serde::{Deserialize, Serialize};

use crate::activation::ActivationPlan;
use crate::channel::{effective_gain, ActivationVector, ChannelVector};
use crate::error::{Error, Result};

/// Harvester hardware parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EhParams {
    /// Saturation level, watts.
    pub p_max_w: f64,
    /// Steepness, 1/W.
    pub a: f64,
    /// Turn-on point, watts.
    pub b: f64,
}

impl Default for EhParams {
    /// `P_max = 24 mW`, `a = 1500`, `b = 0.0022`.
    fn default() -> Self {
        Self {
            p_max_w: 0.024,
            a: 1500.0,
            b: 0.0022,
        }
    }
}

impl EhParams {
    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if ok(self.p_max_w) && ok(self.a) && ok(self.b) {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "energy-harvesting parameters must be positive, got {self:?}"
            )))
        }
    }
}

/// `Phi[m][q]`: power harvested by user `m` in downlink slot `q`, watts.
#[derive(Clone, Debug, PartialEq)]
pub struct HarvestMatrix {
    rows: Vec<Vec<f64>>,
    slots: usize,
}

impl HarvestMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let slots = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || slots == 0 {
            return Err(Error::EmptyInput("harvest matrix"));
        }
        for row in &rows {
            if row.len() != slots {
                return Err(Error::LengthMismatch {
                    expected: slots,
                    found: row.len(),
                });
            }
            if row.iter().any(|&v| !(v.is_finite() && v >= 0.0)) {
                return Err(Error::InvalidProblem(
                    "harvested powers must be finite and non-negative".into(),
                ));
            }
        }
        Ok(Self { rows, slots })
    }

    pub fn num_users(&self) -> usize {
        self.rows.len()
    }

    pub fn num_slots(&self) -> usize {
        self.slots
    }

    pub fn get(&self, user: usize, slot: usize) -> f64 {
        self.rows[user][slot]
    }

    pub fn row(&self, user: usize) -> &[f64] {
        &self.rows[user]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Harvested energy `E_m = sum_q tau_q Phi[m][q]`.
    pub fn energy(&self, user: usize, tau_d: &[f64]) -> f64 {
        self.rows[user].iter().zip(tau_d).map(|(p, t)| p * t).sum()
    }
}

/// RF power reaching the user in a downlink slot:
/// `|h^T b|^2 / (1^T b) * P0`.
pub fn received_power(h: &ChannelVector, b: &ActivationVector, p0: f64) -> Result<f64> {
    Ok(effective_gain(h, b)?.norm_sqr() * p0)
}

/// `P_max (1 - exp(-a P)) / (1 + exp(-a (P - b)))`.
pub fn harvested_power(p_in: f64, params: &EhParams) -> Result<f64> {
    if p_in < 0.0 || p_in.is_nan() {
        return Err(Error::NegativePower(p_in));
    }
    Ok(sigmoid_harvest(p_in, params))
}

#[inline]
pub(crate) fn sigmoid_harvest(p_in: f64, params: &EhParams) -> f64 {
    let a = params.a;
    // expm1 keeps the low-power regime (a P ~ 1e-6 at 20 dBm) accurate.
    let num = -(-a * p_in).exp_m1();
    let den = 1.0 + (-a * (p_in - params.b)).exp();
    params.p_max_w * num / den
}

/// Build `Phi` for every user and every downlink slot of `plan`.
pub fn harvest_matrix(
    channels: &[ChannelVector],
    plan: &ActivationPlan,
    p0: f64,
    params: &EhParams,
) -> Result<HarvestMatrix> {
    if plan.downlink_slots.is_empty() {
        return Err(Error::EmptyInput("downlink slots"));
    }
    let rows = channels
        .iter()
        .map(|h| {
            plan.downlink_slots
                .iter()
                .map(|b| harvested_power(received_power(h, b, p0)?, params))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    HarvestMatrix::from_rows(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::{build_plan, Mode};
    use crate::channel::ChannelKind;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn params() -> EhParams {
        EhParams::default()
    }

    fn chan(v: &[(f64, f64)]) -> ChannelVector {
        ChannelVector::new(
            v.iter().map(|&(a, b)| Complex64::new(a, b)).collect(),
            ChannelKind::Combined,
        )
    }

    #[test]
    fn received_power_cases() {
        let h = chan(&[(1e-3, 2e-3), (-3e-3, 1e-3), (0.5e-3, -1e-3)]);
        assert_eq!(received_power(&h, &ActivationVector::all_on(3), 0.0).unwrap(), 0.0);
        let one = received_power(&h, &ActivationVector::one_hot(3, 1), 2.0).unwrap();
        assert!((one - 2.0 * (9e-6 + 1e-6)).abs() < 1e-18);
        // |sum h|^2 / 3 * P0, recomputed by hand: sum = (-1.5e-3, 2e-3).
        let all = received_power(&h, &ActivationVector::all_on(3), 10.0).unwrap();
        let manual = (1.5e-3f64.powi(2) + 2e-3f64.powi(2)) / 3.0 * 10.0;
        assert!((all - manual).abs() < 1e-18);
    }

    #[test]
    fn harvest_point_values() {
        let p = params();
        assert_eq!(harvested_power(0.0, &p).unwrap(), 0.0);
        assert!(harvested_power(1.0, &p).unwrap() > 0.999 * p.p_max_w);
        let at_b = harvested_power(0.0022, &p).unwrap();
        let expected = p.p_max_w * (1.0 - (-3.3f64).exp()) / 2.0;
        assert!((at_b - expected).abs() <= 1e-12 * expected);
        assert!((at_b / p.p_max_w - 0.4816).abs() < 1e-4);
        assert!(matches!(harvested_power(-1e-9, &p), Err(Error::NegativePower(_))));
    }

    #[test]
    fn harvest_strictly_increasing_on_fine_grid() {
        let p = params();
        let mut prev = harvested_power(0.0, &p).unwrap();
        for i in 1..=20_000 {
            let x = i as f64 * 5e-7;
            let cur = harvested_power(x, &p).unwrap();
            assert!(cur > prev, "not increasing at {x}");
            prev = cur;
        }
    }

    #[test]
    fn matrix_for_colocated_users_has_identical_rows() {
        let h = chan(&[(1e-3, 0.0), (0.0, 2e-3), (1e-3, 1e-3)]);
        let plan = build_plan(Mode::Search, &[h.clone(), h.clone()], 16).unwrap();
        let phi = harvest_matrix(&[h.clone(), h], &plan, 10.0, &params()).unwrap();
        assert_eq!(phi.row(0), phi.row(1));
        assert_eq!(phi.num_slots(), 7);
    }

    #[test]
    fn matrix_matches_entrywise_recomputation() {
        let hs = vec![
            chan(&[(1e-3, 0.2e-3), (-0.4e-3, 0.9e-3), (0.3e-3, 0.0)]),
            chan(&[(0.1e-3, -2e-3), (0.5e-3, 0.5e-3), (-1e-3, 0.7e-3)]),
        ];
        let plan = build_plan(Mode::Greedy, &hs, 16).unwrap();
        // Pad to three slots with an explicit all-on slot.
        let mut plan3 = plan.clone();
        plan3.downlink_slots.push(ActivationVector::all_on(3));
        let p0 = 10.0;
        let phi = harvest_matrix(&hs, &plan3, p0, &params()).unwrap();
        assert_eq!((phi.num_users(), phi.num_slots()), (2, 3));
        let p = params();
        for (m, h) in hs.iter().enumerate() {
            for (q, b) in plan3.downlink_slots.iter().enumerate() {
                let mut sum = Complex64::new(0.0, 0.0);
                let mut k = 0.0;
                for n in 0..3 {
                    if b.bits()[n] {
                        sum += h.entries[n];
                        k += 1.0;
                    }
                }
                let pin = sum.norm_sqr() / k * p0;
                let expect = p.p_max_w * (1.0 - (-p.a * pin).exp()) / (1.0 + (-p.a * (pin - p.b)).exp());
                assert!((phi.get(m, q) - expect).abs() <= 1e-12 * expect.max(1e-30));
            }
        }
    }

    #[test]
    fn single_slot_single_user_composes() {
        let h = chan(&[(2e-3, 1e-3)]);
        let plan = build_plan(Mode::Naive, std::slice::from_ref(&h), 16).unwrap();
        let phi = harvest_matrix(std::slice::from_ref(&h), &plan, 3.0, &params()).unwrap();
        let direct = harvested_power(
            received_power(&h, &ActivationVector::one_hot(1, 0), 3.0).unwrap(),
            &params(),
        )
        .unwrap();
        assert_eq!(phi.get(0, 0), direct);
    }

    proptest! {
        #[test]
        fn bounded_by_saturation(p_in in 0.0..1e3f64) {
            let p = params();
            let v = harvested_power(p_in, &p).unwrap();
            prop_assert!(v >= 0.0 && v <= p.p_max_w);
        }

        #[test]
        fn monotone_in_transmit_power(re in -1e-3..1e-3f64, im in -1e-3..1e-3f64, p0 in 1e-3..100.0f64, scale in 1.0..10.0f64) {
            let h = chan(&[(re, im), (im, -re)]);
            let b = ActivationVector::all_on(2);
            let lo = harvested_power(received_power(&h, &b, p0).unwrap(), &params()).unwrap();
            let hi = harvested_power(received_power(&h, &b, p0 * scale).unwrap(), &params()).unwrap();
            prop_assert!(hi >= lo);
        }
    }
}
