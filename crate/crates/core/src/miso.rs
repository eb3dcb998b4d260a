//! Fixed-antenna MISO benchmark: an `N`-element array co-located with the
//! base station at the waveguide feed, full digital beamforming, and the same
//! harvest-then-transmit TDMA frame.
//!
//! Downlink slot `q` carries a maximum-ratio beam toward user `q`, so user
//! `m` receives `P0 |h_m^H h_q|^2 / ||h_q||^2`; the uplink uses
//! maximum-ratio combining, `Psi_m = rho ||h_m||^2`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::allocator::{self, AllocationProblem, Schedule};
use crate::channel::{complex_gaussian, eta, wavelength};
use crate::error::{Error, Result};
use crate::harvest::{harvested_power, HarvestMatrix};
use crate::scenario::{
    feed_position, substream, MisoBeamforming, Position, ScenarioRealization, StreamPurpose, SystemConfig,
};

/// Per-user array responses of the benchmark.
#[derive(Clone, Debug, PartialEq)]
pub struct MisoChannel {
    pub bs_position: Position,
    pub users: Vec<Vec<Complex64>>,
}

/// Rician channel from a co-located `n`-element array at `bs` to `user`.
/// The line-of-sight phase is common to all elements (aperture neglected).
pub fn miso_channel<R: rand::Rng + ?Sized>(
    user: &Position,
    bs: &Position,
    n: usize,
    carrier_freq: f64,
    k_factor: f64,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    let dist = user.distance(bs);
    if !(dist > 0.0) {
        return Err(Error::DegenerateGeometry(format!(
            "user at {user:?} coincides with the base station"
        )));
    }
    let amplitude = eta(carrier_freq) / dist;
    let los = Complex64::from_polar(1.0, -2.0 * PI * dist / wavelength(carrier_freq));
    if k_factor.is_infinite() {
        return Ok(vec![amplitude * los; n]);
    }
    let los_w = (k_factor / (k_factor + 1.0)).sqrt();
    let nlos_w = (1.0 / (k_factor + 1.0)).sqrt();
    Ok((0..n)
        .map(|_| amplitude * (los_w * los + nlos_w * complex_gaussian(rng)))
        .collect())
}

/// Benchmark channels for every user of `scenario`, drawn from the MISO
/// fading substreams of the same trial.
pub fn miso_channels(config: &SystemConfig, scenario: &ScenarioRealization) -> Result<MisoChannel> {
    let bs = feed_position(config);
    let users = scenario
        .user_positions
        .iter()
        .enumerate()
        .map(|(m, p)| {
            let mut rng = substream(config.rng_seed, scenario.trial, m, StreamPurpose::MisoFading);
            miso_channel(
                p,
                &bs,
                config.num_antennas,
                config.carrier_freq,
                config.rician_k,
                &mut rng,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MisoChannel { bs_position: bs, users })
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// Received RF power of every user in every downlink slot.
pub fn miso_received_powers(channels: &MisoChannel, p0: f64, beamforming: MisoBeamforming) -> Vec<Vec<f64>> {
    let hs = &channels.users;
    match beamforming {
        MisoBeamforming::PerUserMrt => hs
            .iter()
            .map(|hm| {
                hs.iter()
                    .map(|hq| {
                        let nq = norm_sqr(hq);
                        if nq == 0.0 {
                            0.0
                        } else {
                            p0 * inner(hm, hq).norm_sqr() / nq
                        }
                    })
                    .collect()
            })
            .collect(),
        MisoBeamforming::DominantEigen => {
            let beam = dominant_beam(hs);
            hs.iter().map(|hm| vec![p0 * inner(hm, &beam).norm_sqr()]).collect()
        }
    }
}

/// Unit-norm principal eigenvector of `sum_m h_m h_m^H`.
fn dominant_beam(hs: &[Vec<Complex64>]) -> Vec<Complex64> {
    let n = hs[0].len();
    let mut cov = DMatrix::<Complex64>::zeros(n, n);
    for h in hs {
        let v = DVector::from_column_slice(h);
        cov += &v * v.adjoint();
    }
    let eig = cov.symmetric_eigen();
    let (best, _) =
        eig.eigenvalues.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, &l)| if l > acc.1 { (i, l) } else { acc },
        );
    eig.eigenvectors.column(best).iter().copied().collect()
}

/// Allocation problem of the benchmark for one realization.
pub fn miso_problem(channels: &MisoChannel, config: &SystemConfig) -> Result<AllocationProblem> {
    let received = miso_received_powers(channels, config.transmit_power, config.options.miso_beamforming);
    let rows = received
        .iter()
        .map(|row| {
            row.iter()
                .map(|&p| harvested_power(p, &config.eh))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let psi = channels.users.iter().map(|h| config.rho() * norm_sqr(h)).collect();
    AllocationProblem::new(HarvestMatrix::from_rows(rows)?, psi, config.frame_duration)
}

/// Build and solve the benchmark's timeslot program.
pub fn solve_miso(channels: &MisoChannel, config: &SystemConfig) -> Result<Schedule> {
    allocator::solve(&miso_problem(channels, config)?, &config.solver)
}
