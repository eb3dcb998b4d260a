//! Free-space device channels, the in-waveguide channel, their Hadamard
//! combination, and the effective gain of an activation pattern.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::Position;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Free-space wavelength `c / f_c`.
pub fn wavelength(carrier_freq: f64) -> f64 {
    SPEED_OF_LIGHT / carrier_freq
}

/// Path-gain constant `eta = c / (4 pi f_c)`.
pub fn eta(carrier_freq: f64) -> f64 {
    SPEED_OF_LIGHT / (4.0 * PI * carrier_freq)
}

/// Guided wavelength `lambda / n_eff`.
pub fn guided_wavelength(carrier_freq: f64, refractive_index: f64) -> f64 {
    wavelength(carrier_freq) / refractive_index
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChannelKind {
    /// Free-space link between a user and every antenna site.
    Device,
    /// Feed point to every antenna site, inside the waveguide.
    Waveguide,
    /// Device ⊙ waveguide.
    Combined,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelVector {
    pub entries: Vec<Complex64>,
    pub kind: ChannelKind,
}

impl ChannelVector {
    pub fn new(entries: Vec<Complex64>, kind: ChannelKind) -> Self {
        Self { entries, kind }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.entries.iter().map(|z| z.norm()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Binary on/off pattern over the `N` antenna sites. Always has at least one
/// active antenna.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ActivationVector {
    bits: Vec<bool>,
}

impl ActivationVector {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.iter().any(|&b| b) {
            Ok(Self { bits })
        } else {
            Err(Error::EmptyActivation)
        }
    }

    /// Pattern whose antenna `n` is active iff bit `n` of `mask` is set.
    pub fn from_mask(mask: u64, n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| mask >> i & 1 == 1).collect())
    }

    pub fn one_hot(n: usize, index: usize) -> Self {
        assert!(index < n, "one-hot index {index} out of range for N = {n}");
        let mut bits = vec![false; n];
        bits[index] = true;
        Self { bits }
    }

    pub fn all_on(n: usize) -> Self {
        assert!(n > 0);
        Self { bits: vec![true; n] }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn active_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn active_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    /// Canonical index: antenna `n` contributes `2^n`.
    pub fn mask(&self) -> u64 {
        self.active_indices().fold(0, |acc, i| acc | 1 << i)
    }
}

/// Line-of-sight channel from `user` to each antenna:
/// `eta * exp(-j 2 pi dist / lambda) / dist`.
pub fn device_channel(user: &Position, antennas: &[Position], carrier_freq: f64) -> Result<ChannelVector> {
    let eta = eta(carrier_freq);
    let k = 2.0 * PI / wavelength(carrier_freq);
    let entries = antennas
        .iter()
        .map(|a| {
            let dist = user.distance(a);
            if !(dist > 0.0) {
                return Err(Error::DegenerateGeometry(format!(
                    "user at {user:?} coincides with antenna at {a:?}"
                )));
            }
            Ok(Complex64::from_polar(eta / dist, -k * dist))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ChannelVector::new(entries, ChannelKind::Device))
}

/// Feed-to-antenna channel: `10^(-kappa L / 20) * exp(-j 2 pi L / lambda_g)`
/// with `L` the distance travelled along the waveguide.
pub fn waveguide_channel(
    feed: &Position,
    antennas: &[Position],
    loss_db_per_m: f64,
    carrier_freq: f64,
    refractive_index: f64,
) -> Result<ChannelVector> {
    let k = 2.0 * PI / guided_wavelength(carrier_freq, refractive_index);
    let entries = antennas
        .iter()
        .map(|a| {
            if a.y != feed.y || a.z != feed.z {
                return Err(Error::DegenerateGeometry(format!(
                    "antenna at {a:?} is not on the waveguide through {feed:?}"
                )));
            }
            let len = feed.distance(a);
            let mag = 10f64.powf(-loss_db_per_m * len / 20.0);
            Ok(Complex64::from_polar(mag, -k * len))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ChannelVector::new(entries, ChannelKind::Waveguide))
}

/// Standard circularly-symmetric complex Gaussian, `E|xi|^2 = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Per-antenna Rician fading around the line-of-sight entries, normalized so
/// that `E|out_n|^2 = |los_n|^2`. `K = inf` returns the input unchanged.
pub fn apply_rician<R: Rng + ?Sized>(los: &ChannelVector, k_factor: f64, rng: &mut R) -> ChannelVector {
    if k_factor.is_infinite() {
        return los.clone();
    }
    let los_w = (k_factor / (k_factor + 1.0)).sqrt();
    let nlos_w = (1.0 / (k_factor + 1.0)).sqrt();
    let entries = los
        .entries
        .iter()
        .map(|&h| los_w * h + nlos_w * h.norm() * complex_gaussian(rng))
        .collect();
    ChannelVector::new(entries, los.kind)
}

/// Elementwise product `h1 ⊙ h2`.
pub fn combined_channel(h1: &ChannelVector, h2: &ChannelVector) -> Result<ChannelVector> {
    if h1.len() != h2.len() {
        return Err(Error::LengthMismatch {
            expected: h1.len(),
            found: h2.len(),
        });
    }
    let entries = h1.entries.iter().zip(&h2.entries).map(|(a, b)| a * b).collect();
    Ok(ChannelVector::new(entries, ChannelKind::Combined))
}

/// `g = (sum_n b_n h_n) / sqrt(sum_n b_n)`.
pub fn effective_gain(h: &ChannelVector, b: &ActivationVector) -> Result<Complex64> {
    if h.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: h.len(),
            found: b.len(),
        });
    }
    Ok(gain_of_mask(&h.entries, b.mask()))
}

/// Effective gain for a bitmask pattern. The mask must be non-zero and fit
/// within `h`.
pub(crate) fn gain_of_mask(h: &[Complex64], mask: u64) -> Complex64 {
    debug_assert!(mask != 0);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut count = 0u32;
    let mut rest = mask;
    while rest != 0 {
        let n = rest.trailing_zeros() as usize;
        sum += h[n];
        count += 1;
        rest &= rest - 1;
    }
    sum / (count as f64).sqrt()
}
