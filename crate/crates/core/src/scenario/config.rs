use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::allocator::SolverConfig;
use crate::error::{Error, Result};
use crate::harvest::EhParams;
use crate::numeric::dbm_to_watts;

/// Criterion used by the Naive strategy's one-hot scan.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NaiveCriterion {
    /// `|h_{m,1,n} h_{2,n}|`, the magnitude that actually reaches the user.
    #[default]
    Combined,
    /// `|h_{m,1,n}|` only, ignoring the waveguide.
    FreeSpace,
}

/// Downlink beam structure of the MISO benchmark.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MisoBeamforming {
    /// One maximum-ratio beam per user, one downlink slot each.
    #[default]
    PerUserMrt,
    /// A single downlink slot steered along the dominant eigenvector of
    /// `sum_m h_m h_m^H`.
    DominantEigen,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgorithmOptions {
    /// Largest `N` for which the power set is enumerated.
    pub max_search_antennas: usize,
    pub naive_criterion: NaiveCriterion,
    pub miso_beamforming: MisoBeamforming,
}

impl Default for AlgorithmOptions {
    fn default() -> Self {
        Self {
            max_search_antennas: 16,
            naive_criterion: NaiveCriterion::Combined,
            miso_beamforming: MisoBeamforming::PerUserMrt,
        }
    }
}

/// All physical and algorithmic parameters of one simulated network.
///
/// Quantities are SI (watts, meters, seconds, hertz). The JSON form accepts
/// `p0_dbm` / `noise_dbm` as alternatives to `p0_w` / `noise_w`; conversion
/// happens once, on load.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SystemConfig {
    pub num_antennas: usize,
    pub num_users: usize,
    pub room_x: f64,
    pub room_y: f64,
    pub height: f64,
    #[serde(rename = "carrier_freq_hz")]
    pub carrier_freq: f64,
    pub refractive_index: f64,
    #[serde(rename = "waveguide_loss_db_per_m")]
    pub waveguide_loss: f64,
    #[serde(rename = "p0_w")]
    pub transmit_power: f64,
    #[serde(rename = "noise_w")]
    pub noise_power: f64,
    pub eh: EhParams,
    pub frame_duration: f64,
    pub rician_k: f64,
    pub solver: SolverConfig,
    pub rng_seed: u64,
    pub options: AlgorithmOptions,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self::reference_scenario()
    }
}

impl SystemConfig {
    /// M = 3, N = 4, P0 = 40 dBm, noise -95 dBm, 10 m x 10 m room at 3 m,
    /// K = 10, a = 1500, b = 0.0022, 28 GHz, n_eff = 1.4, lossless waveguide.
    pub fn reference_scenario() -> Self {
        Self {
            num_antennas: 4,
            num_users: 3,
            room_x: 10.0,
            room_y: 10.0,
            height: 3.0,
            carrier_freq: 28e9,
            refractive_index: 1.4,
            waveguide_loss: 0.0,
            transmit_power: dbm_to_watts(40.0),
            noise_power: dbm_to_watts(-95.0),
            eh: EhParams::default(),
            frame_duration: 1.0,
            rician_k: 10.0,
            solver: SolverConfig::default(),
            rng_seed: 2025,
            options: AlgorithmOptions::default(),
        }
    }

    /// `rho = 1 / sigma^2`.
    pub fn rho(&self) -> f64 {
        1.0 / self.noise_power
    }

    pub fn set_p0_dbm(&mut self, dbm: f64) {
        self.transmit_power = dbm_to_watts(dbm);
    }

    pub fn validate(&self) -> Result<()> {
        fn require(cond: bool, what: &str) -> Result<()> {
            if cond {
                Ok(())
            } else {
                Err(Error::InvalidConfig(what.to_owned()))
            }
        }
        let pos = |x: f64| x.is_finite() && x > 0.0;
        require(self.num_antennas >= 1, "num_antennas must be >= 1")?;
        require(self.num_users >= 1, "num_users must be >= 1")?;
        require(pos(self.room_x), "room_x must be positive")?;
        require(pos(self.room_y), "room_y must be positive")?;
        require(pos(self.height), "height must be positive")?;
        require(pos(self.carrier_freq), "carrier frequency must be positive")?;
        require(
            self.refractive_index.is_finite() && self.refractive_index >= 1.0,
            "refractive_index must be >= 1",
        )?;
        require(
            self.waveguide_loss.is_finite() && self.waveguide_loss >= 0.0,
            "waveguide loss must be >= 0 dB/m",
        )?;
        require(pos(self.transmit_power), "transmit power must be positive")?;
        require(pos(self.noise_power), "noise power must be positive")?;
        require(pos(self.frame_duration), "frame_duration must be positive")?;
        require(!self.rician_k.is_nan() && self.rician_k >= 0.0, "rician_k must be >= 0")?;
        self.eh.validate()?;
        self.solver.validate()?;
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: ConfigFile = serde_json::from_str(text)?;
        file.into_config()
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// On-disk representation. Every field is optional and falls back to
/// [`SystemConfig::reference_scenario`].
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    num_antennas: Option<usize>,
    num_users: Option<usize>,
    room_x: Option<f64>,
    room_y: Option<f64>,
    height: Option<f64>,
    carrier_freq_hz: Option<f64>,
    refractive_index: Option<f64>,
    waveguide_loss_db_per_m: Option<f64>,
    p0_w: Option<f64>,
    p0_dbm: Option<f64>,
    noise_w: Option<f64>,
    noise_dbm: Option<f64>,
    eh: Option<EhParams>,
    frame_duration: Option<f64>,
    rician_k: Option<f64>,
    solver: Option<SolverConfig>,
    rng_seed: Option<u64>,
    options: Option<AlgorithmOptions>,
}

impl ConfigFile {
    fn into_config(self) -> Result<SystemConfig> {
        let mut cfg = SystemConfig::reference_scenario();
        macro_rules! take {
            ($($src:ident => $dst:ident),* $(,)?) => {
                $(if let Some(v) = self.$src { cfg.$dst = v; })*
            };
        }
        take!(
            num_antennas => num_antennas,
            num_users => num_users,
            room_x => room_x,
            room_y => room_y,
            height => height,
            carrier_freq_hz => carrier_freq,
            refractive_index => refractive_index,
            waveguide_loss_db_per_m => waveguide_loss,
            eh => eh,
            frame_duration => frame_duration,
            rician_k => rician_k,
            solver => solver,
            rng_seed => rng_seed,
            options => options,
        );
        cfg.transmit_power = pick_power("p0", self.p0_w, self.p0_dbm, cfg.transmit_power)?;
        cfg.noise_power = pick_power("noise", self.noise_w, self.noise_dbm, cfg.noise_power)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn pick_power(name: &str, watts: Option<f64>, dbm: Option<f64>, default: f64) -> Result<f64> {
    match (watts, dbm) {
        (Some(_), Some(_)) => Err(Error::InvalidConfig(format!(
            "both {name}_w and {name}_dbm given; use one"
        ))),
        (Some(w), None) => Ok(w),
        (None, Some(d)) if d.is_finite() => Ok(dbm_to_watts(d)),
        (None, Some(_)) => Err(Error::InvalidConfig(format!("{name}_dbm must be finite"))),
        (None, None) => Ok(default),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        SystemConfig::reference_scenario().validate().unwrap();
    }

    #[test]
    fn dbm_fields_are_converted_on_load() {
        let cfg = SystemConfig::from_json_str(r#"{"p0_dbm": 30, "noise_dbm": -90}"#).unwrap();
        assert!((cfg.transmit_power - 1.0).abs() < 1e-12);
        assert!((cfg.noise_power - 1e-12).abs() < 1e-24);
    }

    #[test]
    fn conflicting_power_fields_rejected() {
        let err = SystemConfig::from_json_str(r#"{"p0_dbm": 30, "p0_w": 1}"#).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }

    #[test]
    fn invariants_enforced() {
        for bad in [
            r#"{"num_users": 0}"#,
            r#"{"height": 0}"#,
            r#"{"refractive_index": 0.9}"#,
            r#"{"waveguide_loss_db_per_m": -0.1}"#,
            r#"{"eh": {"p_max_w": 0.02, "a": 0, "b": 0.0022}}"#,
            r#"{"frame_duration": -1}"#,
        ] {
            assert!(SystemConfig::from_json_str(bad).is_err(), "{bad}");
        }
        assert!(matches!(
            SystemConfig::from_json_str(r#"{"bogus": 1}"#),
            Err(Error::ConfigParse(_))
        ));
    }

    #[test]
    fn serialized_form_loads_back() {
        let mut cfg = SystemConfig::reference_scenario();
        cfg.num_users = 7;
        cfg.waveguide_loss = 0.01;
        let back = SystemConfig::from_json_str(&cfg.to_json_pretty()).unwrap();
        assert_eq!(back, cfg);
    }
}
