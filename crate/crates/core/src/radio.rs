//! Downlink link model: sectored antenna gain, LoS/NLoS path loss with
//! optional Nakagami fading, SINR and Shannon rate.
//!
//! Configuration is read in engineering units (dBm, dBm/Hz) and converted to
//! linear values once; everything past [`RadioConfig::into_params`] is linear.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Distance at which `κ` is defined; shorter links are clamped to it.
pub const REFERENCE_DISTANCE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkState {
    Los,
    Nlos,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Fading {
    /// `‖h‖² = 1` on every link.
    #[default]
    DeterministicUnit,
    /// Unit-mean Gamma power with shape `m` per link state.
    Nakagami { m_los: f64, m_nlos: f64 },
}

/// Linear-unit link parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioParams {
    pub bandwidth_hz: f64,
    pub tx_power_w: f64,
    pub side_lobe_gain: f64,
    pub beamwidth: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    pub kappa_los: f64,
    pub kappa_nlos: f64,
    pub noise_psd_w_per_hz: f64,
    pub carrier_hz: f64,
    /// `β` in `p_L(D) = exp(-β D)`, per metre.
    pub los_decay: f64,
    pub fading: Fading,
    /// Add `G_s` interference from every non-serving base station.
    pub side_lobe_interference: bool,
}

impl Default for RadioParams {
    fn default() -> Self {
        RadioConfig::default().into_params().expect("defaults are valid")
    }
}

impl RadioParams {
    pub fn main_lobe_gain(&self) -> f64 {
        main_lobe_gain(self.beamwidth, self.side_lobe_gain)
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_psd_w_per_hz * self.bandwidth_hz
    }

    pub fn check(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Parameter(format!("radio: {what}")));
        if !(self.bandwidth_hz > 0.0) {
            return bad("bandwidth must be positive");
        }
        if !(self.tx_power_w > 0.0) {
            return bad("transmit power must be positive");
        }
        if !(self.beamwidth > 0.0 && self.beamwidth < TAU) {
            return bad("beamwidth must lie in (0, 2π)");
        }
        if !(self.side_lobe_gain >= 0.0 && self.side_lobe_gain < 1.0) {
            return bad("side-lobe gain must lie in [0, 1)");
        }
        if !(self.alpha_los > 0.0 && self.alpha_nlos >= self.alpha_los) {
            return bad("need alpha_nlos >= alpha_los > 0");
        }
        if !(self.kappa_los > 0.0 && self.kappa_nlos > 0.0) {
            return bad("reference path loss must be positive");
        }
        if !(self.los_decay > 0.0) {
            return bad("LoS decay must be positive");
        }
        if !(self.noise_psd_w_per_hz >= 0.0) {
            return bad("noise PSD must be non-negative");
        }
        if let Fading::Nakagami { m_los, m_nlos } = self.fading {
            if !(m_los >= 0.5 && m_nlos >= 0.5) {
                return bad("Nakagami shape must be at least 0.5");
            }
        }
        Ok(())
    }
}

/// On-disk radio configuration in engineering units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioConfig {
    pub bandwidth_hz: f64,
    pub tx_power_dbm: f64,
    pub side_lobe_gain: f64,
    pub beamwidth_rad: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    /// Defaults to `(c / 4π f_c)²` when absent.
    pub kappa_los: Option<f64>,
    pub kappa_nlos: Option<f64>,
    pub noise_psd_dbm_per_hz: f64,
    pub carrier_hz: f64,
    /// `1/β`, metres.
    pub los_distance_m: f64,
    pub fading: Fading,
    pub side_lobe_interference: bool,
}

impl Default for RadioConfig {
    fn default() -> Self {
        RadioConfig {
            bandwidth_hz: 100e6,
            tx_power_dbm: 20.0,
            side_lobe_gain: 0.1,
            beamwidth_rad: PI / 6.0,
            alpha_los: 2.0,
            alpha_nlos: 4.0,
            kappa_los: None,
            kappa_nlos: None,
            noise_psd_dbm_per_hz: -174.0,
            carrier_hz: 28e9,
            los_distance_m: 141.4,
            fading: Fading::DeterministicUnit,
            side_lobe_interference: true,
        }
    }
}

impl RadioConfig {
    pub fn into_params(self) -> Result<RadioParams> {
        if !(self.carrier_hz > 0.0) || !(self.los_distance_m > 0.0) {
            return Err(Error::Parameter("radio: carrier and LoS distance must be positive".into()));
        }
        let kappa = free_space_reference_loss(self.carrier_hz);
        let params = RadioParams {
            bandwidth_hz: self.bandwidth_hz,
            tx_power_w: dbm_to_watts(self.tx_power_dbm),
            side_lobe_gain: self.side_lobe_gain,
            beamwidth: self.beamwidth_rad,
            alpha_los: self.alpha_los,
            alpha_nlos: self.alpha_nlos,
            kappa_los: self.kappa_los.unwrap_or(kappa),
            kappa_nlos: self.kappa_nlos.unwrap_or(kappa),
            noise_psd_w_per_hz: dbm_to_watts(self.noise_psd_dbm_per_hz),
            carrier_hz: self.carrier_hz,
            los_decay: 1.0 / self.los_distance_m,
            fading: self.fading,
            side_lobe_interference: self.side_lobe_interference,
        };
        params.check()?;
        Ok(params)
    }

    /// Parses TOML, or JSON when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Ok(serde_json::from_str(text)?)
        } else {
            Ok(toml::from_str(text)?)
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        RadioConfig::parse(&std::fs::read_to_string(path)?)
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `(c / 4π f_c)²`.
pub fn free_space_reference_loss(carrier_hz: f64) -> f64 {
    (SPEED_OF_LIGHT / (4.0 * PI * carrier_hz)).powi(2)
}

/// Main-lobe gain of a sectored pattern that radiates `G_s` outside a main
/// lobe of width `θ` and conserves total power.
pub fn main_lobe_gain(beamwidth: f64, side_lobe_gain: f64) -> f64 {
    side_lobe_gain + (1.0 - side_lobe_gain) * TAU / beamwidth
}

pub fn los_probability(distance: f64, los_decay: f64) -> f64 {
    (-los_decay * distance.max(0.0)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLoss {
    pub gain: f64,
    /// The distance was below the reference distance and got clamped.
    pub clamped: bool,
}

pub fn path_loss(distance: f64, state: LinkState, params: &RadioParams) -> PathLoss {
    let clamped = distance < REFERENCE_DISTANCE;
    let d = distance.max(REFERENCE_DISTANCE);
    let gain = match state {
        LinkState::Los => params.kappa_los * d.powf(-params.alpha_los),
        LinkState::Nlos => params.kappa_nlos * d.powf(-params.alpha_nlos),
    };
    PathLoss { gain, clamped }
}

/// One realised link: propagation state, small-scale fading power and length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkSample {
    pub state: LinkState,
    pub fading_power: f64,
    pub distance: f64,
}

impl LinkSample {
    /// Received power through a transmit gain `gain` (receive gain is 1).
    pub fn received_power(&self, gain: f64, params: &RadioParams) -> f64 {
        params.tx_power_w * gain * self.fading_power * path_loss(self.distance, self.state, params).gain
    }
}

pub fn sample_link<R: Rng + ?Sized>(distance: f64, params: &RadioParams, rng: &mut R) -> LinkSample {
    let state = if rng.random::<f64>() < los_probability(distance, params.los_decay) {
        LinkState::Los
    } else {
        LinkState::Nlos
    };
    let fading_power = match params.fading {
        Fading::DeterministicUnit => 1.0,
        Fading::Nakagami { m_los, m_nlos } => {
            let m = match state {
                LinkState::Los => m_los,
                LinkState::Nlos => m_nlos,
            };
            let gamma = Gamma::new(m, 1.0 / m).expect("shape checked by RadioParams::check");
            // a zero draw is possible in principle; keep the power positive
            gamma.sample(rng).max(f64::MIN_POSITIVE)
        }
    };
    LinkSample { state, fading_power, distance }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interferer {
    pub link: LinkSample,
    pub gain: f64,
}

/// SINR of a main-lobe serving link against the given interferers and
/// thermal noise.
pub fn sinr(serving: &LinkSample, interferers: &[Interferer], params: &RadioParams) -> f64 {
    let signal = serving.received_power(params.main_lobe_gain(), params);
    let interference: f64 = interferers.iter().map(|i| i.link.received_power(i.gain, params)).sum();
    signal / (interference + params.noise_power())
}

/// Shannon rate in bit/s.
pub fn rate(sinr: f64, bandwidth_hz: f64) -> f64 {
    bandwidth_hz * (1.0 + sinr).log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn los(d: f64) -> LinkSample {
        LinkSample { state: LinkState::Los, fading_power: 1.0, distance: d }
    }

    #[test]
    fn main_lobe_gain_table_value() {
        assert_eq!(main_lobe_gain(PI / 6.0, 0.1), 10.9);
        assert_eq!(main_lobe_gain(PI / 6.0, 0.0), 12.0);
        assert_eq!(main_lobe_gain(TAU, 0.3), 1.0);
    }

    #[test]
    fn los_probability_values() {
        assert_eq!(los_probability(0.0, 0.5), 1.0);
        assert!((los_probability(141.4, 1.0 / 141.4) - (-1f64).exp()).abs() < 1e-15);
        assert!(los_probability(10.0, 0.01) > los_probability(11.0, 0.01));
    }

    #[test]
    fn reference_loss_at_28ghz() {
        let p = RadioParams::default();
        // (c / (4π · 28 GHz))², evaluated independently with Python floats
        assert!((p.kappa_los - 7.259481705540117e-7).abs() < 1e-20);
        assert_eq!(path_loss(1.0, LinkState::Los, &p).gain, p.kappa_los);
        assert!((path_loss(10.0, LinkState::Los, &p).gain - 1e-2 * p.kappa_los).abs() < 1e-22);
        let d = 37.0;
        let ratio = path_loss(d, LinkState::Los, &p).gain / path_loss(d, LinkState::Nlos, &p).gain;
        assert!((ratio / (d * d) - 1.0).abs() < 1e-12);
        let near = path_loss(0.3, LinkState::Los, &p);
        assert!(near.clamped);
        assert_eq!(near.gain, p.kappa_los);
    }

    #[test]
    fn unit_conversions() {
        let p = RadioParams::default();
        assert!((p.tx_power_w - 0.1).abs() < 1e-15);
        assert!((p.noise_psd_w_per_hz - 3.981071705534986e-21).abs() < 1e-33);
        assert!((p.los_decay - 1.0 / 141.4).abs() < 1e-18);
    }

    #[test]
    fn rate_values() {
        assert_eq!(rate(0.0, 100e6), 0.0);
        assert_eq!(rate(1.0, 100e6), 100e6);
        assert_eq!(rate(3.0, 100e6), 200e6);
    }

    #[test]
    fn sinr_noise_only_and_symmetric_interferer() {
        let p = RadioParams::default();
        let s = los(30.0);
        let expected = p.tx_power_w * p.main_lobe_gain() * path_loss(30.0, LinkState::Los, &p).gain / p.noise_power();
        assert!((sinr(&s, &[], &p) / expected - 1.0).abs() < 1e-12);

        let twin = [Interferer { link: s, gain: p.main_lobe_gain() }];
        let signal = s.received_power(p.main_lobe_gain(), &p);
        let got = sinr(&s, &twin, &p);
        assert!((got - signal / (signal + p.noise_power())).abs() < 1e-12);
        assert!(got < 1.0);
    }

    #[test]
    fn more_power_helps_against_noise() {
        let mut p = RadioParams::default();
        let i = [Interferer { link: los(60.0), gain: p.main_lobe_gain() }];
        let before = sinr(&los(30.0), &i, &p);
        p.tx_power_w *= 2.0;
        assert!(sinr(&los(30.0), &i, &p) > before);
    }

    #[test]
    fn deterministic_fading_is_unit() {
        let p = RadioParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(sample_link(40.0, &p, &mut rng).fading_power, 1.0);
        }
    }

    #[test]
    fn config_parses_toml_and_json() {
        let toml_cfg =
            RadioConfig::parse("tx_power_dbm = 23\n[fading]\nmode = \"nakagami\"\nm_los = 3.0\nm_nlos = 2.0\n")
                .unwrap();
        assert_eq!(toml_cfg.tx_power_dbm, 23.0);
        assert_eq!(toml_cfg.fading, Fading::Nakagami { m_los: 3.0, m_nlos: 2.0 });
        let json_cfg = RadioConfig::parse(r#"{"bandwidth_hz": 2e8}"#).unwrap();
        assert_eq!(json_cfg.bandwidth_hz, 2e8);
        assert!(RadioConfig::parse("unknown_key = 1").is_err());
        let bad = RadioConfig { alpha_nlos: 1.0, ..Default::default() };
        assert!(bad.into_params().is_err());
    }
}
