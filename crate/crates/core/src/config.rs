//! Experiment configuration and the TOML config file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::angle::DetectionEfficiency;
use crate::error::{Error, Result};
use crate::lhv::QuadratureSpec;

/// Parameters of the pulsed down-conversion coincidence experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Rate of pairs leaving the beamsplitter by different ports, pairs/s.
    pub pair_rate_r0: f64,
    pub eta_t: DetectionEfficiency,
    pub eta_r: DetectionEfficiency,
    pub state_visibility: f64,
    /// Laser repetition rate, Hz.
    pub repetition_rate: f64,
    pub window_ns: f64,
    pub acquisitions: u32,
    pub acquisition_duration_s: f64,
    /// Uncorrelated background (dark + stray light) rate per detector, counts/s.
    pub background_rate: f64,
    #[serde(default)]
    pub dead_time_ns: f64,
    pub seed: u64,
}

impl ExperimentConfig {
    /// Reference settings: 70 MHz, 20 ns window, 30 acquisitions of 30 s,
    /// η = 0.62 and V = 0.978, with count levels of a few hundred
    /// coincidences per second at the fringe maximum.
    pub fn reference() -> Self {
        Self {
            pair_rate_r0: 1200.0,
            eta_t: DetectionEfficiency::NOMINAL,
            eta_r: DetectionEfficiency::NOMINAL,
            state_visibility: 0.978,
            repetition_rate: 70e6,
            window_ns: 20.0,
            acquisitions: 30,
            acquisition_duration_s: 30.0,
            background_rate: 1.0e4,
            dead_time_ns: 0.0,
            seed: 2008,
        }
    }

    pub fn pulse_period_ns(&self) -> f64 {
        1e9 / self.repetition_rate
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        let nonneg = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be >= 0, got {v}")))
            }
        };
        nonneg("pair_rate_r0", self.pair_rate_r0)?;
        positive("repetition_rate", self.repetition_rate)?;
        positive("window_ns", self.window_ns)?;
        positive("acquisition_duration_s", self.acquisition_duration_s)?;
        nonneg("background_rate", self.background_rate)?;
        nonneg("dead_time_ns", self.dead_time_ns)?;
        if !(0.0..=1.0).contains(&self.state_visibility) {
            return Err(Error::Config(format!(
                "state_visibility must lie in [0, 1], got {}",
                self.state_visibility
            )));
        }
        if self.acquisitions < 1 {
            return Err(Error::Config("acquisitions must be >= 1".into()));
        }
        let pulses = self.acquisition_duration_s * self.repetition_rate;
        if pulses >= u64::MAX as f64 {
            return Err(Error::Config(format!(
                "{pulses} pulses per acquisition overflow a 64-bit count"
            )));
        }
        Ok(())
    }

    /// Human-readable warnings for legal but suspicious settings.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.window_ns > self.pulse_period_ns() {
            out.push(format!(
                "coincidence window {} ns exceeds the {:.2} ns pulse period; stops from the following pulse fall inside the window",
                self.window_ns,
                self.pulse_period_ns()
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSettings {
    pub n: usize,
}

impl Default for GridSettings {
    fn default() -> Self {
        Self { n: 8 }
    }
}

/// Contents of a config file: the experiment plus grid and quadrature settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: ExperimentConfig,
    #[serde(default)]
    pub grid: GridSettings,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.experiment.validate()?;
        cfg.quadrature.validate()?;
        if cfg.grid.n < 4 {
            return Err(Error::Config(format!("grid.n must be >= 4, got {}", cfg.grid.n)));
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_config_is_valid_but_warns() {
        let cfg = ExperimentConfig::reference();
        cfg.validate().unwrap();
        // 20 ns window against a 14.3 ns period
        assert_eq!(cfg.warnings().len(), 1);
    }

    #[test]
    fn shipped_config_is_the_default() {
        let file = ConfigFile::parse(include_str!("../configs/reference.toml")).unwrap();
        assert_eq!(file.experiment, ExperimentConfig::reference());
        assert_eq!(file.quadrature, QuadratureSpec::default());
    }

    #[test]
    fn toml_round_trip() {
        let file = ConfigFile {
            experiment: ExperimentConfig::reference(),
            grid: GridSettings::default(),
            quadrature: QuadratureSpec::default(),
        };
        let text = file.to_toml();
        assert_eq!(ConfigFile::parse(&text).unwrap(), file);
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut text = ConfigFile {
            experiment: ExperimentConfig::reference(),
            grid: GridSettings::default(),
            quadrature: QuadratureSpec::default(),
        }
        .to_toml();
        text = text.replace("[experiment]", "[experiment]\nlaser_colour = \"blue\"");
        assert!(matches!(ConfigFile::parse(&text), Err(Error::Config(_))));
    }

    #[test]
    fn invalid_values_rejected() {
        let mut cfg = ExperimentConfig::reference();
        cfg.acquisitions = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::reference();
        cfg.state_visibility = 1.2;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::reference();
        cfg.window_ns = 0.0;
        assert!(cfg.validate().is_err());
    }
}
