//! Run configuration: one TOML document with `[sim]`, `[channel]`,
//! `[experiments]` and a `[[schemes]]` list. Unknown keys are rejected.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::protocols::SchemeConfig;
use crate::sim::SimParams;
use crate::{Error, Result};

/// The shipped defaults, also the source of `Default` for every section.
pub const DEFAULT_CONFIG: &str = include_str!("../config/default.toml");

/// Options used by the fixed-distance experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentOptions {
    /// Distance of the edge user for the signal-duration experiments.
    pub edge_distance_m: f64,
    pub target_pmd: f64,
    /// Longest signal duration searched.
    pub t_sig_cap_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    pub sim: SimParams,
    pub channel: ChannelParams,
    pub experiments: ExperimentOptions,
    pub schemes: Vec<SchemeConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::from_toml_str(DEFAULT_CONFIG).expect("shipped default config is valid")
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        self.channel.validate()?;
        if self.schemes.is_empty() {
            return Err(Error::invalid("schemes", "at least one scheme is required"));
        }
        for s in &self.schemes {
            s.validate()?;
        }
        let e = &self.experiments;
        if !(e.edge_distance_m.is_finite() && e.edge_distance_m > 0.0) {
            return Err(Error::invalid("edge_distance_m", "must be > 0"));
        }
        if !(e.target_pmd > 0.0 && e.target_pmd <= 1.0) {
            return Err(Error::invalid("target_pmd", "must lie in (0, 1]"));
        }
        if !(e.t_sig_cap_s.is_finite() && e.t_sig_cap_s >= self.sim.t_sig_s) {
            return Err(Error::invalid("t_sig_cap_s", "must be >= t_sig_s"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::SchemeConfig;

    #[test]
    fn shipped_defaults() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.schemes, SchemeConfig::reference_set());
        assert_eq!(cfg.sim.trials, 1_000_000);
        assert_eq!(cfg.sim.snr_threshold_db, -5.0);
        assert_eq!(cfg.sim.overhead, 0.05);
        assert_eq!(cfg.channel.los_pl_intercept_db, 61.4);
        assert_eq!(cfg.channel.nlos_pl_exponent, 2.92);
        assert_eq!(cfg.experiments.edge_distance_m, 95.0);
    }

    #[test]
    fn round_trip_is_identity() {
        let cfg = RunConfig::default();
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_are_errors() {
        let text = DEFAULT_CONFIG.replace("overhead = 0.05", "overhead = 0.05\noverhed = 0.1");
        assert!(matches!(RunConfig::from_toml_str(&text), Err(Error::Config(_))));
        let text = DEFAULT_CONFIG.replace("[channel]", "[channel]\nlos_exponent = 2.0");
        assert!(RunConfig::from_toml_str(&text).is_err());
        let text = format!("typo = 1\n{DEFAULT_CONFIG}");
        assert!(RunConfig::from_toml_str(&text).is_err());
    }
}
