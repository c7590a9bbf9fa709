//! Command-line surface and config resolution. Flags win over file values.

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use ia_core::config::{RunConfig, DEFAULT_CONFIG};

#[derive(Debug, Parser)]
#[command(name = "mmw-ia", version, about = "Beam-sweeping initial access simulator")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML run configuration; the shipped defaults when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Monte Carlo trials per bin or grid point.
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Restrict to a scheme label such as `exh-64x16`; repeatable.
    #[arg(long = "scheme", global = true, value_name = "LABEL")]
    pub schemes: Vec<String>,
    /// Worker threads; all available cores when absent.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Slot counts and discovery delay per scheme.
    DelayTable,
    /// Misdetection probability per distance bin.
    SweepDistance {
        #[arg(long, value_name = "M")]
        max_radius: Option<f64>,
    },
    /// Misdetection probability vs. signal duration at a fixed distance.
    SweepTsig {
        #[arg(long, value_name = "M")]
        distance: Option<f64>,
        /// Longest signal duration in seconds.
        #[arg(long, value_name = "S")]
        cap: Option<f64>,
    },
    /// Shortest signal duration meeting a misdetection target, and the
    /// resulting total delay.
    MinTsig {
        #[arg(long, value_name = "M")]
        distance: Option<f64>,
        #[arg(long, value_name = "PMD")]
        target: Option<f64>,
        #[arg(long, value_name = "S")]
        cap: Option<f64>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::DelayTable => "delay-table",
            Command::SweepDistance { .. } => "sweep-distance",
            Command::SweepTsig { .. } => "sweep-tsig",
            Command::MinTsig { .. } => "min-tsig",
        }
    }
}

/// Rejected input: bad config, flags or scheme selection.
#[derive(Debug)]
pub struct InvalidInput(pub String);

impl fmt::Display for InvalidInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InvalidInput {}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    InvalidInput(msg.into()).into()
}

/// Loads the config file (or defaults), applies flag overrides, selects
/// schemes and validates the result.
pub fn resolve_config(common: &CommonArgs, command: &Command) -> anyhow::Result<RunConfig> {
    let text = match &common.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?,
        None => DEFAULT_CONFIG.to_string(),
    };
    let mut cfg = RunConfig::from_toml_str(&text).map_err(|e| invalid(e.to_string()))?;

    if let Some(t) = common.trials {
        cfg.sim.trials = t;
    }
    if let Some(s) = common.seed {
        cfg.sim.master_seed = s;
    }
    if let Some(o) = &common.out {
        cfg.output_dir = o.clone();
    }
    match *command {
        Command::DelayTable => {}
        Command::SweepDistance { max_radius } => {
            if let Some(r) = max_radius {
                cfg.sim.max_radius_m = r;
            }
        }
        Command::SweepTsig { distance, cap } => {
            if let Some(d) = distance {
                cfg.experiments.edge_distance_m = d;
            }
            if let Some(c) = cap {
                cfg.experiments.t_sig_cap_s = c;
            }
        }
        Command::MinTsig { distance, target, cap } => {
            if let Some(d) = distance {
                cfg.experiments.edge_distance_m = d;
            }
            if let Some(t) = target {
                cfg.experiments.target_pmd = t;
            }
            if let Some(c) = cap {
                cfg.experiments.t_sig_cap_s = c;
            }
        }
    }

    if !common.schemes.is_empty() {
        let mut picked = Vec::with_capacity(common.schemes.len());
        for label in &common.schemes {
            let found = cfg.schemes.iter().find(|s| &s.label() == label).ok_or_else(|| {
                let known: Vec<String> = cfg.schemes.iter().map(|s| s.label()).collect();
                invalid(format!("unknown scheme {label:?}; configured: {}", known.join(", ")))
            })?;
            picked.push(found.clone());
        }
        cfg.schemes = picked;
    }
    if common.workers == Some(0) {
        return Err(invalid("workers: must be >= 1"));
    }
    cfg.validate().map_err(|e| invalid(e.to_string()))?;
    Ok(cfg)
}
