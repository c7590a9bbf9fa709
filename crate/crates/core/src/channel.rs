//! Statistical mmWave channel realizations.
//!
//! A link is first assigned a pathloss state (LOS, NLOS or outage) from
//! distance-dependent probabilities, then a shadowed distance-based pathloss,
//! and finally a set of spatial clusters, each synthesized from many
//! subpaths scattered around the cluster's departure and arrival angles.
//!
//! All numeric parameters live in [`ChannelParams`]; the shipped defaults are
//! read from the crate's default configuration file.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::rng::RandomStream;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathlossState {
    Los,
    Nlos,
    /// No usable path. The perceived SNR is treated as minus infinity.
    Outage,
}

/// Parameters of the statistical channel model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParams {
    pub los_pl_intercept_db: f64,
    pub los_pl_exponent: f64,
    pub los_shadow_sigma_db: f64,
    pub nlos_pl_intercept_db: f64,
    pub nlos_pl_exponent: f64,
    pub nlos_shadow_sigma_db: f64,
    /// `a_out` in `p_out(d) = max(0, 1 - exp(-a_out d + b_out))`, in 1/m.
    pub outage_decay_per_m: f64,
    /// `b_out`, unitless.
    pub outage_offset: f64,
    /// `a_los` in `p_los(d) = (1 - p_out(d)) exp(-a_los d)`, in 1/m.
    pub los_decay_per_m: f64,
    /// Mean of the Poisson cluster count (floored at one cluster).
    pub cluster_rate: f64,
    pub subpaths_per_cluster: usize,
    /// Exponent `r` of the uniform power draw `U^(r-1)`.
    pub cluster_power_exponent: f64,
    /// Lognormal spread of the per-cluster power draw.
    pub cluster_power_sigma_db: f64,
    /// Standard deviation of subpath azimuths around the cluster center.
    pub azimuth_spread_deg: f64,
    pub elevation_spread_deg: f64,
    pub carrier_freq_hz: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        crate::config::RunConfig::default().channel
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("los_pl_exponent", self.los_pl_exponent),
            ("nlos_pl_exponent", self.nlos_pl_exponent),
            ("cluster_rate", self.cluster_rate),
            ("carrier_freq_hz", self.carrier_freq_hz),
        ];
        for (field, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(field, format!("must be > 0, got {v}")));
            }
        }
        let non_negative = [
            ("los_shadow_sigma_db", self.los_shadow_sigma_db),
            ("nlos_shadow_sigma_db", self.nlos_shadow_sigma_db),
            ("outage_decay_per_m", self.outage_decay_per_m),
            ("los_decay_per_m", self.los_decay_per_m),
            ("cluster_power_sigma_db", self.cluster_power_sigma_db),
            ("azimuth_spread_deg", self.azimuth_spread_deg),
            ("elevation_spread_deg", self.elevation_spread_deg),
        ];
        for (field, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(field, format!("must be >= 0, got {v}")));
            }
        }
        for (field, v) in [
            ("los_pl_intercept_db", self.los_pl_intercept_db),
            ("nlos_pl_intercept_db", self.nlos_pl_intercept_db),
            ("outage_offset", self.outage_offset),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(field, "must be finite"));
            }
        }
        if !(self.cluster_power_exponent.is_finite() && self.cluster_power_exponent >= 1.0) {
            return Err(Error::invalid("cluster_power_exponent", "must be >= 1"));
        }
        if self.subpaths_per_cluster == 0 {
            return Err(Error::invalid("subpaths_per_cluster", "must be >= 1"));
        }
        Ok(())
    }

    /// Deterministic part of the pathloss: `intercept + 10 n log10(d)`.
    pub fn mean_pathloss_db(&self, state: PathlossState, distance_m: f64) -> Result<f64> {
        check_distance(distance_m)?;
        let (alpha, beta) = match state {
            PathlossState::Los => (self.los_pl_intercept_db, self.los_pl_exponent),
            PathlossState::Nlos => (self.nlos_pl_intercept_db, self.nlos_pl_exponent),
            PathlossState::Outage => return Err(Error::OutageLink),
        };
        Ok(alpha + 10.0 * beta * distance_m.log10())
    }

    fn shadow_sigma_db(&self, state: PathlossState) -> f64 {
        match state {
            PathlossState::Los => self.los_shadow_sigma_db,
            PathlossState::Nlos => self.nlos_shadow_sigma_db,
            PathlossState::Outage => 0.0,
        }
    }
}

/// Probabilities of the three pathloss states at one distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateProbabilities {
    pub los: f64,
    pub nlos: f64,
    pub outage: f64,
}

pub fn state_probabilities(distance_m: f64, params: &ChannelParams) -> Result<StateProbabilities> {
    check_distance(distance_m)?;
    let outage =
        (1.0 - (-params.outage_decay_per_m * distance_m + params.outage_offset).exp()).max(0.0);
    let los = (1.0 - outage) * (-params.los_decay_per_m * distance_m).exp();
    let nlos = (1.0 - outage - los).max(0.0);
    Ok(StateProbabilities { los, nlos, outage })
}

/// Azimuth/elevation pair in radians. Azimuth is measured in the horizontal
/// plane; elevation from that plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub azimuth: f64,
    pub elevation: f64,
}

impl Direction {
    pub fn horizontal(azimuth: f64) -> Self {
        Direction {
            azimuth,
            elevation: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subpath {
    pub gain: Complex64,
    /// Angle of departure at the BS.
    pub departure: Direction,
    /// Angle of arrival at the UE.
    pub arrival: Direction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub power_fraction: f64,
    pub departure: Direction,
    pub arrival: Direction,
    pub subpaths: Vec<Subpath>,
}

/// One random draw of the BS-UE channel.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkRealization {
    pub state: PathlossState,
    /// Pathloss including shadowing; `+inf` in outage.
    pub pathloss_db: f64,
    pub distance_m: f64,
    pub clusters: Vec<Cluster>,
}

impl LinkRealization {
    pub fn outage(distance_m: f64) -> Self {
        LinkRealization {
            state: PathlossState::Outage,
            pathloss_db: f64::INFINITY,
            distance_m,
            clusters: Vec::new(),
        }
    }

    /// A LOS link carrying a single subpath of gain `gain`.
    pub fn single_path(
        distance_m: f64,
        pathloss_db: f64,
        departure: Direction,
        arrival: Direction,
        gain: Complex64,
    ) -> Self {
        LinkRealization {
            state: PathlossState::Los,
            pathloss_db,
            distance_m,
            clusters: vec![Cluster {
                power_fraction: 1.0,
                departure,
                arrival,
                subpaths: vec![Subpath {
                    gain,
                    departure,
                    arrival,
                }],
            }],
        }
    }

    pub fn is_outage(&self) -> bool {
        self.state == PathlossState::Outage
    }

    pub fn subpaths(&self) -> impl Iterator<Item = &Subpath> {
        self.clusters.iter().flat_map(|c| c.subpaths.iter())
    }

    pub fn subpath_count(&self) -> usize {
        self.clusters.iter().map(|c| c.subpaths.len()).sum()
    }
}

fn check_distance(distance_m: f64) -> Result<()> {
    if distance_m.is_finite() && distance_m > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidDistance(distance_m))
    }
}

pub fn sample_state(
    distance_m: f64,
    params: &ChannelParams,
    rng: &mut RandomStream,
) -> Result<PathlossState> {
    let p = state_probabilities(distance_m, params)?;
    let u: f64 = rng.random();
    Ok(if u < p.outage {
        PathlossState::Outage
    } else if u < p.outage + p.los {
        PathlossState::Los
    } else {
        PathlossState::Nlos
    })
}

/// Shadowed pathloss. The caller must short-circuit outage links.
pub fn sample_pathloss_db(
    state: PathlossState,
    distance_m: f64,
    params: &ChannelParams,
    rng: &mut RandomStream,
) -> Result<f64> {
    let mean = params.mean_pathloss_db(state, distance_m)?;
    let z: f64 = rng.sample(StandardNormal);
    Ok(mean + params.shadow_sigma_db(state) * z)
}

fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

fn scatter(center: Direction, az_sigma: f64, el_sigma: f64, rng: &mut RandomStream) -> Direction {
    let dz: f64 = rng.sample(StandardNormal);
    let de: f64 = rng.sample(StandardNormal);
    Direction {
        azimuth: wrap_angle(center.azimuth + az_sigma * dz),
        elevation: (center.elevation + el_sigma * de).clamp(-FRAC_PI_2, FRAC_PI_2),
    }
}

pub fn sample_clusters(params: &ChannelParams, rng: &mut RandomStream) -> Vec<Cluster> {
    // Poisson::new only fails for a non-positive or non-finite rate
    let poisson = Poisson::new(params.cluster_rate).expect("cluster_rate validated > 0");
    let count = (poisson.sample(rng) as usize).max(1);

    let raw: Vec<f64> = (0..count)
        .map(|_| {
            let u = 1.0 - rng.random::<f64>();
            let z: f64 = rng.sample(StandardNormal);
            u.powf(params.cluster_power_exponent - 1.0)
                * 10f64.powf(-0.1 * params.cluster_power_sigma_db * z)
        })
        .collect();
    let total: f64 = raw.iter().sum();

    let az_sigma = params.azimuth_spread_deg.to_radians();
    let el_sigma = params.elevation_spread_deg.to_radians();
    let per_subpath = params.subpaths_per_cluster as f64;

    raw.into_iter()
        .map(|r| {
            let power_fraction = r / total;
            let departure = Direction::horizontal(rng.random::<f64>() * TAU);
            let arrival = Direction::horizontal(rng.random::<f64>() * TAU);
            let amplitude = (power_fraction / (2.0 * per_subpath)).sqrt();
            let subpaths = (0..params.subpaths_per_cluster)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Subpath {
                        gain: Complex64::new(re, im) * amplitude,
                        departure: scatter(departure, az_sigma, el_sigma, rng),
                        arrival: scatter(arrival, az_sigma, el_sigma, rng),
                    }
                })
                .collect();
            Cluster {
                power_fraction,
                departure,
                arrival,
                subpaths,
            }
        })
        .collect()
}

/// Draws state, pathloss and clusters for a link of length `distance_m`.
pub fn realize_link(
    distance_m: f64,
    params: &ChannelParams,
    rng: &mut RandomStream,
) -> Result<LinkRealization> {
    let state = sample_state(distance_m, params, rng)?;
    if state == PathlossState::Outage {
        return Ok(LinkRealization::outage(distance_m));
    }
    let pathloss_db = sample_pathloss_db(state, distance_m, params, rng)?;
    let clusters = sample_clusters(params, rng);
    Ok(LinkRealization {
        state,
        pathloss_db,
        distance_m,
        clusters,
    })
}
