//! Monte Carlo engine and delay metrics.
//!
//! A trial deploys one UE, draws one link realization and asks every scheme
//! for its decision SNR (the largest threshold at which it still detects the
//! UE). Misdetection counts at any threshold then follow by comparison, so
//! a longer signal duration is evaluated by lowering the threshold by
//! `10 log10(T_sig / T_ref)` on the same trials.
//!
//! Trial `t` of distance bin `b` always draws from `substream(seed, b, t)`,
//! which makes every estimate independent of the worker count and pairs
//! trials across schemes and thresholds.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arrays::LinkBudget;
use crate::channel::{realize_link, ChannelParams};
use crate::protocols::{decision_snr_db, slots_required, SchemeCodebooks, SchemeConfig};
use crate::rng::{substream, RandomStream, MAX_TRIALS_PER_BIN};
use crate::{Error, Result};

/// Stream id reserved for fixed-distance experiments.
pub const FIXED_DISTANCE_STREAM: u32 = (1 << 24) - 1;

const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimParams {
    pub tx_power_dbm: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
    pub carrier_freq_hz: f64,
    /// Detection threshold tau at the reference signal duration.
    pub snr_threshold_db: f64,
    /// PSS duration in use.
    pub t_sig_s: f64,
    /// Duration at which `snr_threshold_db` applies; defaults to `t_sig_s`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_t_sig_s: Option<f64>,
    pub overhead: f64,
    pub trials: u64,
    pub bin_width_m: f64,
    pub max_radius_m: f64,
    pub master_seed: u64,
}

impl Default for SimParams {
    fn default() -> Self {
        crate::config::RunConfig::default().sim
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.overhead > 0.0 && self.overhead < 1.0) {
            return Err(Error::invalid("overhead", format!("must lie in (0, 1), got {}", self.overhead)));
        }
        if !(self.t_sig_s.is_finite() && self.t_sig_s > 0.0) {
            return Err(Error::invalid("t_sig_s", "must be > 0"));
        }
        if let Some(r) = self.reference_t_sig_s {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::invalid("reference_t_sig_s", "must be > 0"));
            }
        }
        if self.trials == 0 || self.trials > MAX_TRIALS_PER_BIN {
            return Err(Error::invalid("trials", format!("must be in 1..={MAX_TRIALS_PER_BIN}")));
        }
        if !(self.bandwidth_hz.is_finite() && self.bandwidth_hz > 0.0) {
            return Err(Error::invalid("bandwidth_hz", "must be > 0"));
        }
        if !(self.bin_width_m.is_finite() && self.bin_width_m > 0.0) {
            return Err(Error::invalid("bin_width_m", "must be > 0"));
        }
        if !(self.max_radius_m.is_finite() && self.max_radius_m >= self.bin_width_m) {
            return Err(Error::invalid("max_radius_m", "must be at least one bin wide"));
        }
        for (field, v) in [
            ("tx_power_dbm", self.tx_power_dbm),
            ("noise_figure_db", self.noise_figure_db),
            ("snr_threshold_db", self.snr_threshold_db),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(field, "must be finite"));
            }
        }
        Ok(())
    }

    pub fn reference_t_sig(&self) -> f64 {
        self.reference_t_sig_s.unwrap_or(self.t_sig_s)
    }

    /// Link budget with the threshold scaled to the signal duration `t_sig`.
    pub fn budget_for(&self, t_sig: f64) -> LinkBudget {
        LinkBudget {
            tx_power_dbm: self.tx_power_dbm,
            bandwidth_hz: self.bandwidth_hz,
            noise_figure_db: self.noise_figure_db,
            snr_threshold_db: equivalent_threshold(self.snr_threshold_db, t_sig, self.reference_t_sig()),
        }
    }

    /// `[0, w), [w, 2w), ...` up to `max_radius_m`.
    pub fn bins(&self) -> Vec<DistanceBin> {
        let n = (self.max_radius_m / self.bin_width_m).round().max(1.0) as usize;
        (0..n)
            .map(|i| DistanceBin {
                inner_m: i as f64 * self.bin_width_m,
                outer_m: (i + 1) as f64 * self.bin_width_m,
            })
            .collect()
    }
}

/// Annulus `inner_m <= r <= outer_m` around the BS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceBin {
    pub inner_m: f64,
    pub outer_m: f64,
}

impl DistanceBin {
    pub fn new(inner_m: f64, outer_m: f64) -> Result<Self> {
        if !(inner_m >= 0.0 && inner_m < outer_m && outer_m.is_finite()) {
            return Err(Error::invalid("bin", format!("need 0 <= inner < outer, got [{inner_m}, {outer_m}]")));
        }
        Ok(DistanceBin { inner_m, outer_m })
    }

    pub fn contains(&self, d: f64) -> bool {
        d >= self.inner_m && d <= self.outer_m
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub x_m: f64,
    pub y_m: f64,
}

impl Position {
    pub fn distance(&self) -> f64 {
        self.x_m.hypot(self.y_m)
    }
}

/// Uniform-by-area position in the annulus (BS at the origin).
pub fn deploy_ue(bin: &DistanceBin, rng: &mut RandomStream) -> Position {
    // u in (0, 1] keeps the radius strictly positive when inner_m = 0
    let u = 1.0 - rng.random::<f64>();
    let (r2, r1) = (bin.inner_m, bin.outer_m);
    let r = (r2 * r2 + u * (r1 * r1 - r2 * r2)).sqrt();
    let theta = rng.random::<f64>() * TAU;
    Position {
        x_m: r * theta.cos(),
        y_m: r * theta.sin(),
    }
}

/// Half-width of the Wilson score interval at 95 % confidence.
pub fn wilson_halfwidth(successes: u64, trials: u64) -> f64 {
    if trials == 0 {
        return 0.5;
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z_95 * Z_95;
    Z_95 / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PmdEstimate {
    pub bin: DistanceBin,
    pub trials: u64,
    pub misdetections: u64,
    pub pmd: f64,
    pub ci95_halfwidth: f64,
}

impl PmdEstimate {
    pub fn new(bin: DistanceBin, trials: u64, misdetections: u64) -> Self {
        PmdEstimate {
            bin,
            trials,
            misdetections,
            pmd: misdetections as f64 / trials as f64,
            ci95_halfwidth: wilson_halfwidth(misdetections, trials),
        }
    }
}

/// `N_s * T_sig / overhead`.
pub fn discovery_delay(n_slots: usize, t_sig: f64, overhead: f64) -> Result<f64> {
    if !(overhead > 0.0 && overhead <= 1.0) {
        return Err(Error::invalid("overhead", format!("must lie in (0, 1], got {overhead}")));
    }
    if !(t_sig > 0.0) {
        return Err(Error::invalid("t_sig", "must be > 0"));
    }
    Ok(n_slots as f64 * t_sig / overhead)
}

/// Discovery delay at the solved minimum signal duration; an infinite
/// duration (target unreachable) yields an infinite delay.
pub fn total_delay(n_slots: usize, min_t_sig: f64, overhead: f64) -> Result<f64> {
    discovery_delay(n_slots, min_t_sig, overhead)
}

/// Threshold equivalent to lengthening the signal from `t_sig_ref` to
/// `t_sig`: doubling the duration doubles the collected energy, i.e. lowers
/// tau by 10 log10(2) dB.
pub fn equivalent_threshold(tau_db: f64, t_sig: f64, t_sig_ref: f64) -> f64 {
    tau_db - 10.0 * (t_sig / t_sig_ref).log10()
}

/// Half-octave lattice `base * 2^(k/2)` up to and including `cap`.
pub fn tsig_grid(base: f64, cap: f64) -> Vec<f64> {
    let mut grid = Vec::new();
    let mut k = 0;
    loop {
        let t = base * 2f64.powf(k as f64 / 2.0);
        if t > cap * (1.0 + 1e-12) {
            break;
        }
        grid.push(t);
        k += 1;
    }
    grid
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayReport {
    pub scheme: String,
    pub n_slots: usize,
    pub t_sig_s: f64,
    pub t_per_s: f64,
    pub delay_s: f64,
    #[serde(default)]
    pub total_delay_s: Option<f64>,
}

impl DelayReport {
    pub fn new(scheme: &SchemeConfig, t_sig_s: f64, overhead: f64) -> Result<Self> {
        let n_slots = slots_required(scheme);
        Ok(DelayReport {
            scheme: scheme.label(),
            n_slots,
            t_sig_s,
            t_per_s: t_sig_s / overhead,
            delay_s: discovery_delay(n_slots, t_sig_s, overhead)?,
            total_delay_s: None,
        })
    }
}

/// One point of the PMD vs. signal-duration curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TsigPoint {
    pub t_sig_s: f64,
    pub tau_eff_db: f64,
    pub trials: u64,
    pub misdetections: u64,
    pub pmd: f64,
    pub ci95_halfwidth: f64,
}

/// Where trial UEs are placed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Placement {
    /// Uniform in the annulus of bin number `index`.
    Annulus { index: u32, bin: DistanceBin },
    /// Fixed BS-UE distance.
    Fixed(f64),
}

impl Placement {
    fn stream(&self) -> u32 {
        match self {
            Placement::Annulus { index, .. } => *index,
            Placement::Fixed(_) => FIXED_DISTANCE_STREAM,
        }
    }
}

struct Prepared {
    config: SchemeConfig,
    codebooks: SchemeCodebooks,
}

fn map_trials<T, F>(n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

fn count_below(decisions: &[f64], tau_db: f64) -> u64 {
    decisions.iter().filter(|&&d| !(d >= tau_db)).count() as u64
}

/// Monte Carlo driver over one parameter set.
#[derive(Debug, Clone)]
pub struct Simulator {
    params: SimParams,
    channel: ChannelParams,
}

impl Simulator {
    pub fn new(params: SimParams, channel: ChannelParams) -> Result<Self> {
        params.validate()?;
        channel.validate()?;
        Ok(Simulator { params, channel })
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    pub fn channel(&self) -> &ChannelParams {
        &self.channel
    }

    fn prepare(schemes: &[SchemeConfig]) -> Result<Vec<Prepared>> {
        schemes
            .iter()
            .map(|c| {
                Ok(Prepared {
                    config: c.clone(),
                    codebooks: SchemeCodebooks::build(c)?,
                })
            })
            .collect()
    }

    /// Decision SNR of each scheme on each trial, indexed `[scheme][trial]`.
    /// All schemes see the same link realizations.
    pub fn decision_snrs(
        &self,
        schemes: &[SchemeConfig],
        placement: Placement,
        trials: u64,
    ) -> Result<Vec<Vec<f64>>> {
        if let Placement::Fixed(d) = placement {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::InvalidDistance(d));
            }
        }
        let prepared = Self::prepare(schemes)?;
        let budget = self.params.budget_for(self.params.t_sig_s);
        let stream = placement.stream();
        let seed = self.params.master_seed;
        let per_trial: Vec<Result<Vec<f64>>> = map_trials(trials, |t| {
            let mut rng = substream(seed, stream, t);
            let distance = match placement {
                Placement::Annulus { bin, .. } => deploy_ue(&bin, &mut rng).distance(),
                Placement::Fixed(d) => d,
            };
            let link = realize_link(distance, &self.channel, &mut rng)?;
            prepared
                .iter()
                .map(|p| decision_snr_db(&p.config, &link, &p.codebooks, &budget))
                .collect()
        });
        let mut out = vec![Vec::with_capacity(trials as usize); schemes.len()];
        for row in per_trial {
            for (s, v) in row?.into_iter().enumerate() {
                out[s].push(v);
            }
        }
        Ok(out)
    }

    fn tau_at(&self, t_sig: f64) -> f64 {
        equivalent_threshold(self.params.snr_threshold_db, t_sig, self.params.reference_t_sig())
    }

    /// PMD per distance bin for several schemes on shared trials, indexed
    /// `[scheme][bin]`.
    pub fn pmd_sweep_many(&self, schemes: &[SchemeConfig]) -> Result<Vec<Vec<PmdEstimate>>> {
        let tau = self.tau_at(self.params.t_sig_s);
        let n = self.params.trials;
        let mut out = vec![Vec::new(); schemes.len()];
        for (index, bin) in self.params.bins().into_iter().enumerate() {
            let placement = Placement::Annulus {
                index: index as u32,
                bin,
            };
            let decisions = self.decision_snrs(schemes, placement, n)?;
            for (s, d) in decisions.iter().enumerate() {
                out[s].push(PmdEstimate::new(bin, n, count_below(d, tau)));
            }
        }
        Ok(out)
    }

    pub fn pmd_sweep(&self, scheme: &SchemeConfig) -> Result<Vec<PmdEstimate>> {
        Ok(self
            .pmd_sweep_many(std::slice::from_ref(scheme))?
            .pop()
            .expect("one scheme in, one curve out"))
    }

    /// PMD at a fixed distance for signal duration `t_sig`.
    pub fn pmd_at_distance(&self, scheme: &SchemeConfig, distance_m: f64, t_sig: f64) -> Result<PmdEstimate> {
        let n = self.params.trials;
        let d = self.decision_snrs(std::slice::from_ref(scheme), Placement::Fixed(distance_m), n)?;
        let bin = DistanceBin {
            inner_m: distance_m,
            outer_m: distance_m,
        };
        Ok(PmdEstimate::new(bin, n, count_below(&d[0], self.tau_at(t_sig))))
    }

    /// PMD at `distance_m` on the half-octave duration grid from `t_sig_s`
    /// to `cap_s`, indexed `[scheme][grid point]`.
    pub fn tsig_sweep(
        &self,
        schemes: &[SchemeConfig],
        distance_m: f64,
        cap_s: f64,
    ) -> Result<Vec<Vec<TsigPoint>>> {
        let n = self.params.trials;
        let decisions = self.decision_snrs(schemes, Placement::Fixed(distance_m), n)?;
        let grid = tsig_grid(self.params.t_sig_s, cap_s);
        Ok(decisions
            .iter()
            .map(|d| {
                grid.iter()
                    .map(|&t| {
                        let tau_eff_db = self.tau_at(t);
                        let k = count_below(d, tau_eff_db);
                        TsigPoint {
                            t_sig_s: t,
                            tau_eff_db,
                            trials: n,
                            misdetections: k,
                            pmd: k as f64 / n as f64,
                            ci95_halfwidth: wilson_halfwidth(k, n),
                        }
                    })
                    .collect()
            })
            .collect())
    }

    /// Smallest grid duration whose PMD at `distance_m` is below
    /// `target_pmd`; `+inf` if none up to `cap_s`.
    pub fn min_tsig_for_pmd(
        &self,
        scheme: &SchemeConfig,
        distance_m: f64,
        target_pmd: f64,
        cap_s: f64,
    ) -> Result<f64> {
        Ok(self.min_tsig_many(std::slice::from_ref(scheme), distance_m, target_pmd, cap_s)?[0])
    }

    /// [`Self::min_tsig_for_pmd`] for several schemes on shared trials.
    pub fn min_tsig_many(
        &self,
        schemes: &[SchemeConfig],
        distance_m: f64,
        target_pmd: f64,
        cap_s: f64,
    ) -> Result<Vec<f64>> {
        if !(target_pmd > 0.0 && target_pmd <= 1.0) {
            return Err(Error::invalid("target_pmd", format!("must lie in (0, 1], got {target_pmd}")));
        }
        let curves = self.tsig_sweep(schemes, distance_m, cap_s)?;
        Ok(curves
            .iter()
            .map(|c| {
                c.iter()
                    .find(|p| p.pmd < target_pmd)
                    .map_or(f64::INFINITY, |p| p.t_sig_s)
            })
            .collect())
    }
}
