//! Exhaustive and iterative initial-access procedures.
//!
//! Both procedures are driven by an explicit slot schedule. A *macroelement*
//! is the slot group for one BS direction: one downlink slot per UE receive
//! beam followed by one uplink feedback slot. The iterative scheme adds a
//! refinement phase in which each narrow beam of the chosen wide sector gets
//! a single downlink slot (the UE listens on its locked beam) and an uplink
//! slot.
//!
//! Beam-pair SNRs are evaluated once per link realization. Uplink feedback is
//! delivered whenever the preceding downlink detection succeeded, and the BS
//! always completes the full schedule before deciding.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arrays::{make_codebook, snr_db, ArrayGeometry, Codebook, GainTable, LinkBudget};
use crate::channel::LinkRealization;
use crate::rng::RandomStream;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    Exhaustive,
    Iterative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    pub bs_narrow_beams: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bs_wide_beams: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refine_beams: Option<usize>,
    pub ue_rx_beams: usize,
    pub bs_array: ArrayGeometry,
    /// Sub-array used for the wide first-phase beams (iterative only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bs_wide_array: Option<ArrayGeometry>,
    pub ue_array: ArrayGeometry,
}

impl SchemeConfig {
    /// 8x8 BS with 16 beams; UE 2x2 (4 beams) or 4x4 (8 beams).
    pub fn exhaustive(ue_rx_beams: usize) -> Self {
        SchemeConfig {
            kind: SchemeKind::Exhaustive,
            bs_narrow_beams: 16,
            bs_wide_beams: None,
            refine_beams: None,
            ue_rx_beams,
            bs_array: ArrayGeometry::square(8),
            bs_wide_array: None,
            ue_array: default_ue_array(ue_rx_beams),
        }
    }

    /// Four 2x2 wide beams, then four 8x8 refinement beams per sector.
    pub fn iterative(ue_rx_beams: usize) -> Self {
        SchemeConfig {
            kind: SchemeKind::Iterative,
            bs_narrow_beams: 16,
            bs_wide_beams: Some(4),
            refine_beams: Some(4),
            ue_rx_beams,
            bs_array: ArrayGeometry::square(8),
            bs_wide_array: Some(ArrayGeometry::square(2)),
            ue_array: default_ue_array(ue_rx_beams),
        }
    }

    /// The four reference configurations: Exh. 64x4, Exh. 64x16, It. 64x4,
    /// It. 64x16.
    pub fn reference_set() -> Vec<SchemeConfig> {
        vec![
            Self::exhaustive(4),
            Self::exhaustive(8),
            Self::iterative(4),
            Self::iterative(8),
        ]
    }

    /// Short label such as `exh-64x16`: BS elements by UE elements.
    pub fn label(&self) -> String {
        let prefix = match self.kind {
            SchemeKind::Exhaustive => "exh",
            SchemeKind::Iterative => "it",
        };
        format!(
            "{prefix}-{}x{}",
            self.bs_array.elements(),
            self.ue_array.elements()
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.bs_array.validate()?;
        self.ue_array.validate()?;
        if self.bs_narrow_beams == 0 {
            return Err(Error::invalid("bs_narrow_beams", "must be >= 1"));
        }
        if self.ue_rx_beams == 0 {
            return Err(Error::invalid("ue_rx_beams", "must be >= 1"));
        }
        if self.kind == SchemeKind::Iterative {
            let (wide, refine, array) = self.iterative_parts()?;
            array.validate()?;
            if wide == 0 || refine == 0 {
                return Err(Error::invalid("bs_wide_beams", "wide and refine counts must be >= 1"));
            }
            if wide * refine != self.bs_narrow_beams {
                return Err(Error::invalid(
                    "bs_narrow_beams",
                    format!(
                        "iterative search needs bs_narrow_beams = bs_wide_beams * refine_beams, \
                         got {} != {wide} * {refine}",
                        self.bs_narrow_beams
                    ),
                ));
            }
        }
        Ok(())
    }

    fn iterative_parts(&self) -> Result<(usize, usize, ArrayGeometry)> {
        match (self.bs_wide_beams, self.refine_beams, self.bs_wide_array) {
            (Some(w), Some(r), Some(a)) => Ok((w, r, a)),
            _ => Err(Error::invalid(
                "scheme",
                "iterative search requires bs_wide_beams, refine_beams and bs_wide_array",
            )),
        }
    }
}

fn default_ue_array(ue_rx_beams: usize) -> ArrayGeometry {
    if ue_rx_beams <= 4 {
        ArrayGeometry::square(2)
    } else {
        ArrayGeometry::square(4)
    }
}

/// Closed-form slot count `N_s` of one full procedure.
pub fn slots_required(config: &SchemeConfig) -> usize {
    match config.kind {
        SchemeKind::Exhaustive => config.bs_narrow_beams * (config.ue_rx_beams + 1),
        SchemeKind::Iterative => {
            let wide = config.bs_wide_beams.unwrap_or(0);
            let refine = config.refine_beams.unwrap_or(0);
            wide * (config.ue_rx_beams + 1) + refine * 2
        }
    }
}

/// Which BS beam a downlink or uplink slot uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BsBeam {
    /// Narrow beam of the full array (exhaustive sweep).
    Narrow(usize),
    /// Wide beam of the first iterative phase.
    Wide(usize),
    /// `q`-th narrow beam inside the sector chosen after the first phase.
    Refine(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UeBeam {
    Sweep(usize),
    /// The beam the UE selected in the first phase.
    Locked,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Downlink { bs: BsBeam, ue: UeBeam },
    Uplink { bs: BsBeam },
}

/// The full slot schedule of a procedure, in transmission order.
pub fn schedule(config: &SchemeConfig) -> Vec<Slot> {
    let mut slots = Vec::with_capacity(slots_required(config));
    let macroelement = |slots: &mut Vec<Slot>, bs: BsBeam| {
        for m in 0..config.ue_rx_beams {
            slots.push(Slot::Downlink {
                bs,
                ue: UeBeam::Sweep(m),
            });
        }
        slots.push(Slot::Uplink { bs });
    };
    match config.kind {
        SchemeKind::Exhaustive => {
            for k in 0..config.bs_narrow_beams {
                macroelement(&mut slots, BsBeam::Narrow(k));
            }
        }
        SchemeKind::Iterative => {
            for k in 0..config.bs_wide_beams.unwrap_or(0) {
                macroelement(&mut slots, BsBeam::Wide(k));
            }
            for q in 0..config.refine_beams.unwrap_or(0) {
                let bs = BsBeam::Refine(q);
                slots.push(Slot::Downlink {
                    bs,
                    ue: UeBeam::Locked,
                });
                slots.push(Slot::Uplink { bs });
            }
        }
    }
    slots
}

/// Narrow beams nested in wide sector `sector`, in angular order.
///
/// Wide sector `k` spans `[2 pi k / n_wide - pi / n_wide, 2 pi k / n_wide + pi / n_wide)`
/// and owns the narrow beams whose boresights fall inside it.
pub fn sector_members(n_narrow: usize, n_wide: usize, sector: usize) -> Vec<usize> {
    let owner = |j: usize| ((2 * j * n_wide + n_narrow) / (2 * n_narrow)) % n_wide;
    let start = TAU * sector as f64 / n_wide as f64 - TAU / (2.0 * n_wide as f64);
    let mut members: Vec<usize> = (0..n_narrow).filter(|&j| owner(j) == sector).collect();
    members.sort_by(|&a, &b| {
        let oa = (TAU * a as f64 / n_narrow as f64 - start).rem_euclid(TAU);
        let ob = (TAU * b as f64 / n_narrow as f64 - start).rem_euclid(TAU);
        oa.total_cmp(&ob)
    });
    members
}

/// Temporary identifier a UE attaches to its feedback.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rnti(pub u32);

pub const DEFAULT_RNTI_SPACE: u32 = 1 << 16;

/// Uniform draw from `[0, space_size)`; a zero-sized space is treated as one.
pub fn assign_rnti(space_size: u32, rng: &mut RandomStream) -> Rnti {
    Rnti(rng.random_range(0..space_size.max(1)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BsTableEntry {
    pub rnti: Rnti,
    pub sector_index: usize,
    pub snr_db: f64,
}

/// Feedback collected by the BS during one sweep.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BsTable {
    entries: Vec<BsTableEntry>,
}

impl BsTable {
    pub fn record(&mut self, entry: BsTableEntry) {
        self.entries.push(entry);
    }

    pub fn entries(&self) -> &[BsTableEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Highest-SNR entry reported by `rnti`; ties go to the earliest entry.
    pub fn best(&self, rnti: Rnti) -> Option<&BsTableEntry> {
        self.entries
            .iter()
            .filter(|e| e.rnti == rnti)
            .fold(None, |best: Option<&BsTableEntry>, e| match best {
                Some(b) if b.snr_db >= e.snr_db => Some(b),
                _ => Some(e),
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanOutcome {
    pub detected: bool,
    pub best_tx_beam: Option<usize>,
    pub best_rx_beam: Option<usize>,
    pub best_snr_db: Option<f64>,
    pub slots_used: usize,
    /// Wide sector refined in the second phase (iterative only).
    pub macro_sector: Option<usize>,
}

impl ScanOutcome {
    fn missed(slots_used: usize) -> Self {
        ScanOutcome {
            detected: false,
            best_tx_beam: None,
            best_rx_beam: None,
            best_snr_db: None,
            slots_used,
            macro_sector: None,
        }
    }
}

/// Codebooks a scheme needs, derived from its configuration.
#[derive(Debug, Clone)]
pub struct SchemeCodebooks {
    pub bs_narrow: Codebook,
    pub bs_wide: Option<Codebook>,
    pub ue: Codebook,
}

impl SchemeCodebooks {
    pub fn build(config: &SchemeConfig) -> Result<Self> {
        config.validate()?;
        let bs_wide = match config.kind {
            SchemeKind::Exhaustive => None,
            SchemeKind::Iterative => {
                let (wide, _, array) = config.iterative_parts()?;
                Some(make_codebook(array, wide)?)
            }
        };
        Ok(SchemeCodebooks {
            bs_narrow: make_codebook(config.bs_array, config.bs_narrow_beams)?,
            bs_wide,
            ue: make_codebook(config.ue_array, config.ue_rx_beams)?,
        })
    }
}

fn check_size(cb: &Codebook, expected: usize, geometry: &ArrayGeometry, what: &str) -> Result<()> {
    if cb.len() != expected || cb.geometry() != geometry {
        return Err(Error::CodebookMismatch(format!(
            "{what} codebook has {} beams on a {}x{} array, scheme expects {expected} on {}x{}",
            cb.len(),
            cb.geometry().rows,
            cb.geometry().cols,
            geometry.rows,
            geometry.cols,
        )));
    }
    Ok(())
}

/// Best receive beam and its SNR for one BS direction.
#[derive(Debug, Clone, Copy, PartialEq)]
struct SectorReport {
    rx: usize,
    snr_db: f64,
}

fn argmax(values: impl Iterator<Item = f64>) -> Option<(usize, f64)> {
    values
        .enumerate()
        .fold(None, |best, (i, v)| match best {
            Some((_, b)) if b >= v => best,
            _ => Some((i, v)),
        })
}

/// Per-slot SNR lookup for the exhaustive sweep.
struct ExhaustiveMeasurement {
    snr: Vec<f64>,
    ue_beams: usize,
}

impl ExhaustiveMeasurement {
    fn new(link: &LinkRealization, bs: &Codebook, ue: &Codebook, budget: &LinkBudget) -> Result<Self> {
        let table = GainTable::full(link, bs, ue)?;
        let mut snr = Vec::with_capacity(bs.len() * ue.len());
        for i in 0..bs.len() {
            for m in 0..ue.len() {
                snr.push(snr_db(table.gain_db(i, m), link.pathloss_db, budget));
            }
        }
        Ok(ExhaustiveMeasurement {
            snr,
            ue_beams: ue.len(),
        })
    }

    fn snr_db(&self, tx: usize, rx: usize) -> f64 {
        self.snr[tx * self.ue_beams + rx]
    }
}

/// Runs the exhaustive sweep slot by slot.
pub fn run_exhaustive(
    config: &SchemeConfig,
    link: &LinkRealization,
    bs_codebook: &Codebook,
    ue_codebook: &Codebook,
    budget: &LinkBudget,
    rnti: Rnti,
) -> Result<ScanOutcome> {
    if config.kind != SchemeKind::Exhaustive {
        return Err(Error::invalid("kind", "run_exhaustive needs an exhaustive scheme"));
    }
    config.validate()?;
    check_size(bs_codebook, config.bs_narrow_beams, &config.bs_array, "BS")?;
    check_size(ue_codebook, config.ue_rx_beams, &config.ue_array, "UE")?;
    let total = slots_required(config);
    if link.is_outage() {
        return Ok(ScanOutcome::missed(total));
    }
    let meas = ExhaustiveMeasurement::new(link, bs_codebook, ue_codebook, budget)?;
    let tau = budget.snr_threshold_db;

    let mut table = BsTable::default();
    let mut ue_best: Vec<Option<SectorReport>> = vec![None; config.bs_narrow_beams];
    let mut heard: Vec<f64> = Vec::with_capacity(config.ue_rx_beams);
    let mut slots_used = 0;
    for slot in schedule(config) {
        slots_used += 1;
        match slot {
            Slot::Downlink {
                bs: BsBeam::Narrow(k),
                ue: UeBeam::Sweep(m),
            } => heard.push(meas.snr_db(k, m)),
            Slot::Uplink {
                bs: BsBeam::Narrow(k),
            } => {
                // decision phase: feed back only if the best beam clears tau
                if let Some((rx, snr)) = argmax(heard.drain(..)) {
                    if snr >= tau {
                        ue_best[k] = Some(SectorReport { rx, snr_db: snr });
                        table.record(BsTableEntry {
                            rnti,
                            sector_index: k,
                            snr_db: snr,
                        });
                    }
                }
            }
            other => unreachable!("exhaustive schedule produced {other:?}"),
        }
    }
    debug_assert_eq!(slots_used, total);

    Ok(match table.best(rnti) {
        Some(entry) => {
            let rx = ue_best[entry.sector_index].map(|r| r.rx);
            ScanOutcome {
                detected: true,
                best_tx_beam: Some(entry.sector_index),
                best_rx_beam: rx,
                best_snr_db: Some(entry.snr_db),
                slots_used,
                macro_sector: None,
            }
        }
        None => ScanOutcome::missed(slots_used),
    })
}

/// Runs the two-phase iterative search slot by slot.
pub fn run_iterative(
    config: &SchemeConfig,
    link: &LinkRealization,
    bs_wide_codebook: &Codebook,
    bs_narrow_codebook: &Codebook,
    ue_codebook: &Codebook,
    budget: &LinkBudget,
    rnti: Rnti,
) -> Result<ScanOutcome> {
    if config.kind != SchemeKind::Iterative {
        return Err(Error::invalid("kind", "run_iterative needs an iterative scheme"));
    }
    config.validate()?;
    let (n_wide, _, wide_array) = config.iterative_parts()?;
    check_size(bs_wide_codebook, n_wide, &wide_array, "BS wide")?;
    check_size(bs_narrow_codebook, config.bs_narrow_beams, &config.bs_array, "BS narrow")?;
    check_size(ue_codebook, config.ue_rx_beams, &config.ue_array, "UE")?;
    let total = slots_required(config);
    if link.is_outage() {
        return Ok(ScanOutcome::missed(total));
    }
    let wide = GainTable::full(link, bs_wide_codebook, ue_codebook)?;
    let tau = budget.snr_threshold_db;

    let mut phase1 = BsTable::default();
    let mut ue_best: Vec<Option<SectorReport>> = vec![None; n_wide];
    let mut heard: Vec<f64> = Vec::with_capacity(config.ue_rx_beams);
    // (sector, locked rx, narrow beams of the sector, their SNRs)
    let mut refine: Option<(usize, usize, Vec<usize>, Vec<f64>)> = None;
    let mut phase2 = BsTable::default();
    let mut slots_used = 0;

    for slot in schedule(config) {
        slots_used += 1;
        match slot {
            Slot::Downlink {
                bs: BsBeam::Wide(k),
                ue: UeBeam::Sweep(m),
            } => heard.push(snr_db(wide.gain_db(k, m), link.pathloss_db, budget)),
            Slot::Uplink {
                bs: BsBeam::Wide(k),
            } => {
                if let Some((rx, snr)) = argmax(heard.drain(..)) {
                    if snr >= tau {
                        ue_best[k] = Some(SectorReport { rx, snr_db: snr });
                        phase1.record(BsTableEntry {
                            rnti,
                            sector_index: k,
                            snr_db: snr,
                        });
                    }
                }
            }
            Slot::Downlink {
                bs: BsBeam::Refine(q),
                ue: UeBeam::Locked,
            } => {
                if refine.is_none() {
                    let Some(entry) = phase1.best(rnti) else {
                        // nothing to refine: the remaining slots stay idle
                        continue;
                    };
                    let sector = entry.sector_index;
                    let rx = ue_best[sector].expect("recorded sector has a UE report").rx;
                    let members = sector_members(config.bs_narrow_beams, n_wide, sector);
                    let narrow =
                        GainTable::select(link, bs_narrow_codebook, &members, ue_codebook, &[rx])?;
                    let snrs = (0..members.len())
                        .map(|p| snr_db(narrow.gain_db(p, 0), link.pathloss_db, budget))
                        .collect();
                    refine = Some((sector, rx, members, snrs));
                }
                let (_, _, _, snrs) = refine.as_ref().expect("refinement initialised");
                heard.push(snrs[q]);
            }
            Slot::Uplink {
                bs: BsBeam::Refine(q),
            } => {
                let Some((_, _, members, _)) = refine.as_ref() else {
                    continue;
                };
                if let Some(snr) = heard.pop() {
                    if snr >= tau {
                        phase2.record(BsTableEntry {
                            rnti,
                            sector_index: members[q],
                            snr_db: snr,
                        });
                    }
                }
            }
            other => unreachable!("iterative schedule produced {other:?}"),
        }
    }
    debug_assert_eq!(slots_used, total);

    let Some((sector, rx, _, _)) = refine else {
        return Ok(ScanOutcome::missed(slots_used));
    };
    Ok(match phase2.best(rnti) {
        Some(entry) => ScanOutcome {
            detected: true,
            best_tx_beam: Some(entry.sector_index),
            best_rx_beam: Some(rx),
            best_snr_db: Some(entry.snr_db),
            slots_used,
            macro_sector: Some(sector),
        },
        None => ScanOutcome::missed(slots_used),
    })
}

/// Runs whichever procedure `config` names.
pub fn run_scheme(
    config: &SchemeConfig,
    link: &LinkRealization,
    codebooks: &SchemeCodebooks,
    budget: &LinkBudget,
    rnti: Rnti,
) -> Result<ScanOutcome> {
    match config.kind {
        SchemeKind::Exhaustive => {
            run_exhaustive(config, link, &codebooks.bs_narrow, &codebooks.ue, budget, rnti)
        }
        SchemeKind::Iterative => {
            let wide = codebooks
                .bs_wide
                .as_ref()
                .ok_or_else(|| Error::CodebookMismatch("missing wide codebook".into()))?;
            run_iterative(config, link, wide, &codebooks.bs_narrow, &codebooks.ue, budget, rnti)
        }
    }
}

/// The largest threshold at which the procedure still detects the UE, i.e.
/// `run_scheme(..).detected` iff `tau <= decision_snr_db(..)`.
///
/// Exhaustive: the best SNR over all beam pairs. Iterative: the smaller of
/// the best first-phase SNR and the best refinement SNR; the chosen sector
/// and locked receive beam are argmaxes and do not depend on the threshold.
/// Outage links return minus infinity.
pub fn decision_snr_db(
    config: &SchemeConfig,
    link: &LinkRealization,
    codebooks: &SchemeCodebooks,
    budget: &LinkBudget,
) -> Result<f64> {
    if link.is_outage() {
        return Ok(f64::NEG_INFINITY);
    }
    let pl = link.pathloss_db;
    match config.kind {
        SchemeKind::Exhaustive => {
            let table = GainTable::full(link, &codebooks.bs_narrow, &codebooks.ue)?;
            Ok(snr_db(table.max_gain_db(), pl, budget))
        }
        SchemeKind::Iterative => {
            let wide_cb = codebooks
                .bs_wide
                .as_ref()
                .ok_or_else(|| Error::CodebookMismatch("missing wide codebook".into()))?;
            let wide = GainTable::full(link, wide_cb, &codebooks.ue)?;
            let sector_best = (0..wide_cb.len()).map(|k| {
                argmax((0..codebooks.ue.len()).map(|m| wide.gain_db(k, m)))
                    .expect("non-empty UE codebook")
            });
            let (sector, (rx, phase1_gain)) = sector_best
                .enumerate()
                .fold(None, |best: Option<(usize, (usize, f64))>, (k, r)| match best {
                    Some((_, (_, g))) if g >= r.1 => best,
                    _ => Some((k, r)),
                })
                .expect("non-empty wide codebook");
            let members = sector_members(codebooks.bs_narrow.len(), wide_cb.len(), sector);
            let narrow = GainTable::select(link, &codebooks.bs_narrow, &members, &codebooks.ue, &[rx])?;
            let phase2_gain = narrow.max_gain_db();
            Ok(snr_db(phase1_gain.min(phase2_gain), pl, budget))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{realize_link, ChannelParams, Direction};
    use crate::rng::substream;
    use num_complex::Complex64;
    use rand::SeedableRng;

    fn budget(tau: f64) -> LinkBudget {
        LinkBudget {
            tx_power_dbm: 30.0,
            bandwidth_hz: 1e9,
            noise_figure_db: 5.0,
            snr_threshold_db: tau,
        }
    }

    fn single_path(tx_az: f64, rx_az: f64, pathloss_db: f64) -> LinkRealization {
        LinkRealization::single_path(
            50.0,
            pathloss_db,
            Direction::horizontal(tx_az),
            Direction::horizontal(rx_az),
            Complex64::new(1.0, 0.0),
        )
    }

    #[test]
    fn reference_slot_counts() {
        let counts: Vec<usize> = SchemeConfig::reference_set().iter().map(slots_required).collect();
        assert_eq!(counts, vec![80, 144, 28, 44]);
    }

    #[test]
    fn schedule_length_matches_closed_form() {
        for cfg in SchemeConfig::reference_set() {
            assert_eq!(schedule(&cfg).len(), slots_required(&cfg));
        }
        let mut odd = SchemeConfig::iterative(3);
        odd.bs_narrow_beams = 12;
        odd.refine_beams = Some(3);
        assert_eq!(schedule(&odd).len(), 4 * 4 + 3 * 2);
    }

    #[test]
    fn labels() {
        let labels: Vec<String> = SchemeConfig::reference_set().iter().map(|c| c.label()).collect();
        assert_eq!(labels, ["exh-64x4", "exh-64x16", "it-64x4", "it-64x16"]);
    }

    #[test]
    fn iterative_needs_nested_beam_counts() {
        let mut cfg = SchemeConfig::iterative(4);
        cfg.bs_narrow_beams = 12;
        assert!(cfg.validate().is_err());
        let mut cfg = SchemeConfig::iterative(4);
        cfg.bs_wide_array = None;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn sectors_partition_narrow_beams() {
        assert_eq!(sector_members(16, 4, 0), vec![14, 15, 0, 1]);
        assert_eq!(sector_members(16, 4, 1), vec![2, 3, 4, 5]);
        assert_eq!(sector_members(16, 4, 3), vec![10, 11, 12, 13]);
        for (n, w) in [(16, 4), (12, 4), (8, 2), (9, 3)] {
            let mut all: Vec<usize> = (0..w).flat_map(|k| sector_members(n, w, k)).collect();
            all.sort_unstable();
            assert_eq!(all, (0..n).collect::<Vec<_>>());
            for k in 0..w {
                let centre = TAU * k as f64 / w as f64;
                for j in sector_members(n, w, k) {
                    let off = (TAU * j as f64 / n as f64 - centre + TAU / 2.0).rem_euclid(TAU)
                        - TAU / 2.0;
                    assert!(off >= -TAU / (2.0 * w as f64) - 1e-12);
                    assert!(off < TAU / (2.0 * w as f64));
                }
            }
        }
    }

    #[test]
    fn rnti_draws() {
        let mut rng = RandomStream::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(assign_rnti(1, &mut rng), Rnti(0));
        }
        for _ in 0..1000 {
            assert!(assign_rnti(DEFAULT_RNTI_SPACE, &mut rng).0 <= 65535);
        }
        let a = assign_rnti(DEFAULT_RNTI_SPACE, &mut substream(5, 1, 2));
        let b = assign_rnti(DEFAULT_RNTI_SPACE, &mut substream(5, 1, 2));
        assert_eq!(a, b);
    }

    #[test]
    fn bs_table_keeps_best_entry_per_rnti() {
        let mut t = BsTable::default();
        for (rnti, sector, snr) in [(1, 0, 3.0), (2, 1, 9.0), (1, 5, 7.5), (1, 6, 7.5)] {
            t.record(BsTableEntry {
                rnti: Rnti(rnti),
                sector_index: sector,
                snr_db: snr,
            });
        }
        assert_eq!(t.best(Rnti(1)).unwrap().sector_index, 5);
        assert_eq!(t.best(Rnti(2)).unwrap().sector_index, 1);
        assert!(t.best(Rnti(3)).is_none());
    }

    #[test]
    fn exhaustive_outage() {
        let cfg = SchemeConfig::exhaustive(4);
        let cbs = SchemeCodebooks::build(&cfg).unwrap();
        let out = run_scheme(&cfg, &LinkRealization::outage(170.0), &cbs, &budget(-5.0), Rnti(0)).unwrap();
        assert!(!out.detected);
        assert_eq!(out.slots_used, 80);
        assert_eq!(out.best_tx_beam, None);
    }

    #[test]
    fn exhaustive_finds_boresight_pair() {
        let cfg = SchemeConfig::exhaustive(8);
        let cbs = SchemeCodebooks::build(&cfg).unwrap();
        let link = single_path(
            cbs.bs_narrow.beam(3).boresight_azimuth,
            cbs.ue.beam(4).boresight_azimuth,
            95.38,
        );
        let b = budget(-5.0);
        let out = run_scheme(&cfg, &link, &cbs, &b, Rnti(7)).unwrap();
        assert!(out.detected);
        assert_eq!(out.best_tx_beam, Some(3));
        assert_eq!(out.best_rx_beam, Some(4));
        assert_eq!(out.slots_used, 144);
        // brute-force oracle over all pairs through the dense channel matrix
        let mut best = (0, 0, f64::NEG_INFINITY);
        for i in 0..16 {
            for j in 0..8 {
                let g = crate::arrays::bf_gain_db(
                    cbs.bs_narrow.beam(i),
                    cbs.ue.beam(j),
                    &link,
                    cbs.bs_narrow.geometry(),
                    cbs.ue.geometry(),
                )
                .unwrap();
                if g > best.2 {
                    best = (i, j, g);
                }
            }
        }
        assert_eq!((best.0, best.1), (3, 4));
        let snr = out.best_snr_db.unwrap();
        assert!((snr - snr_db(best.2, 95.38, &b)).abs() < 1e-9);
        assert!((snr - 43.72).abs() < 0.1);
    }

    #[test]
    fn exhaustive_below_threshold_misses() {
        let cfg = SchemeConfig::exhaustive(4);
        let cbs = SchemeCodebooks::build(&cfg).unwrap();
        let link = single_path(0.3, 1.0, 200.0);
        let out = run_scheme(&cfg, &link, &cbs, &budget(-5.0), Rnti(0)).unwrap();
        assert_eq!(out, ScanOutcome::missed(80));
    }

    #[test]
    fn iterative_outage() {
        let cfg = SchemeConfig::iterative(4);
        let cbs = SchemeCodebooks::build(&cfg).unwrap();
        let out = run_scheme(&cfg, &LinkRealization::outage(170.0), &cbs, &budget(-5.0), Rnti(0)).unwrap();
        assert!(!out.detected);
        assert_eq!(out.slots_used, 28);
    }

    #[test]
    fn iterative_refines_the_right_sector() {
        for ue_beams in [4, 8] {
            let cfg = SchemeConfig::iterative(ue_beams);
            let cbs = SchemeCodebooks::build(&cfg).unwrap();
            let b = budget(-5.0);
            // inside sectors 1 and 3; near the array axes a 2x2 wide beam
            // cannot tell a direction from its mirror image
            for narrow in [3, 4, 11, 12] {
                for rx in 0..ue_beams {
                    let link = single_path(
                        cbs.bs_narrow.beam(narrow).boresight_azimuth,
                        cbs.ue.beam(rx).boresight_azimuth,
                        90.0,
                    );
                    let out = run_scheme(&cfg, &link, &cbs, &b, Rnti(1)).unwrap();
                    assert!(out.detected);
                    let sector = out.macro_sector.unwrap();
                    assert!(sector_members(16, 4, sector).contains(&narrow), "beam {narrow}");
                    let table = GainTable::full(&link, &cbs.bs_narrow, &cbs.ue).unwrap();
                    let mut best = (0, 0, f64::NEG_INFINITY);
                    for i in 0..16 {
                        for j in 0..ue_beams {
                            if table.gain_db(i, j) > best.2 {
                                best = (i, j, table.gain_db(i, j));
                            }
                        }
                    }
                    assert_eq!(out.best_tx_beam, Some(best.0));
                    assert_eq!(out.best_rx_beam, Some(best.1));
                    assert_eq!(out.slots_used, slots_required(&cfg));
                }
            }
        }
    }

    #[test]
    fn iterative_refinement_stays_inside_the_chosen_sector() {
        let cfg = SchemeConfig::iterative(4);
        let cbs = SchemeCodebooks::build(&cfg).unwrap();
        let b = budget(-60.0);
        for narrow in 0..16 {
            let link = single_path(cbs.bs_narrow.beam(narrow).boresight_azimuth, 0.0, 90.0);
            let out = run_scheme(&cfg, &link, &cbs, &b, Rnti(1)).unwrap();
            let members = sector_members(16, 4, out.macro_sector.unwrap());
            assert!(members.contains(&out.best_tx_beam.unwrap()));
        }
    }

    #[test]
    fn iterative_misses_when_wide_beams_fall_short() {
        let cfg = SchemeConfig::iterative(4);
        let ecfg = SchemeConfig::exhaustive(4);
        let cbs = SchemeCodebooks::build(&cfg).unwrap();
        let ecbs = SchemeCodebooks::build(&ecfg).unwrap();
        let link = single_path(
            cbs.bs_narrow.beam(5).boresight_azimuth,
            cbs.ue.beam(1).boresight_azimuth,
            130.0,
        );
        // full-array gain 10log10(256) = 24.1 dB vs 12 dB for 2x2 x 2x2
        let b = budget(-5.0);
        let exh = decision_snr_db(&ecfg, &link, &ecbs, &b).unwrap();
        let it = decision_snr_db(&cfg, &link, &cbs, &b).unwrap();
        assert!(exh >= -5.0 && it < -5.0, "exh {exh} it {it}");
        assert!(run_scheme(&ecfg, &link, &ecbs, &b, Rnti(0)).unwrap().detected);
        assert!(!run_scheme(&cfg, &link, &cbs, &b, Rnti(0)).unwrap().detected);
    }

    #[test]
    fn codebook_mismatch_is_rejected() {
        let cfg = SchemeConfig::exhaustive(4);
        let other = SchemeCodebooks::build(&SchemeConfig::exhaustive(8)).unwrap();
        let link = single_path(0.0, 0.0, 90.0);
        assert!(matches!(
            run_exhaustive(&cfg, &link, &other.bs_narrow, &other.ue, &budget(-5.0), Rnti(0)),
            Err(Error::CodebookMismatch(_))
        ));
    }

    #[test]
    fn decision_snr_agrees_with_protocol_runs() {
        let params = ChannelParams::default();
        let schemes: Vec<(SchemeConfig, SchemeCodebooks)> = SchemeConfig::reference_set()
            .into_iter()
            .map(|c| {
                let cb = SchemeCodebooks::build(&c).unwrap();
                (c, cb)
            })
            .collect();
        for trial in 0..300 {
            let mut rng = substream(11, 0, trial);
            let d = 20.0 + (trial % 17) as f64 * 10.0;
            let link = realize_link(d, &params, &mut rng).unwrap();
            for (cfg, cbs) in &schemes {
                let dec = decision_snr_db(cfg, &link, cbs, &budget(0.0)).unwrap();
                for tau in [-20.0, -5.0, 0.0, 10.0] {
                    let out = run_scheme(cfg, &link, cbs, &budget(tau), Rnti(3)).unwrap();
                    assert_eq!(out.detected, dec >= tau, "{} trial {trial} tau {tau}", cfg.label());
                    assert_eq!(out.detected, out.best_snr_db.is_some());
                    assert_eq!(out.detected, out.best_tx_beam.is_some());
                    assert_eq!(out.detected, out.best_rx_beam.is_some());
                }
            }
        }
    }
}
