//! Uniform planar arrays, direction codebooks and beamforming gain.
//!
//! Arrays lie in the horizontal plane so that a single panel can steer over
//! the full 360 degree azimuth circle. Element `(r, c)` sits at
//! `(r, c) * spacing` wavelengths in the array frame, which is rotated by
//! `orientation_rad` with respect to the global azimuth reference. The
//! response to a plane wave from azimuth `az`, elevation `el` is
//!
//! ```text
//! a[r * cols + c] = exp(j 2 pi s (r cos(el) cos(az - psi) + c cos(el) sin(az - psi))) / sqrt(N)
//! ```
//!
//! At half-wavelength spacing the two endfire directions of an axis alias
//! onto each other; the default orientation keeps those alias pairs off the
//! 4/8/16-beam codebook boresights.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{Direction, LinkRealization};
use crate::{Error, Result};

fn default_spacing() -> f64 {
    0.5
}

fn default_orientation() -> f64 {
    PI / 16.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayGeometry {
    pub rows: usize,
    pub cols: usize,
    #[serde(default = "default_spacing")]
    pub spacing_wavelengths: f64,
    #[serde(default = "default_orientation")]
    pub orientation_rad: f64,
}

impl ArrayGeometry {
    pub fn new(rows: usize, cols: usize) -> Self {
        ArrayGeometry {
            rows,
            cols,
            spacing_wavelengths: default_spacing(),
            orientation_rad: default_orientation(),
        }
    }

    pub fn square(side: usize) -> Self {
        Self::new(side, side)
    }

    pub fn elements(&self) -> usize {
        self.rows * self.cols
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::invalid("array", "rows and cols must be >= 1"));
        }
        if !(self.spacing_wavelengths.is_finite() && self.spacing_wavelengths > 0.0) {
            return Err(Error::invalid("spacing_wavelengths", "must be > 0"));
        }
        if !self.orientation_rad.is_finite() {
            return Err(Error::invalid("orientation_rad", "must be finite"));
        }
        Ok(())
    }

    /// Direction cosines of `dir` along the array row and column axes.
    fn cosines(&self, dir: Direction) -> (f64, f64) {
        let (s, c) = (dir.azimuth - self.orientation_rad).sin_cos();
        let ce = dir.elevation.cos();
        (ce * c, ce * s)
    }
}

/// Unit-norm array response towards `(azimuth, elevation)`.
pub fn steering_vector(geometry: &ArrayGeometry, azimuth: f64, elevation: f64) -> Vec<Complex64> {
    let (ux, uy) = geometry.cosines(Direction { azimuth, elevation });
    let k = TAU * geometry.spacing_wavelengths;
    let norm = 1.0 / (geometry.elements() as f64).sqrt();
    let mut v = Vec::with_capacity(geometry.elements());
    for r in 0..geometry.rows {
        for c in 0..geometry.cols {
            let phase = k * (r as f64 * ux + c as f64 * uy);
            v.push(Complex64::from_polar(norm, phase));
        }
    }
    v
}

/// `(1/n) * sum_{i<n} exp(j i step)`
fn axis_sum(n: usize, step: f64) -> Complex64 {
    let z = Complex64::from_polar(1.0, step);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut p = Complex64::new(1.0, 0.0);
    for _ in 0..n {
        acc += p;
        p *= z;
    }
    acc / n as f64
}

/// `a(from)^H a(to)` evaluated through the row/column factorisation of the
/// planar response.
pub fn response_overlap(geometry: &ArrayGeometry, from: Direction, to: Direction) -> Complex64 {
    let (fx, fy) = geometry.cosines(from);
    let (tx, ty) = geometry.cosines(to);
    let k = TAU * geometry.spacing_wavelengths;
    axis_sum(geometry.rows, k * (tx - fx)) * axis_sum(geometry.cols, k * (ty - fy))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamWeights {
    pub weights: Vec<Complex64>,
    pub boresight_azimuth: f64,
}

impl BeamWeights {
    pub fn norm(&self) -> f64 {
        self.weights.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Equally spaced steering beams covering the azimuth circle. Beam `i`
/// points at `2 pi i / n`, elevation zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    geometry: ArrayGeometry,
    beams: Vec<BeamWeights>,
}

impl Codebook {
    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geometry
    }

    pub fn beams(&self) -> &[BeamWeights] {
        &self.beams
    }

    pub fn len(&self) -> usize {
        self.beams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beams.is_empty()
    }

    pub fn beam(&self, i: usize) -> &BeamWeights {
        &self.beams[i]
    }

    /// `w_i^H a(dir)` for every beam `i`.
    pub fn beam_responses(&self, dir: Direction) -> impl Iterator<Item = Complex64> + '_ {
        self.beams.iter().map(move |b| {
            response_overlap(&self.geometry, Direction::horizontal(b.boresight_azimuth), dir)
        })
    }
}

pub fn make_codebook(geometry: ArrayGeometry, n_beams: usize) -> Result<Codebook> {
    geometry.validate()?;
    if n_beams == 0 {
        return Err(Error::invalid("n_beams", "codebook needs at least one beam"));
    }
    let beams = (0..n_beams)
        .map(|i| {
            let boresight_azimuth = TAU * i as f64 / n_beams as f64;
            BeamWeights {
                weights: steering_vector(&geometry, boresight_azimuth, 0.0),
                boresight_azimuth,
            }
        })
        .collect();
    Ok(Codebook { geometry, beams })
}

/// Narrowband channel matrix `H` (rx-major, `N_rx x N_tx`) scaled so that
/// `E ||H||_F^2 = N_tx N_rx` when the subpath powers sum to one.
pub fn channel_matrix(
    link: &LinkRealization,
    tx_geom: &ArrayGeometry,
    rx_geom: &ArrayGeometry,
) -> Result<Vec<Complex64>> {
    if link.is_outage() {
        return Err(Error::OutageLink);
    }
    let (nt, nr) = (tx_geom.elements(), rx_geom.elements());
    let scale = ((nt * nr) as f64).sqrt();
    let mut h = vec![Complex64::new(0.0, 0.0); nt * nr];
    for sp in link.subpaths() {
        let at = steering_vector(tx_geom, sp.departure.azimuth, sp.departure.elevation);
        let ar = steering_vector(rx_geom, sp.arrival.azimuth, sp.arrival.elevation);
        let g = sp.gain * scale;
        for (r, a_r) in ar.iter().enumerate() {
            let ga = g * a_r;
            for (t, a_t) in at.iter().enumerate() {
                h[r * nt + t] += ga * a_t.conj();
            }
        }
    }
    Ok(h)
}

/// Beamforming gain `20 log10 |rx^H H tx|` for one beam pair.
pub fn bf_gain_db(
    tx: &BeamWeights,
    rx: &BeamWeights,
    link: &LinkRealization,
    tx_geom: &ArrayGeometry,
    rx_geom: &ArrayGeometry,
) -> Result<f64> {
    let (nt, nr) = (tx_geom.elements(), rx_geom.elements());
    if tx.weights.len() != nt || rx.weights.len() != nr {
        return Err(Error::CodebookMismatch(format!(
            "weights of length {}/{} for arrays of {nt}/{nr} elements",
            tx.weights.len(),
            rx.weights.len()
        )));
    }
    let h = channel_matrix(link, tx_geom, rx_geom)?;
    let mut y = Complex64::new(0.0, 0.0);
    for (r, w_r) in rx.weights.iter().enumerate() {
        let row = &h[r * nt..(r + 1) * nt];
        let hx: Complex64 = row.iter().zip(&tx.weights).map(|(a, b)| a * b).sum();
        y += w_r.conj() * hx;
    }
    Ok(20.0 * y.norm().log10())
}

/// Beamforming gains (dB) for a selection of codebook beam pairs on one
/// link, computed from per-subpath beam responses.
#[derive(Debug, Clone, PartialEq)]
pub struct GainTable {
    tx_beams: Vec<usize>,
    rx_beams: Vec<usize>,
    gains_db: Vec<f64>,
}

impl GainTable {
    /// All `tx_codebook x rx_codebook` pairs.
    pub fn full(link: &LinkRealization, tx: &Codebook, rx: &Codebook) -> Result<Self> {
        let tx_beams: Vec<usize> = (0..tx.len()).collect();
        let rx_beams: Vec<usize> = (0..rx.len()).collect();
        Self::select(link, tx, &tx_beams, rx, &rx_beams)
    }

    pub fn select(
        link: &LinkRealization,
        tx: &Codebook,
        tx_beams: &[usize],
        rx: &Codebook,
        rx_beams: &[usize],
    ) -> Result<Self> {
        if link.is_outage() {
            return Err(Error::OutageLink);
        }
        if let Some(&b) = tx_beams.iter().find(|&&b| b >= tx.len()) {
            return Err(Error::CodebookMismatch(format!("tx beam {b} out of range")));
        }
        if let Some(&b) = rx_beams.iter().find(|&&b| b >= rx.len()) {
            return Err(Error::CodebookMismatch(format!("rx beam {b} out of range")));
        }
        let (nt, nr) = (tx_beams.len(), rx_beams.len());
        let scale = ((tx.geometry.elements() * rx.geometry.elements()) as f64).sqrt();
        let mut amp = vec![Complex64::new(0.0, 0.0); nt * nr];
        let mut tx_resp = vec![Complex64::new(0.0, 0.0); nt];
        let mut rx_resp = vec![Complex64::new(0.0, 0.0); nr];
        for sp in link.subpaths() {
            for (slot, &b) in tx_resp.iter_mut().zip(tx_beams) {
                // a_tx^H w = conj(w^H a_tx)
                *slot = response_overlap(
                    &tx.geometry,
                    Direction::horizontal(tx.beams[b].boresight_azimuth),
                    sp.departure,
                )
                .conj();
            }
            for (slot, &b) in rx_resp.iter_mut().zip(rx_beams) {
                *slot = response_overlap(
                    &rx.geometry,
                    Direction::horizontal(rx.beams[b].boresight_azimuth),
                    sp.arrival,
                ) * sp.gain;
            }
            for (i, t) in tx_resp.iter().enumerate() {
                let row = &mut amp[i * nr..(i + 1) * nr];
                for (cell, r) in row.iter_mut().zip(&rx_resp) {
                    *cell += r * t;
                }
            }
        }
        let gains_db = amp
            .into_iter()
            .map(|y| 20.0 * (y.norm() * scale).log10())
            .collect();
        Ok(GainTable {
            tx_beams: tx_beams.to_vec(),
            rx_beams: rx_beams.to_vec(),
            gains_db,
        })
    }

    pub fn tx_beams(&self) -> &[usize] {
        &self.tx_beams
    }

    pub fn rx_beams(&self) -> &[usize] {
        &self.rx_beams
    }

    /// Gain of the pair at positions `(tx_pos, rx_pos)` of the selection.
    pub fn gain_db(&self, tx_pos: usize, rx_pos: usize) -> f64 {
        self.gains_db[tx_pos * self.rx_beams.len() + rx_pos]
    }

    pub fn max_gain_db(&self) -> f64 {
        self.gains_db
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub tx_power_dbm: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
    /// Detection threshold tau.
    pub snr_threshold_db: f64,
}

impl LinkBudget {
    /// Thermal noise `-174 dBm/Hz + 10 log10(B) + NF`.
    pub fn noise_power_dbm(&self) -> f64 {
        -174.0 + 10.0 * self.bandwidth_hz.log10() + self.noise_figure_db
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth_hz.is_finite() && self.bandwidth_hz > 0.0) {
            return Err(Error::invalid("bandwidth_hz", "must be > 0"));
        }
        Ok(())
    }
}

pub fn snr_db(gain_db: f64, pathloss_db: f64, budget: &LinkBudget) -> f64 {
    budget.tx_power_dbm + gain_db - pathloss_db - budget.noise_power_dbm()
}
