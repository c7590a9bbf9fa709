//! Browser bindings: codebook beam patterns, a small misdetection sweep and
//! the discovery-delay table. See `www/index.html`.

use ia_core::arrays::{make_codebook, response_overlap, ArrayGeometry};
use ia_core::channel::{ChannelParams, Direction};
use ia_core::protocols::{slots_required, SchemeConfig};
use ia_core::sim::{discovery_delay, SimParams, Simulator};
use wasm_bindgen::prelude::*;

const MAX_WEB_TRIALS: u64 = 20_000;

fn js(e: ia_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn scheme(label: &str) -> Result<SchemeConfig, JsError> {
    SchemeConfig::reference_set()
        .into_iter()
        .find(|s| s.label() == label)
        .ok_or_else(|| JsError::new(&format!("unknown scheme {label}")))
}

/// Labels of the four reference schemes.
#[wasm_bindgen]
pub fn scheme_labels() -> Vec<String> {
    SchemeConfig::reference_set().iter().map(SchemeConfig::label).collect()
}

/// Power gain in dB of beam `beam` of an `side x side` codebook with
/// `n_beams` beams, sampled at `points` azimuths over a full turn.
#[wasm_bindgen]
pub fn beam_pattern(side: usize, n_beams: usize, beam: usize, points: usize) -> Result<Vec<f64>, JsError> {
    let geometry = ArrayGeometry::square(side);
    geometry.validate().map_err(js)?;
    let cb = make_codebook(geometry, n_beams).map_err(js)?;
    if beam >= cb.len() {
        return Err(JsError::new(&format!("beam {beam} out of 0..{}", cb.len())));
    }
    let boresight = Direction::horizontal(cb.beam(beam).boresight_azimuth);
    let gain = (geometry.elements() as f64).log10() * 10.0;
    Ok((0..points.max(2))
        .map(|i| {
            let az = std::f64::consts::TAU * i as f64 / points.max(2) as f64;
            let o = response_overlap(&geometry, boresight, Direction::horizontal(az)).norm_sqr();
            gain + 10.0 * o.max(1e-12).log10()
        })
        .collect())
}

/// Misdetection probability per 10 m bin out to `max_radius_m`, followed
/// by the matching 95 % half-widths: `[pmd.., ci95..]`.
#[wasm_bindgen]
pub fn pmd_vs_distance(
    label: &str,
    trials: u32,
    seed: u32,
    max_radius_m: f64,
    tau_db: f64,
) -> Result<Vec<f64>, JsError> {
    let s = scheme(label)?;
    let p = SimParams {
        trials: u64::from(trials).min(MAX_WEB_TRIALS),
        master_seed: u64::from(seed),
        max_radius_m,
        snr_threshold_db: tau_db,
        ..SimParams::default()
    };
    let sim = Simulator::new(p, ChannelParams::default()).map_err(js)?;
    let curve = sim.pmd_sweep(&s).map_err(js)?;
    let mut out: Vec<f64> = curve.iter().map(|e| e.pmd).collect();
    out.extend(curve.iter().map(|e| e.ci95_halfwidth));
    Ok(out)
}

/// Discovery-delay table as CSV text: `scheme,n_slots,delay_ms`.
#[wasm_bindgen]
pub fn delay_table(t_sig_us: f64, overhead: f64) -> Result<String, JsError> {
    let mut csv = String::from("scheme,n_slots,delay_ms\n");
    for s in SchemeConfig::reference_set() {
        let n = slots_required(&s);
        let d = discovery_delay(n, t_sig_us * 1e-6, overhead).map_err(js)?;
        csv.push_str(&format!("{},{n},{:.4}\n", s.label(), d * 1e3));
    }
    Ok(csv)
}
