//! Monte Carlo simulation of directional initial access (IA) in mmWave
//! cellular networks.
//!
//! The crate is organised bottom-up:
//!
//! - [`channel`] draws statistical 28 GHz link realizations (LOS / NLOS /
//!   outage, distance-based pathloss, spatial clusters of subpaths).
//! - [`arrays`] holds uniform planar array geometry, steering vectors,
//!   direction codebooks and the beamforming-gain / link-budget arithmetic.
//! - [`protocols`] runs the exhaustive and the two-phase iterative beam
//!   search slot by slot and counts the slots each procedure needs.
//! - [`sim`] deploys users, estimates misdetection probability (PMD),
//!   discovery delay and the minimum signal duration meeting a PMD target.
//! - [`config`] is the structured run configuration shared by the CLI and
//!   the browser demo.

pub mod arrays;
pub mod channel;
pub mod config;
mod error;
pub mod protocols;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
