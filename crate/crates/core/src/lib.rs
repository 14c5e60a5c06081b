//! Temporal artificial-noise injection for SISO-OFDM wiretap links.
//!
//! The transmitter spends part of its power on noise shaped to lie in the
//! null space of the legitimate receiver's channel, so only the eavesdropper
//! sees it. The crate builds the precoders, allocates power, evaluates the
//! legitimate, eavesdropper and secrecy rates, and runs seeded Monte Carlo
//! sweeps that emit CSV tables.
//!
//! ```
//! use temporal_an::simulate::{run_experiment, ExperimentSpec};
//!
//! let spec = ExperimentSpec { n: 16, n_cp: 4, l_b: 2, l_e: 3, trials: 4, ..Default::default() };
//! let out = run_experiment(&spec, 1).unwrap();
//! assert!(out.rows[0].rates_bps.r_sec_joint.mean >= 0.0);
//! ```

pub mod allocation;
pub mod config;
pub mod error;
pub mod linalg;
pub mod ofdm;
pub mod output;
pub mod precoding;
pub mod rates;
pub mod simulate;
pub mod validation;

pub use error::{Error, Result};
