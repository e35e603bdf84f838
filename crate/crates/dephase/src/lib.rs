//! Spin-qubit dephasing simulator and noise-spectroscopy toolkit.
//!
//! The crate models the coherence of a single spin coupled to classical
//! magnetic and electrical noise: it synthesizes the noise processes,
//! maps them to qubit detuning through the spin's coupling formulas,
//! evolves Ramsey / Hahn-echo / Carr–Purcell sequences either by
//! Monte-Carlo phase accumulation or by the analytic filter-function
//! integral, and fits the resulting decay curves to extract `T₂*`,
//! `T₂`, stretching exponents and noise spectral exponents.
//!
//! Start with the runnable examples (`cargo run --example ...`); each
//! one exercises a major capability end to end. The `dephase` binary
//! offers a thin configuration-driven front end for batch sweeps.

pub mod analysis;
pub mod coherence;
pub mod config;
pub mod error;
pub mod fit;
pub mod harness;
pub mod noise;
pub mod presets;
pub mod pulse;
pub mod spin;
pub mod units;

pub use error::{Error, Result};
