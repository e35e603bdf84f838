//! Visibility decay engines.
//!
//! Two routes to the same observable: [`mc_visibility`] averages
//! `e^{iφ}` over Monte-Carlo noise trajectories with per-trajectory
//! phase accumulation, and [`ff_visibility`] evaluates the analytic
//! filter-function integral `V(τ) = exp(−χ(τ))` for Gaussian noise.
//! For every Gaussian model the two must agree within combined
//! statistical errors; the Monte-Carlo route additionally treats
//! non-Gaussian noise (telegraph fluctuators, the second-order
//! longitudinal hyperfine coupling).

mod echo;
mod ff;
mod mc;

pub use echo::{echo_with_nuclear_precession, nuclear_precession_model};
pub use ff::{ff_chi, ff_supported, ff_visibility};
pub use mc::{mc_visibility, McConfig};

use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::pulse::SequenceKind;
use crate::spin::QdParameters;
use crate::units::MU_B_OVER_H_HZ_PER_T;

/// How a noise process couples into the qubit detuning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// Process units are already Hz of detuning.
    DirectHz,
    /// Process is a transverse Overhauser field in Tesla (first-order
    /// hyperfine coupling).
    NuclearX,
    /// Process is the longitudinal Overhauser field in Tesla; the
    /// detuning goes as its square (second order). Monte-Carlo only.
    NuclearZSecondOrder,
    /// Process is a local electric field in V/m (linear in field and in
    /// B_ext).
    Electrical,
}

/// A noise source with its coupling route into the detuning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledNoise {
    pub model: NoiseModel,
    pub coupling: Coupling,
}

impl CoupledNoise {
    pub fn direct(model: NoiseModel) -> Self {
        CoupledNoise {
            model,
            coupling: Coupling::DirectHz,
        }
    }

    /// Linear gain in Hz per process unit, or `None` for the nonlinear
    /// second-order coupling.
    pub fn linear_gain_hz(&self, params: &QdParameters, b_ext_tesla: f64) -> Option<f64> {
        match self.coupling {
            Coupling::DirectHz => Some(1.0),
            Coupling::NuclearX => {
                let g = if params.inplane_first_order {
                    crate::spin::INPLANE_G_PREFACTOR * params.beta * params.g_h
                } else {
                    params.g_h
                };
                Some(g * MU_B_OVER_H_HZ_PER_T)
            }
            Coupling::Electrical => {
                Some(params.dgdf_per_v_per_m * MU_B_OVER_H_HZ_PER_T * b_ext_tesla)
            }
            Coupling::NuclearZSecondOrder => None,
        }
    }
}

/// Which engine produced a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    Mc,
    Ff,
}

/// Metadata describing how a decay curve was produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveMeta {
    pub sequence: SequenceKind,
    pub n_pi: usize,
    pub b_ext_tesla: f64,
    /// JSON description of the coupled noise sources.
    pub noise: String,
    pub n_trajectories: usize,
    pub seed: u64,
    pub engine: EngineKind,
}

/// Sampled visibility versus total delay with standard errors.
#[derive(Debug, Clone)]
pub struct DecayCurve {
    /// Strictly increasing delays, seconds.
    pub delays_s: Vec<f64>,
    /// Fringe visibilities, `|⟨e^{iφ}⟩|`.
    pub visibility: Vec<f64>,
    /// Batch-means standard errors (zero for analytic curves).
    pub stderr: Vec<f64>,
    pub meta: CurveMeta,
}

impl DecayCurve {
    pub fn len(&self) -> usize {
        self.delays_s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delays_s.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.delays_s.len() != self.visibility.len() || self.delays_s.len() != self.stderr.len()
        {
            return Err(Error::invalid("decay_curve", "column length mismatch"));
        }
        if !self.delays_s.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::invalid("delays_s", "must be strictly increasing"));
        }
        if self.visibility.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("visibility", "non-finite value"));
        }
        if self.stderr.iter().any(|s| *s < 0.0) {
            return Err(Error::invalid("stderr", "negative standard error"));
        }
        Ok(())
    }

    /// Write the curve as CSV with columns `tau_s,visibility,stderr`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "tau_s,visibility,stderr")?;
        for i in 0..self.len() {
            writeln!(
                w,
                "{:.17e},{:.17e},{:.17e}",
                self.delays_s[i], self.visibility[i], self.stderr[i]
            )?;
        }
        Ok(())
    }

    /// Write the CSV plus a JSON metadata sidecar (`<path>.meta.json`).
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        self.write_csv(&mut file)?;
        file.flush()?;
        let sidecar = sidecar_path(path);
        let json = serde_json::to_string_pretty(&self.meta)?;
        std::fs::write(sidecar, json)?;
        Ok(())
    }

    /// Read a curve back from CSV; the sidecar is consulted when
    /// present, otherwise a placeholder metadata block is attached.
    pub fn load(path: &Path) -> Result<DecayCurve> {
        let text = std::fs::read_to_string(path)?;
        let mut delays = Vec::new();
        let mut vis = Vec::new();
        let mut err = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if lineno == 0 {
                if line.trim() != "tau_s,visibility,stderr" {
                    return Err(Error::invalid("csv", "unexpected header"));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(Error::invalid("csv", format!("line {}: need 3 columns", lineno + 1)));
            }
            let parse = |s: &str| -> Result<f64> {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::invalid("csv", format!("line {}: {e}", lineno + 1)))
            };
            delays.push(parse(cols[0])?);
            vis.push(parse(cols[1])?);
            err.push(parse(cols[2])?);
        }
        let meta = match std::fs::read_to_string(sidecar_path(path)) {
            Ok(json) => serde_json::from_str(&json)?,
            Err(_) => CurveMeta {
                sequence: SequenceKind::Ramsey,
                n_pi: 0,
                b_ext_tesla: 0.0,
                noise: String::new(),
                n_trajectories: 0,
                seed: 0,
                engine: EngineKind::Mc,
            },
        };
        let curve = DecayCurve {
            delays_s: delays,
            visibility: vis,
            stderr: err,
            meta,
        };
        curve.validate()?;
        Ok(curve)
    }
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_os_string();
    os.push(".meta.json");
    std::path::PathBuf::from(os)
}

pub(crate) fn describe_noise(noise: &[CoupledNoise]) -> String {
    serde_json::to_string(noise).unwrap_or_else(|_| "<unprintable>".into())
}

pub(crate) fn validate_delays(delays: &[f64]) -> Result<()> {
    if delays.is_empty() {
        return Err(Error::invalid("delays", "empty delay grid"));
    }
    if delays.iter().any(|&t| !(t.is_finite() && t > 0.0)) {
        return Err(Error::invalid("delays", "delays must be finite and > 0"));
    }
    if !delays.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::invalid("delays", "delays must be strictly increasing"));
    }
    Ok(())
}
