//! JSON experiment configuration.
//!
//! Every physical quantity carries its unit in the field name
//! (`b_ext_tesla`, `f_min_hz`, …), the noise list mirrors
//! [`crate::coherence::CoupledNoise`], and validation errors name the
//! offending field so the CLI can exit with a message pointing at it.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::coherence::{CoupledNoise, Coupling};
use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::pulse::SequenceKind;
use crate::spin::QdParameters;

/// Sequence descriptor: `{"kind": "ramsey"|"hahn"|"cp", "n_pi": N}`.
/// For Carr–Purcell sweeps `n_pi` may be a list.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequenceSpec {
    pub kind: SequenceKind,
    #[serde(default)]
    pub n_pi: NPiSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NPiSpec {
    One(usize),
    Axis(Vec<usize>),
}

impl Default for NPiSpec {
    fn default() -> Self {
        NPiSpec::One(0)
    }
}

impl NPiSpec {
    pub fn values(&self) -> Vec<usize> {
        match self {
            NPiSpec::One(n) => vec![*n],
            NPiSpec::Axis(v) => v.clone(),
        }
    }
}

impl SequenceSpec {
    pub fn validate(&self) -> Result<()> {
        let values = self.n_pi.values();
        if values.is_empty() {
            return Err(Error::ConfigValidation {
                field: "sequence.n_pi".into(),
                reason: "empty pulse-number list".into(),
            });
        }
        for &n in &values {
            let ok = match self.kind {
                SequenceKind::Ramsey => n == 0,
                SequenceKind::Hahn => n == 1,
                SequenceKind::Cp => n >= 1,
            };
            if !ok {
                return Err(Error::ConfigValidation {
                    field: "sequence.n_pi".into(),
                    reason: format!("{n} pulses invalid for {:?}", self.kind),
                });
            }
        }
        Ok(())
    }
}

/// Delay grid specification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DelayGrid {
    pub scale: GridScale,
    pub min_s: f64,
    pub max_s: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridScale {
    Log,
    Linear,
}

impl DelayGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_s.is_finite() && self.min_s > 0.0) {
            return Err(Error::ConfigValidation {
                field: "delays.min_s".into(),
                reason: format!("{} must be > 0", self.min_s),
            });
        }
        if !(self.max_s.is_finite() && self.max_s > self.min_s) {
            return Err(Error::ConfigValidation {
                field: "delays.max_s".into(),
                reason: format!("{} must exceed min_s", self.max_s),
            });
        }
        if self.count < 2 {
            return Err(Error::ConfigValidation {
                field: "delays.count".into(),
                reason: "need at least 2 delays".into(),
            });
        }
        Ok(())
    }

    pub fn build(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|i| {
                let frac = i as f64 / (n - 1) as f64;
                match self.scale {
                    GridScale::Linear => self.min_s + (self.max_s - self.min_s) * frac,
                    GridScale::Log => self.min_s * (self.max_s / self.min_s).powf(frac),
                }
            })
            .collect()
    }
}

/// One noise entry: either a concrete coupled model or the
/// species-derived precessing nuclear field (expanded per field value).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NoiseSpec {
    NuclearPrecession { nuclear_precession: bool },
    Fixed(CoupledNoise),
}

impl NoiseSpec {
    pub fn resolve(&self, qd: &QdParameters, b_ext_tesla: f64) -> Result<CoupledNoise> {
        match self {
            NoiseSpec::Fixed(src) => Ok(src.clone()),
            NoiseSpec::NuclearPrecession { nuclear_precession } => {
                if !nuclear_precession {
                    return Err(Error::ConfigValidation {
                        field: "noise.nuclear_precession".into(),
                        reason: "set to false; remove the entry instead".into(),
                    });
                }
                Ok(CoupledNoise {
                    model: crate::coherence::nuclear_precession_model(qd, b_ext_tesla)?,
                    coupling: Coupling::NuclearX,
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineSelect {
    Mc,
    Ff,
    Auto,
}

/// What the run produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    /// Visibility decay curves plus stretched-exponential fits.
    #[default]
    Decay,
    /// A resonance-fluorescence intensity trace, its autocorrelation
    /// and the fluctuator + power-law fit.
    IntensityAutocorr,
}

/// Parameters of the intensity-autocorrelation task.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntensitySection {
    pub k_stark_hz_per_v_per_m: f64,
    pub linewidth_fwhm_hz: f64,
    /// Static operating-point detuning (Hz); half a linewidth puts the
    /// drive on the steepest slope.
    pub detuning_offset_hz: f64,
    pub duration_s: f64,
    pub dt_s: f64,
    pub lag_min_s: f64,
    pub lag_max_s: f64,
    pub lags_per_decade: usize,
    pub k_exponentials: usize,
    /// Independent records whose autocorrelations are averaged.
    #[serde(default = "one")]
    pub records: usize,
}

fn one() -> usize {
    1
}

impl IntensitySection {
    fn validate(&self) -> Result<()> {
        let checks = [
            (
                "intensity.k_stark_hz_per_v_per_m",
                self.k_stark_hz_per_v_per_m.abs(),
            ),
            ("intensity.linewidth_fwhm_hz", self.linewidth_fwhm_hz),
            ("intensity.duration_s", self.duration_s),
            ("intensity.dt_s", self.dt_s),
            ("intensity.lag_min_s", self.lag_min_s),
            ("intensity.lag_max_s", self.lag_max_s),
        ];
        for (field, v) in checks {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::ConfigValidation {
                    field: field.into(),
                    reason: format!("{v} must be finite and > 0"),
                });
            }
        }
        if self.lag_max_s <= self.lag_min_s {
            return Err(Error::ConfigValidation {
                field: "intensity.lag_max_s".into(),
                reason: "must exceed lag_min_s".into(),
            });
        }
        if self.lag_max_s > 0.25 * self.duration_s {
            return Err(Error::ConfigValidation {
                field: "intensity.lag_max_s".into(),
                reason: "lags beyond a quarter of the record are too noisy".into(),
            });
        }
        if self.lags_per_decade == 0 {
            return Err(Error::ConfigValidation {
                field: "intensity.lags_per_decade".into(),
                reason: "must be ≥ 1".into(),
            });
        }
        if self.records == 0 {
            return Err(Error::ConfigValidation {
                field: "intensity.records".into(),
                reason: "must be ≥ 1".into(),
            });
        }
        Ok(())
    }
}

/// A complete experiment description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub qd: QdParameters,
    pub noise: Vec<NoiseSpec>,
    #[serde(default)]
    pub task: TaskKind,
    pub sequence: Option<SequenceSpec>,
    pub b_ext_tesla: Vec<f64>,
    pub delays: Option<DelayGrid>,
    pub n_traj: usize,
    pub seed: u64,
    pub engine: EngineSelect,
    pub output_dir: PathBuf,
    pub intensity: Option<IntensitySection>,
    /// Optional noise-amplitude axis: each value scales every process
    /// amplitude (PSD scales quadratically).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_scale_axis: Option<Vec<f64>>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.qd.validate().map_err(|e| prefix_field("qd", e))?;
        if self.noise.is_empty() {
            return Err(Error::ConfigValidation {
                field: "noise".into(),
                reason: "no noise sources configured".into(),
            });
        }
        for (i, spec) in self.noise.iter().enumerate() {
            if let NoiseSpec::Fixed(src) = spec {
                src.model
                    .validate()
                    .map_err(|e| prefix_field(&format!("noise[{i}]"), e))?;
            }
        }
        if self.b_ext_tesla.is_empty() {
            return Err(Error::ConfigValidation {
                field: "b_ext_tesla".into(),
                reason: "need at least one field value".into(),
            });
        }
        for &b in &self.b_ext_tesla {
            if !(b.is_finite() && b > 0.0) {
                return Err(Error::ConfigValidation {
                    field: "b_ext_tesla".into(),
                    reason: format!("{b} must be finite and > 0"),
                });
            }
        }
        match self.task {
            TaskKind::Decay => {
                let seq = self.sequence.as_ref().ok_or_else(|| Error::ConfigValidation {
                    field: "sequence".into(),
                    reason: "required for the decay task".into(),
                })?;
                seq.validate()?;
                let delays = self.delays.as_ref().ok_or_else(|| Error::ConfigValidation {
                    field: "delays".into(),
                    reason: "required for the decay task".into(),
                })?;
                delays.validate()?;
                if self.n_traj < 100 {
                    return Err(Error::ConfigValidation {
                        field: "n_traj".into(),
                        reason: format!("{} is below the minimum of 100", self.n_traj),
                    });
                }
            }
            TaskKind::IntensityAutocorr => {
                let section = self.intensity.as_ref().ok_or_else(|| Error::ConfigValidation {
                    field: "intensity".into(),
                    reason: "required for the intensity task".into(),
                })?;
                section.validate()?;
                for (i, spec) in self.noise.iter().enumerate() {
                    match spec {
                        NoiseSpec::Fixed(src) if src.coupling == Coupling::Electrical => {}
                        _ => {
                            return Err(Error::ConfigValidation {
                                field: format!("noise[{i}].coupling"),
                                reason: "intensity task takes electrical (V/m) sources only"
                                    .into(),
                            })
                        }
                    }
                }
            }
        }
        if let Some(axis) = &self.noise_scale_axis {
            for &k in axis {
                if !(k.is_finite() && k > 0.0) {
                    return Err(Error::ConfigValidation {
                        field: "noise_scale_axis".into(),
                        reason: format!("{k} must be finite and > 0"),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<ExperimentConfig> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::ConfigValidation {
                field: "<json>".into(),
                reason: e.to_string(),
            })?;
        config.validate()?;
        Ok(config)
    }

    /// Content hash of the canonical JSON encoding.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let bytes = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&bytes);
        let mut out = String::with_capacity(64);
        for byte in digest {
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }
}

fn prefix_field(prefix: &str, err: Error) -> Error {
    match err {
        Error::InvalidParameter { name, reason } => Error::ConfigValidation {
            field: format!("{prefix}.{name}"),
            reason,
        },
        Error::ConfigValidation { field, reason } => Error::ConfigValidation {
            field: format!("{prefix}.{field}"),
            reason,
        },
        other => other,
    }
}

/// Scale every process amplitude of a model by `k` (PSD amplitudes
/// scale by `k²`).
pub fn scale_noise_model(model: &NoiseModel, k: f64) -> NoiseModel {
    match model {
        NoiseModel::Telegraph {
            amplitude,
            up_rate_per_s,
            down_rate_per_s,
            convention,
        } => NoiseModel::Telegraph {
            amplitude: amplitude * k,
            up_rate_per_s: *up_rate_per_s,
            down_rate_per_s: *down_rate_per_s,
            convention: *convention,
        },
        NoiseModel::OrnsteinUhlenbeck { sigma, tau_c_s } => NoiseModel::OrnsteinUhlenbeck {
            sigma: sigma * k,
            tau_c_s: *tau_c_s,
        },
        NoiseModel::SpectralGaussian {
            lambda,
            amplitude,
            f_min_hz,
            f_max_hz,
        } => NoiseModel::SpectralGaussian {
            lambda: *lambda,
            amplitude: amplitude * k * k,
            f_min_hz: *f_min_hz,
            f_max_hz: *f_max_hz,
        },
        NoiseModel::QuasiStaticGaussian { sigma } => NoiseModel::QuasiStaticGaussian {
            sigma: sigma * k,
        },
        NoiseModel::PrecessingField { components } => NoiseModel::PrecessingField {
            components: components
                .iter()
                .map(|c| crate::noise::PrecessingComponent {
                    rms: c.rms * k,
                    omega_rad_per_s: c.omega_rad_per_s,
                })
                .collect(),
        },
        NoiseModel::Composite { members } => NoiseModel::Composite {
            members: members.iter().map(|m| scale_noise_model(m, k)).collect(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn presets_validate_and_round_trip() {
        for name in presets::PRESET_NAMES {
            let config = presets::by_name(name).unwrap();
            config.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
            let json = serde_json::to_string_pretty(&config).unwrap();
            let back = ExperimentConfig::from_json(&json).unwrap();
            assert_eq!(config.content_hash(), back.content_hash(), "{name}");
        }
    }

    #[test]
    fn negative_field_names_the_field() {
        let mut config = presets::by_name("figure-4").unwrap();
        config.b_ext_tesla = vec![-1.0];
        let err = config.validate().unwrap_err();
        let Error::ConfigValidation { field, .. } = &err else {
            panic!("wrong error kind: {err}")
        };
        assert_eq!(field, "b_ext_tesla");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn bad_qd_parameters_are_prefixed() {
        let mut config = presets::by_name("figure-4").unwrap();
        config.qd.beta = 1.5;
        config.qd.splitting_slope_hz_per_t = None;
        let err = config.validate().unwrap_err();
        let Error::ConfigValidation { field, .. } = &err else {
            panic!("wrong error kind: {err}")
        };
        assert_eq!(field, "qd.beta");
    }

    #[test]
    fn delay_grid_builders() {
        let log = DelayGrid {
            scale: GridScale::Log,
            min_s: 1e-8,
            max_s: 1e-5,
            count: 4,
        };
        let got = log.build();
        assert!((got[1] / got[0] - 10.0).abs() < 1e-9);
        assert_eq!(got.len(), 4);
        let lin = DelayGrid {
            scale: GridScale::Linear,
            min_s: 1.0,
            max_s: 4.0,
            count: 4,
        };
        assert_eq!(lin.build(), vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn noise_scaling_scales_power_quadratically() {
        let model = NoiseModel::spectral_gaussian(0.5, 2.0, 1.0, 10.0);
        let scaled = scale_noise_model(&model, 3.0);
        assert!((scaled.variance() / model.variance() - 9.0).abs() < 1e-12);
        let ou = NoiseModel::ornstein_uhlenbeck(1.0, 0.1);
        let ou9 = scale_noise_model(&ou, 3.0);
        assert!((ou9.variance() / ou.variance() - 9.0).abs() < 1e-12);
    }

    #[test]
    fn content_hash_is_stable_and_sensitive() {
        let a = presets::by_name("figure-4").unwrap();
        let b = presets::by_name("figure-4").unwrap();
        assert_eq!(a.content_hash(), b.content_hash());
        let mut c = presets::by_name("figure-4").unwrap();
        c.seed += 1;
        assert_ne!(a.content_hash(), c.content_hash());
    }
}
