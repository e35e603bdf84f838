//! Shipped experiment presets.
//!
//! Each preset encodes a parameter set that reproduces one of the
//! toolkit's reference figure trends from the calibrated noise models:
//!
//! * `figure-1d` — Ramsey T₂* versus magnetic field in the
//!   electrical-noise regime (T₂* ∝ 1/B).
//! * `figure-2`  — Hahn-echo T₂ versus magnetic field (T₂ ∝ 1/B).
//! * `figure-2bc` — low-field echo collapse and revival from the four
//!   precessing nuclear species at 2 T.
//! * `figure-3` — resonance-fluorescence intensity autocorrelation
//!   from four slow fluctuators plus a `1/f^0.56` background.
//! * `figure-4` — dynamical-decoupling T₂ scaling with the number of
//!   π pulses at 5 T under `1/f^0.56` electrical noise.
//!
//! Quantities that a coherence measurement alone does not pin down
//! (fluctuator timescales and weights, per-species transverse-field
//! shares, absolute coupling scales) are derived placeholders, chosen
//! so the presets reproduce the documented trends; each is annotated
//! below where it is set.

use std::path::PathBuf;

use crate::analysis::{calibrate_to_hahn_t2, ElectricalNoiseTemplate};
use crate::coherence::{CoupledNoise, Coupling};
use crate::config::{
    DelayGrid, EngineSelect, ExperimentConfig, GridScale, IntensitySection, NPiSpec, NoiseSpec,
    SequenceSpec, TaskKind,
};
use crate::error::{Error, Result};
use crate::noise::{NoiseModel, TelegraphConvention};
use crate::pulse::SequenceKind;
use crate::spin::{QdParameters, Species};
use crate::units::{gyromagnetic, MU_B_OVER_H_HZ_PER_T, TWO_PI};

pub const PRESET_NAMES: [&str; 5] =
    ["figure-1d", "figure-2", "figure-2bc", "figure-3", "figure-4"];

/// Look up a preset by name.
pub fn by_name(name: &str) -> Result<ExperimentConfig> {
    match name {
        "figure-1d" => Ok(figure_1d()),
        "figure-2" => Ok(figure_2()),
        "figure-2bc" => Ok(figure_2bc()),
        "figure-3" => Ok(figure_3()),
        "figure-4" => Ok(figure_4()),
        other => Err(Error::MissingInput(format!(
            "unknown preset `{other}`; available: {}",
            PRESET_NAMES.join(", ")
        ))),
    }
}

/// Reference Hahn-echo coherence times: T₂(N_π = 10) = 4.40 μs at 5 T
/// chained back through the γ = 0.36 decoupling scaling gives
/// T₂ ≈ 1.92 μs at 5 T, and the ≈1/B field scaling maps that to
/// ≈ 1.48 μs at 6.5 T.
pub const HAHN_T2_AT_5T: f64 = 1.925e-6;
pub const HAHN_T2_AT_6P5T: f64 = 1.48e-6;

/// Calibration template of the electrical environment: a 1/f^0.56
/// band over nine decades plus a quasi-static share carrying the slow
/// fluctuators. The ratio 2.69 is a derived placeholder for the
/// fluctuator-to-band weight (not fixed by any echo measurement); with
/// the band calibrated to the reference Hahn T₂ at 6.5 T it places the
/// predicted Ramsey T₂* at ≈ 55 ns.
pub fn reference_calibration_template() -> ElectricalNoiseTemplate {
    ElectricalNoiseTemplate {
        lambda: 0.56,
        f_min_hz: 1e2,
        f_max_hz: 1e9,
        quasi_static_ratio: 2.69,
    }
}

/// Electrical quasi-static rms (V/m) placing the quasi-static Ramsey
/// dephasing at T₂* = √2/σ_ω for the given target at the given field
/// with the default electrical coupling (derived placeholder).
pub fn quasi_static_sigma_for_t2star(qd: &QdParameters, t2star_s: f64, b_tesla: f64) -> f64 {
    let sigma_omega = 2f64.sqrt() / t2star_s;
    let sigma_hz = sigma_omega / TWO_PI;
    sigma_hz / (qd.dgdf_per_v_per_m * MU_B_OVER_H_HZ_PER_T * b_tesla)
}

/// The high-field electrical noise set shared by `figure-1d` and
/// `figure-2`: a quasi-static component (the slow fluctuators, static
/// within a shot) plus a near-1/f band that carries the echo decay.
/// The band exponent 0.98 makes the echo T₂ scale as B^(−2/(1+λ)) ≈
/// 1/B, matching the measured field scaling; the `figure-4` preset
/// models the decoupling scaling with λ = 0.56 instead.
fn high_field_electrical_noise(qd: &QdParameters) -> Vec<NoiseSpec> {
    let lambda = 0.98;
    let template = ElectricalNoiseTemplate {
        lambda,
        f_min_hz: 1e3,
        f_max_hz: 1e9,
        quasi_static_ratio: 0.0,
    };
    let calibrated = calibrate_to_hahn_t2(qd, 6.5, HAHN_T2_AT_6P5T, &template)
        .expect("built-in calibration succeeds");
    let sigma_qs = quasi_static_sigma_for_t2star(qd, 53.8e-9, 6.5);
    vec![
        NoiseSpec::Fixed(CoupledNoise {
            model: NoiseModel::quasi_static(sigma_qs),
            coupling: Coupling::Electrical,
        }),
        NoiseSpec::Fixed(CoupledNoise {
            model: calibrated.spectral().clone(),
            coupling: Coupling::Electrical,
        }),
    ]
}

/// Ramsey T₂* versus field, 4–8 T.
pub fn figure_1d() -> ExperimentConfig {
    let qd = QdParameters::reference_dot();
    let noise = high_field_electrical_noise(&qd);
    ExperimentConfig {
        qd,
        noise,
        task: TaskKind::Decay,
        sequence: Some(SequenceSpec {
            kind: SequenceKind::Ramsey,
            n_pi: NPiSpec::One(0),
        }),
        b_ext_tesla: vec![4.0, 5.0, 6.5, 8.0],
        delays: Some(DelayGrid {
            scale: GridScale::Log,
            min_s: 6e-9,
            max_s: 3.5e-7,
            count: 26,
        }),
        n_traj: 10_000,
        seed: 0x0dd5_eed1,
        engine: EngineSelect::Ff,
        output_dir: PathBuf::from("runs/figure-1d"),
        intensity: None,
        noise_scale_axis: None,
    }
}

/// Hahn-echo T₂ versus field, 3–8 T.
pub fn figure_2() -> ExperimentConfig {
    let qd = QdParameters::reference_dot();
    let noise = high_field_electrical_noise(&qd);
    ExperimentConfig {
        qd,
        noise,
        task: TaskKind::Decay,
        sequence: Some(SequenceSpec {
            kind: SequenceKind::Hahn,
            n_pi: NPiSpec::One(1),
        }),
        b_ext_tesla: vec![3.0, 4.0, 5.0, 6.5, 8.0],
        delays: Some(DelayGrid {
            scale: GridScale::Log,
            min_s: 1.5e-7,
            max_s: 1.4e-5,
            count: 26,
        }),
        n_traj: 10_000,
        seed: 0x0dd5_eed2,
        engine: EngineSelect::Ff,
        output_dir: PathBuf::from("runs/figure-2"),
        intensity: None,
        noise_scale_axis: None,
    }
}

/// Nuclear species of In₀.₃Ga₀.₇As with transverse rms shares from
/// isotope abundances and a total of 0.24 mT. The total is a derived
/// placeholder: it sets the echo-modulation depth at 2 T to the
/// observed collapse, and is larger than the 0.07 mT transverse-field
/// estimate inferred from β — the same tension the measurement itself
/// shows between modulation depth and the hyperfine estimate.
pub fn revival_species() -> Vec<Species> {
    let total_rms = 2.4e-4;
    // abundance-weighted variance shares for In₀.₃Ga₀.₇As
    let shares = [
        ("As75", gyromagnetic::AS_75, 0.503),
        ("Ga69", gyromagnetic::GA_69, 0.212),
        ("In115", gyromagnetic::IN_115, 0.144),
        ("Ga71", gyromagnetic::GA_71, 0.140),
    ];
    shares
        .iter()
        .map(|(label, gyro, share)| Species::new(label, *gyro, total_rms * f64::sqrt(*share)))
        .collect()
}

/// Low-field Hahn-echo collapse and revival at 2 T.
pub fn figure_2bc() -> ExperimentConfig {
    let mut qd = QdParameters::reference_dot();
    qd.species = revival_species();
    ExperimentConfig {
        qd,
        noise: vec![NoiseSpec::NuclearPrecession {
            nuclear_precession: true,
        }],
        task: TaskKind::Decay,
        sequence: Some(SequenceSpec {
            kind: SequenceKind::Hahn,
            n_pi: NPiSpec::One(1),
        }),
        b_ext_tesla: vec![2.0],
        delays: Some(DelayGrid {
            scale: GridScale::Linear,
            min_s: 4e-9,
            max_s: 3.2e-7,
            count: 80,
        }),
        n_traj: 4_000,
        seed: 0x0dd5_eed3,
        engine: EngineSelect::Mc,
        output_dir: PathBuf::from("runs/figure-2bc"),
        intensity: None,
        noise_scale_axis: None,
    }
}

/// The four slow fluctuators of the intensity-autocorrelation model.
/// Timescales are representative placeholders spread by ~8× so the
/// four exponential shoulders separate cleanly inside the lag window;
/// amplitudes put each fluctuator's detuning jump at a few percent of
/// the linewidth around the inflection operating point — small enough
/// that the Lorentzian transduction stays linear, so each
/// fluctuator imprints a clean exponential and the 1/f background a
/// clean power law.
pub fn figure_3_fluctuators() -> Vec<(f64, f64)> {
    // (dwell-based correlation time τ_k in s, symmetric level ±a in V/m)
    vec![(5.0e-4, 28.0), (4.0e-3, 25.0), (3.2e-2, 23.0), (0.12, 20.0)]
}

/// Intensity-autocorrelation pipeline: fluctuators + 1/f^0.56 Stark
/// noise → normalized autocorrelation → exponentials + power-law fit.
pub fn figure_3() -> ExperimentConfig {
    let qd = QdParameters::reference_dot();
    let mut noise: Vec<NoiseSpec> = figure_3_fluctuators()
        .into_iter()
        .map(|(tau_k, jump)| {
            NoiseSpec::Fixed(CoupledNoise {
                model: NoiseModel::Telegraph {
                    amplitude: jump,
                    up_rate_per_s: 0.5 / tau_k,
                    down_rate_per_s: 0.5 / tau_k,
                    // symmetric levels keep the mean operating point on
                    // the inflection, where the transduction is linear
                    convention: TelegraphConvention::PlusMinus,
                },
                coupling: Coupling::Electrical,
            })
        })
        .collect();
    // 1/f^0.56 background with rms δν ≈ 3% of the linewidth: together
    // with the fluctuator jumps this keeps the whole excursion well
    // inside the linear flank of the line, so each fluctuator imprints
    // a clean exponential and the background a clean power law
    let linewidth = 2.27e8;
    let k_stark = 1.0e5;
    let sigma_f = 0.03 * linewidth / k_stark;
    // the power-law autocorrelation form holds for lags well below
    // 1/(2π f_min), so the band edge sits far under the lag window
    let (f_min, f_max): (f64, f64) = (1.5e-3, 2.4e4);
    let lambda = 0.56;
    let p = 1.0 - lambda;
    let band_integral = (f_max.powf(p) - f_min.powf(p)) / p;
    let amplitude = sigma_f * sigma_f / band_integral;
    noise.push(NoiseSpec::Fixed(CoupledNoise {
        model: NoiseModel::spectral_gaussian(lambda, amplitude, f_min, f_max),
        coupling: Coupling::Electrical,
    }));
    ExperimentConfig {
        qd,
        noise,
        task: TaskKind::IntensityAutocorr,
        sequence: None,
        b_ext_tesla: vec![6.5],
        delays: None,
        n_traj: 1_000,
        seed: 0x0dd5_eed4,
        engine: EngineSelect::Mc,
        output_dir: PathBuf::from("runs/figure-3"),
        intensity: Some(IntensitySection {
            k_stark_hz_per_v_per_m: k_stark,
            linewidth_fwhm_hz: linewidth,
            // inflection point of the Lorentzian (x = 1/√3): maximal
            // linearity of the detuning→intensity transduction
            detuning_offset_hz: linewidth / (2.0 * 1.7320508075688772),
            duration_s: 671.08864,
            dt_s: 2e-5,
            lag_min_s: 2e-5,
            lag_max_s: 0.35,
            lags_per_decade: 12,
            k_exponentials: 4,
            records: 6,
        }),
        noise_scale_axis: None,
    }
}

/// Dynamical-decoupling scaling at 5 T: CP with N_π ∈ {1, 2, 4, 8, 16}
/// under 1/f^0.56 electrical noise calibrated so T₂(N_π = 1) matches
/// the reference Hahn value.
pub fn figure_4() -> ExperimentConfig {
    let qd = QdParameters::reference_dot();
    let template = ElectricalNoiseTemplate {
        lambda: 0.56,
        f_min_hz: 1e2,
        f_max_hz: 1e9,
        quasi_static_ratio: 0.0,
    };
    let calibrated = calibrate_to_hahn_t2(&qd, 5.0, HAHN_T2_AT_5T, &template)
        .expect("built-in calibration succeeds");
    ExperimentConfig {
        qd,
        noise: vec![NoiseSpec::Fixed(CoupledNoise {
            model: calibrated.spectral().clone(),
            coupling: Coupling::Electrical,
        })],
        task: TaskKind::Decay,
        sequence: Some(SequenceSpec {
            kind: SequenceKind::Cp,
            n_pi: NPiSpec::Axis(vec![1, 2, 4, 8, 16]),
        }),
        b_ext_tesla: vec![5.0],
        delays: Some(DelayGrid {
            scale: GridScale::Log,
            min_s: 2e-7,
            max_s: 2.4e-5,
            count: 28,
        }),
        n_traj: 2_000,
        seed: 0x0dd5_eed5,
        engine: EngineSelect::Ff,
        output_dir: PathBuf::from("runs/figure-4"),
        intensity: None,
        noise_scale_axis: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_lookup() {
        for name in PRESET_NAMES {
            assert!(by_name(name).is_ok(), "{name} missing");
        }
        assert!(by_name("figure-9").is_err());
    }

    #[test]
    fn revival_species_shares_sum_to_total() {
        let species = revival_species();
        let total: f64 = species.iter().map(|s| s.rms_field_tesla.powi(2)).sum();
        assert!((total.sqrt() - 2.4e-4).abs() / 2.4e-4 < 0.01);
    }

    #[test]
    fn figure_4_model_reaches_reference_dd_time_at_ten_pulses() {
        // the calibrated decoupling model at N_π = 10 lands on
        // T₂ = 4.40 μs within 15%
        use crate::analysis::fit_stretched_exp;
        use crate::coherence::ff_visibility;
        use crate::pulse::PulseSequence;
        let config = figure_4();
        let qd = &config.qd;
        let sources: Vec<_> = config
            .noise
            .iter()
            .map(|spec| spec.resolve(qd, 5.0).unwrap())
            .collect();
        let delays: Vec<f64> = (0..24)
            .map(|i| 4.4e-6 * 10f64.powf(-1.1 + 1.6 * i as f64 / 23.0))
            .collect();
        let curve =
            ff_visibility(&PulseSequence::cp(10, 1.0), &sources, qd, 5.0, &delays).unwrap();
        let fit = fit_stretched_exp(&curve, None).unwrap();
        assert!(
            (fit.t2_s - 4.40e-6).abs() < 0.15 * 4.40e-6,
            "T₂(N_π = 10) = {:.3} μs vs 4.40 μs ± 15%",
            fit.t2_s * 1e6
        );
    }

    #[test]
    fn quasi_static_sigma_reproduces_target_t2star() {
        let qd = QdParameters::reference_dot();
        let sigma_f = quasi_static_sigma_for_t2star(&qd, 53.8e-9, 6.5);
        let shift_hz = qd.electrical_detuning(sigma_f, 6.5);
        let t2star = 2f64.sqrt() / (TWO_PI * shift_hz);
        assert!((t2star - 53.8e-9).abs() / 53.8e-9 < 1e-9);
    }
}
