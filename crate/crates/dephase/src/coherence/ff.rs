//! Analytic filter-function engine for Gaussian noise.
//!
//! The visibility is `V(τ) = exp(−χ(τ))` with
//! `χ(τ) = ½ ∫₀^∞ S_ω(f) · |Ỹ(2πf)|² df`, where `S_ω` is the one-sided
//! PSD of the angular detuning and `|Ỹ|²` the sequence filter weight.
//! The prefactor is pinned by two analytic limits that double as unit
//! tests here: a quasi-static Gaussian under Ramsey gives
//! `exp(−σ_ω²τ²/2)`, and Ornstein–Uhlenbeck noise reproduces its closed
//! form `χ = σ_ω²τ_c²(τ/τ_c + e^(−τ/τ_c) − 1)`.
//!
//! Non-Gaussian sources (telegraph fluctuators) and the nonlinear
//! second-order hyperfine coupling are rejected; those belong to the
//! Monte-Carlo engine.

use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::pulse::{filter_weight, PulseSequence};
use crate::spin::QdParameters;
use crate::units::TWO_PI;

use super::{
    describe_noise, validate_delays, Coupling, CoupledNoise, CurveMeta, DecayCurve, EngineKind,
};

/// True when every source can be treated analytically: Gaussian models
/// behind linear couplings.
pub fn ff_supported(noise: &[CoupledNoise]) -> bool {
    noise.iter().all(|src| {
        src.coupling != Coupling::NuclearZSecondOrder && model_supported(&src.model)
    })
}

fn model_supported(model: &NoiseModel) -> bool {
    match model {
        NoiseModel::Telegraph { .. } => false,
        NoiseModel::OrnsteinUhlenbeck { tau_c_s, .. } => *tau_c_s > 0.0,
        NoiseModel::SpectralGaussian { .. }
        | NoiseModel::QuasiStaticGaussian { .. }
        | NoiseModel::PrecessingField { .. } => true,
        NoiseModel::Composite { members } => members.iter().all(model_supported),
    }
}

/// Decoherence exponent `χ(τ)` of a sequence under the given noise set.
pub fn ff_chi(
    seq: &PulseSequence,
    noise: &[CoupledNoise],
    params: &QdParameters,
    b_ext_tesla: f64,
) -> Result<f64> {
    seq.validate()?;
    let mut chi = 0.0;
    for src in noise {
        src.model.validate()?;
        let Some(gain_hz) = src.linear_gain_hz(params, b_ext_tesla) else {
            return Err(Error::EngineRejection(
                "second-order nuclear coupling is non-Gaussian in phase; use the Monte-Carlo engine"
                    .into(),
            ));
        };
        let gain_sq = (TWO_PI * gain_hz).powi(2);
        chi += chi_for_model(seq, &src.model, gain_sq)?;
    }
    Ok(chi)
}

fn chi_for_model(seq: &PulseSequence, model: &NoiseModel, gain_sq: f64) -> Result<f64> {
    match model {
        NoiseModel::Telegraph { .. } => Err(Error::EngineRejection(
            "telegraph noise is non-Gaussian; use the Monte-Carlo engine".into(),
        )),
        NoiseModel::QuasiStaticGaussian { sigma } => {
            // zero-frequency line: χ = ½ σ_ω² |Ỹ(0)|²
            Ok(0.5 * gain_sq * sigma * sigma * filter_weight(seq, 0.0))
        }
        NoiseModel::PrecessingField { components } => Ok(components
            .iter()
            .map(|c| {
                let var_omega = gain_sq * c.rms * c.rms;
                0.5 * var_omega * filter_weight(seq, c.omega_rad_per_s / TWO_PI)
            })
            .sum()),
        NoiseModel::OrnsteinUhlenbeck { sigma, tau_c_s } => {
            if *tau_c_s <= 0.0 {
                return Err(Error::EngineRejection(
                    "zero-correlation-time noise has no bandwidth-independent spectrum".into(),
                ));
            }
            let var = sigma * sigma;
            let tau_c = *tau_c_s;
            let s_omega =
                move |f: f64| gain_sq * 4.0 * var * tau_c / (1.0 + (TWO_PI * f * tau_c).powi(2));
            let knee = 1.0 / (TWO_PI * tau_c);
            let f_hi = 2000.0 * knee + 100.0 * band_scale(seq);
            Ok(chi_integral(seq, &s_omega, 0.0, f_hi))
        }
        NoiseModel::SpectralGaussian {
            lambda,
            amplitude,
            f_min_hz,
            f_max_hz,
        } => {
            let (lambda, amplitude) = (*lambda, *amplitude);
            let s_omega = move |f: f64| gain_sq * amplitude / f.powf(lambda);
            Ok(chi_integral(seq, &s_omega, *f_min_hz, *f_max_hz))
        }
        NoiseModel::Composite { members } => {
            let mut acc = 0.0;
            for m in members {
                acc += chi_for_model(seq, m, gain_sq)?;
            }
            Ok(acc)
        }
    }
}

fn band_scale(seq: &PulseSequence) -> f64 {
    seq.n_pi.max(1) as f64 / seq.total_delay_s
}

/// `½ ∫ S_ω(f)·|Ỹ(2πf)|² df` over `[f_lo, f_hi]` in three panels: a
/// logarithmic one below the filter's first structure, a linear one
/// resolving the filter oscillations (48 points per 1/τ), and a
/// logarithmic tail using the period-averaged filter envelope
/// `2(N+1)/ω²`.
fn chi_integral(seq: &PulseSequence, s_omega: &dyn Fn(f64) -> f64, f_lo: f64, f_hi: f64) -> f64 {
    let tau = seq.total_delay_s;
    let n_seg = seq.n_pi as f64 + 1.0;
    let f_smooth = 0.25 / tau;
    let f_fine_end = (40.0 * seq.n_pi.max(1) as f64 + 64.0) / tau;
    let mut total = 0.0;

    // panel 1: log grid where the filter is smooth
    let p1_lo = if f_lo > 0.0 { f_lo } else { f_smooth * 1e-9 };
    let p1_hi = f_smooth.min(f_hi);
    if p1_lo < p1_hi {
        total += log_trapezoid(
            |f| s_omega(f) * filter_weight(seq, f),
            p1_lo,
            p1_hi,
            600,
        );
    }

    // panel 2: linear grid through the passband and its harmonics
    let p2_lo = f_lo.max(f_smooth.min(f_hi));
    let p2_hi = f_fine_end.min(f_hi);
    if p2_lo < p2_hi {
        let steps = (((p2_hi - p2_lo) * 48.0 * tau).ceil() as usize).clamp(16, 4_000_000);
        let h = (p2_hi - p2_lo) / steps as f64;
        let g = |f: f64| s_omega(f) * filter_weight(seq, f);
        let mut acc = 0.5 * (g(p2_lo) + g(p2_hi));
        for i in 1..steps {
            acc += g(p2_lo + i as f64 * h);
        }
        total += acc * h;
    }

    // panel 3: period-averaged tail, |Ỹ|² → 2(N+1)/ω²
    let p3_lo = f_lo.max(f_fine_end);
    if p3_lo < f_hi {
        total += log_trapezoid(
            |f| s_omega(f) * 2.0 * n_seg / (TWO_PI * f).powi(2),
            p3_lo,
            f_hi,
            300,
        );
    }

    0.5 * total
}

fn log_trapezoid(g: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> f64 {
    let (u_lo, u_hi) = (lo.ln(), hi.ln());
    let h = (u_hi - u_lo) / points as f64;
    // integrate g(e^u)·e^u du
    let gu = |u: f64| {
        let f = u.exp();
        g(f) * f
    };
    let mut acc = 0.5 * (gu(u_lo) + gu(u_hi));
    for i in 1..points {
        acc += gu(u_lo + i as f64 * h);
    }
    acc * h
}

/// Analytic decay curve `V(τ) = exp(−χ(τ))` for Gaussian noise.
pub fn ff_visibility(
    seq: &PulseSequence,
    noise: &[CoupledNoise],
    params: &QdParameters,
    b_ext_tesla: f64,
    delays_s: &[f64],
) -> Result<DecayCurve> {
    validate_delays(delays_s)?;
    params.validate()?;
    let mut visibility = Vec::with_capacity(delays_s.len());
    for &tau in delays_s {
        let chi = ff_chi(&seq.with_delay(tau), noise, params, b_ext_tesla)?;
        if !chi.is_finite() {
            return Err(Error::Numerical(format!(
                "non-finite decoherence exponent at τ = {tau:.3e}"
            )));
        }
        visibility.push((-chi).exp());
    }
    let curve = DecayCurve {
        delays_s: delays_s.to_vec(),
        visibility,
        stderr: vec![0.0; delays_s.len()],
        meta: CurveMeta {
            sequence: seq.kind,
            n_pi: seq.n_pi,
            b_ext_tesla,
            noise: describe_noise(noise),
            n_trajectories: 0,
            seed: 0,
            engine: EngineKind::Ff,
        },
    };
    curve.validate()?;
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherence::{mc_visibility, McConfig};
    use crate::noise::PrecessingComponent;

    fn qd() -> QdParameters {
        QdParameters::reference_dot()
    }

    fn lin(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn quasi_static_ramsey_anchor_is_exact() {
        // the first normalization anchor: χ = σ_ω²τ²/2 exactly
        let sigma_hz = 3e6;
        let noise = [CoupledNoise::direct(NoiseModel::quasi_static(sigma_hz))];
        for tau in [1e-8, 5e-8, 2e-7] {
            let chi = ff_chi(&PulseSequence::ramsey(tau), &noise, &qd(), 1.0).unwrap();
            let expected = (TWO_PI * sigma_hz * tau).powi(2) / 2.0;
            assert!(
                (chi - expected).abs() < 1e-10 * expected,
                "χ = {chi} vs {expected}"
            );
        }
        // refocused exactly for any CP order
        for n_pi in 1..=5 {
            let chi = ff_chi(&PulseSequence::cp(n_pi, 1e-7), &noise, &qd(), 1.0).unwrap();
            assert!(chi.abs() < 1e-20);
        }
    }

    #[test]
    fn ou_ramsey_matches_closed_form() {
        // the second normalization anchor:
        // χ(τ) = σ_ω²τ_c²(τ/τ_c + e^(−τ/τ_c) − 1), within 1%
        let sigma_hz = 1e6;
        let tau_c = 1e-6;
        let noise = [CoupledNoise::direct(NoiseModel::ornstein_uhlenbeck(
            sigma_hz, tau_c,
        ))];
        let sig_om = TWO_PI * sigma_hz;
        for ratio in [0.05, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0] {
            let tau = ratio * tau_c;
            let chi = ff_chi(&PulseSequence::ramsey(tau), &noise, &qd(), 1.0).unwrap();
            let x: f64 = tau / tau_c;
            let expected = sig_om * sig_om * tau_c * tau_c * (x + (-x).exp() - 1.0);
            assert!(
                (chi - expected).abs() / expected < 0.01,
                "τ/τ_c = {ratio}: χ = {chi} vs {expected}"
            );
        }
    }

    #[test]
    fn ou_hahn_matches_closed_form() {
        // double time integral of the exponential covariance under Hahn:
        // χ_E = σ_ω²τ_c²(τ/τ_c − 3 − e^(−τ/τ_c) + 4e^(−τ/2τ_c))
        let sigma_hz = 1.5e6;
        let tau_c = 5e-7;
        let noise = [CoupledNoise::direct(NoiseModel::ornstein_uhlenbeck(
            sigma_hz, tau_c,
        ))];
        let sig_om = TWO_PI * sigma_hz;
        for ratio in [0.2, 0.5, 1.0, 2.0, 5.0, 15.0] {
            let tau = ratio * tau_c;
            let chi = ff_chi(&PulseSequence::hahn(tau), &noise, &qd(), 1.0).unwrap();
            let x: f64 = tau / tau_c;
            let expected =
                sig_om * sig_om * tau_c * tau_c * (x - 3.0 - (-x).exp() + 4.0 * (-x / 2.0).exp());
            assert!(
                (chi - expected).abs() / expected < 0.01,
                "τ/τ_c = {ratio}: χ_E = {chi} vs {expected}"
            );
        }
    }

    #[test]
    fn chi_is_linear_in_psd_amplitude() {
        let base = NoiseModel::spectral_gaussian(0.56, 1e10, 1e3, 1e8);
        let scaled = NoiseModel::spectral_gaussian(0.56, 3e10, 1e3, 1e8);
        let seq = PulseSequence::cp(4, 2e-6);
        let c1 = ff_chi(&seq, &[CoupledNoise::direct(base)], &qd(), 1.0).unwrap();
        let c3 = ff_chi(&seq, &[CoupledNoise::direct(scaled)], &qd(), 1.0).unwrap();
        assert!((c3 / c1 - 3.0).abs() < 1e-9, "χ must scale with the PSD");
    }

    #[test]
    fn one_over_f_chi_grows_as_tau_to_one_plus_lambda() {
        let lambda = 0.56;
        let noise = [CoupledNoise::direct(NoiseModel::spectral_gaussian(
            lambda, 1e9, 1e2, 1e9,
        ))];
        let seq = PulseSequence::hahn(1.0);
        let chi1 = ff_chi(&seq.with_delay(1e-6), &noise, &qd(), 1.0).unwrap();
        let chi2 = ff_chi(&seq.with_delay(2e-6), &noise, &qd(), 1.0).unwrap();
        let expected = 2f64.powf(1.0 + lambda);
        assert!(
            (chi2 / chi1 - expected).abs() / expected < 0.01,
            "χ(2τ)/χ(τ) = {} vs 2^(1+λ) = {expected}",
            chi2 / chi1
        );
    }

    #[test]
    fn precessing_field_matches_single_cosine_oracle() {
        // Hahn on one precessing component: χ = 8(σ_ω/ω)² sin⁴(ωτ/4)
        let omega = TWO_PI * 14.58e6;
        let rms_hz = 2e6;
        let noise = [CoupledNoise::direct(NoiseModel::PrecessingField {
            components: vec![PrecessingComponent {
                rms: rms_hz,
                omega_rad_per_s: omega,
            }],
        })];
        let sig_om = TWO_PI * rms_hz;
        for tau in lin(1e-8, 3e-7, 11) {
            let chi = ff_chi(&PulseSequence::hahn(tau), &noise, &qd(), 2.0).unwrap();
            let expected = 8.0 * (sig_om / omega).powi(2) * (omega * tau / 4.0).sin().powi(4);
            assert!(
                (chi - expected).abs() < 1e-9 * expected.max(1e-12),
                "τ = {tau:.2e}: χ = {chi} vs {expected}"
            );
        }
    }

    #[test]
    fn rejects_non_gaussian_and_nonlinear_configurations() {
        let telegraph = [CoupledNoise::direct(NoiseModel::telegraph(1.0, 10.0, 10.0))];
        assert!(matches!(
            ff_chi(&PulseSequence::hahn(1e-6), &telegraph, &qd(), 1.0),
            Err(Error::EngineRejection(_))
        ));
        let second = [CoupledNoise {
            model: NoiseModel::quasi_static(1e-4),
            coupling: Coupling::NuclearZSecondOrder,
        }];
        assert!(matches!(
            ff_chi(&PulseSequence::ramsey(1e-7), &second, &qd(), 1.0),
            Err(Error::EngineRejection(_))
        ));
        assert!(!ff_supported(&telegraph));
        assert!(!ff_supported(&second));
        assert!(ff_supported(&[CoupledNoise::direct(
            NoiseModel::spectral_gaussian(0.5, 1.0, 1.0, 10.0)
        )]));
    }

    #[test]
    fn mc_and_ff_agree_for_gaussian_models() {
        // the module's central correctness property, on three different
        // Gaussian models and sequences
        let qd = qd();
        let cases: Vec<(PulseSequence, Vec<CoupledNoise>, Vec<f64>)> = vec![
            (
                PulseSequence::ramsey(1.0),
                vec![CoupledNoise::direct(NoiseModel::ornstein_uhlenbeck(
                    2e6, 2e-7,
                ))],
                lin(2e-8, 5e-7, 8),
            ),
            (
                PulseSequence::hahn(1.0),
                vec![CoupledNoise::direct(NoiseModel::ornstein_uhlenbeck(
                    4e6, 1e-7,
                ))],
                lin(5e-8, 8e-7, 8),
            ),
            (
                PulseSequence::cp(4, 1.0),
                vec![CoupledNoise::direct(NoiseModel::spectral_gaussian(
                    0.56, 4e13, 1e4, 2e7,
                ))],
                lin(2e-7, 4e-6, 8),
            ),
        ];
        for (seq, noise, taus) in cases {
            let ff = ff_visibility(&seq, &noise, &qd, 1.0, &taus).unwrap();
            let cfg = McConfig::new(3_000, 77);
            let mc = mc_visibility(&seq, &noise, &qd, 1.0, &taus, &cfg).unwrap();
            for (i, &tau) in taus.iter().enumerate() {
                let d = (ff.visibility[i] - mc.visibility[i]).abs();
                let tol = 3.0 * mc.stderr[i] + 5e-3;
                assert!(
                    d < tol,
                    "{:?} N={} τ={tau:.2e}: ff {} vs mc {} ± {}",
                    seq.kind,
                    seq.n_pi,
                    ff.visibility[i],
                    mc.visibility[i],
                    mc.stderr[i]
                );
            }
        }
    }

    #[test]
    fn mc_discretization_converges() {
        // halving dt changes the curve by < 0.5% on a reference case
        let qd = qd();
        let noise = [CoupledNoise::direct(NoiseModel::ornstein_uhlenbeck(
            3e6, 2e-7,
        ))];
        let taus = lin(1e-7, 1e-6, 5);
        let seq = PulseSequence::cp(2, 1.0);
        let coarse = McConfig::new(4_000, 13).with_dt(taus[0] / 20.0);
        let fine = McConfig::new(4_000, 13).with_dt(taus[0] / 40.0);
        let a = mc_visibility(&seq, &noise, &qd, 1.0, &taus, &coarse).unwrap();
        let b = mc_visibility(&seq, &noise, &qd, 1.0, &taus, &fine).unwrap();
        for i in 0..taus.len() {
            assert!(
                (a.visibility[i] - b.visibility[i]).abs() < 5e-3 + 3.0 * (a.stderr[i] + b.stderr[i]),
                "dt refinement moved V from {} to {}",
                a.visibility[i],
                b.visibility[i]
            );
        }
    }
}
