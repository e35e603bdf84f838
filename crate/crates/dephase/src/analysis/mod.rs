//! Curve fitting and exponent extraction.
//!
//! Decay curves are fit to the stretched exponential
//! `V(τ) = V₀·exp[−(τ/T₂)^α]`; coherence-time scalings to power laws
//! `T₂(N_π) = T₂⁰·N_π^γ` and `T(B) ∝ B^p`; intensity autocorrelations
//! to a sum of exponentials plus a `1/τ^(1−λ)` power law. The exponent
//! identities `λ = γ/(1−γ)` and `α = 1 + λ` tie the three routes
//! together.
//!
//! All fitters run the damped least-squares core in log-parameter
//! space, so positivity is structural and quoted uncertainties come
//! from the local quadratic approximation mapped back with the delta
//! method.

mod intensity;

pub use intensity::{
    fit_autocorr_model, simulate_intensity, AutocorrFit, ExponentialComponent,
};

use serde::{Deserialize, Serialize};

use crate::coherence::{ff_chi, CoupledNoise, Coupling, DecayCurve};
use crate::error::{Error, Result};
use crate::fit::{fit_least_squares, weighted_linear_fit, LmOptions};
use crate::noise::NoiseModel;
use crate::pulse::PulseSequence;
use crate::spin::QdParameters;

/// One named parameter estimate with its 1σ uncertainty.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitParam {
    pub name: String,
    pub value: f64,
    pub sigma: f64,
}

/// A generic fit report: parameter table, residual norm and model tag.
/// Emitted as JSON by the harness.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub model: String,
    pub params: Vec<FitParam>,
    pub residual_norm: f64,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<&FitParam> {
        self.params.iter().find(|p| p.name == name)
    }
}

/// Stretched-exponential fit `V(τ) = V₀ exp[−(τ/T₂)^α]`.
#[derive(Debug, Clone)]
pub struct StretchedExpFit {
    pub v0: f64,
    pub v0_sigma: f64,
    pub t2_s: f64,
    pub t2_sigma_s: f64,
    pub alpha: f64,
    pub alpha_sigma: f64,
    pub residual_norm: f64,
}

impl StretchedExpFit {
    pub fn into_fit_result(self) -> FitResult {
        FitResult {
            model: "stretched_exp".into(),
            params: vec![
                FitParam {
                    name: "v0".into(),
                    value: self.v0,
                    sigma: self.v0_sigma,
                },
                FitParam {
                    name: "t2_s".into(),
                    value: self.t2_s,
                    sigma: self.t2_sigma_s,
                },
                FitParam {
                    name: "alpha".into(),
                    value: self.alpha,
                    sigma: self.alpha_sigma,
                },
            ],
            residual_norm: self.residual_norm,
            converged: true,
            notes: Vec::new(),
        }
    }
}

fn curve_sigmas(curve: &DecayCurve) -> Option<Vec<f64>> {
    if curve.stderr.iter().all(|&s| s > 0.0) {
        Some(curve.stderr.clone())
    } else {
        None
    }
}

/// Fit a decay curve to `V₀ exp[−(τ/T₂)^α]`, weighted by `1/stderr²`
/// when errors are available. With `fix_alpha` the exponent is held.
///
/// A free-α fit demands ≥ 5 points spanning the decay from above
/// 0.8·V₀ to below 0.3·V₀; shallower data are reported as an error
/// rather than silently fit.
pub fn fit_stretched_exp(curve: &DecayCurve, fix_alpha: Option<f64>) -> Result<StretchedExpFit> {
    curve.validate()?;
    let v_max = curve.visibility.iter().cloned().fold(f64::MIN, f64::max);
    let v_min = curve.visibility.iter().cloned().fold(f64::MAX, f64::min);
    if fix_alpha.is_none() {
        if curve.len() < 5 {
            return Err(Error::FitFailure(
                "free-α fit needs at least 5 points".into(),
            ));
        }
        if v_min > 0.3 * v_max || v_max <= 0.0 {
            return Err(Error::FitFailure(format!(
                "insufficient dynamic range for a free-α fit: V spans [{v_min:.3}, {v_max:.3}], need below 0.3·V₀"
            )));
        }
    }
    let sigmas = curve_sigmas(curve);
    // initial T₂ from the interpolated 1/e crossing
    let target = v_max / std::f64::consts::E;
    let mut t2_init = curve.delays_s[curve.len() / 2];
    for i in 1..curve.len() {
        if curve.visibility[i] <= target && curve.visibility[i - 1] > target {
            let (v0, v1) = (curve.visibility[i - 1], curve.visibility[i]);
            let (t0, t1) = (curve.delays_s[i - 1], curve.delays_s[i]);
            let frac = (v0 - target) / (v0 - v1);
            t2_init = t0 + frac * (t1 - t0);
            break;
        }
    }
    let alpha_init = fix_alpha.unwrap_or(1.5);

    let fit = match fix_alpha {
        None => {
            let theta0 = [v_max.max(1e-6).ln(), t2_init.ln(), alpha_init.ln()];
            fit_least_squares(
                |t, tau| {
                    let (v0, t2, alpha) = (t[0].exp(), t[1].exp(), t[2].exp());
                    v0 * (-(tau / t2).powf(alpha)).exp()
                },
                &curve.delays_s,
                &curve.visibility,
                sigmas.as_deref(),
                &theta0,
                LmOptions::default(),
            )?
        }
        Some(alpha) => {
            if !(alpha.is_finite() && alpha > 0.0) {
                return Err(Error::invalid("fix_alpha", "must be > 0"));
            }
            let theta0 = [v_max.max(1e-6).ln(), t2_init.ln()];
            fit_least_squares(
                |t, tau| {
                    let (v0, t2) = (t[0].exp(), t[1].exp());
                    v0 * (-(tau / t2).powf(alpha)).exp()
                },
                &curve.delays_s,
                &curve.visibility,
                sigmas.as_deref(),
                &theta0,
                LmOptions::default(),
            )?
        }
    };
    if !fit.converged {
        return Err(Error::FitFailure(
            "stretched-exponential fit did not converge".into(),
        ));
    }
    let v0 = fit.params[0].exp();
    let t2 = fit.params[1].exp();
    let (alpha, alpha_sigma) = match fix_alpha {
        None => (fit.params[2].exp(), fit.params[2].exp() * fit.sigma(2)),
        Some(a) => (a, 0.0),
    };
    Ok(StretchedExpFit {
        v0,
        v0_sigma: v0 * fit.sigma(0),
        t2_s: t2,
        t2_sigma_s: t2 * fit.sigma(1),
        alpha,
        alpha_sigma,
        residual_norm: fit.chi2,
    })
}

/// Power-law fit of coherence time versus pulse number,
/// `T₂(N_π) = T₂⁰·N_π^γ`, by weighted log-log regression.
#[derive(Debug, Clone)]
pub struct ScalingFit {
    pub t2_0_s: f64,
    pub t2_0_sigma_s: f64,
    pub gamma: f64,
    pub gamma_sigma: f64,
    pub residual_norm: f64,
}

/// Fit `(N_π, T₂, σ_T₂)` points to `T₂⁰·N_π^γ`.
pub fn fit_scaling(points: &[(usize, f64, f64)]) -> Result<ScalingFit> {
    let mut distinct: Vec<usize> = points.iter().map(|p| p.0).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::FitFailure("need ≥ 3 distinct N_π values".into()));
    }
    if points.iter().any(|p| p.0 == 0 || p.1 <= 0.0) {
        return Err(Error::invalid("points", "N_π and T₂ must be positive"));
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let sig: Option<Vec<f64>> = if points.iter().all(|p| p.2 > 0.0) {
        Some(points.iter().map(|p| p.2 / p.1).collect())
    } else {
        None
    };
    let (a, b, sa, sb, chi2) = weighted_linear_fit(&xs, &ys, sig.as_deref())?;
    Ok(ScalingFit {
        t2_0_s: a.exp(),
        t2_0_sigma_s: a.exp() * sa,
        gamma: b,
        gamma_sigma: sb,
        residual_norm: chi2,
    })
}

/// Power-law fit of a timescale versus magnetic field, `T(B) = c·B^p`.
#[derive(Debug, Clone)]
pub struct FieldPowerLawFit {
    pub exponent: f64,
    pub exponent_sigma: f64,
    pub prefactor: f64,
    pub residual_norm: f64,
}

pub fn fit_power_law_field(points: &[(f64, f64, f64)]) -> Result<FieldPowerLawFit> {
    if points.len() < 3 {
        return Err(Error::FitFailure("need ≥ 3 field points".into()));
    }
    if points.iter().any(|p| p.0 <= 0.0 || p.1 <= 0.0) {
        return Err(Error::invalid("points", "fields and times must be positive"));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let sig: Option<Vec<f64>> = if points.iter().all(|p| p.2 > 0.0) {
        Some(points.iter().map(|p| p.2 / p.1).collect())
    } else {
        None
    };
    let (a, b, _sa, sb, chi2) = weighted_linear_fit(&xs, &ys, sig.as_deref())?;
    Ok(FieldPowerLawFit {
        exponent: b,
        exponent_sigma: sb,
        prefactor: a.exp(),
        residual_norm: chi2,
    })
}

/// `λ = γ/(1 − γ)`: noise spectral exponent from the decoupling
/// scaling exponent.
pub fn lambda_from_gamma(gamma: f64) -> Result<f64> {
    if !(gamma.is_finite() && (0.0..1.0).contains(&gamma)) {
        return Err(Error::invalid("gamma", format!("{gamma} outside [0, 1)")));
    }
    Ok(gamma / (1.0 - gamma))
}

/// `γ = λ/(1 + λ)`: inverse of [`lambda_from_gamma`].
pub fn gamma_from_lambda(lambda: f64) -> Result<f64> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::invalid("lambda", format!("{lambda} must be ≥ 0")));
    }
    Ok(lambda / (1.0 + lambda))
}

/// Joint fit of a decay-curve family with one shared stretching
/// exponent α and per-curve `(V₀, T₂)`.
#[derive(Debug, Clone)]
pub struct GlobalAlphaFit {
    pub alpha: f64,
    pub alpha_sigma: f64,
    /// Per-curve `(V₀, T₂, σ_T₂)` in input order.
    pub per_curve: Vec<(f64, f64, f64)>,
    pub residual_norm: f64,
    /// Set when per-curve free-α fits beat the shared-α model by more
    /// than the nested-model allowance, indicating the family does not
    /// share one exponent.
    pub heterogeneous: bool,
}

pub fn global_alpha_fit(curves: &[DecayCurve]) -> Result<GlobalAlphaFit> {
    if curves.len() < 2 {
        return Err(Error::FitFailure("need ≥ 2 curves for a global fit".into()));
    }
    for c in curves {
        c.validate()?;
    }
    // flatten the family onto one abscissa index
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut sig = Vec::new();
    let mut table = Vec::new(); // (curve index, τ)
    for (j, c) in curves.iter().enumerate() {
        for i in 0..c.len() {
            xs.push(table.len() as f64);
            table.push((j, c.delays_s[i]));
            ys.push(c.visibility[i]);
            sig.push(c.stderr[i]);
        }
    }
    let weighted = sig.iter().all(|&s| s > 0.0);
    let sigmas = weighted.then_some(sig);

    // θ = [ln α, (ln V₀_j, ln T₂_j)…]
    let mut theta0 = vec![1.5f64.ln()];
    for c in curves {
        let v_max = c.visibility.iter().cloned().fold(f64::MIN, f64::max);
        let init = fit_stretched_exp(c, Some(1.5))
            .map(|f| f.t2_s)
            .unwrap_or(c.delays_s[c.len() / 2]);
        theta0.push(v_max.max(1e-6).ln());
        theta0.push(init.ln());
    }
    let model = {
        let table = table.clone();
        move |t: &[f64], x: f64| {
            let (j, tau) = table[x as usize];
            let alpha = t[0].exp();
            let v0 = t[1 + 2 * j].exp();
            let t2 = t[2 + 2 * j].exp();
            v0 * (-(tau / t2).powf(alpha)).exp()
        }
    };
    let fit = fit_least_squares(model, &xs, &ys, sigmas.as_deref(), &theta0, LmOptions::default())?;
    if !fit.converged {
        return Err(Error::FitFailure("global α fit did not converge".into()));
    }
    let alpha = fit.params[0].exp();
    let per_curve: Vec<(f64, f64, f64)> = (0..curves.len())
        .map(|j| {
            let v0 = fit.params[1 + 2 * j].exp();
            let t2 = fit.params[2 + 2 * j].exp();
            (v0, t2, t2 * fit.sigma(2 + 2 * j))
        })
        .collect();

    // nested-model heterogeneity diagnostic against per-curve free α
    let mut chi2_free = 0.0;
    let mut free_ok = true;
    for c in curves {
        match fit_stretched_exp(c, None) {
            Ok(f) => chi2_free += f.residual_norm,
            Err(_) => free_ok = false,
        }
    }
    let extra_dof = (curves.len() - 1) as f64;
    let heterogeneous = if free_ok {
        let allowance = 4.0 * extra_dof + 10.0;
        if weighted {
            fit.chi2 - chi2_free > allowance
        } else {
            let scale = (chi2_free / fit.dof.max(1) as f64).max(1e-300);
            (fit.chi2 - chi2_free) / scale > allowance
        }
    } else {
        false
    };

    Ok(GlobalAlphaFit {
        alpha,
        alpha_sigma: alpha * fit.sigma(0),
        per_curve,
        residual_norm: fit.chi2,
        heterogeneous,
    })
}

/// Electrical-noise model with its overall coupling scale calibrated
/// to a measured Hahn-echo coherence time. Built by
/// [`calibrate_to_hahn_t2`]; the calibration fixes the `1/f^λ`
/// amplitude, and the slow (quasi-static) component rides on it with
/// the configured ratio.
#[derive(Debug, Clone)]
pub struct CalibratedElectricalModel {
    spectral: NoiseModel,
    quasi_static_sigma_v_per_m: f64,
    reference_b_tesla: f64,
    reference_hahn_t2_s: f64,
}

impl CalibratedElectricalModel {
    pub fn spectral(&self) -> &NoiseModel {
        &self.spectral
    }

    pub fn quasi_static_sigma_v_per_m(&self) -> f64 {
        self.quasi_static_sigma_v_per_m
    }

    pub fn reference_hahn_t2_s(&self) -> f64 {
        self.reference_hahn_t2_s
    }

    pub fn reference_b_tesla(&self) -> f64 {
        self.reference_b_tesla
    }

    /// The coupled-noise set this model describes.
    pub fn sources(&self) -> Vec<CoupledNoise> {
        let mut out = vec![CoupledNoise {
            model: self.spectral.clone(),
            coupling: Coupling::Electrical,
        }];
        if self.quasi_static_sigma_v_per_m > 0.0 {
            out.push(CoupledNoise {
                model: NoiseModel::quasi_static(self.quasi_static_sigma_v_per_m),
                coupling: Coupling::Electrical,
            });
        }
        out
    }

    /// Scale the spectral PSD by `k` (quasi-static rms scales by √k),
    /// for sensitivity studies.
    pub fn with_scaled_psd(&self, k: f64) -> CalibratedElectricalModel {
        let NoiseModel::SpectralGaussian {
            lambda,
            amplitude,
            f_min_hz,
            f_max_hz,
        } = self.spectral
        else {
            unreachable!("calibrated spectral member is always a power law")
        };
        CalibratedElectricalModel {
            spectral: NoiseModel::spectral_gaussian(lambda, amplitude * k, f_min_hz, f_max_hz),
            quasi_static_sigma_v_per_m: self.quasi_static_sigma_v_per_m * k.sqrt(),
            ..self.clone()
        }
    }

    /// Drop the quasi-static component, keeping the band as calibrated.
    pub fn without_quasi_static(&self) -> CalibratedElectricalModel {
        CalibratedElectricalModel {
            quasi_static_sigma_v_per_m: 0.0,
            ..self.clone()
        }
    }
}

/// Shape of the electrical noise before calibration: a `1/f^λ` band
/// plus a quasi-static share expressed relative to the in-band rms.
#[derive(Debug, Clone)]
pub struct ElectricalNoiseTemplate {
    pub lambda: f64,
    pub f_min_hz: f64,
    pub f_max_hz: f64,
    /// σ(quasi-static)/σ(in-band), both in process units; zero for a
    /// pure power-law model.
    pub quasi_static_ratio: f64,
}

/// Fix the template's amplitude so the Hahn-echo 1/e time at
/// `b_ext_tesla` equals `target_hahn_t2_s` (the quasi-static part is
/// invisible to the echo, so the band amplitude alone is determined).
pub fn calibrate_to_hahn_t2(
    params: &QdParameters,
    b_ext_tesla: f64,
    target_hahn_t2_s: f64,
    template: &ElectricalNoiseTemplate,
) -> Result<CalibratedElectricalModel> {
    if !(target_hahn_t2_s.is_finite() && target_hahn_t2_s > 0.0) {
        return Err(Error::invalid("target_hahn_t2_s", "must be > 0"));
    }
    if template.quasi_static_ratio < 0.0 {
        return Err(Error::invalid("quasi_static_ratio", "must be ≥ 0"));
    }
    let unit = NoiseModel::spectral_gaussian(
        template.lambda,
        1.0,
        template.f_min_hz,
        template.f_max_hz,
    );
    unit.validate()?;
    let probe = [CoupledNoise {
        model: unit.clone(),
        coupling: Coupling::Electrical,
    }];
    let chi_unit = ff_chi(
        &PulseSequence::hahn(target_hahn_t2_s),
        &probe,
        params,
        b_ext_tesla,
    )?;
    if !(chi_unit.is_finite() && chi_unit > 0.0) {
        return Err(Error::Numerical(
            "unit-amplitude echo exponent vanished; widen the band".into(),
        ));
    }
    // χ is linear in the PSD amplitude, so χ(T₂) = 1 fixes it
    let amplitude = 1.0 / chi_unit;
    let spectral = NoiseModel::spectral_gaussian(
        template.lambda,
        amplitude,
        template.f_min_hz,
        template.f_max_hz,
    );
    let band_rms = spectral.variance().sqrt();
    Ok(CalibratedElectricalModel {
        spectral,
        quasi_static_sigma_v_per_m: template.quasi_static_ratio * band_rms,
        reference_b_tesla: b_ext_tesla,
        reference_hahn_t2_s: target_hahn_t2_s,
    })
}

/// Predicted inhomogeneous dephasing time: the analytic Ramsey
/// envelope of the calibrated model (band integral plus quasi-static
/// contribution) is generated on a log grid and the 1/e time of a
/// free-α stretched-exponential fit is returned.
pub fn predict_t2star(
    model: &CalibratedElectricalModel,
    params: &QdParameters,
    b_ext_tesla: f64,
) -> Result<f64> {
    let sources = model.sources();
    // bracket the 1/e time by bisection on the monotone χ(τ) = 1
    let chi =
        |tau: f64| -> Result<f64> { ff_chi(&PulseSequence::ramsey(tau), &sources, params, b_ext_tesla) };
    let mut lo = 1e-12;
    let mut hi = 1e-3;
    if chi(hi)? < 1.0 {
        return Err(Error::Numerical(
            "decay too slow to bracket within 1 ms; check the calibration".into(),
        ));
    }
    while chi(lo)? > 1.0 {
        lo /= 10.0;
        if lo < 1e-18 {
            return Err(Error::Numerical("decay too fast to bracket".into()));
        }
    }
    for _ in 0..40 {
        let mid = (lo * hi).sqrt();
        if chi(mid)? > 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let t_e = (lo * hi).sqrt();
    // envelope fit per the T₂* definition: free-α stretched exponential
    let delays: Vec<f64> = (0..24)
        .map(|i| t_e * 10f64.powf(-1.1 + 1.6 * i as f64 / 23.0))
        .collect();
    let mut vis = Vec::with_capacity(delays.len());
    for &tau in &delays {
        vis.push((-chi(tau)?).exp());
    }
    let curve = DecayCurve {
        delays_s: delays.clone(),
        visibility: vis,
        stderr: vec![0.0; delays.len()],
        meta: crate::coherence::CurveMeta {
            sequence: crate::pulse::SequenceKind::Ramsey,
            n_pi: 0,
            b_ext_tesla,
            noise: String::new(),
            n_trajectories: 0,
            seed: 0,
            engine: crate::coherence::EngineKind::Ff,
        },
    };
    let fit = fit_stretched_exp(&curve, None)?;
    Ok(fit.t2_s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherence::{CurveMeta, EngineKind};
    use crate::pulse::SequenceKind;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn curve_from(delays: Vec<f64>, vis: Vec<f64>, err: Vec<f64>) -> DecayCurve {
        DecayCurve {
            delays_s: delays,
            visibility: vis,
            stderr: err,
            meta: CurveMeta {
                sequence: SequenceKind::Hahn,
                n_pi: 1,
                b_ext_tesla: 5.0,
                noise: String::new(),
                n_trajectories: 0,
                seed: 0,
                engine: EngineKind::Ff,
            },
        }
    }

    fn synthetic_stretched(t2: f64, alpha: f64, noise: f64, seed: u64, n: usize) -> DecayCurve {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let delays: Vec<f64> = (0..n)
            .map(|i| t2 * 10f64.powf(-1.2 + 1.8 * i as f64 / (n - 1) as f64))
            .collect();
        let vis: Vec<f64> = delays
            .iter()
            .map(|&tau| {
                let v = (-(tau / t2).powf(alpha)).exp();
                let delta: f64 = rng.random::<f64>() - 0.5;
                (v + noise * 2.0 * delta * v.max(0.05)).max(1e-6)
            })
            .collect();
        let err: Vec<f64> = vis
            .iter()
            .map(|v| (noise * v.max(0.05)).max(1e-9))
            .collect();
        curve_from(delays, vis, err)
    }

    #[test]
    fn stretched_fit_recovers_synthetic_parameters() {
        // T₂ = 1 μs, α = 1.56, 1% noise → T₂ within 2%, α within 0.05
        let curve = synthetic_stretched(1e-6, 1.56, 0.01, 5, 24);
        let fit = fit_stretched_exp(&curve, None).unwrap();
        assert!(
            (fit.t2_s - 1e-6).abs() / 1e-6 < 0.02,
            "T₂ = {} vs 1 μs",
            fit.t2_s
        );
        assert!((fit.alpha - 1.56).abs() < 0.05, "α = {}", fit.alpha);
        assert!(fit.t2_sigma_s > 0.0 && fit.alpha_sigma > 0.0);
    }

    #[test]
    fn stretched_fit_noiseless_is_exact() {
        let curve = synthetic_stretched(3.3e-6, 1.2, 0.0, 0, 20);
        let fit = fit_stretched_exp(&curve, None).unwrap();
        assert!((fit.t2_s - 3.3e-6).abs() / 3.3e-6 < 1e-6);
        assert!((fit.alpha - 1.2).abs() < 1e-6);
        assert!((fit.v0 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn pure_exponential_fits_alpha_one() {
        let curve = synthetic_stretched(2e-6, 1.0, 0.01, 9, 24);
        let fit = fit_stretched_exp(&curve, None).unwrap();
        assert!(
            (fit.alpha - 1.0).abs() < 0.05,
            "free α on exponential data: {}",
            fit.alpha
        );
    }

    #[test]
    fn stretched_fit_time_rescaling_invariance() {
        let base = synthetic_stretched(1e-6, 1.4, 0.005, 3, 20);
        let k = 37.0;
        let scaled = curve_from(
            base.delays_s.iter().map(|t| t * k).collect(),
            base.visibility.clone(),
            base.stderr.clone(),
        );
        let f1 = fit_stretched_exp(&base, None).unwrap();
        let f2 = fit_stretched_exp(&scaled, None).unwrap();
        assert!((f2.t2_s / f1.t2_s - k).abs() / k < 1e-6);
        assert!((f2.alpha - f1.alpha).abs() < 1e-8);
    }

    #[test]
    fn stretched_fit_rejects_shallow_data() {
        let delays: Vec<f64> = (1..=10).map(|i| i as f64 * 1e-8).collect();
        let vis: Vec<f64> = delays.iter().map(|_| 0.95).collect();
        let err = vec![0.01; 10];
        let curve = curve_from(delays, vis, err);
        assert!(fit_stretched_exp(&curve, None).is_err());
        // but a fixed-α fit is allowed on shallow data
        assert!(fit_stretched_exp(&curve, Some(2.0)).is_ok());
    }

    #[test]
    fn scaling_fit_recovers_exact_power_law() {
        let pts: Vec<(usize, f64, f64)> = [1usize, 2, 4, 8, 16]
            .iter()
            .map(|&n| (n, 1.9e-6 * (n as f64).powf(0.36), 0.0))
            .collect();
        let fit = fit_scaling(&pts).unwrap();
        assert!((fit.gamma - 0.36).abs() < 1e-6, "γ = {}", fit.gamma);
        assert!((fit.t2_0_s - 1.9e-6).abs() / 1.9e-6 < 1e-6);
    }

    #[test]
    fn scaling_fit_constant_gives_zero_gamma() {
        let pts: Vec<(usize, f64, f64)> =
            [1usize, 3, 9].iter().map(|&n| (n, 5e-6, 1e-7)).collect();
        let fit = fit_scaling(&pts).unwrap();
        assert!(fit.gamma.abs() < 1e-9);
    }

    #[test]
    fn scaling_fit_rejects_degenerate_input() {
        assert!(fit_scaling(&[(1, 1e-6, 0.0), (1, 1e-6, 0.0), (2, 2e-6, 0.0)]).is_err());
        assert!(fit_scaling(&[(1, 1e-6, 0.0), (2, -1e-6, 0.0), (3, 1e-6, 0.0)]).is_err());
    }

    #[test]
    fn exponent_identities() {
        assert!((lambda_from_gamma(0.36).unwrap() - 0.5625).abs() < 1e-12);
        assert_eq!(lambda_from_gamma(0.0).unwrap(), 0.0);
        assert!((lambda_from_gamma(0.5).unwrap() - 1.0).abs() < 1e-12);
        assert!(lambda_from_gamma(1.0).is_err());
        assert!(gamma_from_lambda(-0.1).is_err());
    }

    proptest! {
        #[test]
        fn lambda_gamma_round_trip(lambda in 0.0f64..5.0) {
            let gamma = gamma_from_lambda(lambda).unwrap();
            let back = lambda_from_gamma(gamma).unwrap();
            prop_assert!((back - lambda).abs() < 1e-12 * (1.0 + lambda));
        }
    }

    #[test]
    fn global_fit_recovers_shared_alpha() {
        let truths = [1.0e-6, 1.5e-6, 2.2e-6, 3.0e-6];
        let curves: Vec<DecayCurve> = truths
            .iter()
            .enumerate()
            .map(|(i, &t2)| synthetic_stretched(t2, 1.56, 0.01, 40 + i as u64, 20))
            .collect();
        let fit = global_alpha_fit(&curves).unwrap();
        assert!((fit.alpha - 1.56).abs() < 0.05, "shared α = {}", fit.alpha);
        assert!(!fit.heterogeneous, "homogeneous family flagged");
        for ((_, t2, _), want) in fit.per_curve.iter().zip(truths) {
            assert!((t2 - want).abs() / want < 0.05);
        }
    }

    #[test]
    fn global_fit_flags_heterogeneous_family() {
        let curves = vec![
            synthetic_stretched(1e-6, 1.0, 0.01, 50, 20),
            synthetic_stretched(1e-6, 2.0, 0.01, 51, 20),
            synthetic_stretched(1e-6, 1.5, 0.01, 52, 20),
        ];
        let fit = global_alpha_fit(&curves).unwrap();
        assert!(
            fit.heterogeneous,
            "mixed-α family must set the diagnostic flag"
        );
    }

    #[test]
    fn field_power_law_fit() {
        let pts: Vec<(f64, f64, f64)> = [4.0, 5.0, 6.5, 8.0]
            .iter()
            .map(|&b| (b, 3.5e-7 / b, 0.0))
            .collect();
        let fit = fit_power_law_field(&pts).unwrap();
        assert!((fit.exponent + 1.0).abs() < 1e-9, "exact 1/B: {}", fit.exponent);
        let flat: Vec<(f64, f64, f64)> = [4.0, 5.0, 6.5, 8.0]
            .iter()
            .map(|&b| (b, 5e-7, 1e-8))
            .collect();
        let fit2 = fit_power_law_field(&flat).unwrap();
        assert!(fit2.exponent.abs() < 1e-9);
        assert!(fit_power_law_field(&pts[..2]).is_err());
    }

    #[test]
    fn alpha_equals_one_plus_lambda_across_exponents() {
        // numerical theorem check: Gaussian 1/f^λ noise under CP gives
        // stretched decays with shared α = 1 + λ
        use crate::coherence::ff_visibility;
        use crate::coherence::{CoupledNoise, Coupling};
        let qd = QdParameters::reference_dot();
        for lambda in [0.3, 0.56, 0.8] {
            let template = ElectricalNoiseTemplate {
                lambda,
                f_min_hz: 1e2,
                f_max_hz: 1e9,
                quasi_static_ratio: 0.0,
            };
            let model = calibrate_to_hahn_t2(&qd, 5.0, 1.9e-6, &template).unwrap();
            let sources = [CoupledNoise {
                model: model.spectral().clone(),
                coupling: Coupling::Electrical,
            }];
            let mut curves = Vec::new();
            for n_pi in [1usize, 2, 4, 8] {
                let t2_est = 1.9e-6 * (n_pi as f64).powf(lambda / (1.0 + lambda));
                let delays: Vec<f64> = (0..20)
                    .map(|i| t2_est * 10f64.powf(-1.0 + 1.5 * i as f64 / 19.0))
                    .collect();
                let seq = crate::pulse::PulseSequence::cp(n_pi, 1.0);
                curves.push(ff_visibility(&seq, &sources, &qd, 5.0, &delays).unwrap());
            }
            let fit = global_alpha_fit(&curves).unwrap();
            assert!(
                (fit.alpha - (1.0 + lambda)).abs() < 0.05,
                "λ = {lambda}: α = {} vs 1+λ = {}",
                fit.alpha,
                1.0 + lambda
            );
        }
    }

    #[test]
    fn calibration_hits_the_target_hahn_t2() {
        let qd = QdParameters::reference_dot();
        let template = ElectricalNoiseTemplate {
            lambda: 0.56,
            f_min_hz: 1e2,
            f_max_hz: 1e9,
            quasi_static_ratio: 0.0,
        };
        let target = 1.48e-6;
        let model = calibrate_to_hahn_t2(&qd, 6.5, target, &template).unwrap();
        let chi = ff_chi(&PulseSequence::hahn(target), &model.sources(), &qd, 6.5).unwrap();
        assert!((chi - 1.0).abs() < 1e-9, "χ(T₂) = {chi}");
    }

    #[test]
    fn predict_t2star_scales_inversely_with_field() {
        let qd = QdParameters::reference_dot();
        let template = ElectricalNoiseTemplate {
            lambda: 0.56,
            f_min_hz: 1e2,
            f_max_hz: 1e9,
            quasi_static_ratio: 2.0,
        };
        let model = calibrate_to_hahn_t2(&qd, 6.5, 1.48e-6, &template).unwrap();
        let t1 = predict_t2star(&model, &qd, 4.0).unwrap();
        let t2 = predict_t2star(&model, &qd, 8.0).unwrap();
        // both couplings are linear in B
        assert!(
            ((t1 * 4.0) / (t2 * 8.0) - 1.0).abs() < 0.03,
            "B·T₂* drifted: {} vs {}",
            t1 * 4.0,
            t2 * 8.0
        );
    }

    #[test]
    fn doubling_psd_shifts_t2star_by_known_factor() {
        // pure 1/f^λ: χ ∝ A·τ^(1+λ), so T₂* ∝ A^(−1/(1+λ))
        let qd = QdParameters::reference_dot();
        let lambda = 0.56;
        let template = ElectricalNoiseTemplate {
            lambda,
            f_min_hz: 1e2,
            f_max_hz: 1e9,
            quasi_static_ratio: 0.0,
        };
        let model = calibrate_to_hahn_t2(&qd, 6.5, 1.48e-6, &template).unwrap();
        let t_base = predict_t2star(&model, &qd, 6.5).unwrap();
        let doubled = model.with_scaled_psd(2.0).without_quasi_static();
        let t_doubled = predict_t2star(&doubled, &qd, 6.5).unwrap();
        let expected = 2f64.powf(-1.0 / (1.0 + lambda));
        assert!(
            (t_doubled / t_base - expected).abs() < 0.01,
            "ratio {} vs 2^(−1/(1+λ)) = {expected}",
            t_doubled / t_base
        );
    }
}
