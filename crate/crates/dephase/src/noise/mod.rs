//! Stochastic noise models and trajectory sampling.
//!
//! Every model here is a classical, stationary process described by a
//! handful of physical parameters. A [`Trajectory`] is a discrete-time
//! realization; sampling is a pure function of `(model, dt, n, seed)`,
//! so identical inputs always reproduce identical samples and
//! trajectories for different seeds or streams may be generated in
//! parallel with no shared state.
//!
//! Conventions:
//! - power spectral densities are one-sided, in `units²/Hz`, with
//!   `∫₀^∞ S(f) df = Var(x)`;
//! - "quasi-static" means constant within one experimental shot and
//!   resampled between shots;
//! - telegraph noise switches between symmetric `±a` levels by default;
//!   an offset `{0, a}` convention is available for intensity-jump
//!   models.

mod spectra;

pub use spectra::{
    analytic_psd, analytic_psd_curve, autocorrelation, autocorrelation_at_lags,
    autocorrelation_at_lags_with_mean, periodogram, AutocorrCurve, AutocorrMode, PsdCurve,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{num_complex::Complex64, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::TWO_PI;

/// Level convention for random telegraph noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TelegraphConvention {
    /// Symmetric, zero-mean levels `−a, +a` (detuning noise).
    #[default]
    PlusMinus,
    /// Offset levels `0, a` (intensity jumps).
    ZeroPeak,
}

/// One precessing-field component: a cosine at fixed angular frequency
/// whose amplitude is Rayleigh-distributed shot to shot, so the process
/// value at any instant is Gaussian with the configured rms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecessingComponent {
    /// Root-mean-square process value (stationary std of the cosine).
    pub rms: f64,
    /// Angular frequency in rad/s.
    pub omega_rad_per_s: f64,
}

/// A parametrized stochastic process used as a noise source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum NoiseModel {
    /// Two-level Markov switching process (random telegraph noise).
    Telegraph {
        /// Level scale `a`, in process units.
        amplitude: f64,
        /// Rate of down→up transitions, 1/s.
        up_rate_per_s: f64,
        /// Rate of up→down transitions, 1/s.
        down_rate_per_s: f64,
        #[serde(default)]
        convention: TelegraphConvention,
    },
    /// Gaussian process with exponential autocovariance
    /// `σ² exp(−|τ|/τ_c)`.
    OrnsteinUhlenbeck {
        /// Stationary standard deviation, process units.
        sigma: f64,
        /// Correlation time, seconds.
        tau_c_s: f64,
    },
    /// Stationary Gaussian process with one-sided PSD `A/f^λ` inside a
    /// frequency band, zero outside.
    SpectralGaussian {
        /// Spectral exponent, `0 < λ < 1` (the power-law autocorrelation
        /// form `1/τ^(1−λ)` requires `λ < 1`).
        lambda: f64,
        /// PSD amplitude `A`, in `units²/Hz^(1−λ)`.
        amplitude: f64,
        f_min_hz: f64,
        f_max_hz: f64,
    },
    /// Constant within a shot, drawn from `N(0, σ²)` once per seed.
    QuasiStaticGaussian { sigma: f64 },
    /// Sum of cosines with Rayleigh amplitudes and uniform phases.
    PrecessingField { components: Vec<PrecessingComponent> },
    /// Sum of independent sub-models.
    Composite { members: Vec<NoiseModel> },
}

impl NoiseModel {
    pub fn telegraph(amplitude: f64, up_rate_per_s: f64, down_rate_per_s: f64) -> Self {
        NoiseModel::Telegraph {
            amplitude,
            up_rate_per_s,
            down_rate_per_s,
            convention: TelegraphConvention::PlusMinus,
        }
    }

    pub fn ornstein_uhlenbeck(sigma: f64, tau_c_s: f64) -> Self {
        NoiseModel::OrnsteinUhlenbeck { sigma, tau_c_s }
    }

    pub fn spectral_gaussian(lambda: f64, amplitude: f64, f_min_hz: f64, f_max_hz: f64) -> Self {
        NoiseModel::SpectralGaussian {
            lambda,
            amplitude,
            f_min_hz,
            f_max_hz,
        }
    }

    pub fn quasi_static(sigma: f64) -> Self {
        NoiseModel::QuasiStaticGaussian { sigma }
    }

    /// Sum-of-telegraph approximation to a `1/f^λ` spectrum: `count`
    /// symmetric fluctuators with equal amplitudes and switching rates
    /// placed at quantiles of the density `P(γ) ∝ γ^(−λ)` over
    /// `[2π f_min, 2π f_max]`. Non-Gaussian alternative to
    /// [`NoiseModel::SpectralGaussian`] for studying deviations from
    /// Gaussian dephasing.
    pub fn telegraph_bath(
        lambda: f64,
        total_rms: f64,
        f_min_hz: f64,
        f_max_hz: f64,
        count: usize,
    ) -> Result<Self> {
        if count == 0 {
            return Err(Error::invalid("count", "telegraph bath needs ≥ 1 member"));
        }
        if !(0.0 < lambda && lambda < 1.0) {
            return Err(Error::invalid("lambda", format!("{lambda} outside (0,1)")));
        }
        let g_min = TWO_PI * f_min_hz;
        let g_max = TWO_PI * f_max_hz;
        if !(g_min > 0.0 && g_max > g_min) {
            return Err(Error::invalid("f_min_hz", "need 0 < f_min < f_max"));
        }
        let a: f64 = total_rms / (count as f64).sqrt();
        let p = 1.0 - lambda;
        let lo = g_min.powf(p);
        let hi = g_max.powf(p);
        let members = (0..count)
            .map(|i| {
                let q = (i as f64 + 0.5) / count as f64;
                let gamma_tot = (lo + q * (hi - lo)).powf(1.0 / p);
                // symmetric rates: up = down = γ_tot / 2
                NoiseModel::telegraph(a, gamma_tot / 2.0, gamma_tot / 2.0)
            })
            .collect();
        Ok(NoiseModel::Composite { members })
    }

    /// Validate model invariants. Composite members must themselves be
    /// leaf models (no nesting).
    pub fn validate(&self) -> Result<()> {
        self.validate_inner(true)
    }

    fn validate_inner(&self, allow_composite: bool) -> Result<()> {
        match self {
            NoiseModel::Telegraph {
                amplitude,
                up_rate_per_s,
                down_rate_per_s,
                ..
            } => {
                for (name, v) in [
                    ("amplitude", amplitude),
                    ("up_rate_per_s", up_rate_per_s),
                    ("down_rate_per_s", down_rate_per_s),
                ] {
                    if !v.is_finite() || *v < 0.0 {
                        return Err(Error::invalid(name, format!("{v} must be finite and ≥ 0")));
                    }
                }
                Ok(())
            }
            NoiseModel::OrnsteinUhlenbeck { sigma, tau_c_s } => {
                if !sigma.is_finite() || *sigma < 0.0 {
                    return Err(Error::invalid("sigma", format!("{sigma} must be ≥ 0")));
                }
                if !tau_c_s.is_finite() || *tau_c_s < 0.0 {
                    return Err(Error::invalid("tau_c_s", format!("{tau_c_s} must be ≥ 0")));
                }
                Ok(())
            }
            NoiseModel::SpectralGaussian {
                lambda,
                amplitude,
                f_min_hz,
                f_max_hz,
            } => {
                if !(lambda.is_finite() && 0.0 < *lambda && *lambda < 1.0) {
                    return Err(Error::invalid("lambda", format!("{lambda} outside (0,1)")));
                }
                if !amplitude.is_finite() || *amplitude < 0.0 {
                    return Err(Error::invalid("amplitude", format!("{amplitude} must be ≥ 0")));
                }
                if !(f_min_hz.is_finite() && f_max_hz.is_finite() && 0.0 < *f_min_hz) {
                    return Err(Error::invalid("f_min_hz", "must be finite and > 0"));
                }
                if f_min_hz >= f_max_hz {
                    return Err(Error::invalid(
                        "f_max_hz",
                        format!("band empty: f_min {f_min_hz} ≥ f_max {f_max_hz}"),
                    ));
                }
                Ok(())
            }
            NoiseModel::QuasiStaticGaussian { sigma } => {
                if !sigma.is_finite() || *sigma < 0.0 {
                    return Err(Error::invalid("sigma", format!("{sigma} must be ≥ 0")));
                }
                Ok(())
            }
            NoiseModel::PrecessingField { components } => {
                if components.is_empty() {
                    return Err(Error::invalid("components", "need ≥ 1 component"));
                }
                for c in components {
                    if !c.rms.is_finite() || c.rms < 0.0 {
                        return Err(Error::invalid("rms", format!("{} must be ≥ 0", c.rms)));
                    }
                    if !c.omega_rad_per_s.is_finite() || c.omega_rad_per_s < 0.0 {
                        return Err(Error::invalid("omega_rad_per_s", "must be ≥ 0"));
                    }
                }
                Ok(())
            }
            NoiseModel::Composite { members } => {
                if !allow_composite {
                    return Err(Error::invalid("members", "composite members must be leaves"));
                }
                if members.is_empty() {
                    return Err(Error::invalid("members", "composite must be non-empty"));
                }
                for m in members {
                    m.validate_inner(false)?;
                }
                Ok(())
            }
        }
    }

    /// Stationary process variance.
    pub fn variance(&self) -> f64 {
        match self {
            NoiseModel::Telegraph {
                amplitude,
                up_rate_per_s,
                down_rate_per_s,
                convention,
            } => {
                let p = occupancy(*up_rate_per_s, *down_rate_per_s);
                let span = match convention {
                    TelegraphConvention::PlusMinus => 2.0 * amplitude,
                    TelegraphConvention::ZeroPeak => *amplitude,
                };
                span * span * p * (1.0 - p)
            }
            NoiseModel::OrnsteinUhlenbeck { sigma, .. } => sigma * sigma,
            NoiseModel::SpectralGaussian {
                lambda,
                amplitude,
                f_min_hz,
                f_max_hz,
            } => {
                let p = 1.0 - lambda;
                amplitude * (f_max_hz.powf(p) - f_min_hz.powf(p)) / p
            }
            NoiseModel::QuasiStaticGaussian { sigma } => sigma * sigma,
            NoiseModel::PrecessingField { components } => {
                components.iter().map(|c| c.rms * c.rms).sum()
            }
            NoiseModel::Composite { members } => members.iter().map(|m| m.variance()).sum(),
        }
    }

    fn member_count(&self) -> usize {
        match self {
            NoiseModel::Composite { members } => members.len(),
            _ => 1,
        }
    }
}

/// Stationary up-state occupancy of a two-level switcher.
fn occupancy(up_rate: f64, down_rate: f64) -> f64 {
    let total = up_rate + down_rate;
    if total == 0.0 {
        0.5
    } else {
        up_rate / total
    }
}

/// A sampled realization of a noise process on a uniform time grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Sample spacing, seconds.
    pub dt: f64,
    pub samples: Vec<f64>,
    /// Seed that generated this realization.
    pub seed: u64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Total spanned time `(n − 1)·dt`.
    pub fn duration(&self) -> f64 {
        (self.samples.len().saturating_sub(1)) as f64 * self.dt
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.samples.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / self.samples.len() as f64
    }
}

/// Number of RNG streams reserved per trajectory so that composite
/// members draw from independent streams.
const STREAMS_PER_TRAJECTORY: u64 = 256;

/// Sample a stationary realization of `model` at spacing `dt` with `n`
/// points. Pure in `(model, dt, n, seed)`.
pub fn sample_trajectory(model: &NoiseModel, dt: f64, n: usize, seed: u64) -> Result<Trajectory> {
    sample_trajectory_stream(model, dt, n, seed, 0)
}

/// Like [`sample_trajectory`] but drawing from an independent RNG
/// stream; used by Monte-Carlo engines to key trajectories by
/// `(seed, trajectory index)` so results are identical regardless of
/// scheduling.
pub fn sample_trajectory_stream(
    model: &NoiseModel,
    dt: f64,
    n: usize,
    seed: u64,
    stream: u64,
) -> Result<Trajectory> {
    model.validate()?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid("dt", format!("{dt} must be > 0")));
    }
    if n == 0 {
        return Err(Error::invalid("n", "need at least one sample"));
    }
    if model.member_count() as u64 >= STREAMS_PER_TRAJECTORY {
        return Err(Error::invalid("members", "too many composite members"));
    }
    let mut samples = vec![0.0; n];
    match model {
        NoiseModel::Composite { members } => {
            for (j, m) in members.iter().enumerate() {
                let mut rng = stream_rng(seed, stream, j as u64);
                fill_leaf(m, dt, &mut samples, &mut rng, true)?;
            }
        }
        leaf => {
            let mut rng = stream_rng(seed, stream, 0);
            fill_leaf(leaf, dt, &mut samples, &mut rng, false)?;
        }
    }
    Ok(Trajectory { dt, samples, seed })
}

fn stream_rng(seed: u64, stream: u64, member: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream * STREAMS_PER_TRAJECTORY + member);
    rng
}

fn fill_leaf(
    model: &NoiseModel,
    dt: f64,
    out: &mut [f64],
    rng: &mut ChaCha8Rng,
    accumulate: bool,
) -> Result<()> {
    let n = out.len();
    let mut add = |i: usize, v: f64| {
        if accumulate {
            out[i] += v;
        } else {
            out[i] = v;
        }
    };
    match model {
        NoiseModel::Telegraph {
            amplitude,
            up_rate_per_s,
            down_rate_per_s,
            convention,
        } => {
            let (lo, hi) = match convention {
                TelegraphConvention::PlusMinus => (-amplitude, *amplitude),
                TelegraphConvention::ZeroPeak => (0.0, *amplitude),
            };
            let p_up = occupancy(*up_rate_per_s, *down_rate_per_s);
            let mut up = rng.random::<f64>() < p_up;
            // exponential dwell to the next switch, measured in samples
            let mut t_next = dwell(rng, if up { *down_rate_per_s } else { *up_rate_per_s });
            for i in 0..n {
                let t = i as f64 * dt;
                while t >= t_next {
                    up = !up;
                    t_next += dwell(rng, if up { *down_rate_per_s } else { *up_rate_per_s });
                }
                add(i, if up { hi } else { lo });
            }
        }
        NoiseModel::OrnsteinUhlenbeck { sigma, tau_c_s } => {
            // exact discrete update of the stationary process
            let rho = if *tau_c_s > 0.0 {
                (-dt / tau_c_s).exp()
            } else {
                0.0
            };
            let step_sd = sigma * (1.0 - rho * rho).sqrt();
            let mut x = sigma * normal(rng);
            add(0, x);
            for i in 1..n {
                x = rho * x + step_sd * normal(rng);
                add(i, x);
            }
        }
        NoiseModel::SpectralGaussian {
            lambda,
            amplitude,
            f_min_hz,
            f_max_hz,
        } => {
            let vals = synthesize_band_limited(
                *lambda, *amplitude, *f_min_hz, *f_max_hz, dt, n, rng,
            );
            for (i, v) in vals.into_iter().enumerate() {
                add(i, v);
            }
        }
        NoiseModel::QuasiStaticGaussian { sigma } => {
            let v = sigma * normal(rng);
            for i in 0..n {
                add(i, v);
            }
        }
        NoiseModel::PrecessingField { components } => {
            // Rayleigh amplitude with scale = rms, uniform phase
            let draws: Vec<(f64, f64)> = components
                .iter()
                .map(|c| {
                    let u: f64 = rng.random::<f64>();
                    let a = c.rms * (-2.0 * (1.0 - u).ln()).sqrt();
                    let phi = TWO_PI * rng.random::<f64>();
                    (a, phi)
                })
                .collect();
            for i in 0..n {
                let t = i as f64 * dt;
                let v = components
                    .iter()
                    .zip(&draws)
                    .map(|(c, (a, phi))| a * (c.omega_rad_per_s * t + phi).cos())
                    .sum::<f64>();
                add(i, v);
            }
        }
        NoiseModel::Composite { .. } => unreachable!("composites handled by caller"),
    }
    Ok(())
}

fn dwell(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    if rate <= 0.0 {
        f64::INFINITY
    } else {
        let u: f64 = rng.random::<f64>();
        -(1.0 - u).ln() / rate
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Frequency-domain synthesis of a band-limited Gaussian process with
/// one-sided PSD `A/f^λ` on `[f_min, f_max]`: independent complex
/// Gaussian amplitudes per FFT bin with mean square `S(f_k)·n/(2dt)`,
/// then an inverse transform. Spectrum outside the representable band
/// `[1/(n·dt), 1/(2dt)]` is truncated.
fn synthesize_band_limited(
    lambda: f64,
    amplitude: f64,
    f_min: f64,
    f_max: f64,
    dt: f64,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    let df = 1.0 / (n as f64 * dt);
    let half = n / 2;
    let psd = |f: f64| -> f64 {
        if f >= f_min && f <= f_max {
            amplitude / f.powf(lambda)
        } else {
            0.0
        }
    };
    for k in 1..half {
        let f = k as f64 * df;
        let s = psd(f);
        if s > 0.0 {
            let scale = (s * n as f64 / (4.0 * dt)).sqrt();
            let re = scale * normal(rng);
            let im = scale * normal(rng);
            spec[k] = Complex64::new(re, im);
            spec[n - k] = Complex64::new(re, -im);
        }
    }
    if n.is_multiple_of(2) && half >= 1 {
        let f = half as f64 * df;
        let s = psd(f);
        if s > 0.0 {
            let scale = (s * n as f64 / dt).sqrt();
            spec[half] = Complex64::new(scale * normal(rng), 0.0);
        }
    }
    let mut planner = FftPlanner::new();
    let ifft = planner.plan_fft_inverse(n);
    ifft.process(&mut spec);
    let norm = 1.0 / n as f64;
    spec.into_iter().map(|c| c.re * norm).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinism_same_seed_same_samples() {
        let models = [
            NoiseModel::telegraph(1.0, 3.0, 5.0),
            NoiseModel::ornstein_uhlenbeck(2.0, 0.3),
            NoiseModel::spectral_gaussian(0.56, 1.0, 1.0, 100.0),
            NoiseModel::quasi_static(1.5),
            NoiseModel::PrecessingField {
                components: vec![PrecessingComponent {
                    rms: 1.0,
                    omega_rad_per_s: 7.0,
                }],
            },
            NoiseModel::Composite {
                members: vec![
                    NoiseModel::ornstein_uhlenbeck(1.0, 0.1),
                    NoiseModel::quasi_static(0.5),
                ],
            },
        ];
        for m in &models {
            let a = sample_trajectory(m, 1e-3, 512, 42).unwrap();
            let b = sample_trajectory(m, 1e-3, 512, 42).unwrap();
            assert_eq!(a.samples, b.samples, "model {m:?} not deterministic");
            let c = sample_trajectory(m, 1e-3, 512, 43).unwrap();
            assert_ne!(a.samples, c.samples, "model {m:?} ignores the seed");
        }
    }

    #[test]
    fn telegraph_levels_and_dwell_time() {
        // mean dwell time 1/γ_s within 5% over ≥ 10⁴ switches
        let gamma = 50.0;
        let model = NoiseModel::telegraph(1.0, gamma, gamma);
        let dt = 1e-4; // γ·dt = 5e-3, discretization bias ≈ dt/2 per dwell
        let traj = sample_trajectory(&model, dt, 3_000_000, 7).unwrap();
        for &x in &traj.samples {
            assert!(x == 1.0 || x == -1.0, "telegraph level {x} not in ±a");
        }
        let mut dwells = Vec::new();
        let mut run = 1usize;
        for w in traj.samples.windows(2) {
            if w[0] == w[1] {
                run += 1;
            } else {
                dwells.push(run as f64 * dt);
                run = 1;
            }
        }
        assert!(dwells.len() > 10_000, "only {} switches", dwells.len());
        let mean = dwells.iter().sum::<f64>() / dwells.len() as f64;
        let expected = 1.0 / gamma;
        assert!(
            (mean - expected).abs() / expected < 0.05,
            "mean dwell {mean} vs 1/γ {expected}"
        );
    }

    #[test]
    fn telegraph_zero_peak_levels() {
        let model = NoiseModel::Telegraph {
            amplitude: 2.0,
            up_rate_per_s: 10.0,
            down_rate_per_s: 10.0,
            convention: TelegraphConvention::ZeroPeak,
        };
        let traj = sample_trajectory(&model, 1e-3, 10_000, 3).unwrap();
        assert!(traj.samples.iter().all(|&x| x == 0.0 || x == 2.0));
    }

    #[test]
    fn quasi_static_constant_and_variance() {
        // sample variance of the per-seed constants → σ² within 3% over 10⁴ seeds
        let sigma = 1.3;
        let model = NoiseModel::quasi_static(sigma);
        let mut values = Vec::with_capacity(10_000);
        for seed in 0..10_000u64 {
            let t = sample_trajectory(&model, 1e-3, 8, seed).unwrap();
            assert!(t.samples.iter().all(|&x| x == t.samples[0]));
            values.push(t.samples[0]);
        }
        let var = values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64;
        assert!(
            (var - sigma * sigma).abs() / (sigma * sigma) < 0.03,
            "quasi-static variance {var} vs σ² {}",
            sigma * sigma
        );
    }

    #[test]
    fn ou_stationary_variance_and_autocovariance() {
        let (sigma, tau_c) = (2.0, 0.05);
        let model = NoiseModel::ornstein_uhlenbeck(sigma, tau_c);
        let traj = sample_trajectory(&model, 1e-3, 400_000, 11).unwrap();
        let var = traj.variance();
        assert!(
            (var - sigma * sigma).abs() / (sigma * sigma) < 0.05,
            "OU variance {var}"
        );
        // lag-k autocovariance ≈ σ² exp(−k·dt/τ_c)
        let lag = 30;
        let m = traj.mean();
        let n = traj.len() - lag;
        let cov = traj.samples[..n]
            .iter()
            .zip(&traj.samples[lag..])
            .map(|(a, b)| (a - m) * (b - m))
            .sum::<f64>()
            / n as f64;
        let expected = sigma * sigma * (-(lag as f64) * 1e-3 / tau_c).exp();
        assert!(
            (cov - expected).abs() / (sigma * sigma) < 0.05,
            "OU autocovariance {cov} vs {expected}"
        );
    }

    #[test]
    fn spectral_gaussian_variance_matches_band_integral() {
        let model = NoiseModel::spectral_gaussian(0.56, 2.0, 1.0, 1000.0);
        let expected = model.variance();
        let dt = 2e-4; // Nyquist 2500 Hz covers the band
        let mut acc = 0.0;
        let reps = 40;
        for seed in 0..reps {
            let t = sample_trajectory(&model, dt, 1 << 16, seed).unwrap();
            acc += t.variance();
        }
        let var = acc / reps as f64;
        assert!(
            (var - expected).abs() / expected < 0.05,
            "1/f^λ variance {var} vs band integral {expected}"
        );
    }

    #[test]
    fn composite_variance_is_additive() {
        let m1 = NoiseModel::ornstein_uhlenbeck(1.0, 0.02);
        let m2 = NoiseModel::telegraph(0.7, 40.0, 40.0);
        let comp = NoiseModel::Composite {
            members: vec![m1.clone(), m2.clone()],
        };
        let t = sample_trajectory(&comp, 5e-4, 400_000, 19).unwrap();
        let expected = m1.variance() + m2.variance();
        assert!(
            (t.variance() - expected).abs() / expected < 0.05,
            "composite variance {} vs {expected}",
            t.variance()
        );
    }

    #[test]
    fn stationarity_windowed_statistics() {
        let model = NoiseModel::ornstein_uhlenbeck(1.0, 0.01);
        let traj = sample_trajectory(&model, 1e-3, 200_000, 5).unwrap();
        let half = traj.len() / 2;
        let var = |xs: &[f64]| {
            let m = xs.iter().sum::<f64>() / xs.len() as f64;
            xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64
        };
        let v1 = var(&traj.samples[..half]);
        let v2 = var(&traj.samples[half..]);
        // estimator sd of the variance ≈ σ²√(2τ_c/(T/2)) for an OU process
        let est_sd = (2.0 * 0.01 / (half as f64 * 1e-3)).sqrt();
        assert!(
            (v1 - v2).abs() < 3.0 * est_sd * 2.0_f64.sqrt(),
            "windowed variances drift: {v1} vs {v2}"
        );
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(sample_trajectory(&NoiseModel::telegraph(1.0, -1.0, 1.0), 1e-3, 8, 0).is_err());
        assert!(sample_trajectory(
            &NoiseModel::spectral_gaussian(1.2, 1.0, 1.0, 10.0),
            1e-3,
            8,
            0
        )
        .is_err());
        assert!(sample_trajectory(
            &NoiseModel::spectral_gaussian(0.5, 1.0, 10.0, 1.0),
            1e-3,
            8,
            0
        )
        .is_err());
        assert!(sample_trajectory(&NoiseModel::quasi_static(f64::NAN), 1e-3, 8, 0).is_err());
        let ok = NoiseModel::quasi_static(1.0);
        assert!(sample_trajectory(&ok, 1e-3, 0, 0).is_err());
        assert!(sample_trajectory(&ok, 0.0, 8, 0).is_err());
        let nested = NoiseModel::Composite {
            members: vec![NoiseModel::Composite {
                members: vec![ok.clone()],
            }],
        };
        assert!(sample_trajectory(&nested, 1e-3, 8, 0).is_err());
        let empty = NoiseModel::Composite { members: vec![] };
        assert!(sample_trajectory(&empty, 1e-3, 8, 0).is_err());
    }

    #[test]
    fn telegraph_bath_rates_follow_power_law_band() {
        let bath = NoiseModel::telegraph_bath(0.56, 1.0, 1.0, 1e4, 24).unwrap();
        let NoiseModel::Composite { members } = &bath else {
            panic!("bath should be a composite")
        };
        assert_eq!(members.len(), 24);
        let mut last = 0.0;
        for m in members {
            let NoiseModel::Telegraph {
                up_rate_per_s,
                down_rate_per_s,
                ..
            } = m
            else {
                panic!("bath member should be telegraph")
            };
            let total = up_rate_per_s + down_rate_per_s;
            assert!(total > last, "rates should increase monotonically");
            assert!((TWO_PI..=TWO_PI * 1e4).contains(&total));
            last = total;
        }
        let var = bath.variance();
        assert!((var - 1.0).abs() < 1e-12, "bath variance {var}");
    }

    #[test]
    fn noise_model_json_round_trip() {
        let model = NoiseModel::Composite {
            members: vec![
                NoiseModel::spectral_gaussian(0.56, 3e-2, 10.0, 1e6),
                NoiseModel::quasi_static(0.4),
            ],
        };
        let json = serde_json::to_string(&model).unwrap();
        assert!(json.contains("\"type\":\"spectral_gaussian\""));
        assert!(json.contains("f_min_hz"));
        let back: NoiseModel = serde_json::from_str(&json).unwrap();
        assert_eq!(model, back);
    }
}
