//! Spectral and correlation analysis of noise models and trajectories:
//! closed-form one-sided PSDs, an averaged-segment periodogram
//! estimator, and lag-domain autocorrelation estimators.

use rustfft::{num_complex::Complex64, FftPlanner};

use crate::error::{Error, Result};
use crate::units::TWO_PI;

use super::{NoiseModel, Trajectory};

/// A one-sided power spectral density curve on a frequency grid.
#[derive(Debug, Clone)]
pub struct PsdCurve {
    /// Strictly increasing frequency grid, Hz.
    pub freqs_hz: Vec<f64>,
    /// One-sided density, units²/Hz.
    pub density: Vec<f64>,
    /// True when the curve comes from a closed form rather than an
    /// estimator.
    pub analytic: bool,
}

impl PsdCurve {
    /// Total power `Σ S·Δf` by trapezoidal integration.
    pub fn total_power(&self) -> f64 {
        let mut acc = 0.0;
        for i in 1..self.freqs_hz.len() {
            let df = self.freqs_hz[i] - self.freqs_hz[i - 1];
            acc += 0.5 * (self.density[i] + self.density[i - 1]) * df;
        }
        acc
    }
}

/// Closed-form one-sided PSD of `model` at frequency `f` (Hz).
///
/// Telegraph and Ornstein–Uhlenbeck models give Lorentzians of their
/// total switching rate and inverse correlation time; the band-limited
/// `1/f^λ` model returns `A/f^λ` inside its band and zero outside; a
/// quasi-static model carries all its power in a zero-frequency line,
/// so its density at any `f > 0` is zero. A precessing field is a line
/// spectrum and has no density representation.
pub fn analytic_psd(model: &NoiseModel, f: f64) -> Result<f64> {
    if !(f.is_finite() && f > 0.0) {
        return Err(Error::invalid("f", format!("{f} must be > 0")));
    }
    model.validate()?;
    psd_unchecked(model, f)
}

fn psd_unchecked(model: &NoiseModel, f: f64) -> Result<f64> {
    let omega = TWO_PI * f;
    match model {
        NoiseModel::Telegraph {
            up_rate_per_s,
            down_rate_per_s,
            ..
        } => {
            let gamma = up_rate_per_s + down_rate_per_s;
            let var = model.variance();
            Ok(4.0 * var * gamma / (gamma * gamma + omega * omega))
        }
        NoiseModel::OrnsteinUhlenbeck { sigma, tau_c_s } => {
            let v = sigma * sigma;
            Ok(4.0 * v * tau_c_s / (1.0 + (omega * tau_c_s).powi(2)))
        }
        NoiseModel::SpectralGaussian {
            lambda,
            amplitude,
            f_min_hz,
            f_max_hz,
        } => {
            if f >= *f_min_hz && f <= *f_max_hz {
                Ok(amplitude / f.powf(*lambda))
            } else {
                Ok(0.0)
            }
        }
        NoiseModel::QuasiStaticGaussian { .. } => Ok(0.0),
        NoiseModel::PrecessingField { .. } => Err(Error::NoAnalyticPsd(
            "precessing field is a line spectrum".into(),
        )),
        NoiseModel::Composite { members } => {
            let mut acc = 0.0;
            for m in members {
                acc += psd_unchecked(m, f)?;
            }
            Ok(acc)
        }
    }
}

/// Evaluate the analytic PSD on a frequency grid.
pub fn analytic_psd_curve(model: &NoiseModel, freqs_hz: &[f64]) -> Result<PsdCurve> {
    let density = freqs_hz
        .iter()
        .map(|&f| analytic_psd(model, f))
        .collect::<Result<Vec<_>>>()?;
    Ok(PsdCurve {
        freqs_hz: freqs_hz.to_vec(),
        density,
        analytic: true,
    })
}

/// Averaged-segment (Bartlett) one-sided PSD estimate.
///
/// The trajectory mean is removed, the series is split into
/// `⌊n/segment_length⌋` non-overlapping rectangular segments, and the
/// per-segment periodograms are averaged. Normalization satisfies
/// Parseval: `Σ S·Δf ≈` sample variance within estimator bias.
pub fn periodogram(traj: &Trajectory, segment_length: usize) -> Result<PsdCurve> {
    if traj.is_empty() {
        return Err(Error::invalid("trajectory", "empty trajectory"));
    }
    if segment_length < 2 {
        return Err(Error::invalid("segment_length", "need ≥ 2 samples"));
    }
    if segment_length > traj.len() {
        return Err(Error::invalid(
            "segment_length",
            format!("{} exceeds trajectory length {}", segment_length, traj.len()),
        ));
    }
    let m = segment_length;
    let segments = traj.len() / m;
    let mean = traj.mean();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);
    let half = m / 2;
    let mut acc = vec![0.0; half + 1];
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for s in 0..segments {
        for (i, b) in buf.iter_mut().enumerate() {
            *b = Complex64::new(traj.samples[s * m + i] - mean, 0.0);
        }
        fft.process(&mut buf);
        for (k, a) in acc.iter_mut().enumerate() {
            *a += buf[k].norm_sqr();
        }
    }
    let dt = traj.dt;
    let df = 1.0 / (m as f64 * dt);
    // one-sided: interior bins carry the factor 2, DC and Nyquist do not
    let mut freqs = Vec::with_capacity(half);
    let mut density = Vec::with_capacity(half);
    for (k, a) in acc.iter().enumerate().take(half + 1).skip(1) {
        let factor = if k == half && m.is_multiple_of(2) { 1.0 } else { 2.0 };
        freqs.push(k as f64 * df);
        density.push(factor * dt * a / (m as f64 * segments as f64));
    }
    Ok(PsdCurve {
        freqs_hz: freqs,
        density,
        analytic: false,
    })
}

/// Normalization mode for [`autocorrelation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AutocorrMode {
    /// `⟨x(t)x(t+τ)⟩/⟨x⟩² − 1`; requires a non-zero-mean signal.
    NormalizedIntensity,
    /// Autocovariance divided by the variance (1 at zero lag).
    Covariance,
}

/// An autocorrelation curve at a set of lags, with batch-means standard
/// errors.
#[derive(Debug, Clone)]
pub struct AutocorrCurve {
    pub lags_s: Vec<f64>,
    pub values: Vec<f64>,
    pub stderrs: Vec<f64>,
}

/// Autocorrelation at every integer lag up to `max_lag` seconds.
pub fn autocorrelation(traj: &Trajectory, max_lag: f64, mode: AutocorrMode) -> Result<AutocorrCurve> {
    if max_lag >= traj.duration() {
        return Err(Error::invalid(
            "max_lag",
            format!("{max_lag} s is not shorter than the trajectory"),
        ));
    }
    let lag_max = (max_lag / traj.dt).floor() as usize;
    let lags: Vec<usize> = (0..=lag_max).collect();
    autocorrelation_at_lags(traj, &lags, mode)
}

/// Autocorrelation at explicit sample lags (for log-spaced lag grids).
pub fn autocorrelation_at_lags(
    traj: &Trajectory,
    lags: &[usize],
    mode: AutocorrMode,
) -> Result<AutocorrCurve> {
    autocorrelation_at_lags_impl(traj, lags, mode, None)
}

/// Like [`autocorrelation_at_lags`] but with an externally supplied
/// mean (e.g. pooled over an ensemble of records). Subtracting a
/// record's own mean forces its empirical autocovariance to integrate
/// to ≈ 0, which crushes lags beyond the slowest correlation time; a
/// pooled mean removes that sum-rule bias.
pub fn autocorrelation_at_lags_with_mean(
    traj: &Trajectory,
    lags: &[usize],
    mode: AutocorrMode,
    mean: f64,
) -> Result<AutocorrCurve> {
    autocorrelation_at_lags_impl(traj, lags, mode, Some(mean))
}

fn autocorrelation_at_lags_impl(
    traj: &Trajectory,
    lags: &[usize],
    mode: AutocorrMode,
    mean_override: Option<f64>,
) -> Result<AutocorrCurve> {
    let n = traj.len();
    if n < 2 {
        return Err(Error::invalid("trajectory", "need ≥ 2 samples"));
    }
    let max_lag = *lags.iter().max().unwrap_or(&0);
    if max_lag >= n {
        return Err(Error::invalid("lags", "lag exceeds trajectory length"));
    }
    let mean = mean_override.unwrap_or_else(|| traj.mean());
    let var = match mean_override {
        None => traj.variance(),
        Some(m) => {
            traj.samples.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / traj.len() as f64
        }
    };
    match mode {
        AutocorrMode::NormalizedIntensity => {
            if mean.abs() < 1e-300 || mean * mean < 1e-24 * var.max(f64::MIN_POSITIVE) {
                return Err(Error::SingularInput(
                    "normalized autocorrelation of a zero-mean signal".into(),
                ));
            }
        }
        AutocorrMode::Covariance => {
            if var == 0.0 {
                // constant trajectory: define the curve as zero at positive lags
                let zeros = vec![0.0; lags.len()];
                return Ok(AutocorrCurve {
                    lags_s: lags.iter().map(|&l| l as f64 * traj.dt).collect(),
                    values: lags.iter().map(|&l| if l == 0 { 1.0 } else { 0.0 }).collect(),
                    stderrs: zeros,
                });
            }
        }
    }
    // batch-means error bars from contiguous blocks
    let blocks = 8.min(n / (2 * (max_lag + 1)).max(1)).max(1);
    let block_len = n / blocks;

    let estimate = |xs: &[f64], lag: usize| -> f64 {
        let m = xs.len() - lag;
        let raw = xs[..m]
            .iter()
            .zip(&xs[lag..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / m as f64;
        match mode {
            AutocorrMode::NormalizedIntensity => raw / (mean * mean) - 1.0,
            AutocorrMode::Covariance => {
                let c = raw - mean * mean;
                c / var
            }
        }
    };

    let mut values = Vec::with_capacity(lags.len());
    let mut stderrs = Vec::with_capacity(lags.len());
    for &lag in lags {
        values.push(estimate(&traj.samples, lag));
        if blocks >= 2 && lag < block_len {
            let per_block: Vec<f64> = (0..blocks)
                .map(|b| estimate(&traj.samples[b * block_len..(b + 1) * block_len], lag))
                .collect();
            let bm = per_block.iter().sum::<f64>() / blocks as f64;
            let bv = per_block.iter().map(|v| (v - bm) * (v - bm)).sum::<f64>()
                / (blocks as f64 - 1.0);
            stderrs.push((bv / blocks as f64).sqrt());
        } else {
            stderrs.push(0.0);
        }
    }
    Ok(AutocorrCurve {
        lags_s: lags.iter().map(|&l| l as f64 * traj.dt).collect(),
        values,
        stderrs,
    })
}
