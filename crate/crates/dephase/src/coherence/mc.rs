//! Monte-Carlo visibility engine: per-trajectory phase accumulation
//! `φ = ∫ y(t)·δω(t) dt` and the phase-reference-free estimator
//! `V = |⟨e^{iφ}⟩|`.
//!
//! Trajectories are independent work units keyed by
//! `(seed, trajectory index)` counter-derived RNG streams, partitioned
//! into fixed-size blocks. Block sums are reduced in index order, so
//! the result is bit-identical regardless of worker count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::noise::{sample_trajectory_stream, NoiseModel};
use crate::pulse::{PhaseAccumulator, PulseSequence};
use crate::spin::QdParameters;
use crate::units::{MU_B_OVER_H_HZ_PER_T, TWO_PI};

use super::{
    describe_noise, validate_delays, Coupling, CoupledNoise, CurveMeta, DecayCurve, EngineKind,
};

/// Monte-Carlo engine configuration.
#[derive(Debug, Clone, Copy)]
pub struct McConfig {
    pub n_traj: usize,
    pub seed: u64,
    /// Trajectory sample spacing; chosen automatically when `None`
    /// (`min(τ_min/40, 1/(20·fastest noise rate))`).
    pub dt: Option<f64>,
    /// Number of batches for batch-means standard errors.
    pub batches: usize,
    /// Trajectories per parallel block (the determinism unit).
    pub block: usize,
}

impl McConfig {
    pub fn new(n_traj: usize, seed: u64) -> Self {
        McConfig {
            n_traj,
            seed,
            dt: None,
            batches: 32,
            block: 64,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }
}

/// Fastest internal rate of a model, 1/s; zero when the process is
/// static on all simulated scales.
fn dynamics_rate(model: &NoiseModel) -> f64 {
    match model {
        NoiseModel::Telegraph {
            up_rate_per_s,
            down_rate_per_s,
            ..
        } => up_rate_per_s + down_rate_per_s,
        NoiseModel::OrnsteinUhlenbeck { tau_c_s, .. } => {
            if *tau_c_s > 0.0 {
                1.0 / tau_c_s
            } else {
                0.0
            }
        }
        NoiseModel::SpectralGaussian { f_max_hz, .. } => TWO_PI * f_max_hz,
        NoiseModel::QuasiStaticGaussian { .. } => 0.0,
        NoiseModel::PrecessingField { components } => components
            .iter()
            .map(|c| c.omega_rad_per_s)
            .fold(0.0, f64::max),
        NoiseModel::Composite { members } => {
            members.iter().map(dynamics_rate).fold(0.0, f64::max)
        }
    }
}

/// Lowest band edge among spectral members, if any; the trajectory must
/// span at least one period of it to carry the declared band.
fn lowest_band_edge(model: &NoiseModel) -> Option<f64> {
    match model {
        NoiseModel::SpectralGaussian { f_min_hz, .. } => Some(*f_min_hz),
        NoiseModel::Composite { members } => members
            .iter()
            .filter_map(lowest_band_edge)
            .min_by(|a, b| a.partial_cmp(b).unwrap()),
        _ => None,
    }
}

fn highest_band_edge(model: &NoiseModel) -> Option<f64> {
    match model {
        NoiseModel::SpectralGaussian { f_max_hz, .. } => Some(*f_max_hz),
        NoiseModel::Composite { members } => members
            .iter()
            .filter_map(highest_band_edge)
            .max_by(|a, b| a.partial_cmp(b).unwrap()),
        _ => None,
    }
}

const MAX_TRAJECTORY_SAMPLES: usize = 64_000_000;

/// Monte-Carlo decay curve for one sequence family over a delay grid.
///
/// Quasi-static components are resampled per trajectory; spectral
/// components are synthesized over a window long enough to carry their
/// declared low-frequency band. The visibility estimator is
/// `V = |⟨e^{iφ}⟩|` with batch-means standard errors.
pub fn mc_visibility(
    seq: &PulseSequence,
    noise: &[CoupledNoise],
    params: &QdParameters,
    b_ext_tesla: f64,
    delays_s: &[f64],
    cfg: &McConfig,
) -> Result<DecayCurve> {
    validate_delays(delays_s)?;
    params.validate()?;
    for src in noise {
        src.model.validate()?;
    }
    if cfg.n_traj < 100 {
        return Err(Error::invalid("n_traj", "need at least 100 trajectories"));
    }
    let needs_second_order = noise
        .iter()
        .any(|s| s.coupling == Coupling::NuclearZSecondOrder);
    if needs_second_order && b_ext_tesla <= 0.0 {
        return Err(Error::SingularInput(
            "second-order nuclear coupling needs B_ext > 0".into(),
        ));
    }

    let tau_min = delays_s[0];
    let tau_max = *delays_s.last().unwrap();
    let fastest: f64 = noise.iter().map(|s| dynamics_rate(&s.model)).fold(0.0, f64::max);
    let dt = match cfg.dt {
        Some(dt) => {
            if dt > tau_min / 20.0 {
                return Err(Error::InsufficientResolution(format!(
                    "dt = {dt:.3e} s exceeds τ_min/20 = {:.3e} s",
                    tau_min / 20.0
                )));
            }
            // at least ~8 samples per fastest noise period
            if fastest > 0.0 && dt > TWO_PI / (8.0 * fastest) {
                return Err(Error::InsufficientResolution(format!(
                    "dt = {dt:.3e} s under-resolves the fastest noise rate ({fastest:.3e} 1/s)"
                )));
            }
            dt
        }
        None => {
            let mut dt = tau_min / 40.0;
            if fastest > 0.0 {
                dt = dt.min(TWO_PI / (20.0 * fastest));
            }
            dt
        }
    };
    // Nyquist must cover the declared spectral band so the sampled and
    // analytic spectra describe the same process.
    if let Some(f_hi) = noise.iter().filter_map(|s| highest_band_edge(&s.model)).fold(
        None,
        |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))),
    ) {
        if 1.0 / (2.0 * dt) < f_hi {
            return Err(Error::InsufficientResolution(format!(
                "sampling Nyquist {:.3e} Hz below the spectral band edge {f_hi:.3e} Hz",
                1.0 / (2.0 * dt)
            )));
        }
    }
    let mut span = tau_max;
    if let Some(f_lo) = noise.iter().filter_map(|s| lowest_band_edge(&s.model)).fold(
        None,
        |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))),
    ) {
        span = span.max(1.0 / f_lo);
    }
    let n_samples = (span / dt).ceil() as usize + 2;
    if n_samples > MAX_TRAJECTORY_SAMPLES {
        return Err(Error::InsufficientResolution(format!(
            "trajectory would need {n_samples} samples; narrow the band or raise f_min"
        )));
    }

    // precompute linear gains (angular) once
    let gains: Vec<Option<f64>> = noise
        .iter()
        .map(|s| s.linear_gain_hz(params, b_ext_tesla).map(|g| g * TWO_PI))
        .collect();
    let second_order_gain =
        TWO_PI * params.g_h * MU_B_OVER_H_HZ_PER_T / (2.0 * params.beta * b_ext_tesla.max(f64::MIN_POSITIVE));

    let sequences: Vec<PulseSequence> = delays_s.iter().map(|&t| seq.with_delay(t)).collect();
    let n_blocks = cfg.n_traj.div_ceil(cfg.block);

    let block_sums: Vec<Vec<(f64, f64)>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * cfg.block;
            let end = ((b + 1) * cfg.block).min(cfg.n_traj);
            let mut sums = vec![(0.0, 0.0); delays_s.len()];
            let mut omega = vec![0.0; n_samples];
            for traj_idx in start..end {
                omega.iter_mut().for_each(|w| *w = 0.0);
                for (src, gain) in noise.iter().zip(&gains) {
                    let t = sample_trajectory_stream(
                        &src.model,
                        dt,
                        n_samples,
                        cfg.seed,
                        traj_idx as u64,
                    )
                    .expect("validated models sample cleanly");
                    match gain {
                        Some(g) => {
                            for (w, x) in omega.iter_mut().zip(&t.samples) {
                                *w += g * x;
                            }
                        }
                        None => {
                            for (w, x) in omega.iter_mut().zip(&t.samples) {
                                *w += second_order_gain * x * x;
                            }
                        }
                    }
                }
                let acc = PhaseAccumulator::from_samples(dt, std::mem::take(&mut omega));
                for (k, s) in sequences.iter().enumerate() {
                    let phi = acc.sequence_phase(s);
                    sums[k].0 += phi.cos();
                    sums[k].1 += phi.sin();
                }
                omega = acc.into_samples();
            }
            sums
        })
        .collect();

    // deterministic reduction: batch b collects contiguous blocks
    let batches = cfg.batches.clamp(1, n_blocks);
    let mut batch_sums = vec![vec![(0.0, 0.0); delays_s.len()]; batches];
    let mut batch_counts = vec![0usize; batches];
    for (b, sums) in block_sums.iter().enumerate() {
        let batch = b * batches / n_blocks;
        let start = b * cfg.block;
        let end = ((b + 1) * cfg.block).min(cfg.n_traj);
        batch_counts[batch] += end - start;
        for (k, (re, im)) in sums.iter().enumerate() {
            batch_sums[batch][k].0 += re;
            batch_sums[batch][k].1 += im;
        }
    }

    let n_total = cfg.n_traj as f64;
    let mut visibility = Vec::with_capacity(delays_s.len());
    let mut stderr = Vec::with_capacity(delays_s.len());
    for k in 0..delays_s.len() {
        let (re, im) = batch_sums.iter().fold((0.0, 0.0), |acc, b| {
            (acc.0 + b[k].0, acc.1 + b[k].1)
        });
        let (zr, zi) = (re / n_total, im / n_total);
        let v = (zr * zr + zi * zi).sqrt();
        visibility.push(v);
        // project batch means onto the mean direction: the projection
        // average equals |Z| exactly, and its spread gives the error
        if batches >= 2 && v > 0.0 {
            let (ur, ui) = (zr / v, zi / v);
            let mut num = 0.0;
            for (b, count) in batch_sums.iter().zip(&batch_counts) {
                if *count == 0 {
                    continue;
                }
                let mean_b = (b[k].0 * ur + b[k].1 * ui) / *count as f64;
                num += *count as f64 * (mean_b - v) * (mean_b - v);
            }
            let eff_batches = batch_counts.iter().filter(|&&c| c > 0).count() as f64;
            let var = num / (n_total * (eff_batches - 1.0));
            stderr.push(var.max(0.0).sqrt());
        } else {
            stderr.push(0.0);
        }
    }

    let curve = DecayCurve {
        delays_s: delays_s.to_vec(),
        visibility,
        stderr,
        meta: CurveMeta {
            sequence: seq.kind,
            n_pi: seq.n_pi,
            b_ext_tesla,
            noise: describe_noise(noise),
            n_trajectories: cfg.n_traj,
            seed: cfg.seed,
            engine: EngineKind::Mc,
        },
    };
    curve.validate()?;
    Ok(curve)
}
