//! Configuration-driven experiment runner.
//!
//! A run expands the config's axes (`b_ext_tesla`, `sequence.n_pi`,
//! `noise_scale_axis`) into tasks, executes each with a seed derived
//! from `(master seed, task index)`, writes per-task decay-curve CSVs
//! and fit JSONs, collates axis sweeps with their downstream exponent
//! fits, and records everything in a manifest. Outputs are a pure
//! function of `(config, seed, toolkit version)`: scheduling and
//! worker counts cannot affect a single byte. Interrupted runs resume
//! from the manifest by recomputing only missing outputs.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{
    fit_autocorr_model, fit_power_law_field, fit_scaling, fit_stretched_exp, global_alpha_fit,
    lambda_from_gamma, simulate_intensity, FitParam, FitResult,
};
use crate::coherence::{ff_supported, ff_visibility, mc_visibility, CoupledNoise, DecayCurve, McConfig};
use crate::config::{scale_noise_model, EngineSelect, ExperimentConfig, NoiseSpec, TaskKind};
use crate::error::{Error, Result};
use crate::noise::{AutocorrMode, NoiseModel};
use crate::pulse::{PulseSequence, SequenceKind};
use crate::spin::DECAY_STRETCH_ALPHA;

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Options orthogonal to the experiment itself.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Manifest timestamp override (e.g. from `SOURCE_DATE_EPOCH`) for
    /// byte-reproducible outputs.
    pub timestamp_unix_s: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskStatus {
    Pending,
    Done,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskRecord {
    pub index: usize,
    pub label: String,
    pub seed: u64,
    pub status: TaskStatus,
    pub outputs: Vec<String>,
}

/// Run record: config hash, version, timestamp, per-task seeds and the
/// output inventory. Reruns with an identical config produce an
/// identical hash and identical data files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub toolkit_version: String,
    pub timestamp_unix_s: u64,
    pub tasks: Vec<TaskRecord>,
    pub collation_outputs: Vec<String>,
}

impl RunManifest {
    pub fn incomplete_tasks(&self) -> Vec<&TaskRecord> {
        self.tasks
            .iter()
            .filter(|t| t.status != TaskStatus::Done)
            .collect()
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn task_seed(master: u64, index: usize) -> u64 {
    splitmix64(master ^ splitmix64(index as u64 + 1))
}

/// Atomic file write: temp file in the same directory, then rename.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

fn curve_to_bytes(curve: &DecayCurve) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    curve.write_csv(&mut buf)?;
    Ok(buf)
}

struct DecayTask {
    index: usize,
    label: String,
    b_ext_tesla: f64,
    n_pi: usize,
    noise_scale: f64,
    scale_index: usize,
}

fn decay_tasks(config: &ExperimentConfig) -> Vec<DecayTask> {
    let n_pis = config
        .sequence
        .as_ref()
        .map(|s| s.n_pi.values())
        .unwrap_or_else(|| vec![0]);
    let scales = config
        .noise_scale_axis
        .clone()
        .unwrap_or_else(|| vec![1.0]);
    let mut tasks = Vec::new();
    let mut index = 0;
    for (scale_index, &scale) in scales.iter().enumerate() {
        for &b in &config.b_ext_tesla {
            for &n_pi in &n_pis {
                let mut label = format!("b{b:.3}_npi{n_pi}");
                if scales.len() > 1 {
                    label.push_str(&format!("_k{scale:.4}"));
                }
                tasks.push(DecayTask {
                    index,
                    label,
                    b_ext_tesla: b,
                    n_pi,
                    noise_scale: scale,
                    scale_index,
                });
                index += 1;
            }
        }
    }
    tasks
}

fn resolve_sources(
    config: &ExperimentConfig,
    b_ext_tesla: f64,
    scale: f64,
) -> Result<Vec<CoupledNoise>> {
    config
        .noise
        .iter()
        .map(|spec| {
            let mut src = spec.resolve(&config.qd, b_ext_tesla)?;
            if scale != 1.0 {
                src.model = scale_noise_model(&src.model, scale);
            }
            Ok(src)
        })
        .collect()
}

fn sequence_for(config: &ExperimentConfig, n_pi: usize) -> PulseSequence {
    let kind = config
        .sequence
        .as_ref()
        .map(|s| s.kind)
        .unwrap_or(SequenceKind::Ramsey);
    match (kind, n_pi) {
        (SequenceKind::Ramsey, _) => PulseSequence::ramsey(1.0),
        (SequenceKind::Hahn, _) => PulseSequence::hahn(1.0),
        (SequenceKind::Cp, n) => PulseSequence::cp(n, 1.0),
    }
}

/// Execute a configuration: simulate, fit, collate, and write the
/// manifest. Existing task outputs are kept (resume semantics); they
/// are bytewise what a fresh run would produce.
pub fn run(config: &ExperimentConfig, options: &RunOptions) -> Result<RunManifest> {
    config.validate()?;
    let out_dir = &config.output_dir;
    std::fs::create_dir_all(out_dir)?;
    let timestamp = options.timestamp_unix_s.unwrap_or_else(|| {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    });

    let mut manifest = RunManifest {
        config_hash: config.content_hash(),
        toolkit_version: TOOLKIT_VERSION.into(),
        timestamp_unix_s: timestamp,
        tasks: Vec::new(),
        collation_outputs: Vec::new(),
    };

    match config.task {
        TaskKind::Decay => run_decay(config, &mut manifest)?,
        TaskKind::IntensityAutocorr => run_intensity(config, &mut manifest)?,
    }

    write_json(&out_dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

fn run_decay(config: &ExperimentConfig, manifest: &mut RunManifest) -> Result<()> {
    let out_dir = &config.output_dir;
    let delays = config.delays.as_ref().expect("validated").build();
    let tasks = decay_tasks(config);

    // plan first so an interrupted run leaves the full task list
    for task in &tasks {
        manifest.tasks.push(TaskRecord {
            index: task.index,
            label: task.label.clone(),
            seed: task_seed(config.seed, task.index),
            status: TaskStatus::Pending,
            outputs: vec![
                format!("curve_{}.csv", task.label),
                format!("fit_{}.json", task.label),
            ],
        });
    }
    write_json(&out_dir.join("manifest.json"), manifest)?;

    let mut curves: Vec<DecayCurve> = Vec::with_capacity(tasks.len());
    let mut fits = Vec::with_capacity(tasks.len());
    for task in &tasks {
        let curve_path = out_dir.join(format!("curve_{}.csv", task.label));
        let fit_path = out_dir.join(format!("fit_{}.json", task.label));
        let seed = task_seed(config.seed, task.index);

        let curve = if curve_path.exists() {
            DecayCurve::load(&curve_path)?
        } else {
            let sources = resolve_sources(config, task.b_ext_tesla, task.noise_scale)?;
            let seq = sequence_for(config, task.n_pi);
            let engine = match config.engine {
                EngineSelect::Ff => EngineSelect::Ff,
                EngineSelect::Mc => EngineSelect::Mc,
                EngineSelect::Auto => {
                    if ff_supported(&sources) {
                        EngineSelect::Ff
                    } else {
                        EngineSelect::Mc
                    }
                }
            };
            let curve = match engine {
                EngineSelect::Ff => {
                    ff_visibility(&seq, &sources, &config.qd, task.b_ext_tesla, &delays)?
                }
                _ => {
                    let mc = McConfig::new(config.n_traj, seed);
                    mc_visibility(&seq, &sources, &config.qd, task.b_ext_tesla, &delays, &mc)?
                }
            };
            // meta sidecar travels with the CSV
            write_atomic(&curve_path, &curve_to_bytes(&curve)?)?;
            let meta_path = out_dir.join(format!("curve_{}.csv.meta.json", task.label));
            write_json(&meta_path, &curve.meta)?;
            curve
        };

        let fit = fit_curve_with_fallback(&curve)?;
        write_json(&fit_path, &fit)?;
        fits.push(fit);
        curves.push(curve);

        manifest.tasks[task.index].status = TaskStatus::Done;
        write_json(&out_dir.join("manifest.json"), manifest)?;
    }

    collate_decay(config, &tasks, &curves, &fits, manifest)?;
    Ok(())
}

/// Free-α stretched fit, falling back to the fixed default exponent on
/// shallow curves; the fallback is recorded in the report.
fn fit_curve_with_fallback(curve: &DecayCurve) -> Result<FitResult> {
    match fit_stretched_exp(curve, None) {
        Ok(fit) => Ok(fit.into_fit_result()),
        Err(Error::FitFailure(reason)) => {
            let fit = fit_stretched_exp(curve, Some(DECAY_STRETCH_ALPHA))?;
            let mut report = fit.into_fit_result();
            report
                .notes
                .push(format!("free-α fit unavailable ({reason}); α held at {DECAY_STRETCH_ALPHA}"));
            Ok(report)
        }
        Err(e) => Err(e),
    }
}

fn collate_decay(
    config: &ExperimentConfig,
    tasks: &[DecayTask],
    curves: &[DecayCurve],
    fits: &[FitResult],
    manifest: &mut RunManifest,
) -> Result<()> {
    let out_dir = &config.output_dir;
    let n_pis = config
        .sequence
        .as_ref()
        .map(|s| s.n_pi.values())
        .unwrap_or_else(|| vec![0]);
    let scales = config
        .noise_scale_axis
        .clone()
        .unwrap_or_else(|| vec![1.0]);

    let fit_value = |fit: &FitResult, name: &str| -> (f64, f64) {
        fit.get(name).map(|p| (p.value, p.sigma)).unwrap_or((f64::NAN, 0.0))
    };

    // pulse-number axis: per (scale, field) collation + scaling fits
    if n_pis.len() >= 2 {
        for (scale_index, _) in scales.iter().enumerate() {
            for &b in &config.b_ext_tesla {
                let group: Vec<usize> = tasks
                    .iter()
                    .filter(|t| t.scale_index == scale_index && t.b_ext_tesla == b)
                    .map(|t| t.index)
                    .collect();
                if group.len() < 2 {
                    continue;
                }
                let suffix = if scales.len() > 1 {
                    format!("b{b:.3}_k{:.4}", scales[scale_index])
                } else {
                    format!("b{b:.3}")
                };
                let mut csv = String::from("n_pi,t2_s,t2_sigma_s,alpha,alpha_sigma\n");
                let family: Vec<DecayCurve> =
                    group.iter().map(|&i| curves[i].clone()).collect();
                let global = global_alpha_fit(&family)?;
                let mut scaling_points = Vec::new();
                for (gi, &i) in group.iter().enumerate() {
                    let (_, t2, t2_sigma) = global.per_curve[gi];
                    scaling_points.push((tasks[i].n_pi, t2, t2_sigma));
                    csv.push_str(&format!(
                        "{},{:.17e},{:.17e},{:.17e},{:.17e}\n",
                        tasks[i].n_pi, t2, t2_sigma, global.alpha, global.alpha_sigma
                    ));
                }
                let csv_name = format!("collated_npi_{suffix}.csv");
                write_atomic(&out_dir.join(&csv_name), csv.as_bytes())?;

                let scaling = fit_scaling(&scaling_points)?;
                let lambda = lambda_from_gamma(scaling.gamma.clamp(0.0, 0.999))?;
                let report = FitResult {
                    model: "dd_scaling".into(),
                    params: vec![
                        FitParam {
                            name: "gamma".into(),
                            value: scaling.gamma,
                            sigma: scaling.gamma_sigma,
                        },
                        FitParam {
                            name: "t2_0_s".into(),
                            value: scaling.t2_0_s,
                            sigma: scaling.t2_0_sigma_s,
                        },
                        FitParam {
                            name: "alpha_global".into(),
                            value: global.alpha,
                            sigma: global.alpha_sigma,
                        },
                        FitParam {
                            name: "lambda_from_gamma".into(),
                            value: lambda,
                            sigma: scaling.gamma_sigma / (1.0 - scaling.gamma).powi(2),
                        },
                    ],
                    residual_norm: scaling.residual_norm,
                    converged: true,
                    notes: if global.heterogeneous {
                        vec!["per-curve exponents disagree with the shared α".into()]
                    } else {
                        Vec::new()
                    },
                };
                let fit_name = format!("scaling_fit_{suffix}.json");
                write_json(&out_dir.join(&fit_name), &report)?;
                manifest.collation_outputs.push(csv_name);
                manifest.collation_outputs.push(fit_name);
            }
        }
    }

    // field axis: per (scale, n_pi) collation + field-exponent fit
    if config.b_ext_tesla.len() >= 2 {
        for (scale_index, _) in scales.iter().enumerate() {
            for &n_pi in &n_pis {
                let group: Vec<usize> = tasks
                    .iter()
                    .filter(|t| t.scale_index == scale_index && t.n_pi == n_pi)
                    .map(|t| t.index)
                    .collect();
                if group.len() < 2 {
                    continue;
                }
                let suffix = if scales.len() > 1 {
                    format!("npi{n_pi}_k{:.4}", scales[scale_index])
                } else {
                    format!("npi{n_pi}")
                };
                let mut csv = String::from("b_ext_tesla,t2_s,t2_sigma_s,alpha,alpha_sigma\n");
                let mut points = Vec::new();
                for &i in &group {
                    let (t2, t2_sigma) = fit_value(&fits[i], "t2_s");
                    let (alpha, alpha_sigma) = fit_value(&fits[i], "alpha");
                    points.push((tasks[i].b_ext_tesla, t2, t2_sigma));
                    csv.push_str(&format!(
                        "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
                        tasks[i].b_ext_tesla, t2, t2_sigma, alpha, alpha_sigma
                    ));
                }
                let csv_name = format!("collated_b_{suffix}.csv");
                write_atomic(&out_dir.join(&csv_name), csv.as_bytes())?;
                if points.len() >= 3 {
                    let field_fit = fit_power_law_field(&points)?;
                    let report = FitResult {
                        model: "field_power_law".into(),
                        params: vec![
                            FitParam {
                                name: "exponent".into(),
                                value: field_fit.exponent,
                                sigma: field_fit.exponent_sigma,
                            },
                            FitParam {
                                name: "prefactor".into(),
                                value: field_fit.prefactor,
                                sigma: 0.0,
                            },
                        ],
                        residual_norm: field_fit.residual_norm,
                        converged: true,
                        notes: Vec::new(),
                    };
                    let fit_name = format!("field_fit_{suffix}.json");
                    write_json(&out_dir.join(&fit_name), &report)?;
                    manifest.collation_outputs.push(fit_name);
                }
                manifest.collation_outputs.push(csv_name);
            }
        }
    }

    // noise-amplitude axis: per (field, n_pi) collation
    if scales.len() >= 2 {
        for &b in &config.b_ext_tesla {
            for &n_pi in &n_pis {
                let group: Vec<usize> = tasks
                    .iter()
                    .filter(|t| t.b_ext_tesla == b && t.n_pi == n_pi)
                    .map(|t| t.index)
                    .collect();
                if group.len() < 2 {
                    continue;
                }
                let mut csv = String::from("noise_scale,t2_s,t2_sigma_s,alpha,alpha_sigma\n");
                for &i in &group {
                    let (t2, t2_sigma) = fit_value(&fits[i], "t2_s");
                    let (alpha, alpha_sigma) = fit_value(&fits[i], "alpha");
                    csv.push_str(&format!(
                        "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
                        tasks[i].noise_scale, t2, t2_sigma, alpha, alpha_sigma
                    ));
                }
                let csv_name = format!("collated_scale_b{b:.3}_npi{n_pi}.csv");
                write_atomic(&out_dir.join(&csv_name), csv.as_bytes())?;
                manifest.collation_outputs.push(csv_name);
            }
        }
    }
    Ok(())
}

fn run_intensity(config: &ExperimentConfig, manifest: &mut RunManifest) -> Result<()> {
    let out_dir = &config.output_dir;
    let section = config.intensity.as_ref().expect("validated");
    let seed = task_seed(config.seed, 0);
    manifest.tasks.push(TaskRecord {
        index: 0,
        label: "intensity".into(),
        seed,
        status: TaskStatus::Pending,
        outputs: vec!["autocorr.csv".into(), "autocorr_fit.json".into()],
    });
    write_json(&out_dir.join("manifest.json"), manifest)?;

    let autocorr_path = out_dir.join("autocorr.csv");
    let curve = if autocorr_path.exists() {
        read_autocorr_csv(&autocorr_path)?
    } else {
        // one long field record from the summed sources
        let members: Vec<NoiseModel> = config
            .noise
            .iter()
            .map(|spec| {
                let NoiseSpec::Fixed(src) = spec else {
                    unreachable!("validated: intensity sources are fixed")
                };
                src.model.clone()
            })
            .collect();
        let model = if members.len() == 1 {
            members.into_iter().next().unwrap()
        } else {
            NoiseModel::Composite { members }
        };
        let n = (section.duration_s / section.dt_s).round() as usize;
        let decades = (section.lag_max_s / section.lag_min_s).log10();
        let count = (decades * section.lags_per_decade as f64).ceil() as usize;
        let mut lags: Vec<usize> = (0..=count)
            .map(|i| {
                let lag_s = section.lag_min_s * 10f64.powf(decades * i as f64 / count as f64);
                (lag_s / section.dt_s).round() as usize
            })
            .collect();
        lags.dedup();
        // independent records, averaged; record index keys the RNG
        // stream so the result is scheduling-independent. The intensity
        // mean is pooled across records first: subtracting each
        // record's own mean would bias the long lags (the empirical
        // autocovariance of a record integrates to ≈ 0).
        let record_intensity = |r: usize| -> Result<crate::noise::Trajectory> {
            let field =
                crate::noise::sample_trajectory_stream(&model, section.dt_s, n, seed, r as u64)?;
            simulate_intensity(
                &field,
                section.k_stark_hz_per_v_per_m,
                section.linewidth_fwhm_hz,
                1.0,
                section.detuning_offset_hz,
            )
        };
        // sequential record loops: one synthesis buffer at a time
        let record_means: Vec<f64> = (0..section.records)
            .map(|r| record_intensity(r).map(|t| t.mean()))
            .collect::<Result<Vec<_>>>()?;
        let pooled_mean = record_means.iter().sum::<f64>() / section.records as f64;
        let per_record: Vec<crate::noise::AutocorrCurve> = (0..section.records)
            .map(|r| -> Result<crate::noise::AutocorrCurve> {
                let intensity = record_intensity(r)?;
                crate::noise::autocorrelation_at_lags_with_mean(
                    &intensity,
                    &lags,
                    AutocorrMode::NormalizedIntensity,
                    pooled_mean,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let curve = average_autocorr(&per_record);
        let mut csv = String::from("lag_s,g,stderr\n");
        for i in 0..curve.lags_s.len() {
            csv.push_str(&format!(
                "{:.17e},{:.17e},{:.17e}\n",
                curve.lags_s[i], curve.values[i], curve.stderrs[i]
            ));
        }
        write_atomic(&autocorr_path, csv.as_bytes())?;
        curve
    };

    let fit = fit_autocorr_model(&curve, section.k_exponentials, true)?;
    let mut params = vec![
        FitParam {
            name: "lambda".into(),
            value: fit.lambda,
            sigma: fit.lambda_sigma,
        },
        FitParam {
            name: "power_law_amplitude".into(),
            value: fit.power_law_amplitude,
            sigma: fit.power_law_amplitude_sigma,
        },
    ];
    for (k, c) in fit.exponentials.iter().enumerate() {
        params.push(FitParam {
            name: format!("tau_{k}_s"),
            value: c.tau_s,
            sigma: c.tau_sigma_s,
        });
        params.push(FitParam {
            name: format!("amplitude_{k}"),
            value: c.amplitude,
            sigma: c.amplitude_sigma,
        });
    }
    let report = FitResult {
        model: "autocorr_exponentials_plus_power_law".into(),
        params,
        residual_norm: fit.residual_norm,
        converged: true,
        notes: if fit.degenerate {
            vec!["fitted time constants are nearly degenerate".into()]
        } else {
            Vec::new()
        },
    };
    write_json(&out_dir.join("autocorr_fit.json"), &report)?;
    manifest.tasks[0].status = TaskStatus::Done;
    Ok(())
}

/// Equal-weight average of per-record curves; the stderr is the
/// between-record spread of the mean.
fn average_autocorr(records: &[crate::noise::AutocorrCurve]) -> crate::noise::AutocorrCurve {
    let r = records.len();
    let n = records[0].lags_s.len();
    let mut values = vec![0.0; n];
    for rec in records {
        for (v, x) in values.iter_mut().zip(&rec.values) {
            *v += x / r as f64;
        }
    }
    let mut stderrs = vec![0.0; n];
    if r >= 2 {
        for i in 0..n {
            let var: f64 = records
                .iter()
                .map(|rec| (rec.values[i] - values[i]).powi(2))
                .sum::<f64>()
                / (r as f64 - 1.0);
            stderrs[i] = (var / r as f64).sqrt();
        }
    }
    crate::noise::AutocorrCurve {
        lags_s: records[0].lags_s.clone(),
        values,
        stderrs,
    }
}

fn read_autocorr_csv(path: &Path) -> Result<crate::noise::AutocorrCurve> {
    let text = std::fs::read_to_string(path)?;
    let mut lags = Vec::new();
    let mut values = Vec::new();
    let mut stderrs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 || line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(Error::invalid("csv", format!("line {}: need 3 columns", lineno + 1)));
        }
        lags.push(cols[0].trim().parse::<f64>().map_err(|e| Error::invalid("csv", e.to_string()))?);
        values.push(cols[1].trim().parse::<f64>().map_err(|e| Error::invalid("csv", e.to_string()))?);
        stderrs.push(cols[2].trim().parse::<f64>().map_err(|e| Error::invalid("csv", e.to_string()))?);
    }
    Ok(crate::noise::AutocorrCurve {
        lags_s: lags,
        values,
        stderrs,
    })
}

/// Validated sweep entry point: the named axis must carry ≥ 2 values.
pub fn sweep(config: &ExperimentConfig, axis: &str, options: &RunOptions) -> Result<RunManifest> {
    let len = match axis {
        "b_ext" => config.b_ext_tesla.len(),
        "n_pi" => config
            .sequence
            .as_ref()
            .map(|s| s.n_pi.values().len())
            .unwrap_or(0),
        "noise_amplitude" => config.noise_scale_axis.as_ref().map(Vec::len).unwrap_or(0),
        other => {
            return Err(Error::ConfigValidation {
                field: "axis".into(),
                reason: format!("unknown axis `{other}` (b_ext, n_pi, noise_amplitude)"),
            })
        }
    };
    if len < 2 {
        return Err(Error::ConfigValidation {
            field: format!("axis.{axis}"),
            reason: format!("sweep needs ≥ 2 values, found {len}"),
        });
    }
    run(config, options)
}

/// Convert run outputs into whitespace-separated gnuplot-ready `.dat`
/// files under `<dir>/plots`, one per CSV, with `#`-commented headers.
/// Nothing is written unless every listed output exists.
pub fn emit_plot_data(results_dir: &Path) -> Result<Vec<PathBuf>> {
    let manifest_path = results_dir.join("manifest.json");
    if !manifest_path.exists() {
        return Err(Error::MissingInput(format!(
            "no manifest.json in {}",
            results_dir.display()
        )));
    }
    let manifest: RunManifest = serde_json::from_str(&std::fs::read_to_string(&manifest_path)?)?;
    let mut csv_files: Vec<String> = Vec::new();
    for task in &manifest.tasks {
        for output in &task.outputs {
            if output.ends_with(".csv") {
                csv_files.push(output.clone());
            }
        }
    }
    for output in &manifest.collation_outputs {
        if output.ends_with(".csv") {
            csv_files.push(output.clone());
        }
    }
    if csv_files.is_empty() {
        return Err(Error::MissingInput("manifest lists no CSV outputs".into()));
    }
    // verify everything exists before writing anything
    let mut converted = Vec::new();
    for name in &csv_files {
        let path = results_dir.join(name);
        if !path.exists() {
            return Err(Error::MissingInput(format!("{} is missing", path.display())));
        }
        let text = std::fs::read_to_string(&path)?;
        let mut dat = String::new();
        for (lineno, line) in text.lines().enumerate() {
            if lineno == 0 {
                dat.push_str("# ");
                dat.push_str(&line.replace(',', " "));
            } else {
                dat.push_str(&line.replace(',', " "));
            }
            dat.push('\n');
        }
        converted.push((name.replace(".csv", ".dat"), dat));
    }
    let plot_dir = results_dir.join("plots");
    std::fs::create_dir_all(&plot_dir)?;
    let mut written = Vec::new();
    for (name, dat) in converted {
        let path = plot_dir.join(name);
        write_atomic(&path, dat.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}
