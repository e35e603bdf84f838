//! Thin command-line front end over the library: resolve a config
//! (file path or preset name), run it, and map errors to exit codes
//! (2 config, 3 engine rejection, 4 numerical failure).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dephase::config::ExperimentConfig;
use dephase::error::{Error, Result};
use dephase::harness::{emit_plot_data, run, sweep, RunOptions};
use dephase::presets;

#[derive(Parser)]
#[command(
    name = "dephase",
    version,
    about = "Spin-qubit dephasing simulation and noise-spectroscopy harness"
)]
struct Cli {
    /// Worker threads (overrides the DEPHASE_WORKERS environment
    /// variable); results are identical for any worker count.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a config file or a named preset.
    Run {
        /// Path to a config JSON, or a preset name (figure-1d,
        /// figure-2, figure-2bc, figure-3, figure-4).
        config: String,
        /// Override the config's output directory.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Execute a config whose named axis holds ≥ 2 values and collate
    /// the results.
    Sweep {
        config: String,
        /// Axis to sweep: b_ext, n_pi or noise_amplitude.
        #[arg(long)]
        axis: String,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Convert a run's CSV outputs into gnuplot-ready .dat files.
    EmitPlots {
        /// Results directory containing manifest.json.
        dir: PathBuf,
    },
    /// Print a preset configuration as JSON.
    Preset { name: String },
}

fn load_config(spec: &str, output_dir: Option<PathBuf>) -> Result<ExperimentConfig> {
    let mut config = if presets::PRESET_NAMES.contains(&spec) {
        presets::by_name(spec)?
    } else {
        let text = std::fs::read_to_string(spec).map_err(|e| Error::ConfigValidation {
            field: "<path>".into(),
            reason: format!("{spec}: {e}"),
        })?;
        ExperimentConfig::from_json(&text)?
    };
    if let Some(dir) = output_dir {
        config.output_dir = dir;
    }
    Ok(config)
}

fn options_from_env() -> RunOptions {
    RunOptions {
        timestamp_unix_s: std::env::var("SOURCE_DATE_EPOCH")
            .ok()
            .and_then(|v| v.parse().ok()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let workers = cli.workers.or_else(|| {
        std::env::var("DEPHASE_WORKERS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("dephase: could not size the worker pool: {e}");
            return ExitCode::from(4);
        }
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dephase: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run { config, output_dir } => {
            let config = load_config(&config, output_dir)?;
            let manifest = run(&config, &options_from_env())?;
            println!(
                "run complete: {} task(s), outputs in {}",
                manifest.tasks.len(),
                config.output_dir.display()
            );
            Ok(())
        }
        Command::Sweep {
            config,
            axis,
            output_dir,
        } => {
            let config = load_config(&config, output_dir)?;
            let manifest = sweep(&config, &axis, &options_from_env())?;
            println!(
                "sweep over {axis} complete: {} task(s), outputs in {}",
                manifest.tasks.len(),
                config.output_dir.display()
            );
            Ok(())
        }
        Command::EmitPlots { dir } => {
            let written = emit_plot_data(&dir)?;
            for path in &written {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Preset { name } => {
            let config = presets::by_name(&name)?;
            println!("{}", serde_json::to_string_pretty(&config)?);
            Ok(())
        }
    }
}
