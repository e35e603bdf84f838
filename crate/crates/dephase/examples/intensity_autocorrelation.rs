//! Noise spectroscopy from light alone: charge noise Stark-shifts the
//! optical line, intensity fluctuations inherit the charge dynamics,
//! and the intensity autocorrelation separates into fluctuator
//! exponentials plus a 1/τ^(1−λ) power law.
//!
//! Runs a shortened version of the `figure-3` preset (~20 s).
//!
//!     cargo run --release --example intensity_autocorrelation

use dephase::harness::{run, RunOptions};
use dephase::presets;

fn main() {
    let mut config = presets::figure_3();
    if let Some(section) = config.intensity.as_mut() {
        section.records = 2; // shortened; the preset ships with 6
    }
    config.output_dir = std::env::temp_dir().join("dephase_example_intensity");
    let _ = std::fs::remove_dir_all(&config.output_dir);
    let manifest = run(&config, &RunOptions::default()).unwrap();
    println!(
        "simulated {} record(s); outputs in {}",
        config.intensity.as_ref().unwrap().records,
        config.output_dir.display()
    );
    for task in &manifest.tasks {
        println!("  task `{}` → {:?}", task.label, task.outputs);
    }
    let fit: dephase::analysis::FitResult = serde_json::from_str(
        &std::fs::read_to_string(config.output_dir.join("autocorr_fit.json")).unwrap(),
    )
    .unwrap();
    println!("\nfitted autocorrelation model (4 exponentials + power law):");
    for p in &fit.params {
        println!("  {:22} {:>12.4e} ± {:.2e}", p.name, p.value, p.sigma);
    }
    println!("\ninjected fluctuator timescales:");
    for (tau, _) in presets::figure_3_fluctuators() {
        println!("  {tau:.2e} s");
    }
}
