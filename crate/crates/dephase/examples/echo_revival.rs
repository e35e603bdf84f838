//! Low-field Hahn-echo collapse and revival: the transverse Overhauser
//! field precesses at the nuclear Larmor frequencies, and the echo
//! refocuses whenever each half-interval spans whole precession
//! periods (period 2/f_s per species).
//!
//!     cargo run --release --example echo_revival

use dephase::coherence::echo_with_nuclear_precession;
use dephase::presets;
use dephase::spin::QdParameters;

fn main() {
    let mut qd = QdParameters::reference_dot();
    qd.species = presets::revival_species();
    let b = 2.0;
    println!("nuclear Larmor frequencies at {b} T:");
    for (label, f) in qd.larmor_frequencies(b).unwrap() {
        println!("  {label:7} {:6.2} MHz (revival period {:5.1} ns)", f / 1e6, 2e9 / f);
    }
    let taus: Vec<f64> = (1..=75).map(|i| i as f64 * 4e-9).collect();
    let curve = echo_with_nuclear_precession(&qd, b, &taus, 4_000, 11).unwrap();
    println!("\n{:>8} {:>8}   visibility", "τ (ns)", "V");
    for (tau, v) in curve.delays_s.iter().zip(&curve.visibility).step_by(3) {
        let bar = "#".repeat((v * 50.0).round() as usize);
        println!("{:8.0} {v:8.3}   {bar}", tau * 1e9);
    }
}
