//! Inhomogeneous dephasing: Ramsey decay under quasi-static Gaussian
//! detuning noise follows exp(−σ_ω²τ²/2), and a Hahn echo refocuses
//! the same noise completely.
//!
//!     cargo run --release --example ramsey_dephasing

use dephase::coherence::{mc_visibility, CoupledNoise, McConfig};
use dephase::noise::NoiseModel;
use dephase::pulse::PulseSequence;
use dephase::spin::QdParameters;
use dephase::units::TWO_PI;

fn main() {
    let qd = QdParameters::reference_dot();
    let sigma_hz = 4e6;
    let noise = [CoupledNoise::direct(NoiseModel::quasi_static(sigma_hz))];
    let taus: Vec<f64> = (1..=12).map(|i| i as f64 * 8e-9).collect();
    let cfg = McConfig::new(10_000, 1);

    let ramsey =
        mc_visibility(&PulseSequence::ramsey(1.0), &noise, &qd, 1.0, &taus, &cfg).unwrap();
    let hahn = mc_visibility(&PulseSequence::hahn(1.0), &noise, &qd, 1.0, &taus, &cfg).unwrap();

    let sigma_omega = TWO_PI * sigma_hz;
    println!("{:>8} {:>10} {:>10} {:>10}", "τ (ns)", "V_ramsey", "gaussian", "V_hahn");
    for (i, &tau) in taus.iter().enumerate() {
        let gauss = (-sigma_omega * sigma_omega * tau * tau / 2.0).exp();
        println!(
            "{:8.1} {:10.4} {:10.4} {:10.4}",
            tau * 1e9,
            ramsey.visibility[i],
            gauss,
            hahn.visibility[i]
        );
    }
    let t2star = 2f64.sqrt() / sigma_omega;
    println!("\nquasi-static T₂* = √2/σ_ω = {:.1} ns", t2star * 1e9);
}
