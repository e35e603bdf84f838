//! One noise model, three routes to the visibility: Monte-Carlo phase
//! accumulation, the analytic filter-function integral, and the
//! Ornstein–Uhlenbeck closed form χ = σ²τ_c²(τ/τ_c + e^(−τ/τ_c) − 1).
//!
//!     cargo run --release --example ou_filter_function

use dephase::coherence::{ff_visibility, mc_visibility, CoupledNoise, McConfig};
use dephase::noise::NoiseModel;
use dephase::pulse::PulseSequence;
use dephase::spin::QdParameters;
use dephase::units::TWO_PI;

fn main() {
    let qd = QdParameters::reference_dot();
    let (sigma_hz, tau_c) = (4e5, 2e-7);
    let noise = [CoupledNoise::direct(NoiseModel::ornstein_uhlenbeck(
        sigma_hz, tau_c,
    ))];
    let taus: Vec<f64> = (0..10)
        .map(|i| tau_c * 0.1 * 10f64.powf(i as f64 / 4.5))
        .collect();
    let seq = PulseSequence::ramsey(1.0);
    let mc = mc_visibility(&seq, &noise, &qd, 1.0, &taus, &McConfig::new(8_000, 3)).unwrap();
    let ff = ff_visibility(&seq, &noise, &qd, 1.0, &taus).unwrap();

    let sig_om = TWO_PI * sigma_hz;
    println!("{:>10} {:>10} {:>10} {:>10}", "τ/τ_c", "V_mc", "V_ff", "closed");
    for (i, &tau) in taus.iter().enumerate() {
        let x: f64 = tau / tau_c;
        let closed = (-sig_om * sig_om * tau_c * tau_c * (x + (-x).exp() - 1.0)).exp();
        println!(
            "{:10.3} {:10.4} {:10.4} {:10.4}",
            x, mc.visibility[i], ff.visibility[i], closed
        );
    }
}
