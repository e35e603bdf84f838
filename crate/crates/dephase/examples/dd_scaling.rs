//! Dynamical decoupling under 1/f^0.56 electrical noise: coherence
//! times grow as T₂·N_π^γ with γ = λ/(1+λ), the decay envelopes share
//! the stretching exponent α = 1+λ, and λ round-trips through
//! λ = γ/(1−γ).
//!
//!     cargo run --release --example dd_scaling

use dephase::analysis::{fit_scaling, global_alpha_fit, lambda_from_gamma};
use dephase::coherence::ff_visibility;
use dephase::presets;
use dephase::pulse::PulseSequence;
use dephase::spin::QdParameters;

fn main() {
    let qd = QdParameters::reference_dot();
    let config = presets::figure_4();
    let sources: Vec<_> = config
        .noise
        .iter()
        .map(|spec| spec.resolve(&qd, 5.0).unwrap())
        .collect();
    let delays = config.delays.as_ref().unwrap().build();

    let mut curves = Vec::new();
    let mut n_pis = Vec::new();
    for n_pi in [1usize, 2, 4, 8, 16] {
        let seq = PulseSequence::cp(n_pi, 1.0);
        curves.push(ff_visibility(&seq, &sources, &qd, 5.0, &delays).unwrap());
        n_pis.push(n_pi);
    }
    let global = global_alpha_fit(&curves).unwrap();
    let points: Vec<(usize, f64, f64)> = n_pis
        .iter()
        .zip(&global.per_curve)
        .map(|(&n, &(_, t2, t2_sigma))| (n, t2, t2_sigma))
        .collect();
    println!("{:>6} {:>12}", "N_π", "T₂ (μs)");
    for (n, t2, _) in &points {
        println!("{n:6} {:12.3}", t2 * 1e6);
    }
    let scaling = fit_scaling(&points).unwrap();
    let lambda = lambda_from_gamma(scaling.gamma).unwrap();
    println!("\nshared stretch exponent α = {:.3} ± {:.3}", global.alpha, global.alpha_sigma);
    println!("scaling T₂(N_π) = T₂⁰·N_π^γ with γ = {:.3} ± {:.3}", scaling.gamma, scaling.gamma_sigma);
    println!("noise exponent from the scaling: λ = γ/(1−γ) = {lambda:.3}");
    println!("T₂(N_π = 10) = {:.2} μs", scaling.t2_0_s * 10f64.powf(scaling.gamma) * 1e6);
}
