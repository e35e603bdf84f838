//! Electrical dephasing scales linearly with magnetic field, so both
//! the Ramsey T₂* and the Hahn-echo T₂ fall off as 1/B.
//!
//!     cargo run --release --example field_scaling

use dephase::analysis::{fit_power_law_field, fit_stretched_exp};
use dephase::coherence::ff_visibility;
use dephase::presets;
use dephase::pulse::PulseSequence;
use dephase::spin::QdParameters;

fn main() {
    let qd = QdParameters::reference_dot();
    let fields = [4.0, 5.0, 6.5, 8.0];

    for (name, preset, seq) in [
        ("Ramsey T₂*", presets::figure_1d(), PulseSequence::ramsey(1.0)),
        ("Hahn-echo T₂", presets::figure_2(), PulseSequence::hahn(1.0)),
    ] {
        let delays = preset.delays.as_ref().unwrap().build();
        let mut points = Vec::new();
        println!("{name}:");
        for &b in &fields {
            let sources: Vec<_> = preset
                .noise
                .iter()
                .map(|spec| spec.resolve(&qd, b).unwrap())
                .collect();
            let curve = ff_visibility(&seq, &sources, &qd, b, &delays).unwrap();
            let fit = fit_stretched_exp(&curve, None).unwrap();
            println!("  B = {b:4.1} T → {:8.1} ns (α = {:.2})", fit.t2_s * 1e9, fit.alpha);
            points.push((b, fit.t2_s, fit.t2_sigma_s.max(1e-3 * fit.t2_s)));
        }
        let power = fit_power_law_field(&points).unwrap();
        println!("  power law: ∝ B^({:.3} ± {:.3})\n", power.exponent, power.exponent_sigma);
    }
}
