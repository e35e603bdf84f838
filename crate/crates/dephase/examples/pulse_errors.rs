//! Finite pulse fidelity limits dynamical decoupling: with a per-pulse
//! rotation error the visibility prefactor shrinks as pulses are
//! added, and a three-rotation composite π pulse cancels the error to
//! first order.
//!
//!     cargo run --release --example pulse_errors

use dephase::pulse::{apply_sequence_bloch, PulseAxis, PulseModel, PulseSequence};
use dephase::spin::DetuningTrajectory;

fn main() {
    let det = DetuningTrajectory {
        dt: 1e-8,
        omega_rad_per_s: vec![0.0; 101],
        sources: vec!["quiet".into()],
    };
    let eps = 0.05;
    let simple = PulseModel::Rotation {
        angle_error_rad: eps,
        axis_tilt_rad: 0.0,
        composite: false,
    };
    let composite = PulseModel::Rotation {
        angle_error_rad: eps,
        axis_tilt_rad: 0.0,
        composite: true,
    };
    let prefactor = |pm: &PulseModel, n: usize| {
        let v = apply_sequence_bloch(
            &PulseSequence::cp(n, 1e-6),
            pm,
            PulseAxis::Cp,
            &det,
            std::f64::consts::FRAC_PI_2,
        )
        .unwrap();
        (v[0] * v[0] + v[1] * v[1]).sqrt()
    };
    println!("per-pulse rotation error ε = {eps} rad, no detuning noise\n");
    println!("{:>5} {:>14} {:>14}", "N_π", "simple π", "composite π");
    for n in [1usize, 2, 4, 8, 12, 16, 24, 32] {
        println!("{n:5} {:14.4} {:14.6}", prefactor(&simple, n), prefactor(&composite, n));
    }
}
