//! Transfer a noise calibration across experiments: fix the 1/f^0.56
//! amplitude from a Hahn-echo coherence time, add the slow-fluctuator
//! share, and predict the free-induction T₂* at the same field.
//!
//!     cargo run --release --example calibrated_prediction

use dephase::analysis::{calibrate_to_hahn_t2, predict_t2star};
use dephase::presets;
use dephase::spin::QdParameters;

fn main() {
    let qd = QdParameters::reference_dot();
    let template = presets::reference_calibration_template();
    let b = 6.5;
    let hahn_t2 = presets::HAHN_T2_AT_6P5T;
    let model = calibrate_to_hahn_t2(&qd, b, hahn_t2, &template).unwrap();
    println!("calibration at B = {b} T:");
    println!("  target Hahn T₂       = {:.2} μs", hahn_t2 * 1e6);
    println!("  1/f^λ band rms       = {:.3e} V/m", model.spectral().variance().sqrt());
    println!("  quasi-static share   = {:.3e} V/m", model.quasi_static_sigma_v_per_m());
    let t2star = predict_t2star(&model, &qd, b).unwrap();
    println!("\npredicted Ramsey T₂* at {b} T = {:.1} ns", t2star * 1e9);
    for b_other in [4.0, 5.0, 8.0] {
        let t = predict_t2star(&model, &qd, b_other).unwrap();
        println!("  at {b_other} T → {:.1} ns (B·T₂* ≈ const)", t * 1e9);
    }
}
