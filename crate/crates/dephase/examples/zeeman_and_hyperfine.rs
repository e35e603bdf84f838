//! The coupling formulas themselves: Zeeman splitting versus field,
//! hyperfine shifts from transverse and longitudinal Overhauser
//! fields, regime indicator, and nuclear Larmor frequencies.
//!
//!     cargo run --release --example zeeman_and_hyperfine

use dephase::spin::QdParameters;

fn main() {
    let qd = QdParameters::reference_dot();
    println!("g_h = {:.3}, β = {:.3}", qd.g_h, qd.beta);
    println!("\nZeeman splitting (2/√3)·β·g_h·μ_B·B/h:");
    for b in [1.0, 2.0, 4.0, 6.5, 8.0] {
        println!("  B = {b:4.1} T → {:6.2} GHz", qd.zeeman_splitting(b).unwrap() / 1e9);
    }
    println!("\nhyperfine detuning at B = 2 T:");
    let first = qd.nuclear_detuning(qd.delta_bx_nuc_tesla, 0.0, 2.0).unwrap();
    let second = qd.nuclear_detuning(0.0, qd.delta_bz_nuc_tesla, 2.0).unwrap();
    println!("  first order  (δB_x = {:.2} mT) → {:8.3} MHz", qd.delta_bx_nuc_tesla * 1e3, first / 1e6);
    println!("  second order (δB_z = {:.2} mT) → {:8.3} MHz", qd.delta_bz_nuc_tesla * 1e3, second / 1e6);
    println!(
        "  second-order dominance ratio δB_z/(2β²B) = {:.3} (≪ 1: not in that regime)",
        qd.second_order_dominance(2.0).unwrap()
    );
    println!("\nnuclear Larmor frequencies at 2 T:");
    for (label, f) in qd.larmor_frequencies(2.0).unwrap() {
        println!("  {label:7} {:6.2} MHz", f / 1e6);
    }
}
