//! Physical constants and unit conventions.
//!
//! All public interfaces use SI: seconds, Hz, Tesla, V/m. Angular
//! frequencies (rad/s) appear only inside detuning trajectories, so a
//! factor of 2π can never hide at a module boundary.

/// Bohr magneton over Planck constant, μ_B/h, in Hz per Tesla.
///
/// Fixed here for the whole toolkit; the CODATA value rounded to the
/// five significant digits used throughout.
pub const MU_B_OVER_H_HZ_PER_T: f64 = 13.996e9;

/// 2π, for converting ordinary frequency (Hz) to angular frequency (rad/s).
pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Gyromagnetic ratios γ/2π of the nuclear species of an InGaAs dot,
/// in Hz per Tesla.
pub mod gyromagnetic {
    pub const IN_115: f64 = 9.33e6;
    pub const GA_69: f64 = 10.22e6;
    pub const GA_71: f64 = 12.98e6;
    pub const AS_75: f64 = 7.29e6;
}
