//! Qubit-environment coupling: maps magnetic and electric fluctuations
//! to energy-splitting fluctuations and provides derived quantities
//! (Zeeman splitting, nuclear Larmor frequencies, regime indicators and
//! the spin-photon fidelity bound).
//!
//! Unit convention: all public interfaces speak Hz and Tesla; angular
//! frequencies in rad/s appear only inside [`DetuningTrajectory`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::Trajectory;
use crate::units::{gyromagnetic, MU_B_OVER_H_HZ_PER_T, TWO_PI};

/// In-plane g-factor prefactor from the heavy-hole/light-hole mixing
/// geometry.
pub const INPLANE_G_PREFACTOR: f64 = 2.0 / 1.732050807568877; // 2/√3

/// Stretching exponent of the coherence-decay envelope used wherever a
/// default envelope shape is needed (dynamical-decoupling decays fit
/// this value; see `analysis`).
pub const DECAY_STRETCH_ALPHA: f64 = 1.56;

/// One nuclear species contributing to the Overhauser field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Species {
    pub label: String,
    /// γ/2π in Hz per Tesla.
    pub gyromagnetic_hz_per_t: f64,
    /// Root-mean-square transverse field contribution, Tesla.
    pub rms_field_tesla: f64,
}

impl Species {
    pub fn new(label: &str, gyromagnetic_hz_per_t: f64, rms_field_tesla: f64) -> Self {
        Species {
            label: label.to_string(),
            gyromagnetic_hz_per_t,
            rms_field_tesla,
        }
    }
}

/// Physical constants of the dot and its spin qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QdParameters {
    /// Hole g-factor entering the hyperfine terms.
    pub g_h: f64,
    /// Light-hole admixture, `0 < β < 1`.
    pub beta: f64,
    /// Electrical coupling `(2/√3)·∂(βg_h)/∂F`, per V/m.
    pub dgdf_per_v_per_m: f64,
    /// RMS transverse (along B_ext) Overhauser field, Tesla.
    pub delta_bx_nuc_tesla: f64,
    /// RMS longitudinal (growth-axis) Overhauser field, Tesla.
    pub delta_bz_nuc_tesla: f64,
    /// Optical decay rate Γ, 1/s.
    pub gamma_opt_per_s: f64,
    pub species: Vec<Species>,
    /// Measured in-plane splitting slope, Hz per Tesla; checked against
    /// `(2/√3)·β·g_h·μ_B/h` at construction when provided.
    #[serde(default)]
    pub splitting_slope_hz_per_t: Option<f64>,
    /// When true, the first-order hyperfine term uses the in-plane
    /// g-factor `(2/√3)βg_h` instead of the bare `g_h`.
    #[serde(default)]
    pub inplane_first_order: bool,
}

impl QdParameters {
    /// Validate invariants; call after any manual construction.
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::invalid("beta", format!("{} outside (0,1)", self.beta)));
        }
        for (name, v) in [
            ("g_h", self.g_h),
            ("delta_bx_nuc_tesla", self.delta_bx_nuc_tesla),
            ("delta_bz_nuc_tesla", self.delta_bz_nuc_tesla),
            ("gamma_opt_per_s", self.gamma_opt_per_s),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid(name, format!("{v} must be finite and ≥ 0")));
            }
        }
        for s in &self.species {
            if !s.gyromagnetic_hz_per_t.is_finite() || s.gyromagnetic_hz_per_t < 0.0 {
                return Err(Error::invalid("species.gyromagnetic_hz_per_t", "must be ≥ 0"));
            }
            if !s.rms_field_tesla.is_finite() || s.rms_field_tesla < 0.0 {
                return Err(Error::invalid("species.rms_field_tesla", "must be ≥ 0"));
            }
        }
        if let Some(slope) = self.splitting_slope_hz_per_t {
            let implied = INPLANE_G_PREFACTOR * self.beta * self.g_h * MU_B_OVER_H_HZ_PER_T;
            if (implied - slope).abs() > 0.01 * slope.abs() {
                return Err(Error::invalid(
                    "splitting_slope_hz_per_t",
                    format!(
                        "calibration slope {slope} Hz/T disagrees with (2/√3)βg_h·μ_B/h = {implied} Hz/T by more than 1%"
                    ),
                ));
            }
        }
        Ok(())
    }

    /// Reference quantum-dot parameter set: splitting slope 2.3 GHz/T,
    /// β = 0.08 (and hence g_h ≈ 1.78), δB≈0.07 mT transverse and
    /// 0.8 mT longitudinal nuclear fields, Γ⁻¹ = 0.7 ns, and the four
    /// nuclear species of InGaAs with equal shares of the transverse
    /// field.
    pub fn reference_dot() -> Self {
        let slope = 2.3e9;
        let beta = 0.08;
        let g_h = slope / (INPLANE_G_PREFACTOR * beta * MU_B_OVER_H_HZ_PER_T);
        let delta_bx = 0.07e-3;
        let share = delta_bx / 2.0; // equal variance shares across 4 species
        let params = QdParameters {
            g_h,
            beta,
            dgdf_per_v_per_m: 1.0e-9,
            delta_bx_nuc_tesla: delta_bx,
            delta_bz_nuc_tesla: 0.8e-3,
            gamma_opt_per_s: 1.0 / 0.7e-9,
            species: vec![
                Species::new("In115", gyromagnetic::IN_115, share),
                Species::new("Ga69", gyromagnetic::GA_69, share),
                Species::new("Ga71", gyromagnetic::GA_71, share),
                Species::new("As75", gyromagnetic::AS_75, share),
            ],
            splitting_slope_hz_per_t: Some(slope),
            inplane_first_order: false,
        };
        params.validate().expect("built-in parameters are valid");
        params
    }

    /// Ground-state Zeeman splitting `(2/√3)·β·g_h·μ_B·B/h`, in Hz.
    pub fn zeeman_splitting(&self, b_ext_tesla: f64) -> Result<f64> {
        if b_ext_tesla < 0.0 {
            return Err(Error::invalid("b_ext_tesla", "must be ≥ 0"));
        }
        Ok(INPLANE_G_PREFACTOR * self.beta * self.g_h * MU_B_OVER_H_HZ_PER_T * b_ext_tesla)
    }

    /// Hyperfine shift of the splitting, Hz: first order in the
    /// transverse field and second order in the longitudinal one,
    /// `μ_B g δB_x/h + μ_B g_h (δB_z)²/(2β B h)`.
    pub fn nuclear_detuning(&self, d_bx_tesla: f64, d_bz_tesla: f64, b_ext_tesla: f64) -> Result<f64> {
        let g_first = if self.inplane_first_order {
            INPLANE_G_PREFACTOR * self.beta * self.g_h
        } else {
            self.g_h
        };
        let first = g_first * MU_B_OVER_H_HZ_PER_T * d_bx_tesla;
        if d_bz_tesla == 0.0 {
            return Ok(first);
        }
        if b_ext_tesla <= 0.0 {
            return Err(Error::SingularInput(
                "second-order nuclear term diverges at zero external field".into(),
            ));
        }
        let effective_field = d_bz_tesla * d_bz_tesla / (2.0 * self.beta * b_ext_tesla);
        Ok(first + self.g_h * MU_B_OVER_H_HZ_PER_T * effective_field)
    }

    /// Electrical shift of the splitting, Hz: strictly linear in both
    /// the field fluctuation and the external field.
    pub fn electrical_detuning(&self, d_f_v_per_m: f64, b_ext_tesla: f64) -> f64 {
        self.dgdf_per_v_per_m * d_f_v_per_m * MU_B_OVER_H_HZ_PER_T * b_ext_tesla
    }

    /// Ratio `δB_z / (2β²B_ext)`: the second-order term dominates the
    /// first-order one when this is ≫ 1.
    pub fn second_order_dominance(&self, b_ext_tesla: f64) -> Result<f64> {
        if b_ext_tesla <= 0.0 {
            return Err(Error::invalid("b_ext_tesla", "must be > 0"));
        }
        Ok(self.delta_bz_nuc_tesla / (2.0 * self.beta * self.beta * b_ext_tesla))
    }

    /// Nuclear Larmor frequencies (Hz) per species at the given field.
    pub fn larmor_frequencies(&self, b_ext_tesla: f64) -> Result<Vec<(String, f64)>> {
        if b_ext_tesla < 0.0 {
            return Err(Error::invalid("b_ext_tesla", "must be ≥ 0"));
        }
        Ok(self
            .species
            .iter()
            .map(|s| (s.label.clone(), s.gyromagnetic_hz_per_t * b_ext_tesla))
            .collect())
    }

    /// Sample-wise composition of nuclear and electrical detunings into
    /// an angular-frequency trajectory. Absent contributions may be
    /// `None`; all present trajectories must share `dt` and length.
    pub fn build_detuning(
        &self,
        b_ext_tesla: f64,
        nuclear_x: Option<&Trajectory>,
        nuclear_z: Option<&Trajectory>,
        electrical: Option<&Trajectory>,
    ) -> Result<DetuningTrajectory> {
        let mut present: Vec<(&'static str, &Trajectory)> = Vec::new();
        if let Some(t) = nuclear_x {
            present.push(("nuclear_x", t));
        }
        if let Some(t) = nuclear_z {
            present.push(("nuclear_z", t));
        }
        if let Some(t) = electrical {
            present.push(("electrical", t));
        }
        let Some((_, first)) = present.first() else {
            return Err(Error::MissingInput("no contribution trajectories".into()));
        };
        let (dt, n) = (first.dt, first.len());
        for (name, t) in &present {
            if t.dt != dt || t.len() != n {
                return Err(Error::invalid(
                    "trajectories",
                    format!("{name} trajectory has mismatched dt or length"),
                ));
            }
        }
        let get = |t: Option<&Trajectory>, i: usize| -> f64 {
            t.map(|t| t.samples[i]).unwrap_or(0.0)
        };
        let mut omega = Vec::with_capacity(n);
        for i in 0..n {
            let nuc = self.nuclear_detuning(get(nuclear_x, i), get(nuclear_z, i), b_ext_tesla)?;
            let elec = self.electrical_detuning(get(electrical, i), b_ext_tesla);
            omega.push(TWO_PI * (nuc + elec));
        }
        Ok(DetuningTrajectory {
            dt,
            omega_rad_per_s: omega,
            sources: present.iter().map(|(name, _)| name.to_string()).collect(),
        })
    }
}

/// Angular detuning samples δω(t) with provenance tags naming the
/// contributing noise sources.
#[derive(Debug, Clone)]
pub struct DetuningTrajectory {
    pub dt: f64,
    pub omega_rad_per_s: Vec<f64>,
    pub sources: Vec<String>,
}

impl DetuningTrajectory {
    pub fn len(&self) -> usize {
        self.omega_rad_per_s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega_rad_per_s.is_empty()
    }

    pub fn duration(&self) -> f64 {
        (self.len().saturating_sub(1)) as f64 * self.dt
    }
}

/// Fidelity bound of an entangled spin-photon state: the coherence
/// envelope `exp[−(t/T₂*)^α]` averaged over the exponential photon
/// emission-time distribution, `F = (1 + W)/2` with
/// `W = ∫ Γe^(−Γt) exp[−(t/T₂*)^α] dt`, using the toolkit's default
/// envelope exponent α = 1.56 ([`DECAY_STRETCH_ALPHA`]).
pub fn entanglement_fidelity_bound(t2star_s: f64, gamma_opt_per_s: f64) -> Result<f64> {
    entanglement_fidelity_bound_with_envelope(t2star_s, gamma_opt_per_s, DECAY_STRETCH_ALPHA)
}

/// [`entanglement_fidelity_bound`] with an explicit envelope exponent
/// (α = 2 gives the Gaussian free-induction envelope).
pub fn entanglement_fidelity_bound_with_envelope(
    t2star_s: f64,
    gamma_opt_per_s: f64,
    alpha: f64,
) -> Result<f64> {
    if !(t2star_s.is_finite() && t2star_s > 0.0) && t2star_s != f64::INFINITY {
        return Err(Error::invalid("t2star_s", "must be > 0"));
    }
    if !(gamma_opt_per_s.is_finite() && gamma_opt_per_s > 0.0) {
        return Err(Error::invalid("gamma_opt_per_s", "must be > 0"));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::invalid("alpha", "must be > 0"));
    }
    if t2star_s == f64::INFINITY {
        return Ok(1.0);
    }
    // W = ∫₀^∞ e^(−u) exp[−(u/(Γ·T₂*))^α] du with u = Γt; the integrand
    // is below e^(−40) past u = 40, so a fixed Simpson grid suffices.
    let a = gamma_opt_per_s * t2star_s;
    let f = |u: f64| (-u).exp() * (-(u / a).powf(alpha)).exp();
    let w = simpson(f, 0.0, 40.0, 40_000);
    Ok((1.0 + w) / 2.0)
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = if n.is_multiple_of(2) { n } else { n + 1 };
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i.is_multiple_of(2) { 2.0 } else { 4.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}
