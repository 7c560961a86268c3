//! Mapping from a trapped Rydberg-ion pair to model couplings.
//!
//! All frequencies are angular (rad/s), lengths in metres, and the dipolar
//! slope `V′_d(l₀)` in rad/s per metre.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;

pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;
pub const VACUUM_PERMITTIVITY: f64 = 8.8541878128e-12;
pub const HBAR: f64 = 1.054571817e-34;
pub const ATOMIC_MASS_UNIT: f64 = 1.66053906660e-27;

/// Which frequency sets the oscillator length and the critical coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LbConvention {
    /// `l_b = √(ħ/2Mω)`, `g_c = √(ωΩ)`, `ω = √3 ν`.
    BreathingMode,
    /// `l_b = √(ħ/2Mν)`, `g_c = √(νΩ)`.
    TrapMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalIonParams {
    pub mass_amu: f64,
    /// Net charge in elementary charges.
    pub net_charge: i32,
    /// Axial trap frequency ν.
    pub nu: f64,
    /// Rabi frequency Ω.
    pub omega_drive: f64,
    /// Dipolar slope `V′_d(l₀)`.
    pub vd_slope: f64,
    pub lb_convention: LbConvention,
}

impl PhysicalIonParams {
    /// ⁸⁸Sr⁺ in a `ν = 2π × 2.02 MHz` trap with `V′_d = −2π × 174.7 MHz/μm` and
    /// `Ω = 2π × 25 kHz`.
    pub fn strontium_example() -> Self {
        Self {
            mass_amu: 88.0,
            net_charge: 1,
            nu: 2.0 * PI * 2.02e6,
            omega_drive: 2.0 * PI * 25e3,
            vd_slope: -2.0 * PI * 174.7e6 / 1e-6,
            lb_convention: LbConvention::TrapMode,
        }
    }

    pub fn with_convention(self, lb_convention: LbConvention) -> Self {
        Self { lb_convention, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [self.mass_amu, self.nu, self.omega_drive, self.vd_slope];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite ion parameters {self:?}")));
        }
        if self.mass_amu <= 0.0 || self.nu <= 0.0 || self.omega_drive <= 0.0 {
            return Err(Error::InvalidParameter("mass, trap frequency and Rabi frequency must be > 0".into()));
        }
        if self.net_charge == 0 {
            return Err(Error::InvalidParameter("net charge must be nonzero".into()));
        }
        Ok(())
    }

    pub fn mass_kg(&self) -> f64 {
        self.mass_amu * ATOMIC_MASS_UNIT
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedTrapQuantities {
    /// Equilibrium separation `l₀`.
    pub l0: f64,
    /// Breathing-mode frequency `ω = √3 ν`.
    pub omega_breathing: f64,
    pub l_b: f64,
    /// `g = l_b |V′_d| / 4`.
    pub g: f64,
    pub g_c: f64,
    pub ratio: f64,
    pub convention: LbConvention,
}

/// Equilibrium separation `2 (𝒩² e² / (16π ϵ₀ M ν²))^(1/3)`.
pub fn equilibrium_separation(p: &PhysicalIonParams) -> f64 {
    let q = p.net_charge as f64 * ELEMENTARY_CHARGE;
    2.0 * (q * q / (16.0 * PI * VACUUM_PERMITTIVITY * p.mass_kg() * p.nu * p.nu)).cbrt()
}

pub fn derive_trap(p: &PhysicalIonParams) -> Result<DerivedTrapQuantities> {
    p.validate()?;
    let omega_breathing = 3f64.sqrt() * p.nu;
    let reference = match p.lb_convention {
        LbConvention::BreathingMode => omega_breathing,
        LbConvention::TrapMode => p.nu,
    };
    let l_b = (HBAR / (2.0 * p.mass_kg() * reference)).sqrt();
    let g = l_b * p.vd_slope.abs() / 4.0;
    let g_c = (reference * p.omega_drive).sqrt();
    Ok(DerivedTrapQuantities {
        l0: equilibrium_separation(p),
        omega_breathing,
        l_b,
        g,
        g_c,
        ratio: g / g_c,
        convention: p.lb_convention,
    })
}

/// Couplings in units of the breathing frequency, with the unit kept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalizedParams {
    /// `ω = 1`.
    pub params: ModelParams,
    /// Angular frequency of one model unit, `√3 ν`.
    pub scale: f64,
}

impl NormalizedParams {
    /// Couplings in rad/s.
    pub fn physical(&self) -> ModelParams {
        self.params.scaled(self.scale)
    }
}

/// `(ω, Ω, ε, g) = (√3ν, Ω_drive, Δ/2, g)` divided by `√3ν`; `detuning` is the
/// laser detuning `Δ = 2ε`.
pub fn model_params_from_physical(p: &PhysicalIonParams, detuning: f64) -> Result<NormalizedParams> {
    if !detuning.is_finite() {
        return Err(Error::InvalidParameter(format!("detuning must be finite (got {detuning})")));
    }
    let d = derive_trap(p)?;
    let scale = d.omega_breathing;
    let params = ModelParams::new(1.0, p.omega_drive / scale, 0.5 * detuning / scale, d.g / scale)?;
    Ok(NormalizedParams { params, scale })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strontium_separation_and_ratio() {
        let p = PhysicalIonParams::strontium_example();
        let d = derive_trap(&p).unwrap();
        assert!((d.l0 - 2.70e-6).abs() < 0.01e-6, "{}", d.l0);
        assert!((d.ratio - 1.04).abs() < 0.1 * 1.04, "{}", d.ratio);
        assert!((d.ratio - d.g / d.g_c).abs() < 1e-12 * d.ratio);
    }

    #[test]
    fn ratio_is_linear_in_slope() {
        let p = PhysicalIonParams::strontium_example();
        let q = PhysicalIonParams { vd_slope: 2.0 * p.vd_slope, ..p };
        let (a, b) = (derive_trap(&p).unwrap().ratio, derive_trap(&q).unwrap().ratio);
        assert!((b - 2.0 * a).abs() < 1e-14 * b);
    }

    #[test]
    fn conventions_differ_by_root_three() {
        let p = PhysicalIonParams::strontium_example();
        let trap = derive_trap(&p).unwrap().ratio;
        let breathing = derive_trap(&p.with_convention(LbConvention::BreathingMode)).unwrap().ratio;
        assert!((trap / breathing - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn dimensional_scaling() {
        let p = PhysicalIonParams::strontium_example();
        let q = PhysicalIonParams { nu: 8.0 * p.nu, ..p };
        let (a, b) = (derive_trap(&p).unwrap(), derive_trap(&q).unwrap());
        assert!((b.l0 / a.l0 - 0.25).abs() < 1e-12);
        assert!((b.l_b / a.l_b - 8f64.powf(-0.5)).abs() < 1e-12);
    }

    #[test]
    fn normalization() {
        let p = PhysicalIonParams { nu: 2.0 * PI * 1e6, ..PhysicalIonParams::strontium_example() };
        let n = model_params_from_physical(&p, 2.0 * PI * 100e3).unwrap();
        assert_eq!(n.params.omega, 1.0);
        assert!((n.scale - 2.0 * PI * 1.7320508075688772e6).abs() < 1e-6);
        assert!((n.physical().eps - 2.0 * PI * 50e3).abs() < 1e-6);
        assert!((n.physical().omega - n.scale).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        let p = PhysicalIonParams { nu: 0.0, ..PhysicalIonParams::strontium_example() };
        assert!(derive_trap(&p).is_err());
        let p = PhysicalIonParams { net_charge: 0, ..PhysicalIonParams::strontium_example() };
        assert!(derive_trap(&p).is_err());
    }
}
