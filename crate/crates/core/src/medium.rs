//! Effective-medium optics of the two-component gas.
//!
//! Every formula depends on the mixture only through the screening sum
//! S = α₁ρ₁ + α₂ρ₂ and the factor 1 − (4π/3)S.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{FOUR_PI_OVER_3, HBAR};

/// Tolerance on |1 − (4π/3)S| below which χ and n are treated as singular.
pub const POLE_TOLERANCE: f64 = 1e-12;

/// Relative tolerance on Δ_loc/Δ below which the full local-field potential
/// is treated as singular.
pub const LOCAL_DETUNING_TOLERANCE: f64 = 1e-9;

/// Densities and polarizabilities at one point of the gas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MediumSample {
    pub densities: [f64; 2],
    pub alphas: [f64; 2],
}

/// Which form of the light-shift potential to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PotentialMode {
    /// ħΔ|Ω⁺|² / (4 Δ_loc²), the adiabatically eliminated form.
    #[default]
    Full,
    /// First-order expansion in S (coupled Gross-Pitaevskii form).
    Expanded,
}

impl MediumSample {
    pub fn new(densities: [f64; 2], alphas: [f64; 2]) -> Self {
        Self { densities, alphas }
    }

    /// S = α₁ρ₁ + α₂ρ₂.
    pub fn screening_sum(&self) -> f64 {
        self.alphas[0] * self.densities[0] + self.alphas[1] * self.densities[1]
    }

    /// 1 − (4π/3)S, equal to Δ_loc/Δ and to 1 + V₁ρ₁ + V₂ρ₂.
    pub fn screening_factor(&self) -> f64 {
        1.0 - FOUR_PI_OVER_3 * self.screening_sum()
    }

    fn checked_screening(&self) -> Result<f64> {
        let f = self.screening_factor();
        if !(f.abs() > POLE_TOLERANCE) {
            return Err(Error::SingularMedium {
                s: self.screening_sum(),
                screening: f,
            });
        }
        Ok(f)
    }
}

pub fn local_detuning(sample: &MediumSample, bare_detuning: f64) -> f64 {
    bare_detuning * sample.screening_factor()
}

pub fn susceptibility(sample: &MediumSample) -> Result<f64> {
    let f = sample.checked_screening()?;
    Ok(sample.screening_sum() / f)
}

/// Refractive index from the Maxwell-Garnett n². Negative n² (evanescent
/// regime) is kept and flagged rather than rejected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefractiveIndex {
    pub n_squared: f64,
}

impl RefractiveIndex {
    pub fn is_evanescent(&self) -> bool {
        self.n_squared < 0.0
    }

    /// Principal square root; `None` when n² < 0.
    pub fn real(&self) -> Option<f64> {
        (!self.is_evanescent()).then(|| self.n_squared.sqrt())
    }

    pub fn complex(&self) -> Complex64 {
        Complex64::new(self.n_squared, 0.0).sqrt()
    }

    /// |n|, recorded for evanescent samples.
    pub fn magnitude(&self) -> f64 {
        self.n_squared.abs().sqrt()
    }

    pub fn require_real(&self) -> Result<f64> {
        self.real().ok_or(Error::Evanescent {
            n_squared: self.n_squared,
        })
    }
}

pub fn refractive_index(sample: &MediumSample) -> Result<RefractiveIndex> {
    let f = sample.checked_screening()?;
    let s = sample.screening_sum();
    Ok(RefractiveIndex {
        n_squared: (1.0 + 2.0 * FOUR_PI_OVER_3 * s) / f,
    })
}

/// Light-shift potential seen by a ground-state atom with detuning
/// `bare_detuning` at local intensity `rabi_sq` = |Ω⁺|².
pub fn nonlinear_potential(
    sample: &MediumSample,
    rabi_sq: f64,
    bare_detuning: f64,
    mode: PotentialMode,
) -> Result<f64> {
    // Both forms are written against the vacuum light shift so they agree
    // bit for bit at zero density.
    let vacuum = HBAR * rabi_sq / (4.0 * bare_detuning);
    match mode {
        PotentialMode::Full => {
            let f = sample.screening_factor();
            if !(f.abs() > LOCAL_DETUNING_TOLERANCE) {
                return Err(Error::SingularDetuning {
                    species: None,
                    grid_index: None,
                    screening: f,
                });
            }
            Ok(vacuum / (f * f))
        }
        PotentialMode::Expanded => {
            Ok(vacuum * (1.0 + 2.0 * FOUR_PI_OVER_3 * sample.screening_sum()))
        }
    }
}
