//! Standing-wave intensity inside a homogeneous medium of index n.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::medium::refractive_index;
use crate::params::{Component, Mixture};

/// Minimum samples per intensity period π/(n k_L) for the Helmholtz check.
pub const MIN_POINTS_PER_PERIOD: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldConfig {
    pub vacuum_wavenumber: f64,
    pub envelope_width: f64,
    pub refractive_index: f64,
    pub peak_rabi: [f64; 2],
}

impl FieldConfig {
    pub fn new(
        vacuum_wavenumber: f64,
        envelope_width: f64,
        refractive_index: f64,
        peak_rabi: [f64; 2],
    ) -> Result<Self> {
        let mut errs = Vec::new();
        let positive = [
            ("vacuum_wavenumber", vacuum_wavenumber),
            ("envelope_width", envelope_width),
            ("refractive_index", refractive_index),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                errs.push(format!("field.{name} must be finite and > 0 (got {v})"));
            }
        }
        for (i, r) in peak_rabi.iter().enumerate() {
            if !(r.is_finite() && *r >= 0.0) {
                errs.push(format!("field.peak_rabi[{i}] must be finite and >= 0 (got {r})"));
            }
        }
        if !errs.is_empty() {
            return Err(Error::Validation(errs));
        }
        Ok(Self {
            vacuum_wavenumber,
            envelope_width,
            refractive_index,
            peak_rabi,
        })
    }

    /// Field for a mixture, with n taken from the peak densities unless
    /// `index_override` is given. Evanescent media are refused.
    pub fn for_mixture(
        mixture: &Mixture,
        vacuum_wavenumber: f64,
        envelope_width: f64,
        index_override: Option<f64>,
    ) -> Result<Self> {
        let n = match index_override {
            Some(n) => n,
            None => refractive_index(&mixture.sample()?)?.require_real()?,
        };
        Self::new(
            vacuum_wavenumber,
            envelope_width,
            n,
            [mixture.species[0].peak_rabi, mixture.species[1].peak_rabi],
        )
    }

    /// n·k_L, the wavenumber of each running wave inside the medium.
    pub fn medium_wavenumber(&self) -> f64 {
        self.refractive_index * self.vacuum_wavenumber
    }

    /// Period π/(n k_L) of the intensity pattern.
    pub fn intensity_period(&self) -> f64 {
        std::f64::consts::PI / self.medium_wavenumber()
    }

    /// exp(−z²/w_L²).
    pub fn envelope(&self, z: f64) -> f64 {
        let u = z / self.envelope_width;
        (-u * u).exp()
    }

    /// cos²(n k_L y).
    pub fn transverse(&self, y: f64) -> f64 {
        let c = (self.medium_wavenumber() * y).cos();
        c * c
    }

    /// |Ω⁺_j(y, z)|².
    pub fn rabi_sq_profile(&self, component: Component, y: f64, z: f64) -> f64 {
        let omega = self.peak_rabi[component.index()];
        omega * omega * self.envelope(z) * self.transverse(y)
    }

    /// Transverse field amplitude cos(n k_L y) on `points` samples spaced `dy`
    /// starting at y = 0.
    pub fn standing_wave_samples(&self, points: usize, dy: f64) -> Vec<f64> {
        let k = self.medium_wavenumber();
        (0..points).map(|i| (k * i as f64 * dy).cos()).collect()
    }

    /// Maximum relative Helmholtz residual |E'' + n²k²E| / (n²k² max|E|)
    /// over interior points, with a three-point second difference.
    pub fn helmholtz_residual(&self, samples: &[f64], dy: f64) -> Result<f64> {
        let k = self.medium_wavenumber();
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::Domain(format!("n k_L must be finite and > 0 (got {k})")));
        }
        if !(dy.is_finite() && dy > 0.0) {
            return Err(Error::Domain(format!("grid spacing must be > 0 (got {dy})")));
        }
        let points_per_period = self.intensity_period() / dy;
        if points_per_period < MIN_POINTS_PER_PERIOD {
            return Err(Error::Resolution {
                points_per_period,
                required: MIN_POINTS_PER_PERIOD,
            });
        }
        if samples.len() < 3 {
            return Err(Error::Domain("need at least three samples".into()));
        }
        let scale = samples.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        if scale == 0.0 {
            return Err(Error::Domain("field vanishes identically".into()));
        }
        let k2 = k * k;
        let residual = samples
            .windows(3)
            .map(|w| ((w[0] - 2.0 * w[1] + w[2]) / (dy * dy) + k2 * w[1]).abs())
            .fold(0.0f64, f64::max);
        Ok(residual / (k2 * scale))
    }
}
