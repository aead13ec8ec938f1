use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldConfig;
use crate::params::Component;

pub const MIN_POINTS: usize = 16;

/// Edge density, relative to the peak, above which a packet is treated as
/// filling the periodic box.
pub const EDGE_FRACTION: f64 = 1e-3;

/// Uniform periodic grid in y, centered so that y = 0 is a grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    points: usize,
    spacing: f64,
}

impl Grid {
    pub fn new(points: usize, spacing: f64) -> Result<Self> {
        let mut errs = Vec::new();
        if points < MIN_POINTS || !points.is_power_of_two() {
            errs.push(format!(
                "grid.points must be a power of two >= {MIN_POINTS} (got {points})"
            ));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            errs.push(format!("grid spacing must be finite and > 0 (got {spacing})"));
        }
        if !errs.is_empty() {
            return Err(Error::Validation(errs));
        }
        Ok(Self { points, spacing })
    }

    /// Grid spanning a whole number of intensity periods π/(n k_L), so every
    /// diffraction order lands on a Fourier bin.
    pub fn commensurate(points: usize, periods: usize, field: &FieldConfig) -> Result<Self> {
        if periods == 0 {
            return Err(Error::Validation(vec!["grid.periods must be >= 1".into()]));
        }
        Self::new(points, periods as f64 * field.intensity_period() / points as f64)
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn extent(&self) -> f64 {
        self.points as f64 * self.spacing
    }

    pub fn position(&self, i: usize) -> f64 {
        (i as f64 - (self.points / 2) as f64) * self.spacing
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.position(i)).collect()
    }

    /// Angular wavenumber of FFT bin `m`, in transform order.
    pub fn wavenumber(&self, m: usize) -> f64 {
        let n = self.points as isize;
        let m = m as isize;
        let signed = if m < n / 2 { m } else { m - n };
        2.0 * std::f64::consts::PI * signed as f64 / self.extent()
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.points).map(|m| self.wavenumber(m)).collect()
    }
}

/// Ground-state amplitudes of both components on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MatterState {
    pub grid: Grid,
    pub amplitudes: [Vec<Complex64>; 2],
    /// Longitudinal position, the master evolution variable.
    pub z: f64,
}

impl MatterState {
    pub fn from_amplitudes(grid: Grid, amplitudes: [Vec<Complex64>; 2], z: f64) -> Result<Self> {
        let mut errs = Vec::new();
        for (i, a) in amplitudes.iter().enumerate() {
            if a.len() != grid.points() {
                errs.push(format!(
                    "component {} has {} samples, grid has {}",
                    i + 1,
                    a.len(),
                    grid.points()
                ));
            }
            if a.iter().any(|v| !v.is_finite()) {
                errs.push(format!("component {} has non-finite samples", i + 1));
            }
        }
        if !errs.is_empty() {
            return Err(Error::Validation(errs));
        }
        Ok(Self { grid, amplitudes, z })
    }

    /// Constant density ρ_j on every grid point.
    pub fn uniform(grid: Grid, densities: [f64; 2]) -> Self {
        let amp = |rho: f64| vec![Complex64::new(rho.sqrt(), 0.0); grid.points()];
        Self {
            grid,
            amplitudes: [amp(densities[0]), amp(densities[1])],
            z: 0.0,
        }
    }

    /// Density ρ_j exp(−y²/w²) with peak ρ_j at y = 0.
    pub fn gaussian(grid: Grid, peak_densities: [f64; 2], width: f64) -> Self {
        let amp = |rho: f64| {
            grid.positions()
                .into_iter()
                .map(|y| {
                    let u = y / width;
                    Complex64::new(rho.sqrt() * (-0.5 * u * u).exp(), 0.0)
                })
                .collect()
        };
        Self {
            grid,
            amplitudes: [amp(peak_densities[0]), amp(peak_densities[1])],
            z: 0.0,
        }
    }

    pub fn amplitude(&self, c: Component) -> &[Complex64] {
        &self.amplitudes[c.index()]
    }

    pub fn density(&self, c: Component) -> Vec<f64> {
        self.amplitude(c).iter().map(|a| a.norm_sqr()).collect()
    }

    /// Σ|ψ_j|² dy.
    pub fn norm(&self, c: Component) -> f64 {
        self.amplitude(c).iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }

    pub fn norms(&self) -> [f64; 2] {
        [self.norm(Component::One), self.norm(Component::Two)]
    }

    /// Packet width w_y estimated from the density's second moment; a
    /// Gaussian ρ exp(−y²/w²) returns w. A density that has not decayed at
    /// the box edge fills the periodic box and is reported as unbounded.
    pub fn packet_width(&self, c: Component) -> f64 {
        let rho = self.density(c);
        let total: f64 = rho.iter().sum();
        if total == 0.0 {
            return 0.0;
        }
        let peak = rho.iter().fold(0.0f64, |m, r| m.max(*r));
        if rho[0] > EDGE_FRACTION * peak {
            return f64::INFINITY;
        }
        let ys = self.grid.positions();
        let mean: f64 = rho.iter().zip(&ys).map(|(r, y)| r * y).sum::<f64>() / total;
        let var: f64 = rho
            .iter()
            .zip(&ys)
            .map(|(r, y)| r * (y - mean) * (y - mean))
            .sum::<f64>()
            / total;
        (2.0 * var).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.amplitudes.iter().flatten().all(|a| a.is_finite())
    }

    /// L² distance Σ_j Σ|ψ_j − φ_j|² dy, square-rooted.
    pub fn distance(&self, other: &MatterState) -> f64 {
        let mut s = 0.0;
        for c in Component::BOTH {
            s += self
                .amplitude(c)
                .iter()
                .zip(other.amplitude(c))
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>();
        }
        (s * self.grid.spacing()).sqrt()
    }
}
