//! Physical parameters and the internal unit system.
//!
//! Internally ħ = 1, lengths are measured in units of 1/k_L and frequencies
//! in units of a user-chosen reference frequency. User-facing inputs are
//! assumed to be in a system with ħ = 1 as well, so masses carry units of
//! time/length².

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant in internal units.
pub const HBAR: f64 = 1.0;

/// The Lorentz-Lorenz factor 4π/3.
pub const FOUR_PI_OVER_3: f64 = 4.0 * std::f64::consts::PI / 3.0;

/// One of the two components of the mixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Component {
    One,
    Two,
}

impl Component {
    pub const BOTH: [Component; 2] = [Component::One, Component::Two];

    pub fn index(self) -> usize {
        match self {
            Component::One => 0,
            Component::Two => 1,
        }
    }

    /// 1-based label used in file formats and messages.
    pub fn number(self) -> usize {
        self.index() + 1
    }
}

/// Per-component atomic constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Species {
    pub mass: f64,
    /// Bare laser-atom detuning Δ_j.
    pub detuning: f64,
    pub dipole_moment: f64,
    /// Longitudinal beam velocity; maps z to interaction time.
    pub group_velocity: f64,
    /// Peak Rabi frequency Ω_j of the standing wave.
    pub peak_rabi: f64,
}

impl Species {
    /// Returns every violated constraint, prefixed with `label`.
    pub fn violations(&self, label: &str) -> Vec<String> {
        let mut out = Vec::new();
        let fields = [
            ("mass", self.mass),
            ("detuning", self.detuning),
            ("dipole_moment", self.dipole_moment),
            ("group_velocity", self.group_velocity),
            ("peak_rabi", self.peak_rabi),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                out.push(format!("{label}.{name} must be finite (got {v})"));
            }
        }
        if !(self.mass > 0.0) {
            out.push(format!("{label}.mass must be > 0 (got {})", self.mass));
        }
        if self.detuning == 0.0 {
            out.push(format!("{label}.detuning must be nonzero"));
        }
        if !(self.dipole_moment >= 0.0) {
            out.push(format!("{label}.dipole_moment must be >= 0 (got {})", self.dipole_moment));
        }
        if !(self.group_velocity > 0.0) {
            out.push(format!(
                "{label}.group_velocity must be > 0 (got {})",
                self.group_velocity
            ));
        }
        if !(self.peak_rabi >= 0.0) {
            out.push(format!("{label}.peak_rabi must be >= 0 (got {})", self.peak_rabi));
        }
        out
    }

    /// α = −d²/(ħΔ).
    pub fn polarizability(&self) -> Result<f64> {
        if self.detuning == 0.0 {
            return Err(Error::ZeroDetuning { species: None });
        }
        Ok(-(self.dipole_moment * self.dipole_moment) / (HBAR * self.detuning))
    }

    /// V = −(4π/3)α, the volume that screens the τ denominator.
    pub fn effective_volume(&self) -> Result<f64> {
        Ok(effective_volume_from_alpha(self.polarizability()?))
    }

    /// Longitudinal momentum m·v_g, which fixes the diffraction angles.
    pub fn longitudinal_momentum(&self) -> f64 {
        self.mass * self.group_velocity
    }
}

/// Shared by [`Species::effective_volume`] and the medium formulas so the
/// identity V + (4π/3)α = 0 holds bit for bit.
pub fn effective_volume_from_alpha(alpha: f64) -> f64 {
    -(FOUR_PI_OVER_3 * alpha)
}

fn tag(e: Error, c: Component) -> Error {
    match e {
        Error::ZeroDetuning { .. } => Error::ZeroDetuning { species: Some(c) },
        other => other,
    }
}

/// The two-component gas: species constants plus ground-state (peak) densities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mixture {
    pub species: [Species; 2],
    pub densities: [f64; 2],
}

impl Mixture {
    pub fn new(species: [Species; 2], densities: [f64; 2]) -> Result<Self> {
        let mut errs = Vec::new();
        for c in Component::BOTH {
            errs.extend(species[c.index()].violations(&format!("species[{}]", c.index())));
            let rho = densities[c.index()];
            if !(rho.is_finite() && rho >= 0.0) {
                errs.push(format!("densities[{}] must be finite and >= 0 (got {rho})", c.index()));
            }
        }
        if !errs.is_empty() {
            return Err(Error::Validation(errs));
        }
        Ok(Self { species, densities })
    }

    /// Builds the mixture from the dimensionless products ε_j = α_j ρ_j.
    pub fn from_epsilon(species: [Species; 2], epsilon: [f64; 2]) -> Result<Self> {
        let mut densities = [0.0; 2];
        let mut errs = Vec::new();
        for c in Component::BOTH {
            let i = c.index();
            let alpha = species[i].polarizability().map_err(|e| tag(e, c))?;
            let eps = epsilon[i];
            if eps == 0.0 {
                densities[i] = 0.0;
            } else if alpha == 0.0 {
                errs.push(format!("epsilon[{i}] = {eps} is nonzero but species[{i}] has zero polarizability"));
            } else {
                densities[i] = eps / alpha;
            }
        }
        if !errs.is_empty() {
            return Err(Error::Validation(errs));
        }
        Self::new(species, densities)
    }

    pub fn polarizabilities(&self) -> Result<[f64; 2]> {
        let mut out = [0.0; 2];
        for c in Component::BOTH {
            out[c.index()] = self.species[c.index()].polarizability().map_err(|e| tag(e, c))?;
        }
        Ok(out)
    }

    pub fn effective_volumes(&self) -> Result<[f64; 2]> {
        let a = self.polarizabilities()?;
        Ok([effective_volume_from_alpha(a[0]), effective_volume_from_alpha(a[1])])
    }

    /// ε_j = α_j ρ_j.
    pub fn epsilon(&self) -> Result<[f64; 2]> {
        let a = self.polarizabilities()?;
        Ok([a[0] * self.densities[0], a[1] * self.densities[1]])
    }

    pub fn sample(&self) -> Result<crate::medium::MediumSample> {
        Ok(crate::medium::MediumSample::new(self.densities, self.polarizabilities()?))
    }
}

/// Conversion between user units (ħ = 1) and internal units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    /// k_L in inverse user length units; internal length unit is 1/k_L.
    pub reference_wavenumber: f64,
    /// Internal frequency unit, in user frequency units.
    pub reference_frequency: f64,
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self {
            reference_wavenumber: 1.0,
            reference_frequency: 1.0,
        }
    }
}

/// User- or internal-unit physical inputs, depending on which side of
/// [`UnitSystem::to_internal`] they sit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalInputs {
    pub species: [Species; 2],
    pub densities: [f64; 2],
    /// Laser envelope width w_L.
    pub envelope_width: f64,
    /// Transverse atomic packet width w_y, when the packet is Gaussian.
    pub packet_width: Option<f64>,
}

impl UnitSystem {
    pub fn new(reference_wavenumber: f64, reference_frequency: f64) -> Result<Self> {
        let units = Self {
            reference_wavenumber,
            reference_frequency,
        };
        let errs = units.violations();
        if errs.is_empty() {
            Ok(units)
        } else {
            Err(Error::Validation(errs))
        }
    }

    /// Reference frequency defaulting to the photon recoil frequency k_L²/(2m).
    pub fn recoil(reference_wavenumber: f64, mass: f64) -> Result<Self> {
        Self::new(
            reference_wavenumber,
            HBAR * reference_wavenumber * reference_wavenumber / (2.0 * mass),
        )
    }

    pub fn violations(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.reference_wavenumber.is_finite() && self.reference_wavenumber > 0.0) {
            errs.push(format!(
                "units.reference_wavenumber must be finite and > 0 (got {})",
                self.reference_wavenumber
            ));
        }
        if !(self.reference_frequency.is_finite() && self.reference_frequency > 0.0) {
            errs.push(format!(
                "units.reference_frequency must be finite and > 0 (got {})",
                self.reference_frequency
            ));
        }
        errs
    }

    fn k(&self) -> f64 {
        self.reference_wavenumber
    }

    fn w(&self) -> f64 {
        self.reference_frequency
    }

    pub fn length_to_internal(&self, l: f64) -> f64 {
        l * self.k()
    }
    pub fn length_to_user(&self, l: f64) -> f64 {
        l / self.k()
    }
    pub fn frequency_to_internal(&self, f: f64) -> f64 {
        f / self.w()
    }
    pub fn frequency_to_user(&self, f: f64) -> f64 {
        f * self.w()
    }
    pub fn time_to_internal(&self, t: f64) -> f64 {
        t * self.w()
    }
    pub fn time_to_user(&self, t: f64) -> f64 {
        t / self.w()
    }
    pub fn velocity_to_internal(&self, v: f64) -> f64 {
        v * self.k() / self.w()
    }
    pub fn velocity_to_user(&self, v: f64) -> f64 {
        v * self.w() / self.k()
    }
    pub fn mass_to_internal(&self, m: f64) -> f64 {
        m * self.w() / (self.k() * self.k())
    }
    pub fn mass_to_user(&self, m: f64) -> f64 {
        m * (self.k() * self.k()) / self.w()
    }
    /// Number densities scale as 1/length³.
    pub fn density_to_internal(&self, rho: f64) -> f64 {
        rho / (self.k() * self.k() * self.k())
    }
    pub fn density_to_user(&self, rho: f64) -> f64 {
        rho * (self.k() * self.k() * self.k())
    }
    /// d² / Δ is a volume, so d scales as sqrt(length³ · frequency).
    pub fn dipole_to_internal(&self, d: f64) -> f64 {
        d * (self.k() * self.k() * self.k() / self.w()).sqrt()
    }
    pub fn dipole_to_user(&self, d: f64) -> f64 {
        d / (self.k() * self.k() * self.k() / self.w()).sqrt()
    }

    fn species_to_internal(&self, s: &Species) -> Species {
        Species {
            mass: self.mass_to_internal(s.mass),
            detuning: self.frequency_to_internal(s.detuning),
            dipole_moment: self.dipole_to_internal(s.dipole_moment),
            group_velocity: self.velocity_to_internal(s.group_velocity),
            peak_rabi: self.frequency_to_internal(s.peak_rabi),
        }
    }

    fn species_to_user(&self, s: &Species) -> Species {
        Species {
            mass: self.mass_to_user(s.mass),
            detuning: self.frequency_to_user(s.detuning),
            dipole_moment: self.dipole_to_user(s.dipole_moment),
            group_velocity: self.velocity_to_user(s.group_velocity),
            peak_rabi: self.frequency_to_user(s.peak_rabi),
        }
    }

    pub fn to_internal(&self, inputs: &PhysicalInputs) -> Result<PhysicalInputs> {
        let mut errs = self.violations();
        let mut check = |name: String, v: f64| {
            if !v.is_finite() {
                errs.push(format!("{name} must be finite (got {v})"));
            }
        };
        for (i, s) in inputs.species.iter().enumerate() {
            check(format!("species[{i}].mass"), s.mass);
            check(format!("species[{i}].detuning"), s.detuning);
            check(format!("species[{i}].dipole_moment"), s.dipole_moment);
            check(format!("species[{i}].group_velocity"), s.group_velocity);
            check(format!("species[{i}].peak_rabi"), s.peak_rabi);
            check(format!("densities[{i}]"), inputs.densities[i]);
        }
        check("envelope_width".into(), inputs.envelope_width);
        if let Some(w) = inputs.packet_width {
            check("packet_width".into(), w);
        }
        if !errs.is_empty() {
            return Err(Error::Validation(errs));
        }
        Ok(PhysicalInputs {
            species: [
                self.species_to_internal(&inputs.species[0]),
                self.species_to_internal(&inputs.species[1]),
            ],
            densities: [
                self.density_to_internal(inputs.densities[0]),
                self.density_to_internal(inputs.densities[1]),
            ],
            envelope_width: self.length_to_internal(inputs.envelope_width),
            packet_width: inputs.packet_width.map(|w| self.length_to_internal(w)),
        })
    }

    pub fn to_user(&self, inputs: &PhysicalInputs) -> PhysicalInputs {
        PhysicalInputs {
            species: [
                self.species_to_user(&inputs.species[0]),
                self.species_to_user(&inputs.species[1]),
            ],
            densities: [
                self.density_to_user(inputs.densities[0]),
                self.density_to_user(inputs.densities[1]),
            ],
            envelope_width: self.length_to_user(inputs.envelope_width),
            packet_width: inputs.packet_width.map(|w| self.length_to_user(w)),
        }
    }
}
