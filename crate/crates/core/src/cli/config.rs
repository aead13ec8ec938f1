//! Run configuration: TOML parsing, validation and resolution to internal
//! units.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::FieldConfig;
use crate::medium::{refractive_index, susceptibility, PotentialMode};
use crate::params::{Mixture, PhysicalInputs, Species, UnitSystem};
use crate::propagator::{Envelope, Kinetic, MIN_POINTS};
use crate::raman_nath::{assemble_spectrum, DiffractionSpectrum};

fn default_wavenumber() -> f64 {
    1.0
}
fn default_points() -> usize {
    1024
}
fn default_periods() -> usize {
    32
}
fn default_steps() -> usize {
    2000
}
fn default_span() -> f64 {
    6.0
}
fn default_observe_every() -> usize {
    100
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitsSection {
    #[serde(default = "default_wavenumber")]
    pub reference_wavenumber: f64,
    /// Defaults to the recoil frequency of species 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_frequency: Option<f64>,
}

impl Default for UnitsSection {
    fn default() -> Self {
        Self {
            reference_wavenumber: default_wavenumber(),
            reference_frequency: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesSection {
    pub mass: f64,
    pub detuning: f64,
    pub dipole_moment: f64,
    pub group_velocity: f64,
    pub peak_rabi: f64,
}

impl From<&SpeciesSection> for Species {
    fn from(s: &SpeciesSection) -> Self {
        Species {
            mass: s.mass,
            detuning: s.detuning,
            dipole_moment: s.dipole_moment,
            group_velocity: s.group_velocity,
            peak_rabi: s.peak_rabi,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureSection {
    /// Peak ground-state densities in user units.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub densities: Option<[f64; 2]>,
    /// ε_j = α_j ρ_j; takes precedence over `densities`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSection {
    pub envelope_width: f64,
    /// Overrides the Maxwell-Garnett index of the peak densities.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refractive_index: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffractionSection {
    /// Defaults to ceil(max τ) + 20.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_order: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Packet {
    #[default]
    Uniform,
    Gaussian,
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default = "default_points")]
    pub points: usize,
    /// Grid extent in intensity periods π/(n k_L).
    #[serde(default = "default_periods")]
    pub periods: usize,
    #[serde(default)]
    pub packet: Packet,
    /// Gaussian packet width w_y in user length units.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub packet_width: Option<f64>,
    /// Snapshot to load when `packet = "file"` (`.csv`, or `.bin` with a
    /// `.json` sidecar).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            points: default_points(),
            periods: default_periods(),
            packet: Packet::default(),
            packet_width: None,
            file: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SnapshotFormat {
    #[default]
    Csv,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveSection {
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Integrate z over [−span·w_L, span·w_L].
    #[serde(default = "default_span")]
    pub span: f64,
    #[serde(default)]
    pub mode: PotentialMode,
    #[serde(default)]
    pub kinetic: Kinetic,
    #[serde(default)]
    pub envelope: Envelope,
    #[serde(default = "default_observe_every")]
    pub observe_every: usize,
    #[serde(default)]
    pub snapshot_format: SnapshotFormat,
}

impl Default for EvolveSection {
    fn default() -> Self {
        Self {
            steps: default_steps(),
            span: default_span(),
            mode: PotentialMode::default(),
            kinetic: Kinetic::default(),
            envelope: Envelope::default(),
            observe_every: default_observe_every(),
            snapshot_format: SnapshotFormat::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub parameter: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl SweepAxis {
    /// `count` evenly spaced values from `start` to `stop` inclusive.
    pub fn values(&self) -> Vec<f64> {
        if self.count <= 1 {
            return vec![self.start];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * i as f64 / last
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub format: TableFormat,
    /// Emit gnuplot scripts next to plot-data files.
    #[serde(default = "default_true")]
    pub plot_scripts: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: None,
            format: TableFormat::default(),
            plot_scripts: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub units: UnitsSection,
    pub species: Vec<SpeciesSection>,
    #[serde(default)]
    pub mixture: MixtureSection,
    pub field: FieldSection,
    #[serde(default)]
    pub diffraction: DiffractionSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub evolve: EvolveSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepAxis>,
}

const SPECIES_FIELDS: [&str; 5] = ["mass", "detuning", "dipole_moment", "group_velocity", "peak_rabi"];

/// Parameters a sweep axis may vary.
pub fn sweepable_parameters() -> Vec<String> {
    let mut out = Vec::new();
    for i in 0..2 {
        for f in SPECIES_FIELDS {
            out.push(format!("species.{i}.{f}"));
        }
    }
    for i in 0..2 {
        out.push(format!("mixture.densities.{i}"));
        out.push(format!("mixture.epsilon.{i}"));
    }
    out.push("field.envelope_width".into());
    out.push("field.refractive_index".into());
    out.push("units.reference_wavenumber".into());
    out
}

/// Parses and validates a configuration, reporting every violated
/// constraint at once.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let config: RunConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let errs = config.violations();
    if !errs.is_empty() {
        return Err(Error::Validation(errs));
    }
    Ok(config)
}

pub fn load_config(path: &std::path::Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn finite(errs: &mut Vec<String>, name: &str, v: f64) {
    if !v.is_finite() {
        errs.push(format!("{name} must be finite (got {v})"));
    }
}

impl RunConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.units.reference_wavenumber.is_finite() && self.units.reference_wavenumber > 0.0) {
            errs.push(format!(
                "units.reference_wavenumber must be finite and > 0 (got {})",
                self.units.reference_wavenumber
            ));
        }
        if let Some(f) = self.units.reference_frequency {
            if !(f.is_finite() && f > 0.0) {
                errs.push(format!("units.reference_frequency must be finite and > 0 (got {f})"));
            }
        }
        if self.species.len() != 2 {
            errs.push(format!("exactly two [[species]] entries required (got {})", self.species.len()));
        }
        for (i, s) in self.species.iter().enumerate() {
            errs.extend(Species::from(s).violations(&format!("species[{i}]")));
        }
        if let Some(d) = self.mixture.densities {
            for (i, v) in d.iter().enumerate() {
                if !(v.is_finite() && *v >= 0.0) {
                    errs.push(format!("mixture.densities[{i}] must be finite and >= 0 (got {v})"));
                }
            }
        }
        if let Some(e) = self.mixture.epsilon {
            for (i, v) in e.iter().enumerate() {
                finite(&mut errs, &format!("mixture.epsilon[{i}]"), *v);
            }
        }
        if !(self.field.envelope_width.is_finite() && self.field.envelope_width > 0.0) {
            errs.push(format!(
                "field.envelope_width must be finite and > 0 (got {})",
                self.field.envelope_width
            ));
        }
        if let Some(n) = self.field.refractive_index {
            if !(n.is_finite() && n > 0.0) {
                errs.push(format!("field.refractive_index must be finite and > 0 (got {n})"));
            }
        }
        let g = &self.grid;
        if g.points < MIN_POINTS || !g.points.is_power_of_two() {
            errs.push(format!("grid.points must be a power of two >= {MIN_POINTS} (got {})", g.points));
        }
        if g.periods == 0 {
            errs.push("grid.periods must be >= 1".into());
        }
        if let Some(w) = g.packet_width {
            if !(w.is_finite() && w > 0.0) {
                errs.push(format!("grid.packet_width must be finite and > 0 (got {w})"));
            }
        }
        match g.packet {
            Packet::Gaussian if g.packet_width.is_none() => {
                errs.push("grid.packet = \"gaussian\" requires grid.packet_width".into())
            }
            Packet::File if g.file.is_none() => errs.push("grid.packet = \"file\" requires grid.file".into()),
            _ => {}
        }
        let e = &self.evolve;
        if !(e.span.is_finite() && e.span > 0.0) {
            errs.push(format!("evolve.span must be finite and > 0 (got {})", e.span));
        }
        if e.observe_every == 0 {
            errs.push("evolve.observe_every must be >= 1".into());
        }
        let known = sweepable_parameters();
        for (i, axis) in self.sweep.iter().enumerate() {
            if !known.contains(&axis.parameter) {
                errs.push(format!(
                    "sweep[{i}].parameter \"{}\" is not sweepable (expected one of: {})",
                    axis.parameter,
                    known.join(", ")
                ));
            }
            if axis.count == 0 {
                errs.push(format!("sweep[{i}].count must be >= 1"));
            }
            finite(&mut errs, &format!("sweep[{i}].start"), axis.start);
            finite(&mut errs, &format!("sweep[{i}].stop"), axis.stop);
        }
        errs
    }

    /// The resolved configuration as TOML, with every default written out.
    pub fn echo(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    /// SHA-256 of the canonical echo.
    pub fn hash(&self) -> String {
        hex(&Sha256::digest(self.echo().as_bytes()))
    }

    /// Copy with one sweepable parameter replaced.
    pub fn with_parameter(&self, name: &str, value: f64) -> Result<RunConfig> {
        let mut c = self.clone();
        let parts: Vec<&str> = name.split('.').collect();
        let bad = || Error::Validation(vec![format!("unknown sweep parameter \"{name}\"")]);
        match parts.as_slice() {
            ["species", i, f] => {
                let i: usize = i.parse().map_err(|_| bad())?;
                let s = c.species.get_mut(i).ok_or_else(bad)?;
                match *f {
                    "mass" => s.mass = value,
                    "detuning" => s.detuning = value,
                    "dipole_moment" => s.dipole_moment = value,
                    "group_velocity" => s.group_velocity = value,
                    "peak_rabi" => s.peak_rabi = value,
                    _ => return Err(bad()),
                }
            }
            ["mixture", which, i] => {
                let i: usize = i.parse().map_err(|_| bad())?;
                if i > 1 {
                    return Err(bad());
                }
                let slot = match *which {
                    "densities" => &mut c.mixture.densities,
                    "epsilon" => &mut c.mixture.epsilon,
                    _ => return Err(bad()),
                };
                slot.get_or_insert([0.0, 0.0])[i] = value;
            }
            ["field", "envelope_width"] => c.field.envelope_width = value,
            ["field", "refractive_index"] => c.field.refractive_index = Some(value),
            ["units", "reference_wavenumber"] => c.units.reference_wavenumber = value,
            _ => return Err(bad()),
        }
        Ok(c)
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Derived quantities in internal units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Derived {
    pub polarizabilities: [f64; 2],
    pub effective_volumes: [f64; 2],
    pub epsilon: [f64; 2],
    pub screening_sum: f64,
    pub susceptibility: f64,
    pub refractive_index: f64,
    pub couplings: [f64; 2],
    pub taus: [f64; 2],
    pub max_order: usize,
    pub angles_coincide: bool,
    pub separated: bool,
}

/// Mixture-level resolution, which never fails on singular media.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedMixture {
    pub units: UnitSystem,
    pub inputs: PhysicalInputs,
    pub mixture: Mixture,
    pub warnings: Vec<String>,
}

/// Full resolution: internal parameters, field and analytic spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub units: UnitSystem,
    pub mixture: Mixture,
    pub field: FieldConfig,
    pub packet_width: Option<f64>,
    pub spectrum: DiffractionSpectrum,
    pub derived: Derived,
    pub warnings: Vec<String>,
}

impl RunConfig {
    pub fn resolve_mixture(&self) -> Result<ResolvedMixture> {
        let errs = self.violations();
        if !errs.is_empty() {
            return Err(Error::Validation(errs));
        }
        let species = [Species::from(&self.species[0]), Species::from(&self.species[1])];
        let units = match self.units.reference_frequency {
            Some(f) => UnitSystem::new(self.units.reference_wavenumber, f)?,
            None => UnitSystem::recoil(self.units.reference_wavenumber, species[0].mass)?,
        };
        let mut warnings = Vec::new();
        let user = PhysicalInputs {
            species,
            densities: self.mixture.densities.unwrap_or([0.0, 0.0]),
            envelope_width: self.field.envelope_width,
            packet_width: self.grid.packet_width,
        };
        let mut inputs = units.to_internal(&user)?;
        let mixture = match self.mixture.epsilon {
            Some(eps) => {
                if self.mixture.densities.is_some() {
                    warnings.push("both mixture.densities and mixture.epsilon given; epsilon takes precedence".into());
                }
                let m = Mixture::from_epsilon(inputs.species, eps)?;
                inputs.densities = m.densities;
                m
            }
            None => Mixture::new(inputs.species, inputs.densities)?,
        };
        Ok(ResolvedMixture {
            units,
            inputs,
            mixture,
            warnings,
        })
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let rm = self.resolve_mixture()?;
        let mixture = rm.mixture;
        let mut warnings = rm.warnings;
        let sample = mixture.sample()?;
        let chi = susceptibility(&sample)?;
        let index = refractive_index(&sample)?;
        let n = match self.field.refractive_index {
            Some(n) => {
                warnings.push(format!(
                    "refractive index overridden to {n} (Maxwell-Garnett value n^2 = {})",
                    index.n_squared
                ));
                n
            }
            None => index.require_real()?,
        };
        let field = FieldConfig::for_mixture(&mixture, 1.0, rm.inputs.envelope_width, Some(n))?;
        let spectrum = assemble_spectrum(&mixture, &field, self.diffraction.max_order)?;
        let eps = mixture.epsilon()?;
        let derived = Derived {
            polarizabilities: mixture.polarizabilities()?,
            effective_volumes: mixture.effective_volumes()?,
            epsilon: eps,
            screening_sum: sample.screening_sum(),
            susceptibility: chi,
            refractive_index: n,
            couplings: [spectrum.components[0].coupling, spectrum.components[1].coupling],
            taus: [spectrum.components[0].tau, spectrum.components[1].tau],
            max_order: spectrum.max_order,
            angles_coincide: spectrum.angles_coincide,
            separated: spectrum.separated,
        };
        Ok(Resolved {
            units: rm.units,
            mixture,
            field,
            packet_width: rm.inputs.packet_width,
            spectrum,
            derived,
            warnings,
        })
    }

    /// Every point of the sweep grid, first axis slowest, as
    /// (parameter values, config).
    pub fn sweep_points(&self) -> Result<Vec<(Vec<f64>, RunConfig)>> {
        let mut points = vec![(Vec::new(), self.clone())];
        for axis in &self.sweep {
            let mut next = Vec::with_capacity(points.len() * axis.count);
            for (values, cfg) in &points {
                for v in axis.values() {
                    let mut vs = values.clone();
                    vs.push(v);
                    next.push((vs, cfg.with_parameter(&axis.parameter, v)?));
                }
            }
            points = next;
        }
        Ok(points)
    }
}
