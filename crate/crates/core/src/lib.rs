//! Simulation and analysis toolkit for two-component ultracold gases in
//! off-resonant standing light waves.
//!
//! * [`params`]: species constants, the mixture, and the internal unit system (ħ = 1).
//! * [`medium`]: local detuning, susceptibility, Maxwell-Garnett index and
//!   the light-shift potential.
//! * [`field`]: the standing-wave intensity inside the gas.
//! * [`raman_nath`]: closed-form far-field diffraction spectra.
//! * [`propagator`]: split-step evolution of the coupled mean fields.
//! * [`cli`]: configuration, commands and output files behind the `bec2` binary.

pub mod bessel;
pub mod cli;
pub mod error;
pub mod field;
pub mod medium;
pub mod params;
pub mod propagator;
pub mod raman_nath;
pub mod validation;

pub use error::{Error, Result};
pub use field::FieldConfig;
pub use medium::{MediumSample, PotentialMode, RefractiveIndex};
pub use params::{Component, Mixture, Species, UnitSystem};
pub use propagator::{EvolveConfig, Grid, MatterState, Propagator, System};
pub use raman_nath::DiffractionSpectrum;
