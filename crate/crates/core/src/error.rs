use thiserror::Error;

use crate::params::Component;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("species {}: detuning must be nonzero", species.map_or("?".to_string(), |c| c.number().to_string()))]
    ZeroDetuning { species: Option<Component> },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular medium: screening factor 1 - (4pi/3)S = {screening:e} vanishes at S = {s}")]
    SingularMedium { s: f64, screening: f64 },

    #[error(
        "singular local detuning for species {}{}: screening factor {screening:e}",
        species.map_or("?".to_string(), |c| c.number().to_string()),
        grid_index.map_or(String::new(), |i| format!(" at grid index {i}"))
    )]
    SingularDetuning {
        species: Option<Component>,
        grid_index: Option<usize>,
        screening: f64,
    },

    #[error("refractive index is imaginary (n^2 = {n_squared}); refusing to propagate")]
    Evanescent { n_squared: f64 },

    #[error("grid too coarse: {points_per_period:.3} points per period, need at least {required}")]
    Resolution { points_per_period: f64, required: f64 },

    #[error("bessel argument {0} outside the validated range |x| <= 700")]
    BesselRange(f64),

    #[error("numeric blowup in species {} at step {step}", species.number())]
    NumericBlowup { species: Component, step: usize },

    #[error("invalid parameters:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
