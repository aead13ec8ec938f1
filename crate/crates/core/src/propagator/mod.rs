//! Split-step evolution of the coupled ground-state fields.
//!
//! The longitudinal coordinate z is the master variable. Component j sees
//! the interaction time dt_j = dz / v_gj per step and the Gaussian laser
//! envelope exp(−z²/w_L²) at the current z. Each step is Strang split:
//! half potential, full kinetic (spectral), half potential, with the
//! densities entering the local detuning refreshed at every half step.

mod state;

use std::ops::ControlFlow;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

pub use state::{Grid, MatterState, MIN_POINTS};

use crate::error::{Error, Result};
use crate::field::FieldConfig;
use crate::medium::{nonlinear_potential, MediumSample, PotentialMode};
use crate::params::{Component, Species, HBAR};

/// Maximum potential phase per step before a warning is raised.
pub const PHASE_PER_STEP_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Kinetic {
    On,
    /// Raman-Nath regime: transverse kinetic energy neglected.
    #[default]
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Envelope {
    /// exp(−z²/w_L²) along the beam.
    #[default]
    Gaussian,
    /// Envelope fixed at its peak value, for static test problems.
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveConfig {
    /// Step in the longitudinal coordinate.
    pub dz: f64,
    pub steps: usize,
    pub z_start: f64,
    pub mode: PotentialMode,
    pub kinetic: Kinetic,
    pub envelope: Envelope,
    /// Observer stride in steps.
    pub observe_every: usize,
}

impl EvolveConfig {
    /// Integration over z ∈ [−span·w_L, span·w_L] in `steps` steps.
    pub fn across_envelope(field: &FieldConfig, span: f64, steps: usize) -> Self {
        let half = span * field.envelope_width;
        Self {
            dz: 2.0 * half / steps.max(1) as f64,
            steps,
            z_start: -half,
            mode: PotentialMode::Full,
            kinetic: Kinetic::Off,
            envelope: Envelope::Gaussian,
            observe_every: steps.max(1),
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.dz.is_finite() && self.dz > 0.0) {
            errs.push(format!("evolve.dz must be finite and > 0 (got {})", self.dz));
        }
        if !self.z_start.is_finite() {
            errs.push("evolve.z_start must be finite".into());
        }
        if self.observe_every == 0 {
            errs.push("evolve.observe_every must be >= 1".into());
        }
        errs
    }
}

/// Species constants and light field that define the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct System {
    pub species: [Species; 2],
    pub alphas: [f64; 2],
    pub field: FieldConfig,
}

impl System {
    pub fn new(species: [Species; 2], field: FieldConfig) -> Result<Self> {
        let mixture = crate::params::Mixture {
            species,
            densities: [0.0; 2],
        };
        Ok(Self {
            species,
            alphas: mixture.polarizabilities()?,
            field,
        })
    }
}

/// One observer record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub step: usize,
    pub z: f64,
    pub norms: [f64; 2],
    /// max |φ_e|²/|ψ_g|² per component.
    pub adiabaticity: [f64; 2],
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub state: MatterState,
    pub records: Vec<Record>,
    pub completed_steps: usize,
    /// Set when an observer stopped the run early.
    pub interrupted: bool,
}

/// Diagnostic excited-state populations |φ_ej|² = |Ω⁺|²|ψ_gj|² / (4 Δ_loc²).
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitedFraction {
    pub populations: [Vec<f64>; 2],
    /// max over occupied points of |φ_ej|²/|ψ_gj|².
    pub adiabaticity: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumBin {
    pub k: f64,
    pub weight: f64,
}

pub struct Propagator {
    system: System,
    config: EvolveConfig,
    grid: Grid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    transverse: Vec<f64>,
    kinetic_phase: [Vec<Complex64>; 2],
    dt: [f64; 2],
}

impl Propagator {
    pub fn new(system: System, config: EvolveConfig, grid: Grid) -> Result<Self> {
        let errs = config.violations();
        if !errs.is_empty() {
            return Err(Error::Validation(errs));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.points());
        let inverse = planner.plan_fft_inverse(grid.points());
        let transverse = grid
            .positions()
            .into_iter()
            .map(|y| system.field.transverse(y))
            .collect();
        let dt = system.species.map(|s| config.dz / s.group_velocity);
        let ks = grid.wavenumbers();
        let kinetic_phase = [0, 1].map(|j| {
            let m = system.species[j].mass;
            ks.iter()
                .map(|k| Complex64::from_polar(1.0, -HBAR * k * k * dt[j] / (2.0 * m)))
                .collect()
        });
        Ok(Self {
            system,
            config,
            grid,
            forward,
            inverse,
            transverse,
            kinetic_phase,
            dt,
        })
    }

    pub fn config(&self) -> &EvolveConfig {
        &self.config
    }

    pub fn system(&self) -> &System {
        &self.system
    }

    /// Interaction time per step for each component.
    pub fn time_steps(&self) -> [f64; 2] {
        self.dt
    }

    fn envelope(&self, z: f64) -> f64 {
        match self.config.envelope {
            Envelope::Gaussian => self.system.field.envelope(z),
            Envelope::Flat => 1.0,
        }
    }

    fn check_grid(&self, state: &MatterState) -> Result<()> {
        if state.grid != self.grid {
            return Err(Error::Domain("state grid differs from propagator grid".into()));
        }
        Ok(())
    }

    /// Potential U_j at every grid point for the current densities.
    pub fn potentials(&self, state: &MatterState, z: f64) -> Result<[Vec<f64>; 2]> {
        self.check_grid(state)?;
        let env = self.envelope(z);
        let mut out = [vec![0.0; self.grid.points()], vec![0.0; self.grid.points()]];
        let (a1, a2) = (&state.amplitudes[0], &state.amplitudes[1]);
        for i in 0..self.grid.points() {
            let sample = MediumSample::new([a1[i].norm_sqr(), a2[i].norm_sqr()], self.system.alphas);
            for c in Component::BOTH {
                let j = c.index();
                let omega = self.system.field.peak_rabi[j];
                let rabi_sq = omega * omega * env * self.transverse[i];
                out[j][i] = nonlinear_potential(
                    &sample,
                    rabi_sq,
                    self.system.species[j].detuning,
                    self.config.mode,
                )
                .map_err(|e| match e {
                    Error::SingularDetuning { screening, .. } => Error::SingularDetuning {
                        species: Some(c),
                        grid_index: Some(i),
                        screening,
                    },
                    other => other,
                })?;
            }
        }
        Ok(out)
    }

    fn half_potential(&self, state: &mut MatterState, z: f64) -> Result<()> {
        let u = self.potentials(state, z)?;
        for j in 0..2 {
            let h = 0.5 * self.dt[j] / HBAR;
            for (a, uj) in state.amplitudes[j].iter_mut().zip(&u[j]) {
                *a *= Complex64::from_polar(1.0, -uj * h);
            }
        }
        Ok(())
    }

    fn kinetic(&self, state: &mut MatterState) {
        let scale = 1.0 / self.grid.points() as f64;
        for j in 0..2 {
            let buf = &mut state.amplitudes[j];
            self.forward.process(buf);
            for (a, p) in buf.iter_mut().zip(&self.kinetic_phase[j]) {
                *a *= p * scale;
            }
            self.inverse.process(buf);
        }
    }

    /// Advances the state by one step in z.
    pub fn step(&self, state: &mut MatterState) -> Result<()> {
        self.step_indexed(state, 0)
    }

    fn step_indexed(&self, state: &mut MatterState, index: usize) -> Result<()> {
        self.check_grid(state)?;
        let z0 = state.z;
        let z1 = z0 + self.config.dz;
        self.half_potential(state, z0)?;
        if self.config.kinetic == Kinetic::On {
            self.kinetic(state);
        }
        self.half_potential(state, z1)?;
        state.z = z1;
        for c in Component::BOTH {
            if state.amplitude(c).iter().any(|a| !a.is_finite()) {
                return Err(Error::NumericBlowup {
                    species: c,
                    step: index,
                });
            }
        }
        Ok(())
    }

    /// Runs `config.steps` steps from `state`, which is placed at
    /// `config.z_start`. The observer sees a record at step 0, every
    /// `observe_every` steps and at the last step, and may stop the run.
    pub fn evolve<F>(&self, mut state: MatterState, mut observer: F) -> Result<Evolution>
    where
        F: FnMut(&MatterState, &Record) -> ControlFlow<()>,
    {
        state.z = self.config.z_start;
        let mut records = Vec::new();
        let mut interrupted = false;
        let mut done = 0;
        let mut emit = |state: &MatterState, step: usize, records: &mut Vec<Record>| -> Result<ControlFlow<()>> {
            let record = Record {
                step,
                z: state.z,
                norms: state.norms(),
                adiabaticity: self.excited_state_diagnostic(state)?.adiabaticity,
            };
            records.push(record);
            Ok(observer(state, &record))
        };
        if emit(&state, 0, &mut records)?.is_break() {
            interrupted = self.config.steps > 0;
        } else {
            for step in 1..=self.config.steps {
                self.step_indexed(&mut state, step)?;
                done = step;
                let observed = step % self.config.observe_every == 0 || step == self.config.steps;
                if observed && emit(&state, step, &mut records)?.is_break() {
                    interrupted = step < self.config.steps;
                    break;
                }
            }
        }
        Ok(Evolution {
            state,
            records,
            completed_steps: done,
            interrupted,
        })
    }

    pub fn excited_state_diagnostic(&self, state: &MatterState) -> Result<ExcitedFraction> {
        self.check_grid(state)?;
        let env = self.envelope(state.z);
        let n = self.grid.points();
        let mut populations = [vec![0.0; n], vec![0.0; n]];
        let mut adiabaticity = [0.0f64; 2];
        let (a1, a2) = (&state.amplitudes[0], &state.amplitudes[1]);
        for i in 0..n {
            let rho = [a1[i].norm_sqr(), a2[i].norm_sqr()];
            let sample = MediumSample::new(rho, self.system.alphas);
            let f = sample.screening_factor();
            for c in Component::BOTH {
                let j = c.index();
                let omega = self.system.field.peak_rabi[j];
                let rabi_sq = omega * omega * env * self.transverse[i];
                if rabi_sq == 0.0 {
                    continue;
                }
                let local = self.system.species[j].detuning * f;
                if !(f.abs() > crate::medium::LOCAL_DETUNING_TOLERANCE) {
                    return Err(Error::SingularDetuning {
                        species: Some(c),
                        grid_index: Some(i),
                        screening: f,
                    });
                }
                let ratio = rabi_sq / (4.0 * local * local);
                populations[j][i] = ratio * rho[j];
                if rho[j] > 0.0 {
                    adiabaticity[j] = adiabaticity[j].max(ratio);
                }
            }
        }
        Ok(ExcitedFraction {
            populations,
            adiabaticity,
        })
    }

    /// Largest potential phase |U_j| dt_j accumulated in one step, for the
    /// given state at the envelope peak.
    pub fn max_phase_per_step(&self, state: &MatterState) -> Result<f64> {
        let mut probe = state.clone();
        probe.z = 0.0;
        let u = self.potentials(&probe, 0.0)?;
        let mut m = 0.0f64;
        for j in 0..2 {
            let umax = u[j].iter().fold(0.0f64, |a, b| a.max(b.abs()));
            m = m.max(umax * self.dt[j] / HBAR);
        }
        Ok(m)
    }

    /// Non-fatal validity warnings for evolving `state`.
    pub fn warnings(&self, state: &MatterState) -> Result<Vec<String>> {
        let mut out = Vec::new();
        let phase = self.max_phase_per_step(state)?;
        if phase > PHASE_PER_STEP_LIMIT {
            out.push(format!(
                "potential phase per step {phase:.3} exceeds {PHASE_PER_STEP_LIMIT}; reduce dz"
            ));
        }
        Ok(out)
    }
}

/// Single Strang step with a freshly planned propagator.
pub fn step(state: &MatterState, system: System, config: EvolveConfig) -> Result<MatterState> {
    let p = Propagator::new(system, config, state.grid)?;
    let mut next = state.clone();
    p.step(&mut next)?;
    Ok(next)
}

/// Discrete momentum distribution of each component, sorted by k.
/// Weights sum to the component norm.
pub fn momentum_spectrum(state: &MatterState) -> [Vec<MomentumBin>; 2] {
    let n = state.grid.points();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let scale = state.grid.spacing() / n as f64;
    [0, 1].map(|j| {
        let mut buf = state.amplitudes[j].clone();
        fft.process(&mut buf);
        let mut bins: Vec<MomentumBin> = buf
            .iter()
            .enumerate()
            .map(|(m, a)| MomentumBin {
                k: state.grid.wavenumber(m),
                weight: a.norm_sqr() * scale,
            })
            .collect();
        bins.sort_by(|a, b| a.k.total_cmp(&b.k));
        bins
    })
}

/// Fraction of each component's norm in diffraction order q, i.e. at
/// k = 2 q n k_L, for |q| ≤ max_order. The grid must be commensurate with
/// the standing wave.
pub fn order_weights(
    state: &MatterState,
    medium_wavenumber: f64,
    max_order: usize,
) -> Result<[Vec<(i32, f64)>; 2]> {
    let grid = state.grid;
    let n = grid.points() as i64;
    let bins_per_order = 2.0 * medium_wavenumber * grid.extent() / (2.0 * std::f64::consts::PI);
    let step = bins_per_order.round();
    if step < 1.0 || (bins_per_order - step).abs() > 1e-6 * bins_per_order {
        return Err(Error::Domain(format!(
            "grid extent is not a whole number of standing-wave periods ({bins_per_order} bins per order)"
        )));
    }
    let step = step as i64;
    if (max_order as i64) * step >= n / 2 {
        return Err(Error::Domain(format!(
            "order {max_order} lies beyond the grid's Nyquist limit"
        )));
    }
    let fft = FftPlanner::new().plan_fft_forward(grid.points());
    Ok([0, 1].map(|j| {
        let mut buf = state.amplitudes[j].clone();
        fft.process(&mut buf);
        let total: f64 = buf.iter().map(|a| a.norm_sqr()).sum();
        (-(max_order as i64)..=max_order as i64)
            .map(|q| {
                let m = (q * step).rem_euclid(n) as usize;
                let w = if total > 0.0 { buf[m].norm_sqr() / total } else { 0.0 };
                (q as i32, w)
            })
            .collect()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::FOUR_PI_OVER_3;

    fn species(mass: f64, detuning: f64, d: f64, v: f64, omega: f64) -> Species {
        Species {
            mass,
            detuning,
            dipole_moment: d,
            group_velocity: v,
            peak_rabi: omega,
        }
    }

    fn system(omega: [f64; 2]) -> System {
        let sp = [
            species(1.0, 50.0, 0.5, 1.0, omega[0]),
            species(2.0, -30.0, 0.4, 1.5, omega[1]),
        ];
        let field = FieldConfig::new(1.0, 5.0, 1.0, omega).unwrap();
        System::new(sp, field).unwrap()
    }

    fn config(kinetic: Kinetic, envelope: Envelope, dz: f64, steps: usize) -> EvolveConfig {
        EvolveConfig {
            dz,
            steps,
            z_start: 0.0,
            mode: PotentialMode::Full,
            kinetic,
            envelope,
            observe_every: 1,
        }
    }

    #[test]
    fn plane_wave_is_kinetic_eigenstate() {
        let grid = Grid::new(64, 0.25).unwrap();
        let k = grid.wavenumber(3);
        let ys = grid.positions();
        let psi: Vec<Complex64> = ys.iter().map(|y| Complex64::from_polar(0.7, k * y)).collect();
        let state = MatterState::from_amplitudes(grid, [psi.clone(), psi.clone()], 0.0).unwrap();
        let sys = system([0.0, 0.0]);
        let cfg = config(Kinetic::On, Envelope::Flat, 0.3, 1);
        let next = step(&state, sys, cfg).unwrap();
        for j in 0..2 {
            let dt = 0.3 / sys.species[j].group_velocity;
            let phase = Complex64::from_polar(1.0, -HBAR * k * k * dt / (2.0 * sys.species[j].mass));
            for (a, b) in next.amplitudes[j].iter().zip(&psi) {
                assert!((a - b * phase).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn zero_field_without_kinetic_is_identity() {
        let grid = Grid::new(32, 0.5).unwrap();
        let state = MatterState::gaussian(grid, [1.0, 0.5], 2.0);
        let next = step(&state, system([0.0, 0.0]), config(Kinetic::Off, Envelope::Gaussian, 0.1, 1)).unwrap();
        assert_eq!(next.amplitudes, state.amplitudes);
    }

    #[test]
    fn constant_potential_gives_scalar_phase() {
        // one grid point per intensity period puts every point on an antinode
        let sys = system([3.0, 2.0]);
        let grid = Grid::new(16, sys.field.intensity_period()).unwrap();
        let rho = [0.02, 0.03];
        let state = MatterState::uniform(grid, rho);
        let dz = 0.05;
        let next = step(&state, sys, config(Kinetic::Off, Envelope::Flat, dz, 1)).unwrap();
        let f = 1.0 - FOUR_PI_OVER_3 * (sys.alphas[0] * rho[0] + sys.alphas[1] * rho[1]);
        for j in 0..2 {
            let s = sys.species[j];
            let u = HBAR * s.detuning * s.peak_rabi * s.peak_rabi / (4.0 * (s.detuning * f).powi(2));
            let expected = Complex64::new(rho[j].sqrt(), 0.0) * Complex64::new(0.0, -u * dz / s.group_velocity / HBAR).exp();
            for a in &next.amplitudes[j] {
                assert!((a - expected).norm() < 1e-14, "{a} vs {expected}");
            }
        }
    }

    #[test]
    fn evolve_with_no_steps_returns_input() {
        let sys = system([1.0, 1.0]);
        let grid = Grid::new(32, 0.3).unwrap();
        let state = MatterState::gaussian(grid, [1.0, 1.0], 1.5);
        let p = Propagator::new(sys, config(Kinetic::On, Envelope::Gaussian, 0.1, 0), grid).unwrap();
        let out = p.evolve(state.clone(), |_, _| ControlFlow::Continue(())).unwrap();
        assert_eq!(out.state.amplitudes, state.amplitudes);
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.completed_steps, 0);
        assert!(!out.interrupted);
    }

    #[test]
    fn chained_evolves_match_single_run() {
        let sys = system([4.0, 3.0]);
        let grid = Grid::new(64, 0.2).unwrap();
        let state = MatterState::gaussian(grid, [0.05, 0.02], 2.0);
        let mut full = config(Kinetic::On, Envelope::Gaussian, 0.05, 40);
        full.z_start = -1.0;
        let mut first = full;
        first.steps = 20;
        let p = Propagator::new(sys, full, grid).unwrap();
        let one = p.evolve(state.clone(), |_, _| ControlFlow::Continue(())).unwrap().state;
        let p1 = Propagator::new(sys, first, grid).unwrap();
        let half = p1.evolve(state, |_, _| ControlFlow::Continue(())).unwrap().state;
        let mut second = first;
        second.z_start = half.z;
        let p2 = Propagator::new(sys, second, grid).unwrap();
        let two = p2.evolve(half, |_, _| ControlFlow::Continue(())).unwrap().state;
        assert_eq!(one.amplitudes, two.amplitudes);
        assert_eq!(one.z, two.z);
    }

    #[test]
    fn observer_can_interrupt() {
        let sys = system([1.0, 1.0]);
        let grid = Grid::new(32, 0.3).unwrap();
        let state = MatterState::gaussian(grid, [0.1, 0.1], 1.5);
        let p = Propagator::new(sys, config(Kinetic::On, Envelope::Flat, 0.01, 100), grid).unwrap();
        let out = p
            .evolve(state, |_, r| if r.step >= 10 { ControlFlow::Break(()) } else { ControlFlow::Continue(()) })
            .unwrap();
        assert!(out.interrupted);
        assert_eq!(out.completed_steps, 10);
    }

    #[test]
    fn singular_local_detuning_reports_grid_index() {
        let mut sys = system([1.0, 1.0]);
        let grid = Grid::new(16, 0.3).unwrap();
        // put a density spike exactly on the pole at one grid point
        sys.alphas = [1.0, 0.0];
        let mut state = MatterState::uniform(grid, [0.01, 0.0]);
        state.amplitudes[0][5] = Complex64::new((1.0 / FOUR_PI_OVER_3).sqrt(), 0.0);
        let err = step(&state, sys, config(Kinetic::Off, Envelope::Flat, 0.1, 1)).unwrap_err();
        match err {
            Error::SingularDetuning { grid_index, species, .. } => {
                assert_eq!(grid_index, Some(5));
                assert_eq!(species, Some(Component::One));
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn blowup_detected() {
        let sys = system([1.0, 1.0]);
        let grid = Grid::new(16, 0.3).unwrap();
        let mut state = MatterState::uniform(grid, [0.01, 0.01]);
        state.amplitudes[1][3] = Complex64::new(f64::INFINITY, 0.0);
        let p = Propagator::new(sys, config(Kinetic::On, Envelope::Flat, 0.1, 3), grid).unwrap();
        let err = p.evolve(state, |_, _| ControlFlow::Continue(())).unwrap_err();
        assert!(matches!(err, Error::NumericBlowup { .. } | Error::SingularDetuning { .. }), "{err}");
    }

    #[test]
    fn excited_fraction_examples() {
        let grid = Grid::new(16, 0.5).unwrap();
        let state = MatterState::uniform(grid, [0.01, 0.02]);
        let p = Propagator::new(system([0.0, 0.0]), config(Kinetic::Off, Envelope::Flat, 0.1, 1), grid).unwrap();
        let ex = p.excited_state_diagnostic(&state).unwrap();
        assert!(ex.populations.iter().flatten().all(|v| *v == 0.0));
        assert_eq!(ex.adiabaticity, [0.0, 0.0]);

        let sys = system([3.0, 2.0]);
        let grid = Grid::new(16, sys.field.intensity_period()).unwrap();
        let state = MatterState::uniform(grid, [0.01, 0.02]);
        let p = Propagator::new(sys, config(Kinetic::Off, Envelope::Flat, 0.1, 1), grid).unwrap();
        let ex = p.excited_state_diagnostic(&state).unwrap();
        let f = 1.0 - FOUR_PI_OVER_3 * (sys.alphas[0] * 0.01 + sys.alphas[1] * 0.02);
        for j in 0..2 {
            let s = sys.species[j];
            let expected = s.peak_rabi.powi(2) / (4.0 * (s.detuning * f).powi(2));
            assert!((ex.adiabaticity[j] - expected).abs() < 1e-15 * expected);
        }
    }

    #[test]
    fn adiabaticity_decreases_with_detuning() {
        let grid = Grid::new(16, std::f64::consts::PI).unwrap();
        let state = MatterState::uniform(grid, [0.01, 0.01]);
        let metric = |det: f64| {
            let sp = [species(1.0, det, 0.3, 1.0, 5.0), species(1.0, det, 0.3, 1.0, 5.0)];
            let field = FieldConfig::new(1.0, 1.0, 1.0, [5.0, 5.0]).unwrap();
            let p = Propagator::new(System::new(sp, field).unwrap(), config(Kinetic::Off, Envelope::Flat, 0.1, 1), grid).unwrap();
            p.excited_state_diagnostic(&state).unwrap().adiabaticity[0]
        };
        let (a, b, c) = (metric(20.0), metric(40.0), metric(80.0));
        assert!(a > b && b > c, "{a} {b} {c}");
    }

    #[test]
    fn momentum_spectrum_examples() {
        let grid = Grid::new(64, 0.1).unwrap();
        let uniform = MatterState::uniform(grid, [2.0, 0.5]);
        let spec = momentum_spectrum(&uniform);
        for (j, bins) in spec.iter().enumerate() {
            let zero = bins.iter().find(|b| b.k == 0.0).unwrap();
            assert!((zero.weight - uniform.norms()[j]).abs() < 1e-12);
            assert!(bins.iter().filter(|b| b.k != 0.0).all(|b| b.weight < 1e-28));
        }

        let k = grid.wavenumber(5);
        let psi: Vec<Complex64> = grid.positions().iter().map(|y| Complex64::from_polar(1.0, k * y)).collect();
        let s = MatterState::from_amplitudes(grid, [psi.clone(), psi], 0.0).unwrap();
        let bins = &momentum_spectrum(&s)[0];
        let peak = bins.iter().max_by(|a, b| a.weight.total_cmp(&b.weight)).unwrap();
        assert!((peak.k - k).abs() < 1e-12);
        assert!((peak.weight - s.norm(Component::One)).abs() < 1e-12);
    }

    #[test]
    fn parseval_on_pseudo_random_state() {
        let grid = Grid::new(128, 0.07).unwrap();
        // deterministic scramble, no RNG
        let amp = |seed: f64| -> Vec<Complex64> {
            (0..128)
                .map(|i| {
                    let t = (i as f64 + seed) * 12.9898;
                    Complex64::new((t.sin() * 43758.5453).fract(), (t.cos() * 24634.6345).fract())
                })
                .collect()
        };
        let s = MatterState::from_amplitudes(grid, [amp(0.3), amp(1.7)], 0.0).unwrap();
        let spec = momentum_spectrum(&s);
        for j in 0..2 {
            let total: f64 = spec[j].iter().map(|b| b.weight).sum();
            assert!((total - s.norms()[j]).abs() <= 1e-12 * s.norms()[j]);
        }
    }

    #[test]
    fn order_weights_need_commensurate_grid() {
        let field = FieldConfig::new(1.0, 1.0, 1.0, [0.0, 0.0]).unwrap();
        let good = Grid::commensurate(256, 8, &field).unwrap();
        let s = MatterState::uniform(good, [1.0, 1.0]);
        let w = order_weights(&s, field.medium_wavenumber(), 5).unwrap();
        assert_eq!(w[0][5], (0, 1.0));
        let bad = Grid::new(256, 0.0123).unwrap();
        assert!(order_weights(&MatterState::uniform(bad, [1.0, 1.0]), 1.0, 5).is_err());
        assert!(order_weights(&s, field.medium_wavenumber(), 20).is_err());
    }
}
