//! Closed-form far-field diffraction in the Raman-Nath regime.
//!
//! With transverse kinetic energy neglected, the standing wave imprints the
//! phase −2τ_j cos²(n k_L y) on component j. Expanding the imprint in
//! plane waves gives order q, with momentum 2qnħk_L, and probability
//! J_q²(τ_j).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_j_sequence, MAX_ARGUMENT};
use crate::error::{Error, Result};
use crate::field::FieldConfig;
use crate::params::{Component, Mixture, Species, HBAR};
use crate::propagator::MatterState;

/// The packet must span this many laser wavelengths in the medium.
pub const WIDE_PACKET_FACTOR: f64 = 10.0;

/// Extra orders kept beyond ceil(τ); J_q(τ) is negligible past that.
pub const ORDER_MARGIN: usize = 20;

/// Relative tolerance for treating two diffraction angles as equal.
pub const ANGLE_TOLERANCE: f64 = 1e-12;

/// g_j = (Ω_j²/16Δ_j)(w_L/v_gj)√π.
pub fn coupling_strength(species: &Species, field: &FieldConfig) -> Result<f64> {
    if species.detuning == 0.0 {
        return Err(Error::ZeroDetuning { species: None });
    }
    if !(species.group_velocity > 0.0) {
        return Err(Error::Domain(format!(
            "group velocity must be > 0 (got {})",
            species.group_velocity
        )));
    }
    let omega_sq = species.peak_rabi * species.peak_rabi;
    Ok(omega_sq / (16.0 * species.detuning)
        * (field.envelope_width / species.group_velocity)
        * std::f64::consts::PI.sqrt())
}

/// τ_j = 2g_j / (1 + V₁ρ₁ + V₂ρ₂)².
pub fn tau(coupling: f64, mixture: &Mixture) -> Result<f64> {
    let v = mixture.effective_volumes()?;
    let d = 1.0 + v[0] * mixture.densities[0] + v[1] * mixture.densities[1];
    if !(d.abs() > crate::medium::POLE_TOLERANCE) {
        return Err(Error::SingularDetuning {
            species: None,
            grid_index: None,
            screening: d,
        });
    }
    Ok(2.0 * coupling / (d * d))
}

/// ceil(max|τ|) + 20.
pub fn default_max_order(taus: &[f64]) -> usize {
    let t = taus.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    t.ceil() as usize + ORDER_MARGIN
}

/// (q, J_q²(τ)) for q = −Q..=Q.
pub fn order_probabilities(tau: f64, max_order: usize) -> Result<Vec<(i32, f64)>> {
    if !tau.is_finite() || tau.abs() > MAX_ARGUMENT {
        return Err(Error::BesselRange(tau));
    }
    let j = bessel_j_sequence(max_order, tau)?;
    let q = max_order as i32;
    Ok((-q..=q)
        .map(|order| {
            let v = j[order.unsigned_abs() as usize];
            (order, v * v)
        })
        .collect())
}

/// tan α = 2qnħk_L / (m v_g).
pub fn diffraction_angle(order: i32, species: &Species, n: f64, vacuum_wavenumber: f64) -> f64 {
    (2.0 * order as f64 * n * HBAR * vacuum_wavenumber / species.longitudinal_momentum()).atan()
}

#[derive(Debug, Clone)]
pub struct FarField {
    pub state: MatterState,
    pub warnings: Vec<String>,
}

/// Applies the far-zone imprint e^{−iτ} Σ_q (−i)^q J_q(τ) e^{2iqnk_L y} to
/// each component of `incident`.
pub fn far_field_state(incident: &MatterState, taus: [f64; 2], field: &FieldConfig) -> Result<FarField> {
    let k = field.medium_wavenumber();
    let ys = incident.grid.positions();
    let mut state = incident.clone();
    let mut warnings = Vec::new();
    let wavelength = 2.0 * std::f64::consts::PI / k;
    for c in Component::BOTH {
        let j = c.index();
        if incident.norm(c) > 0.0 {
            let w = incident.packet_width(c);
            if w < WIDE_PACKET_FACTOR * wavelength {
                warnings.push(format!(
                    "species {}: packet width {w:.4} is below {WIDE_PACKET_FACTOR} medium wavelengths ({:.4}); far-field expansion is unreliable",
                    c.number(),
                    WIDE_PACKET_FACTOR * wavelength
                ));
            }
        }
        let tau = taus[j];
        if tau == 0.0 {
            continue;
        }
        let q_max = default_max_order(&[tau]);
        let bessel = bessel_j_sequence(q_max, tau)?;
        // (−i)^q J_q for q ≥ 0; the q < 0 terms follow from J_{−q} = (−1)^q J_q
        let minus_i_pow = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 1.0),
        ];
        let global = Complex64::from_polar(1.0, -tau);
        for (a, &y) in state.amplitudes[j].iter_mut().zip(&ys) {
            let theta = 2.0 * k * y;
            let mut sum = Complex64::new(bessel[0], 0.0);
            for (q, jq) in bessel.iter().enumerate().skip(1) {
                let pos = minus_i_pow[q % 4] * jq * Complex64::from_polar(1.0, q as f64 * theta);
                let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
                let neg = minus_i_pow[(4 - q % 4) % 4] * (sign * jq) * Complex64::from_polar(1.0, -(q as f64) * theta);
                sum += pos + neg;
            }
            *a *= global * sum;
        }
    }
    Ok(FarField { state, warnings })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffractionOrder {
    pub order: i32,
    pub probability: f64,
    /// Diffraction angle in radians.
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSpectrum {
    pub coupling: f64,
    pub tau: f64,
    pub orders: Vec<DiffractionOrder>,
}

impl ComponentSpectrum {
    pub fn total_probability(&self) -> f64 {
        self.orders.iter().map(|o| o.probability).sum()
    }

    pub fn probability(&self, order: i32) -> Option<f64> {
        self.orders.iter().find(|o| o.order == order).map(|o| o.probability)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffractionSpectrum {
    pub components: [ComponentSpectrum; 2],
    pub refractive_index: f64,
    pub vacuum_wavenumber: f64,
    pub max_order: usize,
    /// α_q1 = α_q2 for every order.
    pub angles_coincide: bool,
    /// The two components leave at different angles and at least one of
    /// them is diffracted.
    pub separated: bool,
}

fn tag(e: Error, c: Component) -> Error {
    match e {
        Error::ZeroDetuning { .. } => Error::ZeroDetuning { species: Some(c) },
        Error::SingularDetuning { grid_index, screening, .. } => Error::SingularDetuning {
            species: Some(c),
            grid_index,
            screening,
        },
        other => other,
    }
}

/// Whether every order q = 1..=max(max_order, 1) leaves both components at
/// the same angle.
pub fn angles_coincide(species: &[Species; 2], n: f64, vacuum_wavenumber: f64, max_order: usize) -> bool {
    (1..=max_order.max(1) as i32).all(|q| {
        let a = diffraction_angle(q, &species[0], n, vacuum_wavenumber);
        let b = diffraction_angle(q, &species[1], n, vacuum_wavenumber);
        (a - b).abs() <= ANGLE_TOLERANCE * a.abs().max(b.abs())
    })
}

/// Full far-field spectrum for both components. τ_j uses the peak densities
/// of the mixture; `max_order` defaults to ceil(max τ) + 20.
pub fn assemble_spectrum(
    mixture: &Mixture,
    field: &FieldConfig,
    max_order: Option<usize>,
) -> Result<DiffractionSpectrum> {
    let mut couplings = [0.0; 2];
    let mut taus = [0.0; 2];
    for c in Component::BOTH {
        let j = c.index();
        couplings[j] = coupling_strength(&mixture.species[j], field).map_err(|e| tag(e, c))?;
        taus[j] = tau(couplings[j], mixture).map_err(|e| tag(e, c))?;
    }
    let q = max_order.unwrap_or_else(|| default_max_order(&taus));
    let n = field.refractive_index;
    let k = field.vacuum_wavenumber;
    let mut components = Vec::with_capacity(2);
    for c in Component::BOTH {
        let j = c.index();
        let orders = order_probabilities(taus[j], q)?
            .into_iter()
            .map(|(order, probability)| DiffractionOrder {
                order,
                probability,
                angle: diffraction_angle(order, &mixture.species[j], n, k),
            })
            .collect();
        components.push(ComponentSpectrum {
            coupling: couplings[j],
            tau: taus[j],
            orders,
        });
    }
    let coincide = angles_coincide(&mixture.species, n, k, q);
    let components: [ComponentSpectrum; 2] = components.try_into().expect("two components");
    Ok(DiffractionSpectrum {
        separated: !coincide && taus.iter().any(|t| *t != 0.0),
        angles_coincide: coincide,
        components,
        refractive_index: n,
        vacuum_wavenumber: k,
        max_order: q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagator::{order_weights, Grid};
    use std::f64::consts::PI;

    fn species(mass: f64, detuning: f64, d: f64, v: f64, omega: f64) -> Species {
        Species {
            mass,
            detuning,
            dipole_moment: d,
            group_velocity: v,
            peak_rabi: omega,
        }
    }

    fn field(w: f64) -> FieldConfig {
        FieldConfig::new(1.0, w, 1.0, [0.0, 0.0]).unwrap()
    }

    #[test]
    fn coupling_examples() {
        assert_eq!(coupling_strength(&species(1.0, 3.0, 0.0, 1.0, 0.0), &field(10.0)).unwrap(), 0.0);
        let g = coupling_strength(&species(1.0, 100.0, 0.0, 1.0, 4.0), &field(10.0)).unwrap();
        assert!((g - 0.1 * PI.sqrt()).abs() < 1e-15);
        assert!((g - 0.177245).abs() < 1e-6);
        let flipped = coupling_strength(&species(1.0, -100.0, 0.0, 1.0, 4.0), &field(10.0)).unwrap();
        assert_eq!(flipped, -g);
        assert!(coupling_strength(&species(1.0, 0.0, 0.0, 1.0, 4.0), &field(1.0)).is_err());
        assert!(coupling_strength(&species(1.0, 1.0, 0.0, 0.0, 4.0), &field(1.0)).is_err());
    }

    #[test]
    fn tau_examples() {
        let sp = [species(1.0, 1.0, 1.0, 1.0, 1.0), species(1.0, -1.0, 1.0, 1.0, 1.0)];
        let vac = Mixture::new(sp, [0.0, 0.0]).unwrap();
        assert_eq!(tau(1.0, &vac).unwrap(), 2.0);
        // V₁ = 4π/3 for d = Δ = 1, so ρ₁ = 3/(4π) gives V₁ρ₁ = 1
        let m = Mixture::new(sp, [3.0 / (4.0 * PI), 0.0]).unwrap();
        assert!((tau(1.0, &m).unwrap() - 0.5).abs() < 1e-15);
        // V₂ = −4π/3, so V₂ρ₂ = −1 closes the denominator
        let m = Mixture::new(sp, [0.0, 3.0 / (4.0 * PI)]).unwrap();
        assert!(matches!(tau(1.0, &m), Err(Error::SingularDetuning { .. })));
    }

    #[test]
    fn probability_examples() {
        let p = order_probabilities(0.0, 5).unwrap();
        assert_eq!(p.len(), 11);
        for (q, v) in &p {
            assert_eq!(*v, if *q == 0 { 1.0 } else { 0.0 });
        }
        let p = order_probabilities(1.0, 3).unwrap();
        let get = |q: i32| p.iter().find(|(o, _)| *o == q).unwrap().1;
        // J_0(1)² = 0.765197686557966...²
        assert!((get(0) - 0.585527).abs() < 1e-6);
        assert!((get(1) - 0.193644).abs() < 1e-6);
        assert_eq!(get(1), get(-1));
        assert!(order_probabilities(701.0, 3).is_err());
    }

    #[test]
    fn completeness_with_default_truncation() {
        for &t in &[0.1, 1.0, 5.0, 10.0, 33.3, 50.0] {
            let q = default_max_order(&[t]);
            let total: f64 = order_probabilities(t, q).unwrap().iter().map(|p| p.1).sum();
            assert!(total >= 1.0 - 1e-10 && total <= 1.0 + 1e-12, "{t}: {total}");
        }
    }

    #[test]
    fn angle_examples() {
        let s = species(2.0, 1.0, 0.0, 1.0, 0.0);
        assert_eq!(diffraction_angle(0, &s, 1.0, 1.0), 0.0);
        assert!((diffraction_angle(1, &s, 1.0, 1.0) - PI / 4.0).abs() < 1e-15);
        for q in 1..20 {
            assert_eq!(diffraction_angle(-q, &s, 1.03, 1.0), -diffraction_angle(q, &s, 1.03, 1.0));
        }
        let a = species(2.0, 1.0, 0.0, 3.0, 0.0);
        let b = species(3.0, 1.0, 0.0, 2.0, 0.0);
        for q in -5..=5 {
            assert_eq!(diffraction_angle(q, &a, 1.1, 1.0), diffraction_angle(q, &b, 1.1, 1.0));
        }
    }

    fn uniform_far_field(tau: f64) -> [Vec<(i32, f64)>; 2] {
        let f = FieldConfig::new(1.0, 1.0, 1.07, [0.0, 0.0]).unwrap();
        let grid = Grid::commensurate(1024, 16, &f).unwrap();
        let incident = MatterState::uniform(grid, [1.0, 0.3]);
        let out = far_field_state(&incident, [tau, 0.5 * tau], &f).unwrap();
        assert!(out.warnings.is_empty());
        for c in Component::BOTH {
            assert!((out.state.norm(c) - incident.norm(c)).abs() <= 1e-12 * incident.norm(c));
        }
        order_weights(&out.state, f.medium_wavenumber(), 10).unwrap()
    }

    #[test]
    fn far_field_identity_at_zero_tau() {
        let f = field(1.0);
        let grid = Grid::commensurate(64, 4, &f).unwrap();
        let s = MatterState::gaussian(grid, [1.0, 2.0], 3.0);
        let out = far_field_state(&s, [0.0, 0.0], &f).unwrap();
        assert_eq!(out.state, s);
    }

    #[test]
    fn far_field_orders_match_bessel() {
        for &t in &[0.5, 1.0, 5.0] {
            let w = uniform_far_field(t);
            for (j, tau) in [(0, t), (1, 0.5 * t)] {
                let expect = order_probabilities(tau, 10).unwrap();
                for ((q, got), (_, want)) in w[j].iter().zip(&expect) {
                    assert!((got - want).abs() < 1e-8, "tau {tau} q {q}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn far_field_matches_closed_form_phase() {
        // Jacobi-Anger: the series equals exp(−iτ(1 + cos 2nk_L y))
        let f = FieldConfig::new(1.0, 1.0, 1.2, [0.0, 0.0]).unwrap();
        let grid = Grid::commensurate(256, 4, &f).unwrap();
        let incident = MatterState::uniform(grid, [1.0, 1.0]);
        let tau = 3.7;
        let out = far_field_state(&incident, [tau, -tau], &f).unwrap();
        for (i, y) in grid.positions().into_iter().enumerate() {
            let theta = 2.0 * f.medium_wavenumber() * y;
            for (j, t) in [(0, tau), (1, -tau)] {
                let want = Complex64::from_polar(1.0, -t * (1.0 + theta.cos()));
                assert!((out.state.amplitudes[j][i] - want).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn narrow_packet_warns() {
        let f = field(1.0);
        let grid = Grid::commensurate(256, 32, &f).unwrap();
        let s = MatterState::gaussian(grid, [1.0, 1.0], 2.0);
        let out = far_field_state(&s, [1.0, 1.0], &f).unwrap();
        assert_eq!(out.warnings.len(), 2);
    }

    #[test]
    fn spectrum_examples() {
        let sp = [species(1.0, 10.0, 0.2, 1.0, 0.0), species(2.0, -10.0, 0.2, 1.0, 0.0)];
        let mix = Mixture::new(sp, [0.01, 0.02]).unwrap();
        let f = FieldConfig::for_mixture(&mix, 1.0, 5.0, None).unwrap();
        let s = assemble_spectrum(&mix, &f, None).unwrap();
        for c in &s.components {
            assert_eq!(c.tau, 0.0);
            assert_eq!(c.probability(0), Some(1.0));
            assert!(c.orders.iter().all(|o| o.order == 0 || o.probability == 0.0));
            assert_eq!(c.orders.iter().find(|o| o.order == 0).unwrap().angle, 0.0);
        }
        assert!(!s.angles_coincide);
        assert!(!s.separated);

        let sp = [species(1.0, 10.0, 0.2, 1.0, 3.0), species(2.0, -10.0, 0.2, 1.0, 2.0)];
        let mix = Mixture::new(sp, [0.01, 0.02]).unwrap();
        let f = FieldConfig::for_mixture(&mix, 1.0, 5.0, None).unwrap();
        let s = assemble_spectrum(&mix, &f, None).unwrap();
        assert!(s.separated);
        assert_eq!(s.max_order, default_max_order(&[s.components[0].tau, s.components[1].tau]));
        for c in &s.components {
            let total = c.total_probability();
            assert!(total >= 1.0 - 1e-10 && total <= 1.0 + 1e-12);
            for o in &c.orders {
                assert_eq!(c.probability(-o.order), Some(o.probability));
            }
        }
    }

    #[test]
    fn density_screening_quarters_tau() {
        let sp = [species(1.0, 10.0, 1.0, 1.0, 3.0), species(2.0, -10.0, 1.0, 2.0, 2.0)];
        let vac = Mixture::new(sp, [0.0, 0.0]).unwrap();
        let v = vac.effective_volumes().unwrap();
        // choose densities with V₁ρ₁ + V₂ρ₂ = 1, doubling 1 + Σ Vρ
        let dense = Mixture::new(sp, [1.5 / v[0], -0.5 / v[1]]).unwrap();
        let f = field(4.0);
        let a = assemble_spectrum(&vac, &f, None).unwrap();
        let b = assemble_spectrum(&dense, &f, None).unwrap();
        for j in 0..2 {
            let ratio = a.components[j].tau / b.components[j].tau;
            assert!((ratio - 4.0).abs() < 1e-13, "{ratio}");
        }
    }
}
