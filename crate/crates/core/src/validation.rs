//! Self-checks behind `bec2 validate` and the acceptance test suite.
//!
//! Each check builds its own deterministic test problem and reports the
//! measured quantity next to the threshold it must meet. Sampled checks use
//! quasi-random Weyl sequences, so no RNG is involved.

use std::ops::ControlFlow;

use serde::Serialize;

use crate::bessel::bessel_j_sequence;
use crate::error::Result;
use crate::field::FieldConfig;
use crate::medium::{
    local_detuning, nonlinear_potential, refractive_index, susceptibility, MediumSample,
    PotentialMode,
};
use crate::params::{Component, Mixture, Species, FOUR_PI_OVER_3, HBAR};
use crate::propagator::{
    order_weights, Envelope, EvolveConfig, Grid, Kinetic, MatterState, Propagator, System,
};
use crate::raman_nath::{angles_coincide, assemble_spectrum, coupling_strength, tau};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    /// The measured quantity the threshold applies to.
    pub measured: f64,
    /// Human-readable statement of the requirement.
    pub requirement: String,
    pub detail: String,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {:<34} measured {:.6e}  ({})",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.requirement
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub criteria: Vec<CriterionReport>,
    pub passed: bool,
}

/// Bessel sequence provider J_0..J_Q, replaceable for fault injection.
pub type BesselProvider = dyn Fn(usize, f64) -> Result<Vec<f64>> + Sync;

pub struct Hooks<'a> {
    pub bessel: &'a BesselProvider,
}

impl Default for Hooks<'static> {
    fn default() -> Self {
        Hooks {
            bessel: &bessel_j_sequence,
        }
    }
}

fn report(id: u8, name: &'static str, passed: bool, measured: f64, requirement: impl Into<String>, detail: impl Into<String>) -> CriterionReport {
    CriterionReport {
        id,
        name,
        passed,
        measured,
        requirement: requirement.into(),
        detail: detail.into(),
    }
}

fn failed(id: u8, name: &'static str, requirement: &str, err: crate::Error) -> CriterionReport {
    report(id, name, false, f64::NAN, requirement, format!("error: {err}"))
}

/// Additive-recurrence (Weyl) sequence in [0, 1).
struct Weyl {
    state: f64,
    step: f64,
}

impl Weyl {
    fn new(step: f64) -> Self {
        Self { state: 0.5, step }
    }

    fn next(&mut self) -> f64 {
        self.state = (self.state + self.step).fract();
        self.state
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next()
    }
}

fn species(mass: f64, detuning: f64, dipole_moment: f64, group_velocity: f64, peak_rabi: f64) -> Species {
    Species {
        mass,
        detuning,
        dipole_moment,
        group_velocity,
        peak_rabi,
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(a.abs())
    }
}

/// Vacuum limits of every effective-medium quantity.
pub fn vacuum_limits() -> CriterionReport {
    const NAME: &str = "vacuum limits";
    const REQ: &str = "chi = 0, n = 1, D_loc = D, tau = 2g exactly";
    let sp = [species(1.0, 37.0, 0.7, 1.3, 5.0), species(2.5, -12.0, 0.4, 0.8, 3.0)];
    let run = || -> Result<(bool, f64, String)> {
        let mix = Mixture::new(sp, [0.0, 0.0])?;
        let sample = mix.sample()?;
        let chi = susceptibility(&sample)?;
        let n = refractive_index(&sample)?.require_real()?;
        let field = FieldConfig::for_mixture(&mix, 1.0, 7.0, None)?;
        let mut worst = chi.abs().max((n - 1.0).abs());
        let mut ok = chi == 0.0 && n == 1.0;
        for s in &sp {
            let d = local_detuning(&sample, s.detuning);
            let g = coupling_strength(s, &field)?;
            let t = tau(g, &mix)?;
            ok &= d == s.detuning && t == 2.0 * g;
            worst = worst.max((d - s.detuning).abs()).max((t - 2.0 * g).abs());
        }
        Ok((ok, worst, format!("chi = {chi}, n = {n}")))
    };
    match run() {
        Ok((ok, worst, detail)) => report(1, NAME, ok, worst, REQ, detail),
        Err(e) => failed(1, NAME, REQ, e),
    }
}

/// Samples valid mixtures with (4π/3)|S| ≤ 0.3 from a Weyl sequence.
fn sampled_mixtures(count: usize, second_present: bool) -> Vec<MediumSample> {
    let mut a = Weyl::new(0.618_033_988_749_894_9);
    let mut b = Weyl::new(0.754_877_666_246_692_7);
    let mut c = Weyl::new(0.569_840_290_998_053_3);
    let mut d = Weyl::new(0.412_454_033_640_107_6);
    (0..count)
        .map(|_| {
            let x = a.range(-0.3, 0.3);
            let share = if second_present { b.range(-1.0, 2.0) } else { 1.0 };
            let rho1 = c.range(0.01, 10.0);
            let rho2 = if second_present { d.range(0.01, 10.0) } else { 0.0 };
            let s = x / FOUR_PI_OVER_3;
            let a1 = share * s / rho1;
            let a2 = if second_present { (1.0 - share) * s / rho2 } else { d.range(-1.0, 1.0) };
            MediumSample::new([rho1, rho2], [a1, a2])
        })
        .collect()
}

pub fn maxwell_garnett_identity() -> CriterionReport {
    const NAME: &str = "Maxwell-Garnett identity";
    const REQ: &str = "|n^2 - (1 + 4 pi chi)| <= 1e-14 |n^2| over 1000 samples";
    let mut worst = 0.0f64;
    for sample in sampled_mixtures(1000, true) {
        let (n2, chi) = match (refractive_index(&sample), susceptibility(&sample)) {
            (Ok(n), Ok(c)) => (n.n_squared, c),
            (Err(e), _) | (_, Err(e)) => return failed(2, NAME, REQ, e),
        };
        worst = worst.max((n2 - (1.0 + 4.0 * std::f64::consts::PI * chi)).abs() / n2.abs());
    }
    report(2, NAME, worst <= 1e-14, worst, REQ, "1000 quasi-random mixtures, (4pi/3)|S| <= 0.3")
}

pub fn clausius_mossotti_reduction() -> CriterionReport {
    const NAME: &str = "Clausius-Mossotti reduction";
    const REQ: &str = "rho_2 = 0: n matches single-species formula to 1e-14 over 1000 samples";
    let mut worst = 0.0f64;
    for sample in sampled_mixtures(1000, false) {
        let n = match refractive_index(&sample).and_then(|n| n.require_real()) {
            Ok(n) => n,
            Err(e) => return failed(3, NAME, REQ, e),
        };
        let x = FOUR_PI_OVER_3 * sample.alphas[0] * sample.densities[0];
        let single = ((1.0 + 2.0 * x) / (1.0 - x)).sqrt();
        worst = worst.max(rel(n, single));
    }
    report(3, NAME, worst <= 1e-14, worst, REQ, "1000 quasi-random single-species samples")
}

/// Power series Σ_k (−1)^k (x/2)^{2k+n} / (k!(k+n)!).
pub fn bessel_series(n: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for i in 1..=n {
        term *= half / i as f64;
    }
    let mut sum = term;
    let mut k = 0usize;
    loop {
        k += 1;
        term *= -half * half / (k as f64 * (k + n) as f64);
        sum += term;
        if k > 5 && term.abs() <= 1e-22 * sum.abs().max(1e-300) {
            return sum;
        }
        if k > 500 {
            return sum;
        }
    }
}

pub fn bessel_completeness_with(hooks: &Hooks) -> CriterionReport {
    const NAME: &str = "Bessel completeness and values";
    const REQ: &str = "sum J_q^2 >= 1 - 1e-10 (Q = ceil(tau)+20); |J - series| <= 1e-12 for tau <= 10, |q| <= 15";
    let mut deficit = 0.0f64;
    for tau in [0.1f64, 1.0, 5.0, 10.0, 50.0] {
        let q = tau.ceil() as usize + 20;
        let j = match (hooks.bessel)(q, tau) {
            Ok(j) => j,
            Err(e) => return failed(4, NAME, REQ, e),
        };
        let total = j[0] * j[0] + 2.0 * j[1..].iter().map(|v| v * v).sum::<f64>();
        deficit = deficit.max(1.0 - total);
    }
    let mut value_err = 0.0f64;
    for tau in [0.1, 0.5, 1.0, 2.0, 3.3, 5.0, 7.5, 10.0] {
        let j = match (hooks.bessel)(15, tau) {
            Ok(j) => j,
            Err(e) => return failed(4, NAME, REQ, e),
        };
        for (n, v) in j.iter().enumerate() {
            value_err = value_err.max((v - bessel_series(n, tau)).abs());
        }
    }
    let passed = deficit <= 1e-10 && value_err <= 1e-12;
    report(
        4,
        NAME,
        passed,
        deficit.max(value_err),
        REQ,
        format!("max completeness deficit {deficit:.3e}, max value error {value_err:.3e}"),
    )
}

pub fn bessel_completeness() -> CriterionReport {
    bessel_completeness_with(&Hooks::default())
}

/// Species pair whose vacuum couplings give the requested τ values for the
/// given densities.
fn raman_nath_mixture(taus: [f64; 2], densities: [f64; 2], envelope_width: f64) -> Result<Mixture> {
    let base = [species(1.0, 40.0, 0.3, 1.0, 0.0), species(1.7, 25.0, 0.25, 1.4, 0.0)];
    let probe = Mixture::new(base, densities)?;
    let v = probe.effective_volumes()?;
    let d = 1.0 + v[0] * densities[0] + v[1] * densities[1];
    let mut sp = base;
    for j in 0..2 {
        // τ = 2g/D², g = Ω²√π w / (16 Δ v)
        let g = taus[j] * d * d / 2.0;
        let omega_sq = g * 16.0 * sp[j].detuning * sp[j].group_velocity / (envelope_width * std::f64::consts::PI.sqrt());
        sp[j].peak_rabi = omega_sq.sqrt();
    }
    Mixture::new(sp, densities)
}

/// Worst |weight_q − J_q²(τ_j)| over |q| ≤ 10 for one kinetic-off run.
pub fn raman_nath_deviation(taus: [f64; 2], steps: usize, bessel: &BesselProvider) -> Result<(f64, [f64; 2])> {
    let w_l = 4.0;
    let densities = [0.02, 0.015];
    let mix = raman_nath_mixture(taus, densities, w_l)?;
    let field = FieldConfig::for_mixture(&mix, 1.0, w_l, None)?;
    let spectrum = assemble_spectrum(&mix, &field, Some(10))?;
    let grid = Grid::commensurate(1024, 32, &field)?;
    let system = System::new(mix.species, field)?;
    let config = EvolveConfig::across_envelope(&field, 6.0, steps);
    let p = Propagator::new(system, config, grid)?;
    let out = p.evolve(MatterState::uniform(grid, densities), |_, _| ControlFlow::Continue(()))?;
    let weights = order_weights(&out.state, field.medium_wavenumber(), 10)?;
    let mut worst = 0.0f64;
    for j in 0..2 {
        let t = spectrum.components[j].tau;
        let jq = bessel(10, t)?;
        for &(q, w) in &weights[j] {
            let v = jq[q.unsigned_abs() as usize];
            worst = worst.max((w - v * v).abs());
        }
    }
    Ok((worst, [spectrum.components[0].tau, spectrum.components[1].tau]))
}

pub fn raman_nath_oracle_with(hooks: &Hooks) -> CriterionReport {
    const NAME: &str = "Raman-Nath numeric vs analytic";
    const REQ: &str = "|P_q - J_q^2(tau)| <= 1e-6 for |q| <= 10, tau in {0.5,1,2,5}, N=1024, 2000 steps";
    let mut worst = 0.0f64;
    let mut details = Vec::new();
    for pair in [[0.5, 2.0], [1.0, 5.0], [5.0, 0.5], [2.0, 1.0]] {
        match raman_nath_deviation(pair, 2000, hooks.bessel) {
            Ok((d, t)) => {
                worst = worst.max(d);
                details.push(format!("tau = ({:.4}, {:.4}): {d:.2e}", t[0], t[1]));
            }
            Err(e) => return failed(5, NAME, REQ, e),
        }
    }
    report(5, NAME, worst <= 1e-6, worst, REQ, details.join("; "))
}

pub fn raman_nath_oracle() -> CriterionReport {
    raman_nath_oracle_with(&Hooks::default())
}

fn smooth_problem() -> Result<(System, Grid, MatterState)> {
    let sp = [species(1.0, 30.0, 0.4, 1.0, 6.0), species(2.0, -20.0, 0.3, 1.5, 4.0)];
    let mix = Mixture::new(sp, [0.03, 0.04])?;
    let field = FieldConfig::for_mixture(&mix, 1.0, 2.0, None)?;
    let grid = Grid::commensurate(256, 8, &field)?;
    let state = MatterState::gaussian(grid, mix.densities, 3.0);
    Ok((System::new(sp, field)?, grid, state))
}

fn evolve_smooth(steps: usize, length: f64, mode: PotentialMode, envelope: Envelope) -> Result<MatterState> {
    let (system, grid, state) = smooth_problem()?;
    let config = EvolveConfig {
        dz: length / steps as f64,
        steps,
        z_start: -0.5 * length,
        mode,
        kinetic: Kinetic::On,
        envelope,
        observe_every: steps,
    };
    let p = Propagator::new(system, config, grid)?;
    Ok(p.evolve(state, |_, _| ControlFlow::Continue(()))?.state)
}

pub fn norm_conservation() -> CriterionReport {
    const NAME: &str = "norm conservation";
    const REQ: &str = "relative norm drift <= 1e-10 over 10^4 steps (kinetic on, full potential)";
    let run = || -> Result<f64> {
        let (system, grid, state) = smooth_problem()?;
        let config = EvolveConfig {
            dz: 2e-3,
            steps: 10_000,
            z_start: -10.0,
            mode: PotentialMode::Full,
            kinetic: Kinetic::On,
            envelope: Envelope::Gaussian,
            observe_every: 1000,
        };
        let initial = state.norms();
        let p = Propagator::new(system, config, grid)?;
        let mut worst = 0.0f64;
        p.evolve(state, |_, r| {
            for j in 0..2 {
                worst = worst.max(rel(r.norms[j], initial[j]));
            }
            ControlFlow::Continue(())
        })?;
        Ok(worst)
    };
    match run() {
        Ok(d) => report(6, NAME, d <= 1e-10, d, REQ, "drift sampled every 1000 steps"),
        Err(e) => failed(6, NAME, REQ, e),
    }
}

/// Errors of the coarse and halved runs against a dz/16 reference.
pub fn strang_errors(coarse_steps: usize) -> Result<(f64, f64)> {
    let length = 2.0;
    let reference = evolve_smooth(16 * coarse_steps, length, PotentialMode::Full, Envelope::Gaussian)?;
    let coarse = evolve_smooth(coarse_steps, length, PotentialMode::Full, Envelope::Gaussian)?;
    let fine = evolve_smooth(2 * coarse_steps, length, PotentialMode::Full, Envelope::Gaussian)?;
    Ok((coarse.distance(&reference), fine.distance(&reference)))
}

pub fn strang_convergence() -> CriterionReport {
    const NAME: &str = "Strang convergence order";
    const REQ: &str = "error(dz)/error(dz/2) in [3.5, 4.5] against a dz/16 reference";
    match strang_errors(40) {
        Ok((e1, e2)) => {
            let ratio = e1 / e2;
            report(
                7,
                NAME,
                (3.5..=4.5).contains(&ratio),
                ratio,
                REQ,
                format!("error(dz) = {e1:.3e}, error(dz/2) = {e2:.3e}"),
            )
        }
        Err(e) => failed(7, NAME, REQ, e),
    }
}

/// Pointwise potential gap and evolved-state gap between the full and
/// expanded forms, both scaled by x² with x = (4π/3)S.
pub fn full_vs_expanded_measures(x_max: f64) -> Result<(f64, f64)> {
    let mut pointwise = 0.0f64;
    let mut w = Weyl::new(0.618_033_988_749_894_9);
    for _ in 0..1000 {
        let x = w.range(-x_max, x_max);
        if x == 0.0 {
            continue;
        }
        let sample = MediumSample::new([1.0, 1.0], [0.3 * x / FOUR_PI_OVER_3, 0.7 * x / FOUR_PI_OVER_3]);
        for det in [-40.0, 15.0] {
            let r = 9.0;
            let full = nonlinear_potential(&sample, r, det, PotentialMode::Full)?;
            let exp = nonlinear_potential(&sample, r, det, PotentialMode::Expanded)?;
            let scale = HBAR * r / (4.0 * det.abs());
            pointwise = pointwise.max((full - exp).abs() / (scale * x * x));
        }
    }

    // evolved states: Raman-Nath run at the largest screening allowed
    let taus = [2.0, 1.0];
    let base = raman_nath_mixture(taus, [0.0, 0.0], 4.0)?;
    let a = base.polarizabilities()?;
    let x = -x_max;
    let densities = [0.5 * x / (FOUR_PI_OVER_3 * a[0]), 0.5 * x / (FOUR_PI_OVER_3 * a[1])];
    let mix = Mixture::new(base.species, densities)?;
    let field = FieldConfig::for_mixture(&mix, 1.0, 4.0, None)?;
    let grid = Grid::commensurate(256, 8, &field)?;
    let system = System::new(mix.species, field)?;
    let mut states = Vec::new();
    for mode in [PotentialMode::Full, PotentialMode::Expanded] {
        let mut config = EvolveConfig::across_envelope(&field, 6.0, 2000);
        config.mode = mode;
        config.kinetic = Kinetic::On;
        let p = Propagator::new(system, config, grid)?;
        states.push(p.evolve(MatterState::gaussian(grid, densities, 6.0), |_, _| ControlFlow::Continue(()))?.state);
    }
    let mut evolved = 0.0f64;
    for c in Component::BOTH {
        let j = c.index();
        let diff: f64 = states[0].amplitudes[j]
            .iter()
            .zip(&states[1].amplitudes[j])
            .map(|(p, q)| (p - q).norm_sqr())
            .sum::<f64>()
            * grid.spacing();
        let norm = states[0].norm(c);
        // peak vacuum phase accumulated across the envelope: 4|g_j|
        let phase = 4.0 * coupling_strength(&mix.species[j], &field)?.abs();
        evolved = evolved.max((diff / norm).sqrt() / (x * x * phase));
    }
    Ok((pointwise, evolved))
}

pub fn full_vs_expanded() -> CriterionReport {
    const NAME: &str = "full vs expanded potential";
    const REQ: &str = "|U_full - U_exp| <= 10 x^2 hbar|W|^2/4|D| and state gap <= 10 x^2 phase, x = (4pi/3)S, |x| <= 0.05";
    match full_vs_expanded_measures(0.05) {
        Ok((p, e)) => report(
            8,
            NAME,
            p <= 10.0 && e <= 10.0,
            p.max(e),
            REQ,
            format!("pointwise constant {p:.4}, evolved-state constant {e:.4}"),
        ),
        Err(e) => failed(8, NAME, REQ, e),
    }
}

pub fn separation_predicate() -> CriterionReport {
    const NAME: &str = "component separation predicate";
    const REQ: &str = "angles coincide iff m1 v1 = m2 v2 (equality and 1% mismatch)";
    let equal = [species(2.0, 10.0, 0.1, 3.0, 1.0), species(3.0, -8.0, 0.1, 2.0, 1.0)];
    let mut mismatch = equal;
    mismatch[1].group_velocity *= 1.01;
    let a = angles_coincide(&equal, 1.02, 1.0, 50);
    let b = angles_coincide(&mismatch, 1.02, 1.0, 50);
    let run = || -> Result<bool> {
        let mix = Mixture::new(mismatch, [0.01, 0.01])?;
        let field = FieldConfig::for_mixture(&mix, 1.0, 3.0, None)?;
        Ok(assemble_spectrum(&mix, &field, None)?.separated)
    };
    match run() {
        Ok(sep) => report(
            9,
            NAME,
            a && !b && sep,
            if a && !b { 0.0 } else { 1.0 },
            REQ,
            format!("equal momenta coincide: {a}; 1% mismatch coincide: {b}; spectrum separated: {sep}"),
        ),
        Err(e) => failed(9, NAME, REQ, e),
    }
}

pub fn constant_detuning_ray() -> CriterionReport {
    const NAME: &str = "constant local detuning ray";
    const REQ: &str = "opposite detunings: D_loc invariant to 1e-12 along rho0 + t(1/a1, -1/a2), factor-4 density change";
    let sp = [species(1.0, 30.0, 0.5, 1.0, 1.0), species(1.3, -18.0, 0.4, 1.0, 1.0)];
    let run = || -> Result<f64> {
        let mix = Mixture::new(sp, [0.01, 0.02])?;
        let a = mix.polarizabilities()?;
        let rho0 = mix.densities;
        // t from 0 to 3 a1 ρ1⁰ takes ρ1 from ρ1⁰ to 4ρ1⁰
        let t_end = 3.0 * a[0] * rho0[0];
        let mut worst = 0.0f64;
        for c in Component::BOTH {
            let det = sp[c.index()].detuning;
            let base = local_detuning(&MediumSample::new(rho0, a), det);
            for i in 0..=100 {
                let t = t_end * i as f64 / 100.0;
                let rho = [rho0[0] + t / a[0], rho0[1] - t / a[1]];
                let d = local_detuning(&MediumSample::new(rho, a), det);
                worst = worst.max((d - base).abs() / base.abs());
            }
        }
        Ok(worst)
    };
    match run() {
        Ok(w) => report(10, NAME, w <= 1e-12, w, REQ, "101 points per component"),
        Err(e) => failed(10, NAME, REQ, e),
    }
}

pub fn helmholtz_residual() -> CriterionReport {
    const NAME: &str = "Helmholtz residual";
    const REQ: &str = "residual <= 1e-3 at 64 points/period; ratio per doubling in [3.5, 4.5]";
    let run = || -> Result<(f64, f64)> {
        let field = FieldConfig::new(1.0, 3.0, 1.05, [1.0, 1.0])?;
        let residual = |ppp: usize| {
            let dy = field.intensity_period() / ppp as f64;
            field.helmholtz_residual(&field.standing_wave_samples(8 * ppp, dy), dy)
        };
        let r64 = residual(64)?;
        let r128 = residual(128)?;
        Ok((r64, r64 / r128))
    };
    match run() {
        Ok((r, ratio)) => report(
            11,
            NAME,
            r <= 1e-3 && (3.5..=4.5).contains(&ratio),
            r,
            REQ,
            format!("convergence ratio {ratio:.4}"),
        ),
        Err(e) => failed(11, NAME, REQ, e),
    }
}

pub fn run_all_with(hooks: &Hooks) -> ValidationReport {
    let criteria = vec![
        vacuum_limits(),
        maxwell_garnett_identity(),
        clausius_mossotti_reduction(),
        bessel_completeness_with(hooks),
        raman_nath_oracle_with(hooks),
        norm_conservation(),
        strang_convergence(),
        full_vs_expanded(),
        separation_predicate(),
        constant_detuning_ray(),
        helmholtz_residual(),
    ];
    let passed = criteria.iter().all(|c| c.passed);
    ValidationReport { criteria, passed }
}

pub fn run_all() -> ValidationReport {
    run_all_with(&Hooks::default())
}
