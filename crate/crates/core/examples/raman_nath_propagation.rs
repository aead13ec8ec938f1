//! Propagates a uniform mixture through the standing wave with the
//! split-step solver (kinetic term off) and compares the final order
//! populations with J_q(tau)^2.
//!
//! ```text
//! cargo run --release --example raman_nath_propagation
//! ```

use std::ops::ControlFlow;

use bec2::bessel::bessel_j;
use bec2::propagator::order_weights;
use bec2::raman_nath::assemble_spectrum;
use bec2::{EvolveConfig, FieldConfig, Grid, MatterState, Mixture, Propagator, Species, System};

fn main() -> bec2::Result<()> {
    let a = Species {
        mass: 1.0,
        detuning: 40.0,
        dipole_moment: 0.3,
        group_velocity: 1.0,
        peak_rabi: 9.0,
    };
    let b = Species {
        mass: 1.7,
        detuning: -25.0,
        dipole_moment: 0.25,
        group_velocity: 1.4,
        peak_rabi: 7.0,
    };
    let mix = Mixture::new([a, b], [0.01, 0.02])?;
    let field = FieldConfig::for_mixture(&mix, 1.0, 4.0, None)?;
    let spectrum = assemble_spectrum(&mix, &field, None)?;

    let grid = Grid::commensurate(1024, 32, &field)?;
    let config = EvolveConfig {
        observe_every: 500,
        ..EvolveConfig::across_envelope(&field, 6.0, 2000)
    };
    let p = Propagator::new(System::new(mix.species, field)?, config, grid)?;
    let out = p.evolve(MatterState::uniform(grid, mix.densities), |_, r| {
        println!("z = {:8.3}  norms = {:.12e} {:.12e}", r.z, r.norms[0], r.norms[1]);
        ControlFlow::Continue(())
    })?;

    let weights = order_weights(&out.state, field.medium_wavenumber(), 5)?;
    for j in 0..2 {
        let tau = spectrum.components[j].tau;
        println!("species {} (tau = {tau:.4})", j + 1);
        for &(q, w) in &weights[j] {
            let p = bessel_j(q, tau)?.powi(2);
            println!("  q = {q:>2}  numeric {w:.10}  analytic {p:.10}  diff {:.1e}", (w - p).abs());
        }
    }
    Ok(())
}
