//! Second-order convergence of the Strang splitting: the error against a
//! fine reference drops by about 4 each time dz is halved.
//!
//! ```text
//! cargo run --release --example strang_convergence
//! ```

use std::ops::ControlFlow;

use bec2::propagator::Kinetic;
use bec2::{EvolveConfig, FieldConfig, Grid, MatterState, Mixture, Propagator, Species, System};

fn main() -> bec2::Result<()> {
    let a = Species {
        mass: 1.0,
        detuning: 30.0,
        dipole_moment: 0.4,
        group_velocity: 1.0,
        peak_rabi: 6.0,
    };
    let b = Species {
        mass: 2.0,
        detuning: -20.0,
        dipole_moment: 0.3,
        group_velocity: 1.5,
        peak_rabi: 4.0,
    };
    let mix = Mixture::new([a, b], [0.03, 0.04])?;
    let field = FieldConfig::for_mixture(&mix, 1.0, 2.0, None)?;
    let grid = Grid::commensurate(256, 8, &field)?;
    let system = System::new(mix.species, field)?;
    let initial = MatterState::gaussian(grid, mix.densities, 3.0);

    let run = |steps: usize| -> bec2::Result<MatterState> {
        let config = EvolveConfig {
            kinetic: Kinetic::On,
            ..EvolveConfig::across_envelope(&field, 0.25, steps)
        };
        let p = Propagator::new(system, config, grid)?;
        Ok(p.evolve(initial.clone(), |_, _| ControlFlow::Continue(()))?.state)
    };

    let reference = run(2560)?;
    let mut previous: Option<f64> = None;
    for steps in [10, 20, 40, 80, 160] {
        let err = run(steps)?.distance(&reference);
        match previous {
            Some(p) => println!("{steps:>4} steps  error {err:.3e}  ratio {:.3}", p / err),
            None => println!("{steps:>4} steps  error {err:.3e}"),
        }
        previous = Some(err);
    }
    Ok(())
}
