//! Susceptibility and refractive index of a two-species mixture as the
//! density of the red-detuned species grows towards the local-field pole.
//!
//! ```text
//! cargo run --example medium_index
//! ```

use bec2::medium::{local_detuning, refractive_index, susceptibility};
use bec2::params::FOUR_PI_OVER_3;
use bec2::{Mixture, Species};

fn main() -> bec2::Result<()> {
    let blue = Species {
        mass: 1.0,
        detuning: 40.0,
        dipole_moment: 0.3,
        group_velocity: 1.0,
        peak_rabi: 6.0,
    };
    let red = Species {
        detuning: -25.0,
        mass: 1.7,
        ..blue
    };

    println!("{:>8} {:>10} {:>12} {:>12} {:>10}", "x", "S", "chi", "n", "D_loc/D");
    for i in 0..=12 {
        // x = (4π/3)S for the red species alone; the pole sits at x = 1
        let x = i as f64 / 10.0;
        let mix = Mixture::from_epsilon([blue, red], [-0.001, x / FOUR_PI_OVER_3])?;
        let sample = mix.sample()?;
        let ratio = local_detuning(&sample, red.detuning) / red.detuning;
        let (chi, n) = match (susceptibility(&sample), refractive_index(&sample)) {
            (Ok(chi), Ok(n)) => (
                format!("{chi:12.5}"),
                match n.real() {
                    Some(n) => format!("{n:12.5}"),
                    None => format!("{:>11.5}i", n.magnitude()),
                },
            ),
            _ => (format!("{:>12}", "pole"), format!("{:>12}", "pole")),
        };
        println!("{x:8.2} {:10.5} {chi} {n} {ratio:10.5}", sample.screening_sum());
    }
    Ok(())
}
