//! Closed-form Raman-Nath spectrum of a mixture, with the diffraction
//! angles of each component and whether the beams separate.
//!
//! ```text
//! cargo run --example diffraction_spectrum
//! ```

use bec2::raman_nath::assemble_spectrum;
use bec2::{FieldConfig, Mixture, Species};

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
    let spectrum = assemble_spectrum(&mix, &field, Some(6))?;

    println!("n = {:.6}", spectrum.refractive_index);
    for (j, c) in spectrum.components.iter().enumerate() {
        println!("species {}: g = {:.4}, tau = {:.4}", j + 1, c.coupling, c.tau);
    }
    println!("{:>3} {:>12} {:>12} {:>12} {:>12}", "q", "P_1", "P_2", "angle_1", "angle_2");
    let [c1, c2] = &spectrum.components;
    for (o1, o2) in c1.orders.iter().zip(&c2.orders) {
        println!(
            "{:>3} {:12.6} {:12.6} {:12.6} {:12.6}",
            o1.order, o1.probability, o2.probability, o1.angle, o2.angle
        );
    }
    println!("separated: {}", spectrum.separated);
    Ok(())
}
