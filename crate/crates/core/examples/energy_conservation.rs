//! Integrates both formulations under a dipole Ricker source and prints the
//! leapfrog energy before and after the source has decayed.

use hydrosem::solver::Formulation;
use hydrosem::verify::energy_drift;

fn main() -> hydrosem::Result<()> {
    for f in [Formulation::Velocity, Formulation::Potential] {
        let d = energy_drift(f, 2000)?;
        println!(
            "{:<9} dt = {:.3e} s, E = {:.6e} J/m after t = {} s, max relative drift over {} steps {:.2e}",
            f.name(),
            d.dt,
            d.reference,
            d.decay_time,
            d.steps_after,
            d.max_relative
        );
    }
    Ok(())
}
