//! Background states: the exponential constant-N profile and a thermocline
//! integrated through a linear equation of state. Prints N²(z).

use hydrosem::stratification::{
    constant_n_profile, profile_from_temperature, EquationOfState, PhysicalConstants, TemperatureProfile,
};

fn main() -> hydrosem::Result<()> {
    let consts = PhysicalConstants::default();
    let exp = constant_n_profile(1025.0, 1500.0, 1e-3, 1500.0, &consts)?;
    println!("constant N = 1e-3 1/s: ρ0(0) = {:.3}, ρ0(H) = {:.3} kg/m³, N²(750) = {:.3e}", exp.rho0(0.0), exp.rho0(1500.0), exp.n2(750.0));

    let temperature = TemperatureProfile::new(
        vec![0.0, 500.0, 1000.0, 1200.0, 1350.0, 1450.0, 1500.0],
        vec![275.65, 276.15, 277.15, 279.15, 283.15, 287.15, 288.15],
    )?;
    let eos = EquationOfState::LinearCompressibility {
        rho_ref: 1028.0,
        thermal_expansion: 2e-4,
        compressibility: 4.4e-10,
        t_ref: 283.15,
    };
    let thermo = profile_from_temperature(&temperature, &eos, 1500.0, &consts)?;
    println!("thermocline (c0 = {:.1} m/s):", eos.sound_speed());
    println!("  z (m)   ρ0 (kg/m³)   N (1/s)");
    for z in (0..=15).map(|k| k as f64 * 100.0) {
        let (rho, _, n2) = thermo.at(z);
        println!("  {z:6.0}  {rho:10.4}  {:10.3e}", n2.max(0.0).sqrt());
    }
    Ok(())
}
